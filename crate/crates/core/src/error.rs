use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("grid index {index} out of range for a grid of {len} values")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid value grid: {0}")]
    InvalidGrid(String),

    #[error("invalid market: {0}")]
    InvalidMarket(String),

    #[error("markets live on different value grids")]
    GridMismatch,

    #[error("operation needs a market with positive mass")]
    ZeroMarket,

    #[error("equal-revenue support set is empty")]
    EmptySupport,

    #[error("upper bound on the extraction weight is negative: {0}")]
    NegativeBound(String),

    #[error("instructed price index {price_index} lies outside the regulated set")]
    PriceOutsideF { price_index: usize },

    #[error("segments do not sum to the aggregate market at grid index {index}")]
    SegmentationMismatch { index: usize },

    #[error("market has no support inside the regulated set")]
    NoSupportInF,

    #[error("regulated set is not feasible for this market")]
    InfeasibleSet,

    #[error("construction did not terminate within {iterations} iterations")]
    NonTermination { iterations: usize },

    #[error("market has no mass at or above the regulated floor")]
    EmptyAboveFloor,

    #[error("point lies outside the achievable surplus region")]
    PointOutsideRegion,

    #[error("sufficient condition needs a unique optimal price outside the regulated set")]
    HypothesisViolated,

    #[error("bad range: {0}")]
    BadRange(String),

    #[error("empty price window")]
    EmptyWindow,

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("parse error: {0}")]
    Parse(String),
}
