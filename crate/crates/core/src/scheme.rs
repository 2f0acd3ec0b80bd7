//! Market schemes: segments with instructed prices, their surplus, and the
//! validity checks for both intermediary models.

use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::market::{IndexSet, Market, RegulatedSet};
use crate::rational::{format_exact, Rational};

/// Which regulation model a scheme is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    /// The seller may post any grid price; instructed prices must be
    /// globally revenue-maximizing and lie in the regulated set.
    Passive,
    /// The seller is forced into the regulated set; instructed prices only
    /// need to be revenue-maximizing within it.
    Active,
}

impl Model {
    pub fn as_str(&self) -> &'static str {
        match self {
            Model::Passive => "passive",
            Model::Active => "active",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "passive" => Ok(Model::Passive),
            "active" => Ok(Model::Active),
            other => Err(Error::Parse(format!("unknown model {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub market: Market,
    pub price_index: usize,
}

impl Segment {
    pub fn new(market: Market, price_index: usize) -> Self {
        Self { market, price_index }
    }

    pub fn price(&self) -> &Rational {
        self.market.value(self.price_index)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Surplus {
    pub cs: Rational,
    pub ps: Rational,
    pub sw: Rational,
}

impl Surplus {
    fn add(&mut self, other: &Surplus) {
        self.cs += &other.cs;
        self.ps += &other.ps;
        self.sw += &other.sw;
    }
}

/// Consumer surplus, producer surplus and welfare of one priced segment.
pub fn segment_surplus(segment: &Segment) -> Result<Surplus> {
    let market = &segment.market;
    market.grid().check_index(segment.price_index)?;
    let price = segment.price();
    let mut cs = Rational::zero();
    let mut ps = Rational::zero();
    for i in segment.price_index..market.len() {
        let mass = market.mass_at(i);
        cs += (market.value(i) - price) * mass;
        ps += price * mass;
    }
    let sw = &cs + &ps;
    Ok(Surplus { cs, ps, sw })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarketScheme {
    pub aggregate: Market,
    pub segments: Vec<Segment>,
}

impl MarketScheme {
    pub fn new(aggregate: Market, segments: Vec<Segment>) -> Self {
        Self { aggregate, segments }
    }

    /// Coordinate-wise sum of all segment markets.
    pub fn segment_total(&self) -> Result<Market> {
        let mut total = Market::zero(self.aggregate.grid().clone());
        for seg in &self.segments {
            total = total.checked_add(&seg.market)?;
        }
        Ok(total)
    }

    /// Checks that the segments sum exactly to the aggregate.
    pub fn check_segmentation(&self) -> Result<()> {
        let total = self.segment_total()?;
        match total.masses().iter().zip(self.aggregate.masses()).position(|(a, b)| a != b) {
            None => Ok(()),
            Some(index) => Err(Error::SegmentationMismatch { index }),
        }
    }

    pub fn prices(&self) -> Vec<usize> {
        self.segments.iter().map(|s| s.price_index).collect()
    }
}

impl fmt::Display for MarketScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (q, seg) in self.segments.iter().enumerate() {
            writeln!(f, "  [{}] {} @ {}", q + 1, seg.market, format_exact(seg.price()))?;
        }
        Ok(())
    }
}

/// Totals over all segments. Fails if the segments do not partition the
/// aggregate.
pub fn scheme_surplus(scheme: &MarketScheme) -> Result<Surplus> {
    scheme.check_segmentation()?;
    let mut total = Surplus::default();
    for seg in &scheme.segments {
        total.add(&segment_surplus(seg)?);
    }
    Ok(total)
}

/// Merges segments by price into exactly one (possibly zero) segment per
/// price in `window`, in increasing price order.
pub fn standardize(scheme: &MarketScheme, window: RegulatedSet) -> Result<MarketScheme> {
    let grid = scheme.aggregate.grid();
    let mut merged: Vec<Market> = window.indices().map(|_| Market::zero(grid.clone())).collect();
    for seg in &scheme.segments {
        if !window.contains(seg.price_index) {
            return Err(Error::PriceOutsideF { price_index: seg.price_index });
        }
        let slot = seg.price_index - window.lo();
        merged[slot] = merged[slot].checked_add(&seg.market)?;
    }
    let segments = merged
        .into_iter()
        .zip(window.indices())
        .map(|(market, price)| Segment::new(market, price))
        .collect();
    Ok(MarketScheme::new(scheme.aggregate.clone(), segments))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Segments do not sum to the aggregate at this grid index.
    SumMismatch { index: usize },
    /// A segment lives on a different grid than the aggregate.
    GridMismatch { segment: usize },
    PriceOutOfGrid { segment: usize, price_index: usize },
    PriceOutsideF { segment: usize, price_index: usize },
    /// The instructed price is not revenue-maximizing for the segment
    /// (globally for passive, within the window for active).
    PriceNotOptimal { segment: usize, price_index: usize, optimal: IndexSet },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SumMismatch { index } => {
                write!(f, "segments do not sum to the aggregate at index #{}", index + 1)
            }
            Violation::GridMismatch { segment } => {
                write!(f, "segment {} uses a different value grid", segment + 1)
            }
            Violation::PriceOutOfGrid { segment, price_index } => {
                write!(f, "segment {}: price index #{} is not on the grid", segment + 1, price_index + 1)
            }
            Violation::PriceOutsideF { segment, price_index } => {
                write!(f, "segment {}: price #{} lies outside F", segment + 1, price_index + 1)
            }
            Violation::PriceNotOptimal { segment, price_index, optimal } => {
                let opt: Vec<String> = optimal.iter().map(|i| format!("#{}", i + 1)).collect();
                write!(
                    f,
                    "segment {}: price #{} is not revenue-maximizing (optimal: {})",
                    segment + 1,
                    price_index + 1,
                    opt.join(", ")
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// Segments (0-based) named by any price violation.
    pub fn offending_segments(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .violations
            .iter()
            .filter_map(|v| match v {
                Violation::PriceOutsideF { segment, .. }
                | Violation::PriceNotOptimal { segment, .. }
                | Violation::PriceOutOfGrid { segment, .. }
                | Violation::GridMismatch { segment } => Some(*segment),
                Violation::SumMismatch { .. } => None,
            })
            .collect();
        out.dedup();
        out
    }
}

/// Lists every way `scheme` fails to be F-valid (passive) or F-instructed
/// (active). Zero-mass segments are exempt from the optimality check.
pub fn validate_scheme(scheme: &MarketScheme, window: RegulatedSet, model: Model) -> ValidationReport {
    let mut violations = Vec::new();
    let aggregate = &scheme.aggregate;
    let mut grids_ok = true;
    for (q, seg) in scheme.segments.iter().enumerate() {
        if !seg.market.same_grid(aggregate) {
            violations.push(Violation::GridMismatch { segment: q });
            grids_ok = false;
        }
    }
    if grids_ok {
        if let Err(Error::SegmentationMismatch { index }) = scheme.check_segmentation() {
            violations.push(Violation::SumMismatch { index });
        }
    }
    for (q, seg) in scheme.segments.iter().enumerate() {
        let price_index = seg.price_index;
        if price_index >= seg.market.len() {
            violations.push(Violation::PriceOutOfGrid { segment: q, price_index });
            continue;
        }
        if !window.contains(price_index) {
            violations.push(Violation::PriceOutsideF { segment: q, price_index });
        }
        if seg.market.is_zero() || window.hi() >= seg.market.len() {
            continue;
        }
        let optimal = match model {
            Model::Passive => seg.market.opt_prices(),
            Model::Active => seg.market.opt_prices_restricted(window),
        }
        .expect("non-zero market has optimal prices");
        if !optimal.contains(&price_index) {
            violations.push(Violation::PriceNotOptimal { segment: q, price_index, optimal });
        }
    }
    ValidationReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::ValueGrid;
    use crate::rational::{int, parse_rational, ratio};
    use std::sync::Arc;

    fn grid() -> Arc<ValueGrid> {
        ValueGrid::new(vec![int(1), int(2), int(3), int(6)]).unwrap()
    }

    fn mk(masses: [&str; 4]) -> Market {
        Market::new(grid(), masses.map(|s| parse_rational(s).unwrap()).to_vec()).unwrap()
    }

    fn m1() -> Market {
        mk(["0.36", "0.20", "0.18", "0.26"])
    }

    fn seller_scheme_f23() -> MarketScheme {
        MarketScheme::new(
            m1(),
            vec![
                Segment::new(mk(["0.36", "0", "0.09", "0.09"]), 2),
                Segment::new(mk(["0", "0", "0.09", "0.09"]), 2),
                Segment::new(mk(["0", "0.16", "0", "0.08"]), 1),
                Segment::new(mk(["0", "0.04", "0", "0"]), 1),
            ],
        )
    }

    #[test]
    fn segment_surplus_examples() {
        let s = segment_surplus(&Segment::new(mk(["0.36", "0.12", "0.12", "0.12"]), 0)).unwrap();
        assert_eq!((s.cs.clone(), s.ps.clone()), (ratio(96, 100), ratio(72, 100)));
        assert_eq!(s.sw, &s.cs + &s.ps);
        let s = segment_surplus(&Segment::new(mk(["0", "0", "0", "0.07"]), 3)).unwrap();
        assert_eq!((s.cs, s.ps), (int(0), ratio(42, 100)));
        let s = segment_surplus(&Segment::new(mk(["0.3", "0.2", "0", "0"]), 2)).unwrap();
        assert_eq!((s.cs, s.ps), (int(0), int(0)));
    }

    #[test]
    fn scheme_surplus_rejects_partial_segmentation() {
        let mut scheme = seller_scheme_f23();
        assert_eq!(scheme_surplus(&scheme).unwrap().cs, ratio(86, 100));
        scheme.segments.pop();
        assert_eq!(scheme_surplus(&scheme), Err(Error::SegmentationMismatch { index: 1 }));
    }

    #[test]
    fn standardize_merges_by_price() {
        let f = RegulatedSet::new(1, 2, 4).unwrap();
        let std = standardize(&seller_scheme_f23(), f).unwrap();
        assert_eq!(
            std.segments,
            vec![
                Segment::new(mk(["0", "0.20", "0", "0.08"]), 1),
                Segment::new(mk(["0.36", "0", "0.18", "0.18"]), 2),
            ]
        );
        assert_eq!(standardize(&std, f).unwrap(), std);
        assert_eq!(scheme_surplus(&std).unwrap(), scheme_surplus(&seller_scheme_f23()).unwrap());
        let outside = RegulatedSet::new(2, 3, 4).unwrap();
        assert_eq!(standardize(&seller_scheme_f23(), outside), Err(Error::PriceOutsideF { price_index: 1 }));
    }

    #[test]
    fn standardize_keeps_zero_segments() {
        let f = RegulatedSet::new(1, 3, 4).unwrap();
        let scheme = MarketScheme::new(
            mk(["0", "0.2", "0", "0"]),
            vec![
                Segment::new(mk(["0", "0.2", "0", "0"]), 1),
                Segment::new(mk(["0", "0", "0", "0"]), 2),
                Segment::new(mk(["0", "0", "0", "0"]), 3),
            ],
        );
        assert_eq!(standardize(&scheme, f).unwrap(), scheme);
    }

    #[test]
    fn validation_reports_each_violation() {
        let f = RegulatedSet::new(1, 2, 4).unwrap();
        assert!(validate_scheme(&seller_scheme_f23(), f, Model::Passive).is_valid());

        let mut broken = seller_scheme_f23();
        broken.segments[3].price_index = 3;
        let report = validate_scheme(&broken, f, Model::Passive);
        assert_eq!(
            report.violations,
            vec![
                Violation::PriceOutsideF { segment: 3, price_index: 3 },
                Violation::PriceNotOptimal {
                    segment: 3,
                    price_index: 3,
                    optimal: IndexSet::from([1])
                },
            ]
        );

        broken.segments.pop();
        let report = validate_scheme(&broken, f, Model::Passive);
        assert_eq!(report.violations, vec![Violation::SumMismatch { index: 1 }]);
    }

    #[test]
    fn zero_segments_are_exempt() {
        let f = RegulatedSet::new(1, 2, 4).unwrap();
        let mut scheme = seller_scheme_f23();
        scheme.segments.push(Segment::new(Market::zero(grid()), 2));
        assert!(validate_scheme(&scheme, f, Model::Passive).is_valid());
    }
}
