//! JSON interchange. Rationals travel as strings (`"9/25"`, `"0.36"`, `"3"`)
//! and price indices are 1-based.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{Market, ValueGrid};
use crate::passive::Step;
use crate::rational::{format_exact, parse_rational, Rational};
use crate::region::{SurplusPoint, SurplusRegion};
use crate::scheme::{MarketScheme, Segment};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarketJson {
    pub values: Vec<String>,
    pub masses: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentJson {
    pub masses: Vec<String>,
    pub price_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeJson {
    pub aggregate: MarketJson,
    pub segments: Vec<SegmentJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerticesJson {
    pub min: [String; 2],
    pub seller: [String; 2],
    pub buyer: [String; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionJson {
    pub model: String,
    pub vertices: VerticesJson,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepJson {
    /// Support values of the extracted equal-revenue market.
    pub support: Vec<String>,
    pub gamma: String,
    pub segment: Vec<String>,
    pub price: String,
    pub price_index: usize,
    /// Residual before the extraction.
    pub residual: Vec<String>,
}

fn exact_all(xs: &[Rational]) -> Vec<String> {
    xs.iter().map(format_exact).collect()
}

fn parse_all(xs: &[String]) -> Result<Vec<Rational>> {
    xs.iter().map(|s| parse_rational(s)).collect()
}

fn parse_err(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

impl MarketJson {
    pub fn from_market(market: &Market) -> Self {
        MarketJson { values: exact_all(market.grid().values()), masses: exact_all(market.masses()) }
    }

    pub fn to_market(&self) -> Result<Market> {
        let grid = ValueGrid::new(parse_all(&self.values)?)?;
        Market::new(grid, parse_all(&self.masses)?)
    }
}

impl SchemeJson {
    pub fn from_scheme(scheme: &MarketScheme) -> Self {
        SchemeJson {
            aggregate: MarketJson::from_market(&scheme.aggregate),
            segments: scheme
                .segments
                .iter()
                .map(|s| SegmentJson { masses: exact_all(s.market.masses()), price_index: s.price_index + 1 })
                .collect(),
        }
    }

    /// Segments live on the aggregate's grid. Price indices must be in range;
    /// whether they are valid prices is left to validation.
    pub fn to_scheme(&self) -> Result<MarketScheme> {
        let aggregate = self.aggregate.to_market()?;
        let grid = aggregate.grid().clone();
        let segments = self
            .segments
            .iter()
            .map(|s| {
                let price_index = s
                    .price_index
                    .checked_sub(1)
                    .ok_or_else(|| Error::Parse("price_index is 1-based".into()))?;
                grid.check_index(price_index)?;
                Ok(Segment::new(Market::new(grid.clone(), parse_all(&s.masses)?)?, price_index))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MarketScheme::new(aggregate, segments))
    }
}

fn pair(p: &SurplusPoint) -> [String; 2] {
    [format_exact(&p.cs), format_exact(&p.ps)]
}

impl RegionJson {
    pub fn from_region(region: &SurplusRegion) -> Self {
        RegionJson {
            model: region.model.as_str().to_string(),
            vertices: VerticesJson {
                min: pair(&region.v_min),
                seller: pair(&region.v_seller),
                buyer: pair(&region.v_buyer),
            },
        }
    }
}

impl StepJson {
    pub fn from_step(step: &Step) -> Self {
        let grid = step.residual.grid();
        StepJson {
            support: step.support.iter().map(|&i| format_exact(grid.value(i))).collect(),
            gamma: format_exact(&step.gamma),
            segment: exact_all(step.segment.masses()),
            price: format_exact(grid.value(step.price_index)),
            price_index: step.price_index + 1,
            residual: exact_all(step.residual.masses()),
        }
    }
}

pub fn parse_market(text: &str) -> Result<Market> {
    serde_json::from_str::<MarketJson>(text).map_err(parse_err)?.to_market()
}

pub fn parse_scheme(text: &str) -> Result<MarketScheme> {
    serde_json::from_str::<SchemeJson>(text).map_err(parse_err)?.to_scheme()
}

pub fn market_json(market: &Market) -> String {
    pretty(&MarketJson::from_market(market))
}

pub fn scheme_json(scheme: &MarketScheme) -> String {
    pretty(&SchemeJson::from_scheme(scheme))
}

pub fn region_json(region: &SurplusRegion) -> String {
    pretty(&RegionJson::from_region(region))
}

pub fn trace_json(steps: &[Step]) -> String {
    pretty(&steps.iter().map(StepJson::from_step).collect::<Vec<_>>())
}

pub fn pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes")
}
