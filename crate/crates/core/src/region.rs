//! Achievable (consumer surplus, producer surplus) pairs.
//!
//! In both models the region is a right isosceles triangle: a vertical left
//! edge at the minimum consumer surplus, a horizontal bottom edge at the
//! minimum producer surplus, and a hypotenuse on the maximum-welfare line.
//! Any point inside is reached by mixing the three extreme schemes.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::active::{active_benchmarks, cs_max_active, modified_market, ps_max_active, sw_min_active};
use crate::error::{Error, Result};
use crate::market::{Market, RegulatedSet};
use crate::passive::{compute_i0_eta0, cs_max_scheme, cs_p_min_from_spec, ps_max_scheme, sw_max, sw_min_scheme};
use crate::rational::{format_exact, Rational};
use crate::scheme::{standardize, MarketScheme, Model, Segment};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurplusPoint {
    pub cs: Rational,
    pub ps: Rational,
}

impl SurplusPoint {
    pub fn new(cs: Rational, ps: Rational) -> Self {
        SurplusPoint { cs, ps }
    }
}

impl fmt::Display for SurplusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", format_exact(&self.cs), format_exact(&self.ps))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurplusRegion {
    pub model: Model,
    /// Bottom-left corner: both surpluses minimal.
    pub v_min: SurplusPoint,
    /// Top-left corner: the seller's best outcome.
    pub v_seller: SurplusPoint,
    /// Bottom-right corner: the buyers' best outcome.
    pub v_buyer: SurplusPoint,
}

impl SurplusRegion {
    fn from_bounds(model: Model, cs_min: Rational, ps_min: Rational, welfare: Rational) -> Self {
        SurplusRegion {
            model,
            v_min: SurplusPoint::new(cs_min.clone(), ps_min.clone()),
            v_seller: SurplusPoint::new(cs_min.clone(), &welfare - &cs_min),
            v_buyer: SurplusPoint::new(&welfare - &ps_min, ps_min),
        }
    }

    /// Length of either leg; zero when the triangle collapses to a point.
    pub fn leg(&self) -> Rational {
        &self.v_buyer.cs - &self.v_min.cs
    }

    pub fn max_welfare(&self) -> Rational {
        &self.v_seller.cs + &self.v_seller.ps
    }

    pub fn contains(&self, point: &SurplusPoint) -> bool {
        point.cs >= self.v_min.cs
            && point.ps >= self.v_min.ps
            && &point.cs + &point.ps <= self.max_welfare()
    }

    pub fn vertices(&self) -> [&SurplusPoint; 3] {
        [&self.v_min, &self.v_seller, &self.v_buyer]
    }
}

pub fn passive_region(aggregate: &Market, window: RegulatedSet) -> Result<SurplusRegion> {
    let spec = compute_i0_eta0(aggregate, window)?;
    Ok(SurplusRegion::from_bounds(
        Model::Passive,
        cs_p_min_from_spec(aggregate, &spec),
        aggregate.uniform_revenue(),
        sw_max(aggregate, window),
    ))
}

pub fn active_region(aggregate: &Market, window: RegulatedSet) -> Result<SurplusRegion> {
    modified_market(aggregate, window)?;
    let b = active_benchmarks(aggregate, window)?;
    Ok(SurplusRegion::from_bounds(Model::Active, b.cs_a_min, b.r_uniform_f, b.sw_max))
}

pub fn region(aggregate: &Market, window: RegulatedSet, model: Model) -> Result<SurplusRegion> {
    match model {
        Model::Passive => passive_region(aggregate, window),
        Model::Active => active_region(aggregate, window),
    }
}

/// The three extreme schemes of a model, in vertex order (min, seller,
/// buyer).
pub fn extreme_schemes(
    aggregate: &Market,
    window: RegulatedSet,
    model: Model,
) -> Result<[MarketScheme; 3]> {
    Ok(match model {
        Model::Passive => [
            sw_min_scheme(aggregate, window)?.scheme,
            ps_max_scheme(aggregate, window)?.scheme,
            cs_max_scheme(aggregate, window)?.scheme,
        ],
        Model::Active => [
            sw_min_active(aggregate, window)?,
            ps_max_active(aggregate, window)?,
            cs_max_active(aggregate, window)?,
        ],
    })
}

/// Convex weights on (min, seller, buyer) reproducing `point`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Weights {
    pub min: Rational,
    pub seller: Rational,
    pub buyer: Rational,
}

impl Weights {
    fn as_array(&self) -> [&Rational; 3] {
        [&self.min, &self.seller, &self.buyer]
    }
}

/// Closed-form barycentric coordinates. Along the left edge only producer
/// surplus moves and along the bottom edge only consumer surplus moves, so
/// each outer weight is an offset divided by the leg length.
pub fn barycentric(region: &SurplusRegion, point: &SurplusPoint) -> Result<Weights> {
    if !region.contains(point) {
        return Err(Error::PointOutsideRegion);
    }
    let leg = region.leg();
    if leg.is_zero() {
        return Ok(Weights { min: Rational::one(), seller: Rational::zero(), buyer: Rational::zero() });
    }
    let seller = (&point.ps - &region.v_min.ps) / &leg;
    let buyer = (&point.cs - &region.v_min.cs) / &leg;
    let min = Rational::one() - &seller - &buyer;
    Ok(Weights { min, seller, buyer })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointScheme {
    pub region: SurplusRegion,
    pub weights: Weights,
    pub scheme: MarketScheme,
}

/// Mixes the extreme schemes so the result's surplus is exactly `target`.
/// Parents with zero weight are dropped; with `merge` the mix is folded
/// into standard form.
pub fn scheme_for_point(
    aggregate: &Market,
    window: RegulatedSet,
    target: &SurplusPoint,
    model: Model,
    merge: bool,
) -> Result<PointScheme> {
    let region = region(aggregate, window, model)?;
    let weights = barycentric(&region, target)?;
    let parents = extreme_schemes(aggregate, window, model)?;
    let mut segments = Vec::new();
    for (parent, weight) in parents.iter().zip(weights.as_array()) {
        if !weight.is_positive() {
            continue;
        }
        segments.extend(
            parent
                .segments
                .iter()
                .map(|s| Segment::new(s.market.scaled(weight), s.price_index)),
        );
    }
    let mut scheme = MarketScheme::new(aggregate.clone(), segments);
    if merge {
        scheme = standardize(&scheme, window)?;
    }
    Ok(PointScheme { region, weights, scheme })
}
