//! Segmentations for the passive intermediary.
//!
//! All constructions share one loop: while the residual market still has
//! buyers inside the regulated window, carve off the largest equal-revenue
//! market on a rule-specific support, give it a rule-specific price, and
//! subtract it. The rules differ only in which support they use and which
//! extra caps they place on the extracted weight:
//!
//! * [`ps_max_scheme`] keeps only the top in-window value of the residual
//!   support, pricing segments from the highest window value down.
//! * [`cs_max_scheme`] does the same until an in-window price becomes
//!   optimal for the residual, capping each extraction so the original
//!   optimal prices stay optimal; afterwards it extracts on the full support.
//! * [`sw_min_scheme`] first shrinks the window to its minimal feasible tail
//!   and reserves just enough mass at the tail's lowest value.
//!
//! Each returns a [`Construction`] with the standardized scheme, the
//! leftover mass and a per-step trace.

use num_traits::Signed;

use crate::equal_revenue::{equal_revenue_unit, extract_scaled, max_dominated_er, Extraction};
use crate::error::{Error, Result};
use crate::lp::oracle_eta0;
use crate::market::{IndexSet, Market, RegulatedSet};
use crate::rational::Rational;
use crate::scheme::{standardize, MarketScheme, Segment};

/// One extraction of the construction loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    /// Residual market before this extraction.
    pub residual: Market,
    /// Support of the equal-revenue market that was extracted.
    pub support: IndexSet,
    pub gamma: Rational,
    pub segment: Market,
    pub price_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Construction {
    pub scheme: MarketScheme,
    /// Mass left when the loop stopped; zero exactly when the window is
    /// feasible (for the passive constructions).
    pub remainder: Market,
    pub steps: Vec<Step>,
}

/// Minimal tail `{v_i0, ..., v_r}` of the regulated set that still supports
/// a valid scheme, selling at most `eta0` of the `v_i0` buyers at `v_i0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubFeasibleSpec {
    pub regulated: RegulatedSet,
    pub i0: usize,
    pub eta0: Rational,
}

impl SubFeasibleSpec {
    pub fn reduced(&self) -> RegulatedSet {
        self.regulated.tail_from(self.i0).expect("i0 lies inside the regulated set")
    }
}

/// Loop guard used when the caller does not supply one.
pub fn default_iteration_limit(grid_len: usize) -> usize {
    2 * grid_len + 2
}

/// `(support \ F) ∪ {max(support ∩ F)}`.
pub fn b_set(market: &Market, window: RegulatedSet) -> Result<IndexSet> {
    let support = market.support();
    let top = support
        .iter()
        .rev()
        .find(|&&i| window.contains(i))
        .copied()
        .ok_or(Error::NoSupportInF)?;
    let mut out: IndexSet = support.into_iter().filter(|&i| !window.contains(i)).collect();
    out.insert(top);
    Ok(out)
}

fn has_support_in(market: &Market, window: RegulatedSet) -> bool {
    window.indices().any(|i| market.mass_at(i).is_positive())
}

/// What one iteration decided to extract.
struct Pick {
    support: IndexSet,
    extraction: Extraction,
    price_index: usize,
}

/// Runs the shared extraction loop until `keep_going` fails on the
/// residual.
fn extract_loop(
    aggregate: &Market,
    limit: usize,
    keep_going: impl Fn(&Market) -> bool,
    mut rule: impl FnMut(&Market) -> Result<Pick>,
) -> Result<(Vec<Segment>, Market, Vec<Step>)> {
    let mut residual = aggregate.clone();
    let mut segments = Vec::new();
    let mut steps = Vec::new();
    while keep_going(&residual) {
        if steps.len() >= limit {
            return Err(Error::NonTermination { iterations: limit });
        }
        let pick = rule(&residual)?;
        let next = residual.checked_sub(&pick.extraction.market)?;
        segments.push(Segment::new(pick.extraction.market.clone(), pick.price_index));
        steps.push(Step {
            residual: std::mem::replace(&mut residual, next),
            support: pick.support,
            gamma: pick.extraction.gamma,
            segment: pick.extraction.market,
            price_index: pick.price_index,
        });
    }
    Ok((segments, residual, steps))
}

fn require_mass(market: &Market) -> Result<()> {
    if market.is_zero() {
        Err(Error::ZeroMarket)
    } else {
        Ok(())
    }
}

/// Unregulated consumer-optimal segmentation: repeatedly extract the
/// largest equal-revenue market on the residual support, priced at its
/// lowest value.
pub fn bbm_segment(aggregate: &Market) -> Result<Construction> {
    bbm_segment_with_limit(aggregate, default_iteration_limit(aggregate.len()))
}

pub fn bbm_segment_with_limit(aggregate: &Market, limit: usize) -> Result<Construction> {
    require_mass(aggregate)?;
    let (segments, remainder, steps) =
        extract_loop(aggregate, limit, |r| !r.is_zero(), |residual| {
            let support = residual.support();
            let extraction = max_dominated_er(&support, residual, &[])?;
            let price_index = *support.first().expect("non-zero residual");
            Ok(Pick { support, extraction, price_index })
        })?;
    Ok(Construction { scheme: MarketScheme::new(aggregate.clone(), segments), remainder, steps })
}

/// Producer-surplus-maximizing construction. Always runs to completion;
/// a non-zero remainder means the window is infeasible.
pub fn ps_max_scheme(aggregate: &Market, window: RegulatedSet) -> Result<Construction> {
    ps_max_scheme_with_limit(aggregate, window, default_iteration_limit(aggregate.len()))
}

pub fn ps_max_scheme_with_limit(
    aggregate: &Market,
    window: RegulatedSet,
    limit: usize,
) -> Result<Construction> {
    require_mass(aggregate)?;
    aggregate.grid().check_index(window.hi())?;
    let (segments, remainder, steps) =
        extract_loop(aggregate, limit, |r| has_support_in(r, window), |residual| {
            let support = b_set(residual, window)?;
            let extraction = max_dominated_er(&support, residual, &[])?;
            let price_index = lowest_in(&support, window);
            Ok(Pick { support, extraction, price_index })
        })?;
    finish(aggregate, window, segments, remainder, steps)
}

fn lowest_in(support: &IndexSet, window: RegulatedSet) -> usize {
    *support.iter().find(|&&i| window.contains(i)).expect("support meets the window")
}

fn finish(
    aggregate: &Market,
    window: RegulatedSet,
    segments: Vec<Segment>,
    remainder: Market,
    steps: Vec<Step>,
) -> Result<Construction> {
    let covered = aggregate.checked_sub(&remainder)?;
    let raw = MarketScheme::new(covered, segments);
    let scheme = standardize(&raw, window)?;
    Ok(Construction { scheme, remainder, steps })
}

/// Whether some F-valid scheme exists: exactly when the PS-maximizing
/// construction leaves nothing behind.
pub fn is_feasible(aggregate: &Market, window: RegulatedSet) -> Result<bool> {
    Ok(ps_max_scheme(aggregate, window)?.remainder.is_zero())
}

fn require_feasible(aggregate: &Market, window: RegulatedSet) -> Result<()> {
    if is_feasible(aggregate, window)? {
        Ok(())
    } else {
        Err(Error::InfeasibleSet)
    }
}

/// Consumer-surplus-maximizing construction: producer surplus stays at the
/// unregulated uniform-price revenue.
pub fn cs_max_scheme(aggregate: &Market, window: RegulatedSet) -> Result<Construction> {
    cs_max_scheme_with_limit(aggregate, window, default_iteration_limit(aggregate.len()))
}

pub fn cs_max_scheme_with_limit(
    aggregate: &Market,
    window: RegulatedSet,
    limit: usize,
) -> Result<Construction> {
    require_feasible(aggregate, window)?;
    let original_opt = aggregate.opt_prices()?;
    let grid = aggregate.grid().clone();
    let (segments, remainder, steps) =
        extract_loop(aggregate, limit, |r| has_support_in(r, window), |residual| {
            let opt = residual.opt_prices()?;
            if !opt.is_superset(&original_opt) {
                return Err(Error::Invariant(
                    "residual lost an originally optimal price".into(),
                ));
            }
            let pick = if opt.iter().any(|&i| window.contains(i)) {
                let support = residual.support();
                let extraction = max_dominated_er(&support, residual, &[])?;
                Pick { price_index: lowest_in(&support, window), support, extraction }
            } else {
                let support = b_set(residual, window)?;
                let unit = equal_revenue_unit(&grid, &support)?;
                let bound = preservation_bound(residual, &unit, &support, &opt);
                let extraction = extract_scaled(&unit, residual, &bound)?;
                if !extraction.gamma.is_positive() {
                    return Err(Error::Invariant(
                        "optimal-price preservation allowed no extraction".into(),
                    ));
                }
                Pick { price_index: lowest_in(&support, window), support, extraction }
            };
            Ok(pick)
        })?;
    if !remainder.is_zero() && !remainder.opt_prices()?.is_superset(&original_opt) {
        return Err(Error::Invariant("residual lost an originally optimal price".into()));
    }
    finish(aggregate, window, segments, remainder, steps)
}

/// Largest weights keeping every currently optimal price optimal after
/// subtracting `gamma * unit`.
///
/// Each optimal price `v_i` lies in `support` (it is a support value
/// outside the window). For every other support value `v_j` outside
/// `support`, `R(v_j) - gamma R_u(v_j) <= R(v_i) - gamma R_u(v_i)` gives
/// `gamma <= (R(v_i) - R(v_j)) / (R_u(v_i) - R_u(v_j))`, where the
/// denominator is positive because `unit` earns its maximum exactly on
/// `support`.
fn preservation_bound(
    residual: &Market,
    unit: &Market,
    support: &IndexSet,
    optimal: &IndexSet,
) -> Vec<Rational> {
    let revenue = residual.revenue_curve();
    let unit_revenue = unit.revenue_curve();
    let mut bounds = Vec::new();
    for &i in optimal {
        for j in residual.support().into_iter().filter(|j| !support.contains(j)) {
            let slack = &revenue[i] - &revenue[j];
            let rate = &unit_revenue[i] - &unit_revenue[j];
            if rate.is_positive() {
                bounds.push(slack / rate);
            }
        }
    }
    bounds
}

/// Finds the minimal feasible tail of the window and the least mass of its
/// lowest value that must be sold at that value.
pub fn compute_i0_eta0(aggregate: &Market, window: RegulatedSet) -> Result<SubFeasibleSpec> {
    require_feasible(aggregate, window)?;
    let mut i0 = window.lo();
    for i in window.indices().rev() {
        if is_feasible(aggregate, window.tail_from(i)?)? {
            i0 = i;
            break;
        }
    }
    let eta0 = oracle_eta0(aggregate, window, i0)?;
    Ok(SubFeasibleSpec { regulated: window, i0, eta0 })
}

/// Welfare-minimizing construction: consumer and producer surplus both at
/// their minima.
pub fn sw_min_scheme(aggregate: &Market, window: RegulatedSet) -> Result<Construction> {
    sw_min_scheme_with_limit(aggregate, window, default_iteration_limit(aggregate.len()))
}

pub fn sw_min_scheme_with_limit(
    aggregate: &Market,
    window: RegulatedSet,
    limit: usize,
) -> Result<Construction> {
    let spec = compute_i0_eta0(aggregate, window)?;
    sw_min_from_spec(aggregate, &spec, limit)
}

/// Welfare-minimizing construction for an already computed `(i0, eta0)`.
pub fn sw_min_from_spec(
    aggregate: &Market,
    spec: &SubFeasibleSpec,
    limit: usize,
) -> Result<Construction> {
    let window = spec.regulated;
    let reduced = spec.reduced();
    let (i0, eta0) = (spec.i0, &spec.eta0);
    let grid = aggregate.grid().clone();
    let (segments, remainder, steps) =
        extract_loop(aggregate, limit, |r| has_support_in(r, reduced), |residual| {
            let mut support = b_set(residual, reduced)?;
            let top = *support.iter().rev().find(|&&i| reduced.contains(i)).expect("b_set");
            if top > i0 {
                if residual.mass_at(i0) > eta0 {
                    support.insert(i0);
                }
                let unit = equal_revenue_unit(&grid, &support)?;
                let mut bounds = Vec::new();
                if unit.mass_at(i0).is_positive() {
                    bounds.push((residual.mass_at(i0) - eta0) / unit.mass_at(i0));
                }
                let extraction = extract_scaled(&unit, residual, &bounds)?;
                let price_index =
                    *support.iter().find(|&&i| i > i0 && reduced.contains(i)).expect("top > i0");
                Ok(Pick { support, extraction, price_index })
            } else {
                let extraction = max_dominated_er(&support, residual, &[])?;
                Ok(Pick { support, extraction, price_index: i0 })
            }
        })?;
    finish(aggregate, window, segments, remainder, steps)
}

/// Minimum consumer surplus over all F-valid schemes:
/// `eta0 * v_i0 + sum_{j > i0} x_j v_j - R_uniform`.
pub fn cs_p_min(aggregate: &Market, window: RegulatedSet) -> Result<Rational> {
    let spec = compute_i0_eta0(aggregate, window)?;
    Ok(cs_p_min_from_spec(aggregate, &spec))
}

pub fn cs_p_min_from_spec(aggregate: &Market, spec: &SubFeasibleSpec) -> Rational {
    &spec.eta0 * aggregate.value(spec.i0) + aggregate.welfare_from(spec.i0 + 1)
        - aggregate.uniform_revenue()
}

/// Maximum welfare reachable with prices in the window: every buyer valued
/// at least `v_lo` purchases.
pub fn sw_max(aggregate: &Market, window: RegulatedSet) -> Rational {
    aggregate.welfare_from(window.lo())
}

/// Segments carrying positive mass (standard form keeps empty slots).
pub fn nonzero_segments(scheme: &MarketScheme) -> Vec<&Segment> {
    scheme.segments.iter().filter(|s| !s.market.is_zero()).collect()
}
