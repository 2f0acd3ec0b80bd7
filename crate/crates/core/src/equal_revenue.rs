//! Equal-revenue markets, the building block of every segmentation.

use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::market::{IndexSet, Market, ValueGrid};
use crate::rational::{format_exact, Rational};

/// The unit-mass market supported on `support` whose revenue is the same
/// at every support price.
///
/// The top support value carries `min/max`; every other support value `v`
/// carries `min * (1/v - 1/next)` where `next` is the following support
/// value.
pub fn equal_revenue_unit(grid: &Arc<ValueGrid>, support: &IndexSet) -> Result<Market> {
    let (Some(&first), Some(&last)) = (support.first(), support.last()) else {
        return Err(Error::EmptySupport);
    };
    grid.check_index(last)?;
    let floor = grid.value(first);
    let mut masses = vec![Rational::zero(); grid.len()];
    let indices: Vec<usize> = support.iter().copied().collect();
    for pair in indices.windows(2) {
        let (here, next) = (grid.value(pair[0]), grid.value(pair[1]));
        masses[pair[0]] = floor * (here.recip() - next.recip());
    }
    masses[last] = floor / grid.value(last);
    Market::new(grid.clone(), masses)
}

/// Result of extracting the largest equal-revenue market under a cap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    pub gamma: Rational,
    pub market: Market,
}

/// Largest `gamma >= 0` with `gamma * x^D <= cap` coordinate-wise and
/// `gamma <= b` for every extra bound `b`, together with `gamma * x^D`.
pub fn max_dominated_er(
    support: &IndexSet,
    cap: &Market,
    extra_bounds: &[Rational],
) -> Result<Extraction> {
    let unit = equal_revenue_unit(cap.grid(), support)?;
    extract_scaled(&unit, cap, extra_bounds)
}

/// Same as [`max_dominated_er`] for a unit equal-revenue market the caller
/// already built (needed when the extra bounds depend on its masses).
pub(crate) fn extract_scaled(
    unit: &Market,
    cap: &Market,
    extra_bounds: &[Rational],
) -> Result<Extraction> {
    unit.ensure_same_grid(cap)?;
    if let Some(b) = extra_bounds.iter().find(|b| b.is_negative()) {
        return Err(Error::NegativeBound(format_exact(b)));
    }
    let gamma = unit
        .masses()
        .iter()
        .zip(cap.masses())
        .filter(|(u, _)| u.is_positive())
        .map(|(u, c)| c / u)
        .chain(extra_bounds.iter().cloned())
        .min()
        .ok_or(Error::EmptySupport)?;
    let market = unit.scaled(&gamma);
    Ok(Extraction { gamma, market })
}

/// True when every support price of `market` earns the same revenue.
pub fn is_equal_revenue(market: &Market) -> bool {
    let curve = market.revenue_curve();
    let mut support = market.support().into_iter();
    match support.next() {
        None => true,
        Some(first) => support.all(|i| curve[i] == curve[first]),
    }
}
