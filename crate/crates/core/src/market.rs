//! Markets over a value grid, plus regulated price windows.
//!
//! A [`Market`] is a dense vector of buyer masses over an ordered
//! [`ValueGrid`]; its support is derived from the masses, never stored.
//! Grid indices are 0-based throughout the library. The JSON and CLI
//! surfaces translate to and from 1-based indices.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_exact, int, Rational};

/// Set of grid indices, kept sorted.
pub type IndexSet = BTreeSet<usize>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueGrid {
    values: Vec<Rational>,
}

impl ValueGrid {
    pub fn new(values: Vec<Rational>) -> Result<Arc<Self>> {
        if values.is_empty() {
            return Err(Error::InvalidGrid("grid needs at least one value".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_positive()) {
            return Err(Error::InvalidGrid(format!(
                "values must be positive, got {}",
                format_exact(v)
            )));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid("values must be strictly increasing".into()));
        }
        Ok(Arc::new(Self { values }))
    }

    /// The integer grid `lo, lo+1, ..., hi`.
    pub fn integers(lo: i64, hi: i64) -> Result<Arc<Self>> {
        if lo < 1 || lo > hi {
            return Err(Error::BadRange(format!("need 1 <= lo <= hi, got {lo}..{hi}")));
        }
        Self::new((lo..=hi).map(int).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn value(&self, index: usize) -> &Rational {
        &self.values[index]
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index < self.values.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index, len: self.values.len() })
        }
    }

    /// Index of a value that must match a grid entry exactly.
    pub fn index_of(&self, value: &Rational) -> Option<usize> {
        self.values.binary_search(value).ok()
    }
}

/// Contiguous window `{v_lo, ..., v_hi}` of the value grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RegulatedSet {
    lo: usize,
    hi: usize,
}

impl RegulatedSet {
    pub fn new(lo: usize, hi: usize, grid_len: usize) -> Result<Self> {
        if lo > hi || hi >= grid_len {
            return Err(Error::BadRange(format!(
                "regulated window [{lo}, {hi}] invalid for a grid of {grid_len} values"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// Window spanning the grid values `lo..=hi`, which must be grid entries.
    pub fn from_values(grid: &ValueGrid, lo: &Rational, hi: &Rational) -> Result<Self> {
        let find = |v: &Rational| {
            grid.index_of(v)
                .ok_or_else(|| Error::BadRange(format!("{} is not a grid value", format_exact(v))))
        };
        Self::new(find(lo)?, find(hi)?, grid.len())
    }

    pub fn full(grid: &ValueGrid) -> Self {
        Self { lo: 0, hi: grid.len() - 1 }
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    pub fn hi(&self) -> usize {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, index: usize) -> bool {
        (self.lo..=self.hi).contains(&index)
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<usize> {
        self.lo..=self.hi
    }

    /// The tail `{v_from, ..., v_hi}`.
    pub fn tail_from(&self, from: usize) -> Result<Self> {
        if !self.contains(from) {
            return Err(Error::BadRange(format!("{from} is not inside [{}, {}]", self.lo, self.hi)));
        }
        Ok(Self { lo: from, hi: self.hi })
    }

    /// Renders the window by its grid values, e.g. `2..3`.
    pub fn describe(&self, grid: &ValueGrid) -> String {
        format!("{}..{}", format_exact(grid.value(self.lo)), format_exact(grid.value(self.hi)))
    }
}

impl fmt::Display for RegulatedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}..#{}", self.lo + 1, self.hi + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Market {
    grid: Arc<ValueGrid>,
    masses: Vec<Rational>,
}

impl Market {
    pub fn new(grid: Arc<ValueGrid>, masses: Vec<Rational>) -> Result<Self> {
        if masses.len() != grid.len() {
            return Err(Error::InvalidMarket(format!(
                "{} masses for a grid of {} values",
                masses.len(),
                grid.len()
            )));
        }
        if let Some(m) = masses.iter().find(|m| m.is_negative()) {
            return Err(Error::InvalidMarket(format!("negative mass {}", format_exact(m))));
        }
        Ok(Self { grid, masses })
    }

    pub fn zero(grid: Arc<ValueGrid>) -> Self {
        let masses = vec![Rational::zero(); grid.len()];
        Self { grid, masses }
    }

    pub fn grid(&self) -> &Arc<ValueGrid> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn masses(&self) -> &[Rational] {
        &self.masses
    }

    pub fn mass_at(&self, index: usize) -> &Rational {
        &self.masses[index]
    }

    pub fn value(&self, index: usize) -> &Rational {
        self.grid.value(index)
    }

    pub fn mass(&self) -> Rational {
        self.masses.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.masses.iter().all(Zero::is_zero)
    }

    pub fn support(&self) -> IndexSet {
        self.masses
            .iter()
            .enumerate()
            .filter(|(_, m)| m.is_positive())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn same_grid(&self, other: &Market) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid
    }

    pub(crate) fn ensure_same_grid(&self, other: &Market) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Cumulative demand `G(v_i)`: mass of buyers with value at least `v_i`.
    pub fn demand(&self, index: usize) -> Result<Rational> {
        self.grid.check_index(index)?;
        Ok(self.demand_at(index))
    }

    pub(crate) fn demand_at(&self, index: usize) -> Rational {
        self.masses[index..].iter().sum()
    }

    /// Revenue `v_i * G(v_i)` from posting the price `v_i`.
    pub fn revenue(&self, index: usize) -> Result<Rational> {
        self.grid.check_index(index)?;
        Ok(self.revenue_at(index))
    }

    pub(crate) fn revenue_at(&self, index: usize) -> Rational {
        self.grid.value(index) * self.demand_at(index)
    }

    /// Revenue at every grid price, computed with one suffix sum.
    pub fn revenue_curve(&self) -> Vec<Rational> {
        let mut tail = Rational::zero();
        let mut out = vec![Rational::zero(); self.len()];
        for i in (0..self.len()).rev() {
            tail += &self.masses[i];
            out[i] = self.grid.value(i) * &tail;
        }
        out
    }

    /// Revenue-maximizing prices over the whole grid, ties kept.
    pub fn opt_prices(&self) -> Result<IndexSet> {
        self.argmax_revenue(0..=self.len() - 1)
    }

    /// Revenue-maximizing prices among those inside `window`.
    pub fn opt_prices_restricted(&self, window: RegulatedSet) -> Result<IndexSet> {
        self.grid.check_index(window.hi())?;
        self.argmax_revenue(window.indices())
    }

    fn argmax_revenue(&self, range: std::ops::RangeInclusive<usize>) -> Result<IndexSet> {
        if self.is_zero() {
            return Err(Error::ZeroMarket);
        }
        let curve = self.revenue_curve();
        let best = range.clone().map(|i| &curve[i]).max().expect("non-empty range");
        Ok(range.filter(|&i| &curve[i] == best).collect())
    }

    /// Best uniform-price revenue over the whole grid.
    pub fn uniform_revenue(&self) -> Rational {
        self.revenue_curve().into_iter().max().unwrap_or_else(Rational::zero)
    }

    /// Best uniform-price revenue with the price restricted to `window`.
    pub fn uniform_revenue_within(&self, window: RegulatedSet) -> Rational {
        let curve = self.revenue_curve();
        window.indices().map(|i| curve[i].clone()).max().unwrap_or_else(Rational::zero)
    }

    /// `sum_{i >= from} x_i v_i`: welfare when every buyer valued at least
    /// `v_from` purchases.
    pub fn welfare_from(&self, from: usize) -> Rational {
        (from..self.len()).map(|i| &self.masses[i] * self.grid.value(i)).sum()
    }

    pub fn scaled(&self, factor: &Rational) -> Market {
        Market {
            grid: self.grid.clone(),
            masses: self.masses.iter().map(|m| m * factor).collect(),
        }
    }

    pub fn checked_add(&self, other: &Market) -> Result<Market> {
        self.ensure_same_grid(other)?;
        let masses = self.masses.iter().zip(&other.masses).map(|(a, b)| a + b).collect();
        Ok(Market { grid: self.grid.clone(), masses })
    }

    /// `self - other`, failing if any coordinate would go negative.
    pub fn checked_sub(&self, other: &Market) -> Result<Market> {
        self.ensure_same_grid(other)?;
        let masses: Vec<Rational> =
            self.masses.iter().zip(&other.masses).map(|(a, b)| a - b).collect();
        if masses.iter().any(Signed::is_negative) {
            return Err(Error::Invariant("subtracted segment is not dominated".into()));
        }
        Ok(Market { grid: self.grid.clone(), masses })
    }

    pub fn dominated_by(&self, other: &Market) -> bool {
        self.same_grid(other) && self.masses.iter().zip(&other.masses).all(|(a, b)| a <= b)
    }
}

impl fmt::Display for Market {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.masses.iter().map(format_exact).collect();
        write!(f, "({})", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{parse_rational, ratio};

    fn m1() -> Market {
        let grid = ValueGrid::new(vec![int(1), int(2), int(3), int(6)]).unwrap();
        let masses = ["0.36", "0.20", "0.18", "0.26"].map(|s| parse_rational(s).unwrap());
        Market::new(grid, masses.to_vec()).unwrap()
    }

    fn on_m1_grid(masses: [&str; 4]) -> Market {
        Market::new(m1().grid().clone(), masses.map(|s| parse_rational(s).unwrap()).to_vec())
            .unwrap()
    }

    #[test]
    fn demand_sums_the_upper_tail() {
        let m = m1();
        assert_eq!(m.demand(1).unwrap(), ratio(16, 25));
        assert_eq!(m.demand(3).unwrap(), ratio(13, 50));
        assert_eq!(Market::zero(m.grid().clone()).demand(2).unwrap(), Rational::zero());
        assert_eq!(m.demand(4), Err(Error::IndexOutOfRange { index: 4, len: 4 }));
    }

    #[test]
    fn revenue_is_price_times_demand() {
        let m = m1();
        assert_eq!(m.revenue(3).unwrap(), ratio(156, 100));
        assert_eq!(m.revenue(2).unwrap(), ratio(132, 100));
        assert_eq!(Market::zero(m.grid().clone()).revenue(0).unwrap(), Rational::zero());
        assert!(m.revenue(9).is_err());
    }

    #[test]
    fn optimal_prices_keep_ties() {
        assert_eq!(m1().opt_prices().unwrap(), IndexSet::from([3]));
        assert_eq!(on_m1_grid(["0", "0.20", "0", "0.08"]).opt_prices().unwrap(), IndexSet::from([1]));
        assert_eq!(
            on_m1_grid(["0", "0.16", "0", "0.08"]).opt_prices().unwrap(),
            IndexSet::from([1, 3])
        );
        assert_eq!(Market::zero(m1().grid().clone()).opt_prices(), Err(Error::ZeroMarket));
    }

    #[test]
    fn restricted_optimal_prices() {
        let m = m1();
        let f23 = RegulatedSet::new(1, 2, 4).unwrap();
        assert_eq!(m.opt_prices_restricted(f23).unwrap(), IndexSet::from([2]));
        let all = RegulatedSet::full(m.grid());
        assert_eq!(m.opt_prices_restricted(all).unwrap(), m.opt_prices().unwrap());
        let x = on_m1_grid(["0", "0.20", "0", "0.09"]);
        assert_eq!(x.opt_prices_restricted(f23).unwrap(), IndexSet::from([1]));
    }

    #[test]
    fn grid_validation() {
        assert!(ValueGrid::new(vec![]).is_err());
        assert!(ValueGrid::new(vec![int(1), int(1)]).is_err());
        assert!(ValueGrid::new(vec![int(0), int(1)]).is_err());
        assert!(ValueGrid::new(vec![int(2), int(1)]).is_err());
        assert!(ValueGrid::integers(3, 2).is_err());
        assert_eq!(ValueGrid::integers(5, 5).unwrap().len(), 1);
    }

    #[test]
    fn market_validation() {
        let grid = ValueGrid::integers(1, 2).unwrap();
        assert!(Market::new(grid.clone(), vec![int(1)]).is_err());
        assert!(Market::new(grid, vec![int(1), int(-1)]).is_err());
    }

    #[test]
    fn regulated_set_bounds() {
        assert!(RegulatedSet::new(2, 1, 4).is_err());
        assert!(RegulatedSet::new(0, 4, 4).is_err());
        let grid = m1().grid().clone();
        let f = RegulatedSet::from_values(&grid, &int(2), &int(3)).unwrap();
        assert_eq!((f.lo(), f.hi(), f.len()), (1, 2, 2));
        assert_eq!(f.describe(&grid), "2..3");
        assert!(RegulatedSet::from_values(&grid, &int(4), &int(6)).is_err());
    }
}
