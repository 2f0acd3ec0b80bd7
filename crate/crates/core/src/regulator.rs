//! Tools for choosing a window before any segmentation exists: a
//! closed-form feasibility certificate, the buyer-protecting window design,
//! and a sweep over uniform markets.

use std::io::Write;

use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::market::{Market, RegulatedSet, ValueGrid};
use crate::passive::is_feasible;
use crate::rational::{format_decimal, format_exact, int, Rational};

/// Closed-form certificate of feasibility for a window that misses the
/// unique optimal uniform price: selling every window value at itself and
/// everything above the window at its floor already earns the monopoly
/// revenue. `false` means "not certified", not "infeasible".
pub fn sufficient_condition(aggregate: &Market, window: RegulatedSet) -> Result<bool> {
    aggregate.grid().check_index(window.hi())?;
    let optimal = aggregate.opt_prices()?;
    if optimal.len() != 1 || optimal.iter().any(|&i| window.contains(i)) {
        return Err(Error::HypothesisViolated);
    }
    let inside: Rational = window.indices().map(|i| aggregate.mass_at(i) * aggregate.value(i)).sum();
    let above: Rational = (window.hi() + 1..aggregate.len()).map(|i| aggregate.mass_at(i).clone()).sum();
    let earned = inside + aggregate.value(window.lo()) * above;
    Ok(earned >= aggregate.uniform_revenue())
}

/// The window `{v_1, ..., v_w}` with the smallest feasible `w`. Among all
/// contiguous feasible windows it gives the largest guaranteed consumer
/// surplus.
pub fn design_f(aggregate: &Market) -> Result<RegulatedSet> {
    if aggregate.is_zero() {
        return Err(Error::ZeroMarket);
    }
    let n = aggregate.len();
    for top in 0..n {
        let window = RegulatedSet::new(0, top, n)?;
        if is_feasible(aggregate, window)? {
            return Ok(window);
        }
    }
    Err(Error::Invariant("the full grid must be feasible".into()))
}

/// Equal mass on every integer from `lo` to `hi`.
pub fn uniform_market(lo: i64, hi: i64) -> Result<Market> {
    if lo < 1 || lo > hi {
        return Err(Error::BadRange(format!("need 1 <= L <= R, got L={lo}, R={hi}")));
    }
    let grid = ValueGrid::integers(lo, hi)?;
    let share = Rational::one() / int(hi - lo + 1);
    Market::new(grid, vec![share; (hi - lo + 1) as usize])
}

/// Counts for one uniform market over `L..R`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepRow {
    pub lo: i64,
    pub hi: i64,
    /// Windows disjoint from every optimal uniform price.
    pub n_sets: usize,
    pub n_feasible: usize,
    pub n_sufficient: usize,
    /// Several optimal uniform prices; the certificate never applies then.
    pub opt_tie: bool,
}

impl SweepRow {
    fn share(&self, count: usize) -> Option<Rational> {
        (self.n_sets > 0).then(|| int(count as i64) / int(self.n_sets as i64))
    }

    pub fn prop_feasible(&self) -> Option<Rational> {
        self.share(self.n_feasible)
    }

    pub fn prop_sufficient(&self) -> Option<Rational> {
        self.share(self.n_sufficient)
    }
}

pub fn sweep_row(lo: i64, hi: i64) -> Result<SweepRow> {
    let market = uniform_market(lo, hi)?;
    let n = market.len();
    let optimal = market.opt_prices()?;
    let opt_tie = optimal.len() > 1;
    let mut row = SweepRow { lo, hi, n_sets: 0, n_feasible: 0, n_sufficient: 0, opt_tie };
    for floor in 0..n {
        for top in floor..n {
            let window = RegulatedSet::new(floor, top, n)?;
            if optimal.iter().any(|&i| window.contains(i)) {
                continue;
            }
            row.n_sets += 1;
            if is_feasible(&market, window)? {
                row.n_feasible += 1;
            }
            if !opt_tie && sufficient_condition(&market, window)? {
                row.n_sufficient += 1;
            }
        }
    }
    Ok(row)
}

/// One row per `L`, in the order given. Rows are computed in parallel and
/// the output does not depend on scheduling.
pub fn feasibility_sweep(hi: i64, lows: &[i64]) -> Result<Vec<SweepRow>> {
    if hi < 1 {
        return Err(Error::BadRange(format!("R must be positive, got {hi}")));
    }
    lows.par_iter().map(|&lo| sweep_row(lo, hi)).collect()
}

#[derive(Serialize)]
struct CsvRecord {
    #[serde(rename = "L")]
    lo: i64,
    #[serde(rename = "R")]
    hi: i64,
    n_sets: usize,
    n_feasible: usize,
    n_sufficient: usize,
    prop_feasible: String,
    prop_sufficient: String,
    prop_feasible_dec: String,
    prop_sufficient_dec: String,
    opt_tie: bool,
}

fn render(value: Option<Rational>) -> (String, String) {
    match value {
        Some(v) => (format_exact(&v), format_decimal(&v, 6)),
        None => ("NA".into(), "NA".into()),
    }
}

/// Writes the sweep as CSV. Proportions appear as exact fractions and as
/// six-decimal strings; `NA` when no window excludes the optimal prices.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        let (prop_feasible, prop_feasible_dec) = render(row.prop_feasible());
        let (prop_sufficient, prop_sufficient_dec) = render(row.prop_sufficient());
        writer
            .serialize(CsvRecord {
                lo: row.lo,
                hi: row.hi,
                n_sets: row.n_sets,
                n_feasible: row.n_feasible,
                n_sufficient: row.n_sufficient,
                prop_feasible,
                prop_sufficient,
                prop_feasible_dec,
                prop_sufficient_dec,
                opt_tie: row.opt_tie,
            })
            .map_err(|e| Error::Parse(e.to_string()))?;
    }
    writer.flush().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(())
}
