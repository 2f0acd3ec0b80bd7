#![allow(dead_code)]

use std::sync::Arc;

use segmarket::rational::{int, parse_rational};
use segmarket::{IndexSet, Market, RegulatedSet, ValueGrid};

pub fn grid_of(values: &[i64]) -> Arc<ValueGrid> {
    ValueGrid::new(values.iter().map(|&v| int(v)).collect()).unwrap()
}

pub fn market_on(grid: &Arc<ValueGrid>, masses: &[&str]) -> Market {
    Market::new(grid.clone(), masses.iter().map(|s| parse_rational(s).unwrap()).collect()).unwrap()
}

/// Market on the running example's grid {1, 2, 3, 6}.
pub fn mk(masses: [&str; 4]) -> Market {
    market_on(&grid_of(&[1, 2, 3, 6]), &masses)
}

/// The running example: x* = (0.36, 0.20, 0.18, 0.26) on {1, 2, 3, 6}.
pub fn m1() -> Market {
    mk(["0.36", "0.20", "0.18", "0.26"])
}

/// F = {2, 3} on the running example's grid.
pub fn f23() -> RegulatedSet {
    RegulatedSet::new(1, 2, 4).unwrap()
}

pub fn q(s: &str) -> segmarket::Rational {
    parse_rational(s).unwrap()
}

/// Grid indices of the given values on {1, 2, 3, 6}.
pub fn idx(values: &[i64]) -> IndexSet {
    values
        .iter()
        .map(|v| match v {
            1 => 0,
            2 => 1,
            3 => 2,
            6 => 3,
            _ => panic!("{v} is not on the grid"),
        })
        .collect()
}

/// Random instance: `n <= max_n` distinct integer values in 1..=20, masses
/// drawn from {k/20}, not all zero, and a random contiguous window.
pub fn random_instance(rng: &mut impl rand::Rng, max_n: usize) -> (Market, RegulatedSet) {
    use rand::seq::index::sample;
    let n = rng.gen_range(1..=max_n);
    let mut values: Vec<i64> = sample(rng, 20, n).into_iter().map(|v| v as i64 + 1).collect();
    values.sort_unstable();
    let mut masses: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=20)).collect();
    if masses.iter().all(|&k| k == 0) {
        let i = rng.gen_range(0..n);
        masses[i] = rng.gen_range(1..=20);
    }
    let market = Market::new(
        grid_of(&values),
        masses.into_iter().map(|k| segmarket::rational::ratio(k, 20)).collect(),
    )
    .unwrap();
    let lo = rng.gen_range(0..n);
    let hi = rng.gen_range(lo..n);
    (market, RegulatedSet::new(lo, hi, n).unwrap())
}

/// One frozen extraction step on the running example, in grid values.
pub struct StepRow {
    pub residual: [&'static str; 4],
    pub optimal: &'static [i64],
    pub support: &'static [i64],
    pub segment: [&'static str; 4],
    pub price: i64,
}

const fn row(
    residual: [&'static str; 4],
    optimal: &'static [i64],
    support: &'static [i64],
    segment: [&'static str; 4],
    price: i64,
) -> StepRow {
    StepRow { residual, optimal, support, segment, price }
}

pub const UNREGULATED_STEPS: [StepRow; 4] = [
    row(["0.36", "0.20", "0.18", "0.26"], &[6], &[1, 2, 3, 6], ["0.36", "0.12", "0.12", "0.12"], 1),
    row(["0", "0.08", "0.06", "0.14"], &[6], &[2, 3, 6], ["0", "0.06", "0.06", "0.06"], 2),
    row(["0", "0.02", "0", "0.08"], &[6], &[2, 6], ["0", "0.02", "0", "0.01"], 2),
    row(["0", "0", "0", "0.07"], &[6], &[6], ["0", "0", "0", "0.07"], 6),
];

pub const PS_MAX_STEPS: [StepRow; 4] = [
    row(["0.36", "0.20", "0.18", "0.26"], &[6], &[1, 3, 6], ["0.36", "0", "0.09", "0.09"], 3),
    row(["0", "0.20", "0.09", "0.17"], &[6], &[3, 6], ["0", "0", "0.09", "0.09"], 3),
    row(["0", "0.20", "0", "0.08"], &[2], &[2, 6], ["0", "0.16", "0", "0.08"], 2),
    row(["0", "0.04", "0", "0"], &[2], &[2], ["0", "0.04", "0", "0"], 2),
];

pub const CS_MAX_STEPS: [StepRow; 4] = [
    row(["0.36", "0.20", "0.18", "0.26"], &[6], &[1, 3, 6], ["0.36", "0", "0.09", "0.09"], 3),
    row(["0", "0.20", "0.09", "0.17"], &[6], &[3, 6], ["0", "0", "0.05", "0.05"], 3),
    row(["0", "0.20", "0.04", "0.12"], &[2, 6], &[2, 3, 6], ["0", "0.04", "0.04", "0.04"], 2),
    row(["0", "0.16", "0", "0.08"], &[2, 6], &[2, 6], ["0", "0.16", "0", "0.08"], 2),
];

pub const SW_MIN_STEPS: [StepRow; 4] = [
    row(["0.36", "0.20", "0.18", "0.26"], &[6], &[1, 2, 3, 6], ["0.12", "0.04", "0.04", "0.04"], 3),
    row(["0.24", "0.16", "0.14", "0.22"], &[6], &[1, 3, 6], ["0.24", "0", "0.06", "0.06"], 3),
    row(["0", "0.16", "0.08", "0.16"], &[6], &[3, 6], ["0", "0", "0.08", "0.08"], 3),
    row(["0", "0.16", "0", "0.08"], &[2, 6], &[2, 6], ["0", "0.16", "0", "0.08"], 2),
];

/// First disagreement between a construction trace and frozen rows.
pub fn step_mismatch(steps: &[segmarket::passive::Step], rows: &[StepRow]) -> Option<String> {
    if steps.len() != rows.len() {
        return Some(format!("{} steps, expected {}", steps.len(), rows.len()));
    }
    for (k, (step, row)) in steps.iter().zip(rows).enumerate() {
        let k = k + 1;
        if step.residual != mk(row.residual) {
            return Some(format!("step {k}: residual {}", step.residual));
        }
        if step.residual.opt_prices().unwrap() != idx(row.optimal) {
            return Some(format!("step {k}: optimal prices {:?}", step.residual.opt_prices().unwrap()));
        }
        if step.support != idx(row.support) {
            return Some(format!("step {k}: support {:?}", step.support));
        }
        if step.segment != mk(row.segment) {
            return Some(format!("step {k}: segment {}", step.segment));
        }
        if step.price_index != *idx(&[row.price]).first().unwrap() {
            return Some(format!("step {k}: price index {}", step.price_index));
        }
    }
    None
}
