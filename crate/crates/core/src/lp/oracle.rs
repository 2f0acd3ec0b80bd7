//! Linear-program encoding of standard-form schemes, used as ground truth
//! for the constructive algorithms.
//!
//! One segment per price in a window `{v_a, ..., v_b}` of the regulated set;
//! variable `x[q][i]` is the mass of value `v_i` placed in the segment
//! priced `v_{a+q}`. Optimality rows compare the instructed price against
//! every grid value (passive) or every value of the regulated set (active).

use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::lp::simplex::{Direction, LinearProgram, Sense, Solution, Status};
use crate::market::{Market, RegulatedSet};
use crate::rational::{format_exact, Rational};
use crate::scheme::{MarketScheme, Model, Segment};

#[derive(Debug, Clone)]
pub struct StandardFormLP {
    aggregate: Market,
    window: RegulatedSet,
    model: Model,
    program: LinearProgram,
    equality_rows: usize,
    optimality_rows: usize,
}

/// Encodes all standard-form schemes of `aggregate` priced inside `window`
/// that are F-valid (passive) or F-instructed (active) for `regulated`.
pub fn build_lp(
    aggregate: &Market,
    regulated: RegulatedSet,
    model: Model,
    window: RegulatedSet,
) -> Result<StandardFormLP> {
    if window.lo() < regulated.lo() || window.hi() > regulated.hi() {
        return Err(Error::EmptyWindow);
    }
    let n = aggregate.len();
    aggregate.grid().check_index(regulated.hi())?;
    let segments = window.len();
    let num_vars = segments * n;
    let var = |q: usize, i: usize| q * n + i;
    let mut program = LinearProgram::new(num_vars);

    for i in 0..n {
        let mut coeffs = vec![Rational::zero(); num_vars];
        for q in 0..segments {
            coeffs[var(q, i)] = Rational::from_integer(1.into());
        }
        program.push(coeffs, Sense::Eq, aggregate.mass_at(i).clone());
    }

    let comparisons: Vec<usize> = match model {
        Model::Passive => (0..n).collect(),
        Model::Active => regulated.indices().collect(),
    };
    let mut optimality_rows = 0;
    for (q, price) in window.indices().enumerate() {
        let v_price = aggregate.value(price);
        for &j in &comparisons {
            // v_p * G_q(v_p) - v_j * G_q(v_j) >= 0
            let mut coeffs = vec![Rational::zero(); num_vars];
            for i in price..n {
                coeffs[var(q, i)] += v_price;
            }
            let v_j = aggregate.value(j);
            for i in j..n {
                coeffs[var(q, i)] -= v_j;
            }
            program.push(coeffs, Sense::Ge, Rational::zero());
            optimality_rows += 1;
        }
    }

    Ok(StandardFormLP {
        aggregate: aggregate.clone(),
        window,
        model,
        program,
        equality_rows: n,
        optimality_rows,
    })
}

impl StandardFormLP {
    pub fn num_vars(&self) -> usize {
        self.program.num_vars
    }

    pub fn equality_rows(&self) -> usize {
        self.equality_rows
    }

    pub fn optimality_rows(&self) -> usize {
        self.optimality_rows
    }

    pub fn window(&self) -> RegulatedSet {
        self.window
    }

    pub fn program(&self) -> &LinearProgram {
        &self.program
    }

    /// Column of `x[q][i]`, with `q` counted from the window's low end.
    pub fn var(&self, q: usize, i: usize) -> usize {
        q * self.aggregate.len() + i
    }

    /// Adds `x[q][i] <= bound`.
    pub fn bound_variable(&mut self, q: usize, i: usize, bound: Rational) {
        let mut coeffs = vec![Rational::zero(); self.num_vars()];
        coeffs[self.var(q, i)] = Rational::from_integer(1.into());
        self.program.push(coeffs, Sense::Le, bound);
    }

    fn surplus_objective(&self, consumer: bool) -> Vec<Rational> {
        let mut obj = vec![Rational::zero(); self.num_vars()];
        for (q, price) in self.window.indices().enumerate() {
            let v_price = self.aggregate.value(price);
            for i in price..self.aggregate.len() {
                obj[self.var(q, i)] = if consumer {
                    self.aggregate.value(i) - v_price
                } else {
                    v_price.clone()
                };
            }
        }
        obj
    }

    pub fn cs_objective(&self) -> Vec<Rational> {
        self.surplus_objective(true)
    }

    pub fn ps_objective(&self) -> Vec<Rational> {
        self.surplus_objective(false)
    }

    pub fn solve(&self, objective: &[Rational], direction: Direction) -> Solution {
        self.program.solve(objective, direction)
    }

    /// Reads an LP point back as a standard-form scheme.
    pub fn to_scheme(&self, assignment: &[Rational]) -> Result<MarketScheme> {
        let n = self.aggregate.len();
        let segments = self
            .window
            .indices()
            .enumerate()
            .map(|(q, price)| {
                let masses = assignment[q * n..(q + 1) * n].to_vec();
                Market::new(self.aggregate.grid().clone(), masses).map(|m| Segment::new(m, price))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MarketScheme::new(self.aggregate.clone(), segments))
    }
}

impl fmt::Display for StandardFormLP {
    /// Plain equational dump, one row per line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.aggregate.len();
        writeln!(
            f,
            "# {} model, prices #{}..#{}, {} variables",
            self.model,
            self.window.lo() + 1,
            self.window.hi() + 1,
            self.num_vars()
        )?;
        let name = |col: usize| {
            let (q, i) = (col / n, col % n);
            format!("x[{},{}]", self.window.lo() + q + 1, i + 1)
        };
        for c in &self.program.constraints {
            let terms: Vec<String> = c
                .coeffs
                .iter()
                .enumerate()
                .filter(|(_, a)| !a.is_zero())
                .map(|(col, a)| format!("{} {}", format_exact(a), name(col)))
                .collect();
            let lhs = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
            let op = match c.sense {
                Sense::Le => "<=",
                Sense::Ge => ">=",
                Sense::Eq => "=",
            };
            writeln!(f, "{lhs} {op} {}", format_exact(&c.rhs))?;
        }
        let objective: Vec<String> = self
            .ps_objective()
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .map(|(col, a)| format!("{} {}", format_exact(a), name(col)))
            .collect();
        writeln!(f, "PS = {}", objective.join(" + "))
    }
}

fn optimum(lp: &StandardFormLP, objective: &[Rational], direction: Direction) -> Result<Rational> {
    let sol = lp.solve(objective, direction);
    match sol.status {
        Status::Optimal => Ok(sol.value.expect("optimal solution carries a value")),
        Status::Infeasible => Err(Error::InfeasibleSet),
        Status::Unbounded => Err(Error::Invariant("scheme polytope reported unbounded".into())),
    }
}

fn full_lp(aggregate: &Market, regulated: RegulatedSet, model: Model) -> Result<StandardFormLP> {
    build_lp(aggregate, regulated, model, regulated)
}

/// Whether any F-valid (passive) or F-instructed (active) scheme exists.
pub fn oracle_feasible(aggregate: &Market, regulated: RegulatedSet, model: Model) -> Result<bool> {
    let lp = full_lp(aggregate, regulated, model)?;
    let zero = vec![Rational::zero(); lp.num_vars()];
    Ok(lp.solve(&zero, Direction::Minimize).status == Status::Optimal)
}

pub fn oracle_min_cs(aggregate: &Market, regulated: RegulatedSet, model: Model) -> Result<Rational> {
    let lp = full_lp(aggregate, regulated, model)?;
    optimum(&lp, &lp.cs_objective(), Direction::Minimize)
}

pub fn oracle_max_cs(aggregate: &Market, regulated: RegulatedSet, model: Model) -> Result<Rational> {
    let lp = full_lp(aggregate, regulated, model)?;
    optimum(&lp, &lp.cs_objective(), Direction::Maximize)
}

pub fn oracle_max_ps(aggregate: &Market, regulated: RegulatedSet, model: Model) -> Result<Rational> {
    let lp = full_lp(aggregate, regulated, model)?;
    optimum(&lp, &lp.ps_objective(), Direction::Maximize)
}

pub fn oracle_min_ps(aggregate: &Market, regulated: RegulatedSet, model: Model) -> Result<Rational> {
    let lp = full_lp(aggregate, regulated, model)?;
    optimum(&lp, &lp.ps_objective(), Direction::Minimize)
}

/// Smallest mass of value `v_i0` that must be sold at price `v_i0` by a
/// passive scheme whose prices all lie in `{v_i0, ..., v_r}`.
pub fn oracle_eta0(aggregate: &Market, regulated: RegulatedSet, i0: usize) -> Result<Rational> {
    let window = regulated.tail_from(i0)?;
    let lp = build_lp(aggregate, regulated, Model::Passive, window)?;
    let mut objective = vec![Rational::zero(); lp.num_vars()];
    objective[lp.var(0, i0)] = Rational::from_integer(1.into());
    optimum(&lp, &objective, Direction::Minimize)
}
