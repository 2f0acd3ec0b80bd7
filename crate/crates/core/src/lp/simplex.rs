//! Dense two-phase simplex over exact rationals.
//!
//! Every variable is non-negative. Pivoting follows Bland's rule (lowest
//! eligible column enters, ties in the ratio test leave by lowest basic
//! column), so degenerate problems terminate.

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub sense: Sense,
    pub rhs: Rational,
}

impl Constraint {
    pub fn holds(&self, point: &[Rational]) -> bool {
        let lhs: Rational = self.coeffs.iter().zip(point).map(|(a, x)| a * x).sum();
        match self.sense {
            Sense::Le => lhs <= self.rhs,
            Sense::Ge => lhs >= self.rhs,
            Sense::Eq => lhs == self.rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub status: Status,
    /// Objective value at the optimum (`None` unless optimal).
    pub value: Option<Rational>,
    /// Primal point; empty unless optimal.
    pub assignment: Vec<Rational>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        Self { num_vars, constraints: Vec::new() }
    }

    pub fn push(&mut self, coeffs: Vec<Rational>, sense: Sense, rhs: Rational) {
        assert_eq!(coeffs.len(), self.num_vars, "constraint width");
        self.constraints.push(Constraint { coeffs, sense, rhs });
    }

    /// True when `point` is non-negative and satisfies every constraint.
    pub fn is_feasible_point(&self, point: &[Rational]) -> bool {
        point.len() == self.num_vars
            && point.iter().all(|x| !x.is_negative())
            && self.constraints.iter().all(|c| c.holds(point))
    }

    pub fn solve(&self, objective: &[Rational], direction: Direction) -> Solution {
        assert_eq!(objective.len(), self.num_vars, "objective width");
        let cost: Vec<Rational> = match direction {
            Direction::Minimize => objective.to_vec(),
            Direction::Maximize => objective.iter().map(|c| -c).collect(),
        };
        let mut tableau = Tableau::build(self);
        if !tableau.phase_one() {
            return Solution { status: Status::Infeasible, value: None, assignment: Vec::new() };
        }
        if !tableau.phase_two(&cost) {
            return Solution { status: Status::Unbounded, value: None, assignment: Vec::new() };
        }
        let assignment = tableau.primal(self.num_vars);
        let value: Rational = objective.iter().zip(&assignment).map(|(c, x)| c * x).sum();
        Solution { status: Status::Optimal, value: Some(value), assignment }
    }
}

struct Tableau {
    /// Constraint rows; the last entry of each row is the right-hand side.
    rows: Vec<Vec<Rational>>,
    /// Reduced costs; the last entry is minus the objective value.
    reduced: Vec<Rational>,
    basis: Vec<usize>,
    /// Columns `artificial_from..width` are phase-one artificials.
    artificial_from: usize,
    width: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        // Normalize every row to a non-negative right-hand side; a `>= 0`
        // row becomes `<= 0` so that its slack can start in the basis.
        let normalized: Vec<(Vec<Rational>, Sense, Rational)> = lp
            .constraints
            .iter()
            .map(|c| {
                let flip = c.rhs.is_negative() || (c.rhs.is_zero() && c.sense == Sense::Ge);
                if flip {
                    let sense = match c.sense {
                        Sense::Le => Sense::Ge,
                        Sense::Ge => Sense::Le,
                        Sense::Eq => Sense::Eq,
                    };
                    (c.coeffs.iter().map(|a| -a).collect(), sense, -&c.rhs)
                } else {
                    (c.coeffs.clone(), c.sense, c.rhs.clone())
                }
            })
            .collect();

        let slack_count = normalized.iter().filter(|(_, s, _)| *s != Sense::Eq).count();
        let artificial_count = normalized.iter().filter(|(_, s, _)| *s != Sense::Le).count();
        let artificial_from = lp.num_vars + slack_count;
        let width = artificial_from + artificial_count;

        let mut rows = Vec::with_capacity(normalized.len());
        let mut basis = Vec::with_capacity(normalized.len());
        let (mut slack, mut artificial) = (lp.num_vars, artificial_from);
        for (coeffs, sense, rhs) in normalized {
            let mut row = vec![Rational::zero(); width + 1];
            row[..lp.num_vars].clone_from_slice(&coeffs);
            row[width] = rhs;
            match sense {
                Sense::Le => {
                    row[slack] = Rational::one();
                    basis.push(slack);
                    slack += 1;
                }
                Sense::Ge => {
                    row[slack] = -Rational::one();
                    slack += 1;
                    row[artificial] = Rational::one();
                    basis.push(artificial);
                    artificial += 1;
                }
                Sense::Eq => {
                    row[artificial] = Rational::one();
                    basis.push(artificial);
                    artificial += 1;
                }
            }
            rows.push(row);
        }
        Self { rows, reduced: vec![Rational::zero(); width + 1], basis, artificial_from, width }
    }

    fn set_costs(&mut self, cost: &[Rational]) {
        let width = self.width;
        let mut reduced = vec![Rational::zero(); width + 1];
        reduced[..cost.len()].clone_from_slice(cost);
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = cost.get(b).cloned().unwrap_or_else(Rational::zero);
            if cb.is_zero() {
                continue;
            }
            for (r, a) in reduced.iter_mut().zip(row) {
                *r -= &cb * a;
            }
        }
        self.reduced = reduced;
    }

    fn phase_one(&mut self) -> bool {
        if self.artificial_from == self.width {
            return true;
        }
        let mut cost = vec![Rational::zero(); self.width];
        for c in cost.iter_mut().skip(self.artificial_from) {
            *c = Rational::one();
        }
        self.set_costs(&cost);
        let bounded = self.iterate(self.width);
        debug_assert!(bounded, "phase one is bounded below by zero");
        if !self.reduced[self.width].is_zero() {
            return false;
        }
        self.drive_out_artificials();
        true
    }

    /// Pivots zero-level artificials out of the basis, dropping rows that
    /// turn out to be redundant.
    fn drive_out_artificials(&mut self) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] < self.artificial_from {
                i += 1;
                continue;
            }
            match (0..self.artificial_from).find(|&j| !self.rows[i][j].is_zero()) {
                Some(j) => {
                    self.pivot(i, j);
                    i += 1;
                }
                None => {
                    self.rows.remove(i);
                    self.basis.remove(i);
                }
            }
        }
    }

    fn phase_two(&mut self, cost: &[Rational]) -> bool {
        self.set_costs(cost);
        self.iterate(self.artificial_from)
    }

    /// Runs simplex iterations with entering columns limited to
    /// `0..allowed`. Returns false on unboundedness.
    fn iterate(&mut self, allowed: usize) -> bool {
        loop {
            let Some(enter) = (0..allowed).find(|&j| self.reduced[j].is_negative()) else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[enter].is_positive() {
                    continue;
                }
                let ratio = &row[self.width] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((l, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*l])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((row, _)) => self.pivot(row, enter),
                None => return false,
            }
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = self.rows[row][col].recip();
        for a in self.rows[row].iter_mut() {
            *a *= &inv;
        }
        let pivot_row = self.rows[row].clone();
        for (i, other) in self.rows.iter_mut().enumerate() {
            if i == row || other[col].is_zero() {
                continue;
            }
            let factor = other[col].clone();
            for (a, p) in other.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *a -= &factor * p;
                }
            }
        }
        if !self.reduced[col].is_zero() {
            let factor = self.reduced[col].clone();
            for (a, p) in self.reduced.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *a -= &factor * p;
                }
            }
        }
        self.basis[row] = col;
    }

    fn primal(&self, num_vars: usize) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); num_vars];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < num_vars {
                x[b] = row[self.width].clone();
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn row(values: &[i64]) -> Vec<Rational> {
        values.iter().map(|&v| int(v)).collect()
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut lp = LinearProgram::new(2);
        lp.push(row(&[1, 0]), Sense::Le, int(4));
        lp.push(row(&[0, 2]), Sense::Le, int(12));
        lp.push(row(&[3, 2]), Sense::Le, int(18));
        let sol = lp.solve(&row(&[3, 5]), Direction::Maximize);
        assert_eq!(sol.status, Status::Optimal);
        assert_eq!(sol.value, Some(int(36)));
        assert_eq!(sol.assignment, row(&[2, 6]));
        assert!(lp.is_feasible_point(&sol.assignment));
    }

    #[test]
    fn equalities_and_lower_bounds() {
        // min x + y s.t. x + 2y = 3, x >= 1/2
        let mut lp = LinearProgram::new(2);
        lp.push(row(&[1, 2]), Sense::Eq, int(3));
        lp.push(row(&[1, 0]), Sense::Ge, ratio(1, 2));
        let sol = lp.solve(&row(&[1, 1]), Direction::Minimize);
        assert_eq!(sol.value, Some(ratio(7, 4)));
        assert_eq!(sol.assignment, vec![ratio(1, 2), ratio(5, 4)]);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.push(row(&[1]), Sense::Ge, int(2));
        lp.push(row(&[1]), Sense::Le, int(1));
        assert_eq!(lp.solve(&row(&[1]), Direction::Minimize).status, Status::Infeasible);

        let mut lp = LinearProgram::new(2);
        lp.push(row(&[1, -1]), Sense::Le, int(1));
        assert_eq!(lp.solve(&row(&[1, 1]), Direction::Maximize).status, Status::Unbounded);
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let mut lp = LinearProgram::new(2);
        lp.push(row(&[1, 1]), Sense::Eq, int(2));
        lp.push(row(&[2, 2]), Sense::Eq, int(4));
        let sol = lp.solve(&row(&[1, 0]), Direction::Maximize);
        assert_eq!(sol.value, Some(int(2)));
    }

    #[test]
    fn negative_right_hand_sides() {
        // -x <= -3  (x >= 3), min x
        let mut lp = LinearProgram::new(1);
        lp.push(row(&[-1]), Sense::Le, int(-3));
        let sol = lp.solve(&row(&[1]), Direction::Minimize);
        assert_eq!(sol.value, Some(int(3)));
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example: cycles under the textbook largest-coefficient rule.
        let mut lp = LinearProgram::new(4);
        lp.push(vec![ratio(1, 4), int(-60), ratio(-1, 25), int(9)], Sense::Le, int(0));
        lp.push(vec![ratio(1, 2), int(-90), ratio(-1, 50), int(3)], Sense::Le, int(0));
        lp.push(row(&[0, 0, 1, 0]), Sense::Le, int(1));
        let obj = vec![ratio(3, 4), int(-150), ratio(1, 50), int(-6)];
        let sol = lp.solve(&obj, Direction::Maximize);
        assert_eq!(sol.status, Status::Optimal);
        assert_eq!(sol.value, Some(ratio(1, 20)));
    }
}
