//! Linear programs in bounded row form and their solution by a revised dual
//! simplex method.
//!
//! ```text
//! minimize    c x
//! subject to  row_lower <= A x <= row_upper
//!             col_lower <=   x <= col_upper
//! ```

mod lu;
mod presolve;
mod simplex;

use std::time::Instant;

use crate::model::{MilpModel, Sense};

pub use presolve::{presolve, Reduction};
pub use simplex::DualSimplex;

#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    cost: Vec<f64>,
    col_lower: Vec<f64>,
    col_upper: Vec<f64>,
    row_lower: Vec<f64>,
    row_upper: Vec<f64>,
    row_start: Vec<usize>,
    row_col: Vec<u32>,
    row_val: Vec<f64>,
}

impl LpProblem {
    /// `columns` variables with zero cost and bounds `[0, inf)`.
    pub fn new(columns: usize) -> Self {
        LpProblem {
            cost: vec![0.0; columns],
            col_lower: vec![0.0; columns],
            col_upper: vec![f64::INFINITY; columns],
            row_lower: Vec::new(),
            row_upper: Vec::new(),
            row_start: vec![0],
            row_col: Vec::new(),
            row_val: Vec::new(),
        }
    }

    /// Continuous relaxation of an assembled model.
    pub fn from_model(model: &MilpModel) -> Self {
        let mut lp = LpProblem::new(model.column_count());
        lp.cost.copy_from_slice(model.objective());
        lp.col_lower.copy_from_slice(model.lower());
        lp.col_upper.copy_from_slice(model.upper());
        lp.row_lower.reserve(model.row_count());
        lp.row_upper.reserve(model.row_count());
        lp.row_col.reserve(model.nonzero_count());
        lp.row_val.reserve(model.nonzero_count());
        for (r, row) in model.rows().iter().enumerate() {
            let (lo, hi) = match row.sense {
                Sense::Le => (f64::NEG_INFINITY, row.rhs),
                Sense::Ge => (row.rhs, f64::INFINITY),
                Sense::Eq => (row.rhs, row.rhs),
            };
            lp.row_lower.push(lo);
            lp.row_upper.push(hi);
            for (c, v) in model.row_entries(r) {
                lp.row_col.push(c as u32);
                lp.row_val.push(v);
            }
            lp.row_start.push(lp.row_col.len());
        }
        lp
    }

    pub fn set_column(&mut self, col: usize, cost: f64, lower: f64, upper: f64) {
        self.cost[col] = cost;
        self.col_lower[col] = lower;
        self.col_upper[col] = upper;
    }

    pub fn set_bounds(&mut self, col: usize, lower: f64, upper: f64) {
        self.col_lower[col] = lower;
        self.col_upper[col] = upper;
    }

    /// Adds `lower <= sum(v * x[c]) <= upper`; returns the row index.
    pub fn add_row(&mut self, lower: f64, upper: f64, entries: &[(usize, f64)]) -> usize {
        let mut sorted: Vec<(usize, f64)> = entries.iter().copied().filter(|e| e.1 != 0.0).collect();
        sorted.sort_unstable_by_key(|e| e.0);
        for (c, v) in sorted {
            assert!(c < self.cost.len(), "row references column {c} of {}", self.cost.len());
            if self.row_col.len() > *self.row_start.last().unwrap() && *self.row_col.last().unwrap() as usize == c {
                *self.row_val.last_mut().unwrap() += v;
            } else {
                self.row_col.push(c as u32);
                self.row_val.push(v);
            }
        }
        self.row_lower.push(lower);
        self.row_upper.push(upper);
        self.row_start.push(self.row_col.len());
        self.row_lower.len() - 1
    }

    pub fn columns(&self) -> usize {
        self.cost.len()
    }

    pub fn rows(&self) -> usize {
        self.row_lower.len()
    }

    pub fn cost(&self) -> &[f64] {
        &self.cost
    }

    pub fn col_lower(&self) -> &[f64] {
        &self.col_lower
    }

    pub fn col_upper(&self) -> &[f64] {
        &self.col_upper
    }

    pub fn row_lower(&self) -> &[f64] {
        &self.row_lower
    }

    pub fn row_upper(&self) -> &[f64] {
        &self.row_upper
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_start[r]..self.row_start[r + 1]).map(move |e| (self.row_col[e] as usize, self.row_val[e]))
    }

    pub fn row_activity(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows()).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.cost.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Iteration or time limit reached before optimality.
    Interrupted,
}

#[derive(Clone, Debug)]
pub struct LpOptions {
    pub primal_tolerance: f64,
    pub dual_tolerance: f64,
    pub max_iterations: Option<usize>,
    pub deadline: Option<Instant>,
    /// Consecutive degenerate pivots before smallest-index pivoting kicks in.
    pub stall_limit: usize,
    pub refactor_interval: usize,
    /// Solve with randomly shifted costs first, then clean up on the true ones.
    pub perturb: bool,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            primal_tolerance: 1e-9,
            dual_tolerance: 1e-9,
            max_iterations: None,
            deadline: None,
            stall_limit: 1000,
            refactor_interval: 100,
            perturb: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LpResult {
    pub status: LpStatus,
    pub objective: f64,
    pub x: Vec<f64>,
    pub row_activity: Vec<f64>,
    /// One multiplier per row; `c - A^T y` gives the reduced costs.
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
}

impl LpResult {
    /// Largest violation of a row or column bound.
    pub fn primal_residual(&self, problem: &LpProblem) -> f64 {
        let act = problem.row_activity(&self.x);
        let mut worst: f64 = 0.0;
        for r in 0..problem.rows() {
            worst = worst.max(problem.row_lower[r] - act[r]).max(act[r] - problem.row_upper[r]);
        }
        for c in 0..problem.columns() {
            worst = worst
                .max(problem.col_lower[c] - self.x[c])
                .max(self.x[c] - problem.col_upper[c]);
        }
        worst
    }

    /// Largest product of a multiplier and the slack of its bound, over
    /// rows and columns, plus any multiplier with the wrong sign.
    pub fn complementarity_residual(&self, problem: &LpProblem) -> f64 {
        let act = problem.row_activity(&self.x);
        let gap = |mult: f64, value: f64, lo: f64, hi: f64| -> f64 {
            // Positive multipliers price the lower bound, negative the upper.
            if mult > 0.0 {
                if lo.is_finite() {
                    mult * (value - lo).abs()
                } else {
                    mult
                }
            } else if mult < 0.0 {
                if hi.is_finite() {
                    -mult * (hi - value).abs()
                } else {
                    -mult
                }
            } else {
                0.0
            }
        };
        let mut worst: f64 = 0.0;
        for r in 0..problem.rows() {
            worst = worst.max(gap(self.duals[r], act[r], problem.row_lower[r], problem.row_upper[r]));
        }
        for c in 0..problem.columns() {
            worst = worst.max(gap(
                self.reduced_costs[c],
                self.x[c],
                problem.col_lower[c],
                problem.col_upper[c],
            ));
        }
        worst
    }
}

/// Solves `problem` from a slack basis with default options.
pub fn solve_lp(problem: &LpProblem) -> LpResult {
    solve_lp_with(problem, &LpOptions::default())
}

pub fn solve_lp_with(problem: &LpProblem, options: &LpOptions) -> LpResult {
    let mut engine = DualSimplex::new(problem, options.clone());
    engine.solve();
    engine.result()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_bounded_variable() {
        let mut lp = LpProblem::new(1);
        lp.set_column(0, -1.0, 0.0, 1.0);
        let r = solve_lp(&lp);
        assert_eq!(r.status, LpStatus::Optimal);
        assert_eq!(r.x, vec![1.0]);
        assert_eq!(r.objective, -1.0);
    }

    #[test]
    fn textbook_two_variable() {
        // max 3x + 5y st x <= 4, 2y <= 12, 3x + 2y <= 18
        let mut lp = LpProblem::new(2);
        lp.set_column(0, -3.0, 0.0, f64::INFINITY);
        lp.set_column(1, -5.0, 0.0, f64::INFINITY);
        lp.add_row(f64::NEG_INFINITY, 4.0, &[(0, 1.0)]);
        lp.add_row(f64::NEG_INFINITY, 12.0, &[(1, 2.0)]);
        lp.add_row(f64::NEG_INFINITY, 18.0, &[(0, 3.0), (1, 2.0)]);
        let r = solve_lp(&lp);
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective + 36.0).abs() < 1e-9);
        assert!((r.x[0] - 2.0).abs() < 1e-9 && (r.x[1] - 6.0).abs() < 1e-9);
        assert!(r.primal_residual(&lp) <= 1e-8);
        assert!(r.complementarity_residual(&lp) <= 1e-6);
        // Duals of the binding rows: 0, -1.5, -1.
        assert!((r.duals[1] + 1.5).abs() < 1e-9 && (r.duals[2] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasibility() {
        let mut lp = LpProblem::new(2);
        lp.add_row(3.0, f64::INFINITY, &[(0, 1.0), (1, 1.0)]);
        lp.set_bounds(0, 0.0, 1.0);
        lp.set_bounds(1, 0.0, 1.0);
        assert_eq!(solve_lp(&lp).status, LpStatus::Infeasible);
    }

    #[test]
    fn detects_unboundedness() {
        let mut lp = LpProblem::new(2);
        lp.set_column(0, -1.0, 0.0, f64::INFINITY);
        lp.add_row(f64::NEG_INFINITY, 1.0, &[(0, 1.0), (1, -1.0)]);
        assert_eq!(solve_lp(&lp).status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_and_ranges() {
        // min x + 2y + 3z st x + y + z = 2, 0.5 <= y - z <= 1, x <= 0.25
        let mut lp = LpProblem::new(3);
        lp.set_column(0, 1.0, 0.0, 0.25);
        lp.set_column(1, 2.0, 0.0, f64::INFINITY);
        lp.set_column(2, 3.0, 0.0, f64::INFINITY);
        lp.add_row(2.0, 2.0, &[(0, 1.0), (1, 1.0), (2, 1.0)]);
        lp.add_row(0.5, 1.0, &[(1, 1.0), (2, -1.0)]);
        let r = solve_lp(&lp);
        assert_eq!(r.status, LpStatus::Optimal);
        // x = 0.25, y = 1.75, z = 0 -> 0.25 + 3.5 = 3.75 breaks y - z <= 1;
        // so y - z = 1 with y + z = 1.75: y = 1.375, z = 0.375.
        assert!((r.objective - (0.25 + 2.75 + 1.125)).abs() < 1e-9, "{}", r.objective);
        assert!(r.primal_residual(&lp) <= 1e-8);
        assert!(r.complementarity_residual(&lp) <= 1e-6);
    }

    #[test]
    fn free_variable() {
        // min y st y >= x - 1, y >= -x + 1, x free, y free
        let mut lp = LpProblem::new(2);
        lp.set_column(0, 0.0, f64::NEG_INFINITY, f64::INFINITY);
        lp.set_column(1, 1.0, f64::NEG_INFINITY, f64::INFINITY);
        lp.add_row(-1.0, f64::INFINITY, &[(1, 1.0), (0, -1.0)]);
        lp.add_row(1.0, f64::INFINITY, &[(1, 1.0), (0, 1.0)]);
        let r = solve_lp(&lp);
        assert_eq!(r.status, LpStatus::Optimal);
        assert!(r.objective.abs() < 1e-9);
        assert!((r.x[0] - 1.0).abs() < 1e-9);
    }
}
