//! Bounded revised dual simplex.
//!
//! Every row gets a logical variable `r = a x` carrying the row bounds, so
//! the working system is `[A  -I] (x, r) = 0` with bounds on all `n + m`
//! variables. The method keeps the basis dual feasible and drives out
//! primal infeasibility, choosing the leaving row by dual steepest edge and
//! the entering column by a bound-flipping ratio test with a Harris pass.
//! After a long run of degenerate pivots it falls back to smallest-index
//! choices until progress resumes.
//!
//! Variables whose reduced cost points towards an infinite bound get a
//! temporary artificial bound; if one is still active at the optimum the
//! bound is widened, and a problem that keeps pressing against it is
//! reported unbounded.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::lu::Factor;
use super::{LpOptions, LpProblem, LpResult, LpStatus};

const BASIC: u8 = 0;
const AT_LOWER: u8 = 1;
const AT_UPPER: u8 = 2;
const AT_ZERO: u8 = 3;

const PIVOT_TOL: f64 = 1e-9;
const FIRST_ARTIFICIAL_BOUND: f64 = 1e7;
const LAST_ARTIFICIAL_BOUND: f64 = 1e13;

pub struct DualSimplex<'a> {
    prob: &'a LpProblem,
    opts: LpOptions,
    n: usize,
    m: usize,
    col_start: Vec<usize>,
    col_row: Vec<u32>,
    col_val: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    d: Vec<f64>,
    state: Vec<u8>,
    basis: Vec<usize>,
    weights: Vec<f64>,
    factor: Factor,
    factored: bool,
    primal_stale: bool,
    /// Variables with an artificial bound: `(var, true lower, true upper)`.
    artificial: Vec<(usize, f64, f64)>,
    artificial_bound: f64,
    status: Option<LpStatus>,
    iterations: usize,
    /// Cost shifts applied while `perturbed`.
    shift: Vec<f64>,
    perturbed: bool,
    // Scratch.
    work: Vec<f64>,
    rho: Vec<f64>,
    column: Vec<f64>,
    tau: Vec<f64>,
    alpha: Vec<f64>,
    marked: Vec<bool>,
    touched: Vec<usize>,
}

impl<'a> DualSimplex<'a> {
    pub fn new(prob: &'a LpProblem, opts: LpOptions) -> Self {
        let n = prob.columns();
        let m = prob.rows();
        let mut counts = vec![0usize; n + 1];
        for &c in &prob.row_col {
            counts[c as usize + 1] += 1;
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let col_start = counts.clone();
        let mut fill = counts;
        let mut col_row = vec![0u32; prob.row_col.len()];
        let mut col_val = vec![0.0; prob.row_col.len()];
        for r in 0..m {
            for e in prob.row_start[r]..prob.row_start[r + 1] {
                let c = prob.row_col[e] as usize;
                col_row[fill[c]] = r as u32;
                col_val[fill[c]] = prob.row_val[e];
                fill[c] += 1;
            }
        }
        let mut lower = prob.col_lower.clone();
        lower.extend_from_slice(&prob.row_lower);
        let mut upper = prob.col_upper.clone();
        upper.extend_from_slice(&prob.row_upper);
        let mut cost = prob.cost.clone();
        cost.resize(n + m, 0.0);
        let mut state = vec![AT_LOWER; n + m];
        let mut basis = Vec::with_capacity(m);
        for r in 0..m {
            state[n + r] = BASIC;
            basis.push(n + r);
        }
        let d = cost.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let shift = (0..n)
            .map(|j| {
                let free = !prob.col_lower[j].is_finite() && !prob.col_upper[j].is_finite();
                if free || prob.col_lower[j] == prob.col_upper[j] {
                    0.0
                } else {
                    (1.0 + prob.cost[j].abs()) * 5e-7 * rng.gen_range(0.5..1.0)
                }
            })
            .collect();
        DualSimplex {
            prob,
            opts,
            n,
            m,
            col_start,
            col_row,
            col_val,
            lower,
            upper,
            cost,
            x: vec![0.0; n + m],
            d,
            state,
            basis,
            weights: vec![1.0; m],
            factor: Factor::default(),
            factored: false,
            primal_stale: true,
            artificial: Vec::new(),
            artificial_bound: FIRST_ARTIFICIAL_BOUND,
            status: None,
            iterations: 0,
            shift,
            perturbed: false,
            work: vec![0.0; m],
            rho: vec![0.0; m],
            column: vec![0.0; m],
            tau: vec![0.0; m],
            alpha: vec![0.0; n + m],
            marked: vec![false; n + m],
            touched: Vec::new(),
        }
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn status(&self) -> Option<LpStatus> {
        self.status
    }

    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.opts.deadline = deadline;
    }

    pub fn set_max_iterations(&mut self, limit: Option<usize>) {
        self.opts.max_iterations = limit;
    }

    pub fn col_lower(&self, col: usize) -> f64 {
        self.true_bounds(col).0
    }

    pub fn col_upper(&self, col: usize) -> f64 {
        self.true_bounds(col).1
    }

    fn true_bounds(&self, var: usize) -> (f64, f64) {
        match self.artificial.iter().find(|a| a.0 == var) {
            Some(&(_, lo, up)) => (lo, up),
            None => (self.lower[var], self.upper[var]),
        }
    }

    /// Changes the bounds of a structural column; the current basis is kept
    /// for a warm start.
    pub fn set_col_bounds(&mut self, col: usize, lower: f64, upper: f64) {
        if let Some(k) = self.artificial.iter().position(|a| a.0 == col) {
            self.artificial.swap_remove(k);
        }
        self.lower[col] = lower;
        self.upper[col] = upper;
        if self.state[col] != BASIC {
            self.place_nonbasic(col);
        }
        self.status = None;
    }

    /// The basic variables, by position. Structurals are `0..n`, the
    /// logical of row `r` is `n + r`.
    pub fn basis_snapshot(&self) -> Vec<u32> {
        self.basis.iter().map(|&v| v as u32).collect()
    }

    /// Restarts from a basis taken by [`DualSimplex::basis_snapshot`] under
    /// possibly different bounds. Nonbasic variables go to the bound their
    /// reduced cost asks for.
    pub fn load_basis(&mut self, basis: &[u32]) {
        assert_eq!(basis.len(), self.m, "basis size");
        for j in 0..self.n + self.m {
            if self.state[j] == BASIC {
                self.state[j] = AT_LOWER;
            }
        }
        for (p, &v) in basis.iter().enumerate() {
            self.basis[p] = v as usize;
            self.state[v as usize] = BASIC;
        }
        self.weights.iter_mut().for_each(|w| *w = 1.0);
        self.factored = false;
        self.primal_stale = true;
        self.status = None;
    }

    /// Structural values.
    pub fn values(&self) -> &[f64] {
        &self.x[..self.n]
    }

    /// Structural reduced costs of the last solve.
    pub fn reduced_costs(&self) -> &[f64] {
        &self.d[..self.n]
    }

    pub fn objective(&self) -> f64 {
        (0..self.n).map(|j| self.prob.cost[j] * self.x[j]).sum()
    }

    fn column(&self, var: usize) -> ColumnIter<'_> {
        if var < self.n {
            let range = self.col_start[var]..self.col_start[var + 1];
            ColumnIter::Structural {
                rows: &self.col_row[range.clone()],
                vals: &self.col_val[range],
                k: 0,
            }
        } else {
            ColumnIter::Logical(Some(var - self.n))
        }
    }

    /// Puts a nonbasic variable at the bound its reduced cost asks for,
    /// adding an artificial bound when that side is infinite.
    fn place_nonbasic(&mut self, j: usize) {
        let tol = self.opts.dual_tolerance;
        let (lo, up) = (self.lower[j], self.upper[j]);
        let dj = self.d[j];
        let want_upper = if dj > tol {
            false
        } else if dj < -tol {
            true
        } else {
            match self.state[j] {
                AT_UPPER => up.is_finite() || !lo.is_finite(),
                _ => !lo.is_finite() && up.is_finite(),
            }
        };
        let new_state;
        if want_upper {
            if up.is_finite() {
                new_state = AT_UPPER;
            } else if dj.abs() <= tol && lo.is_finite() {
                new_state = AT_LOWER;
            } else if dj.abs() <= tol {
                new_state = AT_ZERO;
            } else {
                let bound = lo.max(0.0) + self.artificial_bound;
                self.artificial.push((j, lo, up));
                self.upper[j] = bound;
                new_state = AT_UPPER;
            }
        } else if lo.is_finite() {
            new_state = AT_LOWER;
        } else if dj.abs() <= tol && up.is_finite() {
            new_state = AT_UPPER;
        } else if dj.abs() <= tol {
            new_state = AT_ZERO;
        } else {
            let bound = up.min(0.0) - self.artificial_bound;
            self.artificial.push((j, lo, up));
            self.lower[j] = bound;
            new_state = AT_LOWER;
        }
        let value = match new_state {
            AT_LOWER => self.lower[j],
            AT_UPPER => self.upper[j],
            _ => 0.0,
        };
        self.state[j] = new_state;
        if self.x[j] != value {
            self.x[j] = value;
            self.primal_stale = true;
        }
    }

    fn make_dual_feasible(&mut self) {
        for j in 0..self.n + self.m {
            if self.state[j] != BASIC {
                self.place_nonbasic(j);
            }
        }
    }

    fn refactor(&mut self) {
        let n = self.n;
        let (factor, replaced) = {
            let basis = &self.basis;
            let this = &*self;
            Factor::new(self.m, |p| this.column(basis[p]))
        };
        self.factor = factor;
        log::trace!("refactored basis of {} rows, {} nonzeros", self.m, self.factor.fill());
        for rep in &replaced {
            let old = self.basis[rep.position];
            let logical = n + rep.row;
            self.basis[rep.position] = logical;
            self.state[logical] = BASIC;
            self.state[old] = AT_LOWER;
            self.d[old] = 0.0;
            let (lo, up) = (self.lower[old], self.upper[old]);
            let v = self.x[old];
            self.state[old] = if lo.is_finite() && (!up.is_finite() || (v - lo).abs() <= (up - v).abs()) {
                AT_LOWER
            } else if up.is_finite() {
                AT_UPPER
            } else {
                AT_ZERO
            };
        }
        if !replaced.is_empty() {
            log::debug!("basis repaired at {} positions", replaced.len());
            self.weights.iter_mut().for_each(|w| *w = 1.0);
        }
        self.factored = true;
        self.compute_duals();
        self.make_dual_feasible();
        self.compute_primal();
    }

    fn compute_primal(&mut self) {
        let n = self.n;
        let mut rhs = std::mem::take(&mut self.column);
        rhs.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..self.n + self.m {
            if self.state[j] == BASIC {
                continue;
            }
            let xj = match self.state[j] {
                AT_LOWER => self.lower[j],
                AT_UPPER => self.upper[j],
                _ => 0.0,
            };
            self.x[j] = xj;
            if xj != 0.0 {
                if j < n {
                    for e in self.col_start[j]..self.col_start[j + 1] {
                        rhs[self.col_row[e] as usize] -= self.col_val[e] * xj;
                    }
                } else {
                    rhs[j - n] += xj;
                }
            }
        }
        self.factor.ftran(&mut rhs, &mut self.work);
        for p in 0..self.m {
            self.x[self.basis[p]] = rhs[p];
        }
        self.column = rhs;
        self.primal_stale = false;
    }

    fn compute_duals(&mut self) {
        let mut y = std::mem::take(&mut self.rho);
        for p in 0..self.m {
            y[p] = self.cost[self.basis[p]];
        }
        self.factor.btran(&mut y, &mut self.work);
        for j in 0..self.n {
            if self.state[j] == BASIC {
                self.d[j] = 0.0;
                continue;
            }
            let mut s = self.cost[j];
            for e in self.col_start[j]..self.col_start[j + 1] {
                s -= self.col_val[e] * y[self.col_row[e] as usize];
            }
            self.d[j] = s;
        }
        for r in 0..self.m {
            let j = self.n + r;
            self.d[j] = if self.state[j] == BASIC { 0.0 } else { self.cost[j] + y[r] };
        }
        self.rho = y;
    }

    fn infeasibility(&self, var: usize) -> f64 {
        let v = self.x[var];
        let tol = self.opts.primal_tolerance;
        if v < self.lower[var] - tol {
            self.lower[var] - v
        } else if v > self.upper[var] + tol {
            v - self.upper[var]
        } else {
            0.0
        }
    }

    fn choose_leaving(&self, bland: bool) -> Option<usize> {
        let mut best: Option<(f64, usize)> = None;
        for p in 0..self.m {
            let var = self.basis[p];
            let inf = self.infeasibility(var);
            if inf <= 0.0 {
                continue;
            }
            if bland {
                if best.is_none_or(|(_, q)| var < self.basis[q]) {
                    best = Some((0.0, p));
                }
            } else {
                let score = inf * inf / self.weights[p];
                if best.is_none_or(|(s, _)| score > s) {
                    best = Some((score, p));
                }
            }
        }
        best.map(|(_, p)| p)
    }

    /// Runs the dual simplex from the current basis.
    pub fn solve(&mut self) -> LpStatus {
        let start_iterations = self.iterations;
        if self.opts.perturb && !self.perturbed {
            self.perturb();
        }
        if !self.factored {
            self.refactor();
        } else {
            if self.perturbed {
                self.compute_duals();
            }
            self.make_dual_feasible();
            if self.primal_stale {
                self.compute_primal();
            }
        }
        let mut fresh = self.factor.eta_count() == 0;
        let mut degenerate_run = 0usize;
        loop {
            if let Some(limit) = self.opts.max_iterations {
                if self.iterations - start_iterations >= limit {
                    return self.finish(LpStatus::Interrupted);
                }
            }
            if self.iterations.is_multiple_of(32) {
                if let Some(deadline) = self.opts.deadline {
                    if Instant::now() >= deadline {
                        return self.finish(LpStatus::Interrupted);
                    }
                }
            }
            if self.factor.eta_count() >= self.opts.refactor_interval {
                self.refactor();
                fresh = true;
            }
            let bland = degenerate_run >= self.opts.stall_limit;
            let chosen = self.choose_leaving(bland);
            let Some(p) = chosen else {
                if !fresh {
                    self.refactor();
                    fresh = true;
                    continue;
                }
                if self.perturbed {
                    self.restore_costs();
                    self.compute_duals();
                    self.make_dual_feasible();
                    if self.primal_stale {
                        self.compute_primal();
                    }
                    continue;
                }
                match self.release_artificial_bounds() {
                    Some(status) => return self.finish(status),
                    None => {
                        fresh = false;
                        continue;
                    }
                }
            };
            match self.iterate(p, bland, fresh) {
                Step::Done(theta) => {
                    self.iterations += 1;
                    fresh = false;
                    if theta <= 1e-12 {
                        degenerate_run += 1;
                    } else {
                        degenerate_run = 0;
                    }
                }
                Step::Refactor => {
                    self.refactor();
                    fresh = true;
                }
                Step::Infeasible => {
                    if !fresh {
                        self.refactor();
                        fresh = true;
                        continue;
                    }
                    return self.finish(LpStatus::Infeasible);
                }
            }
        }
    }

    /// At an optimum of the artificially bounded problem: drops artificial
    /// bounds that are slack, widens the ones still active. Returns the
    /// final status, or `None` when iterations must continue.
    fn release_artificial_bounds(&mut self) -> Option<LpStatus> {
        if self.artificial.is_empty() {
            return Some(LpStatus::Optimal);
        }
        let mut pressing = false;
        let entries = std::mem::take(&mut self.artificial);
        let mut keep = Vec::new();
        for (var, lo, up) in entries {
            let at_artificial = (self.state[var] == AT_UPPER && !up.is_finite())
                || (self.state[var] == AT_LOWER && !lo.is_finite());
            if at_artificial {
                pressing = true;
                keep.push((var, lo, up));
            } else {
                self.lower[var] = lo;
                self.upper[var] = up;
            }
        }
        if !pressing {
            return Some(LpStatus::Optimal);
        }
        if self.artificial_bound >= LAST_ARTIFICIAL_BOUND {
            self.artificial = keep;
            return Some(LpStatus::Unbounded);
        }
        self.artificial_bound *= 1e3;
        for &(var, lo, up) in &keep {
            if !up.is_finite() {
                self.upper[var] = lo.max(0.0) + self.artificial_bound;
            }
            if !lo.is_finite() {
                self.lower[var] = up.min(0.0) - self.artificial_bound;
            }
        }
        self.artificial = keep;
        self.compute_primal();
        None
    }

    /// Shifts costs away from zero reduced cost so that ties in the ratio
    /// test become rare. The shifts are removed at the optimum and the
    /// remaining iterations run on the true costs.
    fn perturb(&mut self) {
        for j in 0..self.n {
            let s = self.shift[j];
            self.cost[j] = if self.state[j] == AT_UPPER { self.prob.cost[j] - s } else { self.prob.cost[j] + s };
        }
        self.perturbed = true;
    }

    fn restore_costs(&mut self) {
        self.cost[..self.n].copy_from_slice(&self.prob.cost);
        self.perturbed = false;
    }

    fn finish(&mut self, status: LpStatus) -> LpStatus {
        if self.perturbed {
            self.restore_costs();
        }
        self.status = Some(status);
        status
    }

    fn iterate(&mut self, p: usize, bland: bool, fresh: bool) -> Step {
        let n = self.n;
        let m = self.m;
        let leaving = self.basis[p];
        let below = self.x[leaving] < self.lower[leaving];
        let sigma = if below { 1.0 } else { -1.0 };
        let delta = self.infeasibility(leaving);

        let mut rho = std::mem::take(&mut self.rho);
        rho.iter_mut().for_each(|v| *v = 0.0);
        rho[p] = 1.0;
        self.factor.btran(&mut rho, &mut self.work);
        let rho_norm: f64 = rho.iter().map(|v| v * v).sum();
        self.weights[p] = rho_norm.max(1e-12);

        for &j in &self.touched {
            self.marked[j] = false;
            self.alpha[j] = 0.0;
        }
        self.touched.clear();
        for (r, &rr) in rho.iter().enumerate() {
            if rr.abs() <= 1e-13 {
                continue;
            }
            for e in self.prob.row_start[r]..self.prob.row_start[r + 1] {
                let j = self.prob.row_col[e] as usize;
                if self.state[j] == BASIC {
                    continue;
                }
                if !self.marked[j] {
                    self.marked[j] = true;
                    self.touched.push(j);
                }
                self.alpha[j] += rr * self.prob.row_val[e];
            }
            let j = n + r;
            if self.state[j] != BASIC {
                self.marked[j] = true;
                self.touched.push(j);
                self.alpha[j] = -rr;
            }
        }

        let dtol = self.opts.dual_tolerance;
        let mut cands: Vec<(f64, usize, f64)> = Vec::new();
        for &j in &self.touched {
            let a = self.alpha[j];
            if a.abs() < PIVOT_TOL || self.lower[j] == self.upper[j] {
                continue;
            }
            let at = sigma * a;
            let dj = self.d[j];
            let ratio = match self.state[j] {
                AT_LOWER if at < 0.0 => dj.max(0.0) / -at,
                AT_UPPER if at > 0.0 => (-dj).max(0.0) / at,
                AT_ZERO => dj.abs() / at.abs(),
                _ => continue,
            };
            cands.push((ratio, j, a.abs()));
        }
        if cands.is_empty() {
            self.rho = rho;
            return Step::Infeasible;
        }
        // Breakpoints are visited in ratio order through a heap; ratios are
        // non-negative, so their bit patterns sort like the values.
        let mut flips: Vec<usize> = Vec::new();
        let q_idx = if bland {
            let min = cands.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
            (0..cands.len())
                .filter(|&i| cands[i].0 <= min + 1e-12)
                .min_by_key(|&i| cands[i].1)
                .expect("nonempty")
        } else {
            let mut heap: BinaryHeap<Reverse<(u64, usize)>> =
                cands.iter().enumerate().map(|(i, c)| Reverse((c.0.to_bits(), i))).collect();
            let mut slope = delta;
            let mut blocking = None;
            while let Some(Reverse((_, i))) = heap.pop() {
                let (_, j, a) = cands[i];
                let range = self.upper[j] - self.lower[j];
                if range.is_finite() && self.state[j] != AT_ZERO {
                    let next = slope - a * range;
                    if next > 0.0 {
                        slope = next;
                        flips.push(i);
                        continue;
                    }
                }
                blocking = Some(i);
                break;
            }
            let Some(first) = blocking else {
                self.rho = rho;
                return Step::Infeasible;
            };
            // Harris pass over the remaining breakpoints.
            let rest = || std::iter::once(first).chain(heap.iter().map(|r| r.0 .1));
            let mut bound = f64::INFINITY;
            for i in rest() {
                let (_, j, a) = cands[i];
                bound = bound.min((self.d[j].abs() + dtol) / a);
            }
            let mut best = first;
            for i in rest() {
                let c = cands[i];
                if c.0 > bound {
                    continue;
                }
                let b = cands[best];
                if c.2 > b.2 || (c.2 == b.2 && (c.0, c.1) < (b.0, b.1)) {
                    best = i;
                }
            }
            best
        };
        let (theta_d, q, _) = cands[q_idx];

        let mut col = std::mem::take(&mut self.column);
        col.iter_mut().for_each(|v| *v = 0.0);
        for (r, v) in self.column(q) {
            col[r] = v;
        }
        self.factor.ftran(&mut col, &mut self.work);
        let pivot = col[p];
        let row_pivot = self.alpha[q];
        let mismatch = (pivot - row_pivot).abs() > 1e-7 * (1.0 + row_pivot.abs());
        if (mismatch && !fresh) || pivot.abs() < 1e-12 {
            self.column = col;
            self.rho = rho;
            return if fresh { Step::Infeasible } else { Step::Refactor };
        }

        // Dual update.
        let step = theta_d * sigma;
        if step != 0.0 {
            for &j in &self.touched {
                self.d[j] += step * self.alpha[j];
            }
        }
        self.d[q] = 0.0;
        self.d[leaving] = step;

        // Bound flips.
        if !flips.is_empty() {
            let mut delta_rhs = std::mem::take(&mut self.tau);
            delta_rhs.iter_mut().for_each(|v| *v = 0.0);
            for &i in &flips {
                let j = cands[i].1;
                if j == q {
                    continue;
                }
                let (old, new, state) = if self.state[j] == AT_LOWER {
                    (self.lower[j], self.upper[j], AT_UPPER)
                } else {
                    (self.upper[j], self.lower[j], AT_LOWER)
                };
                self.state[j] = state;
                self.x[j] = new;
                let dx = new - old;
                for (r, v) in self.column(j) {
                    delta_rhs[r] += v * dx;
                }
            }
            self.factor.ftran(&mut delta_rhs, &mut self.work);
            for pos in 0..m {
                let v = delta_rhs[pos];
                if v != 0.0 {
                    self.x[self.basis[pos]] -= v;
                }
            }
            self.tau = delta_rhs;
        }

        // Primal step.
        let target = if below { self.lower[leaving] } else { self.upper[leaving] };
        let t = (self.x[leaving] - target) / pivot;
        if t != 0.0 {
            for pos in 0..m {
                let v = col[pos];
                if v != 0.0 {
                    self.x[self.basis[pos]] -= t * v;
                }
            }
        }
        self.x[q] += t;
        self.x[leaving] = target;

        // Dual steepest edge weights.
        let mut tau = std::mem::take(&mut self.tau);
        tau.copy_from_slice(&rho);
        self.factor.ftran(&mut tau, &mut self.work);
        let wp = self.weights[p];
        for pos in 0..m {
            if pos == p {
                continue;
            }
            let a = col[pos];
            if a == 0.0 {
                continue;
            }
            let ratio = a / pivot;
            let w = self.weights[pos] - 2.0 * ratio * tau[pos] + ratio * ratio * wp;
            self.weights[pos] = w.max(ratio * ratio).max(1e-8);
        }
        self.weights[p] = (wp / (pivot * pivot)).max(1e-8);
        self.tau = tau;

        // Basis change.
        self.state[leaving] = if below { AT_LOWER } else { AT_UPPER };
        self.state[q] = BASIC;
        self.basis[p] = q;
        self.factor.update(p, &col);
        self.column = col;
        self.rho = rho;
        Step::Done(theta_d)
    }

    /// Packages the current point.
    pub fn result(&mut self) -> LpResult {
        let status = self.status.unwrap_or(LpStatus::Interrupted);
        if self.factored && self.factor.eta_count() > 0 {
            self.refactor();
        }
        if self.factored {
            self.compute_duals();
        }
        // compute_duals leaves y in `rho`, indexed by row.
        let duals = if self.factored { self.rho.clone() } else { vec![0.0; self.m] };
        LpResult {
            status,
            objective: self.objective(),
            x: self.x[..self.n].to_vec(),
            row_activity: self.x[self.n..].to_vec(),
            duals,
            reduced_costs: self.d[..self.n].to_vec(),
            iterations: self.iterations,
        }
    }
}

enum Step {
    Done(f64),
    Refactor,
    Infeasible,
}

enum ColumnIter<'a> {
    Structural { rows: &'a [u32], vals: &'a [f64], k: usize },
    Logical(Option<usize>),
}

impl Iterator for ColumnIter<'_> {
    type Item = (usize, f64);

    fn next(&mut self) -> Option<(usize, f64)> {
        match self {
            ColumnIter::Structural { rows, vals, k } => {
                let i = *k;
                if i < rows.len() {
                    *k += 1;
                    Some((rows[i] as usize, vals[i]))
                } else {
                    None
                }
            }
            ColumnIter::Logical(r) => r.take().map(|r| (r, -1.0)),
        }
    }
}
