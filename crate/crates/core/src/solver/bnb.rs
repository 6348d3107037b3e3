//! LP-based branch-and-bound for generic mixed-integer programs.
//!
//! Node selection dives depth first and backtracks to the open node with
//! the best bound. Branching follows [`BranchRule`] among the fractional
//! columns of highest priority; the default takes the most fractional one,
//! ties to the lowest index. Every node is re-solved by the dual simplex
//! from the parent's basis.
//!
//! Root reduced costs fix columns whenever the incumbent improves. If that
//! frees enough of the problem right at the root, the search restarts once
//! on a re-presolved copy.

use std::rc::Rc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::lp::{presolve, DualSimplex, LpOptions, LpProblem, LpStatus};
use super::{BranchRule, SolverOptions};

/// Linear program plus integrality flags.
#[derive(Clone, Debug)]
pub struct MipProblem {
    pub lp: LpProblem,
    pub integer: Vec<bool>,
    /// Branching priority per column, higher first. Empty means equal.
    pub priority: Vec<u8>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MipStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Time limit hit with an incumbent in hand.
    Feasible,
    /// Time limit hit without an incumbent.
    TimeLimit,
}

#[derive(Clone, Debug)]
pub struct MipOutcome {
    pub status: MipStatus,
    pub objective: Option<f64>,
    /// Proven lower bound on the optimum.
    pub bound: Option<f64>,
    pub values: Option<Vec<f64>>,
    pub nodes: usize,
    pub lp_iterations: usize,
    /// Root relaxation objective, if the root was solved.
    pub root_bound: Option<f64>,
}

/// Builds a complete candidate solution from a relaxation point.
pub type Heuristic<'h> = dyn FnMut(&[f64]) -> Option<Vec<f64>> + 'h;

struct Node {
    id: usize,
    bound: f64,
    /// Bound changes relative to the root: `(column, lower, upper)`.
    changes: Vec<(usize, f64, f64)>,
    /// Optimal basis of the parent, for nodes not solved right after it.
    basis: Option<Rc<Vec<u32>>>,
    /// How this node left its parent, for the pseudocost update.
    origin: Option<Origin>,
}

#[derive(Clone, Copy)]
struct Origin {
    col: usize,
    up: bool,
    /// Distance the branched value moved.
    step: f64,
    parent_z: f64,
}

/// Average objective gain per unit change, per column and direction.
struct Pseudocosts {
    sum: [Vec<f64>; 2],
    count: [Vec<u32>; 2],
    total: [f64; 2],
    seen: [u32; 2],
}

impl Pseudocosts {
    fn new(n: usize) -> Self {
        Pseudocosts {
            sum: [vec![0.0; n], vec![0.0; n]],
            count: [vec![0; n], vec![0; n]],
            total: [0.0; 2],
            seen: [0; 2],
        }
    }

    fn record(&mut self, origin: Origin, z: f64) {
        let d = origin.up as usize;
        let gain = (z - origin.parent_z).max(0.0) / origin.step.max(1e-9);
        self.sum[d][origin.col] += gain;
        self.count[d][origin.col] += 1;
        self.total[d] += gain;
        self.seen[d] += 1;
    }

    /// Per-unit estimate; columns never branched on take the average.
    fn estimate(&self, col: usize, up: bool) -> f64 {
        let d = up as usize;
        if self.count[d][col] > 0 {
            self.sum[d][col] / self.count[d][col] as f64
        } else if self.seen[d] > 0 {
            self.total[d] / self.seen[d] as f64
        } else {
            1.0
        }
    }
}

const FEASIBILITY_TOL: f64 = 1e-6;
/// Nodes between heuristic calls after the root.
const HEURISTIC_PERIOD: usize = 50;

/// Solves `mip` to optimality within the gaps of `options`.
pub fn solve_mip(mip: &MipProblem, options: &SolverOptions, heuristic: Option<&mut Heuristic<'_>>) -> MipOutcome {
    let deadline = Instant::now() + Duration::from_secs_f64(options.time_limit);
    solve_mip_until(mip, options, deadline, heuristic)
}

pub(crate) fn solve_mip_until(
    mip: &MipProblem,
    options: &SolverOptions,
    deadline: Instant,
    heuristic: Option<&mut Heuristic<'_>>,
) -> MipOutcome {
    solve_presolved(mip, options, deadline, heuristic, None, true)
}

/// Share of columns that root reduced-cost fixing must remove before the
/// search restarts on a re-presolved problem.
const RESTART_SHARE: f64 = 0.2;

fn solve_presolved(
    mip: &MipProblem,
    options: &SolverOptions,
    deadline: Instant,
    heuristic: Option<&mut Heuristic<'_>>,
    known: Option<f64>,
    may_restart: bool,
) -> MipOutcome {
    let Some(red) = presolve(&mip.lp, &mip.integer) else {
        return MipOutcome {
            status: MipStatus::Infeasible,
            objective: None,
            bound: None,
            values: None,
            nodes: 0,
            lp_iterations: 0,
            root_bound: None,
        };
    };
    log::debug!(
        "presolve kept {} of {} columns and {} of {} rows",
        red.lp.columns(),
        mip.lp.columns(),
        red.lp.rows(),
        mip.lp.rows()
    );
    let reduced = MipProblem {
        integer: red.kept_columns().iter().map(|&c| mip.integer[c]).collect(),
        priority: if mip.priority.is_empty() {
            Vec::new()
        } else {
            red.kept_columns().iter().map(|&c| mip.priority[c]).collect()
        },
        lp: red.lp.clone(),
    };
    let known = known.map(|z| z - red.offset);
    let present = heuristic.is_some();
    let mut heuristic = heuristic;
    let mut mapped = |x: &[f64]| -> Option<Vec<f64>> {
        let h = heuristic.as_deref_mut()?;
        let full = h(&red.expand(x))?;
        (full.len() == mip.lp.columns() && is_feasible(mip, &full, options.integrality_tolerance))
            .then(|| red.restrict(&full))
    };
    let mut mapped: Option<&mut Heuristic<'_>> = if present { Some(&mut mapped) } else { None };
    let end = search(&reduced, options, deadline, mapped.as_deref_mut(), known, may_restart);
    let mut out = match end {
        SearchEnd::Done(out) => out,
        SearchEnd::Restart {
            lower,
            upper,
            incumbent,
            nodes,
            lp_iterations,
            root_bound,
        } => {
            let mut tightened = reduced;
            for c in 0..lower.len() {
                tightened.lp.set_bounds(c, lower[c], upper[c]);
            }
            // The incumbent may sit outside the fixed bounds, so it goes in
            // as a cutoff only and comes back if nothing beats it.
            let z = tightened.lp.objective_value(&incumbent);
            let mut out = solve_presolved(&tightened, options, deadline, mapped, Some(z), false);
            if out.objective.is_none() {
                out.status = if out.status == MipStatus::TimeLimit {
                    MipStatus::Feasible
                } else {
                    MipStatus::Optimal
                };
                out.bound = Some(out.bound.map_or(z, |b| b.min(z)));
                out.objective = Some(z);
                out.values = Some(incumbent);
            }
            out.nodes += nodes;
            out.lp_iterations += lp_iterations;
            out.root_bound = root_bound;
            out
        }
    };
    out.values = out.values.map(|x| red.expand(&x));
    out.objective = out.objective.map(|z| z + red.offset);
    out.bound = out.bound.map(|z| z + red.offset);
    out.root_bound = out.root_bound.map(|z| z + red.offset);
    out
}

enum SearchEnd {
    Done(MipOutcome),
    /// Root fixing removed enough columns to be worth a fresh presolve.
    Restart {
        lower: Vec<f64>,
        upper: Vec<f64>,
        incumbent: Vec<f64>,
        nodes: usize,
        lp_iterations: usize,
        root_bound: Option<f64>,
    },
}

fn search(
    mip: &MipProblem,
    options: &SolverOptions,
    deadline: Instant,
    mut heuristic: Option<&mut Heuristic<'_>>,
    known: Option<f64>,
    may_restart: bool,
) -> SearchEnd {
    let lp = &mip.lp;
    let n = lp.columns();
    let int_tol = options.integrality_tolerance;
    let lp_options = LpOptions {
        deadline: Some(deadline),
        ..LpOptions::default()
    };
    let mut engine = DualSimplex::new(lp, lp_options);
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);

    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut open: Vec<Node> = Vec::new();
    let mut next_id = 1usize;
    let mut nodes = 0usize;
    let mut applied: Vec<usize> = Vec::new();
    let mut root_bound = None;
    // Smallest bound among nodes discarded only because of the gap.
    let mut gap_pruned = f64::INFINITY;
    let mut pseudocosts = Pseudocosts::new(n);
    // Root bounds, tightened by reduced-cost fixing as incumbents improve.
    let mut lower = lp.col_lower().to_vec();
    let mut upper = lp.col_upper().to_vec();
    let mut root: Option<RootDuals> = None;
    let mut current = Some(Node {
        id: 0,
        bound: f64::NEG_INFINITY,
        changes: Vec::new(),
        basis: None,
        origin: None,
    });

    // Best objective so far, counting one known from outside this search.
    let best = |inc: &Option<(f64, Vec<f64>)>| -> f64 {
        inc.as_ref().map_or(f64::INFINITY, |i| i.0).min(known.unwrap_or(f64::INFINITY))
    };
    let cutoff = |inc: &Option<(f64, Vec<f64>)>| -> f64 {
        let z = best(inc);
        if z.is_finite() {
            z - options.absolute_gap.max(options.relative_gap * z.abs())
        } else {
            z
        }
    };

    let try_candidate = |values: Vec<f64>, incumbent: &mut Option<(f64, Vec<f64>)>| -> bool {
        if values.len() != n || !is_feasible(mip, &values, int_tol) {
            return false;
        }
        let z = lp.objective_value(&values);
        if z < best(incumbent) - 1e-9 {
            log::debug!("new incumbent {z}");
            *incumbent = Some((z, values));
            true
        } else {
            false
        }
    };

    let mut timed_out = false;
    let mut unbounded = false;
    // Cutoff at the last round of reduced-cost fixing.
    let mut fixed_at = f64::INFINITY;
    let mut heuristic_time = Duration::ZERO;
    loop {
        let (node, popped) = match current.take() {
            Some(node) => (node, false),
            None => match pop_best(&mut open) {
                Some(node) => (node, true),
                None => break,
            },
        };
        if node.bound >= cutoff(&incumbent) {
            gap_pruned = gap_pruned.min(node.bound);
            continue;
        }
        if Instant::now() >= deadline {
            open.push(node);
            timed_out = true;
            break;
        }
        // Move the engine to this node's bounds.
        for &c in &applied {
            engine.set_col_bounds(c, lower[c], upper[c]);
        }
        applied.clear();
        let mut empty = false;
        for &(c, lo, up) in &node.changes {
            let (lo, up) = (lo.max(lower[c]), up.min(upper[c]));
            empty |= lo > up;
            engine.set_col_bounds(c, lo, up.max(lo));
            applied.push(c);
        }
        if empty {
            // Reduced-cost fixing has since ruled this node out.
            gap_pruned = gap_pruned.min(node.bound);
            continue;
        }
        if popped {
            if let Some(basis) = &node.basis {
                engine.load_basis(basis);
            }
        }
        nodes += 1;
        let status = engine.solve();
        match status {
            LpStatus::Interrupted => {
                open.push(node);
                timed_out = true;
                break;
            }
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                if node.id == 0 {
                    unbounded = true;
                    break;
                }
                // An unbounded child of a bounded parent only arises from
                // numerical trouble; drop it.
                log::warn!("unbounded relaxation at node {}", node.id);
                continue;
            }
            LpStatus::Optimal => {}
        }
        let z = engine.objective();
        if node.id == 0 {
            log::debug!("root relaxation {z} after {} simplex iterations", engine.iterations());
            root_bound = Some(z);
            root = Some(RootDuals {
                objective: z,
                x: engine.values().to_vec(),
                reduced: engine.reduced_costs().to_vec(),
            });
        }
        if let Some(origin) = node.origin {
            pseudocosts.record(origin, z);
        }
        if z >= cutoff(&incumbent) {
            gap_pruned = gap_pruned.min(z.max(node.bound));
            continue;
        }
        let x = engine.values().to_vec();
        let Some((col, value)) = choose_branch(mip, &x, int_tol, options.branching, &pseudocosts, &mut rng) else {
            let mut snapped = x;
            for (c, v) in snapped.iter_mut().enumerate() {
                if mip.integer[c] {
                    *v = v.round();
                }
            }
            if !try_candidate(snapped.clone(), &mut incumbent) {
                // Rounding broke a row; keep the raw point.
                let raw = engine.values().to_vec();
                let z = lp.objective_value(&raw);
                if z < best(&incumbent) - 1e-9 {
                    incumbent = Some((z, raw));
                }
            }
            continue;
        };
        if let Some(h) = heuristic.as_deref_mut() {
            if node.id == 0 || nodes.is_multiple_of(HEURISTIC_PERIOD) {
                let started = Instant::now();
                if let Some(values) = h(&x) {
                    try_candidate(values, &mut incumbent);
                }
                heuristic_time += started.elapsed();
            }
        }
        if let Some(r) = &root {
            let limit = cutoff(&incumbent);
            if limit < fixed_at {
                fixed_at = limit;
                let fixed = r.fix(mip, limit, &mut lower, &mut upper);
                for &c in &fixed {
                    if !applied.contains(&c) {
                        engine.set_col_bounds(c, lower[c], upper[c]);
                    }
                }
                if !fixed.is_empty() {
                    log::debug!("reduced-cost fixing: {} columns at cutoff {limit}", fixed.len());
                }
                let width = (0..n).filter(|&c| lower[c] < upper[c]).count();
                let root_width = (0..n).filter(|&c| lp.col_lower()[c] < lp.col_upper()[c]).count();
                if may_restart && node.id == 0 && (width as f64) < (1.0 - RESTART_SHARE) * root_width as f64 {
                    if let Some((_, best)) = incumbent {
                        log::debug!("restarting with {width} of {root_width} columns free");
                        return SearchEnd::Restart {
                            lower,
                            upper,
                            incumbent: best,
                            nodes,
                            lp_iterations: engine.iterations(),
                            root_bound,
                        };
                    }
                }
            }
        }
        let z_node = z.max(node.bound);
        let floor = value.floor();
        let (lower_col, upper_col) = bound_of(&node.changes, col, lp.col_lower()[col], lp.col_upper()[col]);
        let mut down = node.changes.clone();
        set_change(&mut down, col, lower_col, floor);
        let mut upc = node.changes;
        set_change(&mut upc, col, floor + 1.0, upper_col);
        let basis = Some(Rc::new(engine.basis_snapshot()));
        let origin = |up: bool| Origin {
            col,
            up,
            step: if up { floor + 1.0 - value } else { value - floor },
            parent_z: z,
        };
        let down = Node {
            id: next_id,
            bound: z_node,
            changes: down,
            basis: basis.clone(),
            origin: Some(origin(false)),
        };
        let upn = Node {
            id: next_id + 1,
            bound: z_node,
            changes: upc,
            basis,
            origin: Some(origin(true)),
        };
        next_id += 2;
        if value - floor >= 0.5 {
            open.push(down);
            current = Some(Node { basis: None, ..upn });
        } else {
            open.push(upn);
            current = Some(Node { basis: None, ..down });
        }
    }

    let lp_iterations = engine.iterations();
    log::debug!(
        "branch-and-bound: {nodes} nodes, {lp_iterations} simplex iterations, {:.1}s in the heuristic",
        heuristic_time.as_secs_f64()
    );
    if unbounded {
        return SearchEnd::Done(MipOutcome {
            status: MipStatus::Unbounded,
            objective: None,
            bound: None,
            values: None,
            nodes,
            lp_iterations,
            root_bound,
        });
    }
    let open_bound = open.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    SearchEnd::Done(match incumbent {
        Some((z, values)) => {
            let bound = open_bound.min(gap_pruned).min(z);
            let status = if timed_out && open_bound < cutoff(&Some((z, Vec::new()))) {
                MipStatus::Feasible
            } else {
                MipStatus::Optimal
            };
            MipOutcome {
                status,
                objective: Some(z),
                bound: Some(if bound.is_finite() { bound } else { z }),
                values: Some(values),
                nodes,
                lp_iterations,
                root_bound,
            }
        }
        None => MipOutcome {
            status: if timed_out { MipStatus::TimeLimit } else { MipStatus::Infeasible },
            objective: None,
            bound: if timed_out && open_bound.is_finite() { Some(open_bound) } else { None },
            values: None,
            nodes,
            lp_iterations,
            root_bound,
        },
    })
}

/// Root relaxation data for reduced-cost fixing.
struct RootDuals {
    objective: f64,
    x: Vec<f64>,
    reduced: Vec<f64>,
}

impl RootDuals {
    /// Fixes integer columns that sit at a root bound and whose reduced cost
    /// alone lifts any move off that bound past `cutoff`. Returns the
    /// columns changed.
    fn fix(&self, mip: &MipProblem, cutoff: f64, lower: &mut [f64], upper: &mut [f64]) -> Vec<usize> {
        let slack = cutoff - self.objective;
        let mut fixed = Vec::new();
        if !slack.is_finite() || slack < 0.0 {
            return fixed;
        }
        for c in 0..lower.len() {
            if !mip.integer[c] || lower[c] >= upper[c] {
                continue;
            }
            let d = self.reduced[c];
            let root_lo = mip.lp.col_lower()[c];
            let root_up = mip.lp.col_upper()[c];
            if d > slack + 1e-7 && self.x[c] <= root_lo + 1e-9 {
                upper[c] = lower[c].max(root_lo);
                fixed.push(c);
            } else if -d > slack + 1e-7 && self.x[c] >= root_up - 1e-9 {
                lower[c] = upper[c].min(root_up);
                fixed.push(c);
            }
        }
        fixed
    }
}

fn pop_best(open: &mut Vec<Node>) -> Option<Node> {
    let k = open
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.bound.total_cmp(&b.1.bound).then(a.1.id.cmp(&b.1.id)))?
        .0;
    Some(open.swap_remove(k))
}

fn bound_of(changes: &[(usize, f64, f64)], col: usize, lower: f64, upper: f64) -> (f64, f64) {
    changes
        .iter()
        .find(|c| c.0 == col)
        .map_or((lower, upper), |&(_, lo, up)| (lo, up))
}

fn set_change(changes: &mut Vec<(usize, f64, f64)>, col: usize, lower: f64, upper: f64) {
    match changes.iter_mut().find(|c| c.0 == col) {
        Some(c) => {
            c.1 = lower;
            c.2 = upper;
        }
        None => changes.push((col, lower, upper)),
    }
}

fn choose_branch(
    mip: &MipProblem,
    x: &[f64],
    tol: f64,
    rule: BranchRule,
    pseudocosts: &Pseudocosts,
    rng: &mut ChaCha8Rng,
) -> Option<(usize, f64)> {
    let level = |c: usize| mip.priority.get(c).copied().unwrap_or(0);
    let top = x
        .iter()
        .enumerate()
        .filter(|&(c, v)| mip.integer[c] && (v - v.round()).abs() > tol)
        .map(|(c, _)| level(c))
        .max()?;
    let fractional = x
        .iter()
        .enumerate()
        .filter(|&(c, v)| mip.integer[c] && level(c) == top && (v - v.round()).abs() > tol);
    match rule {
        BranchRule::MostFractional => {
            let mut best: Option<(usize, f64, f64)> = None;
            for (c, &v) in fractional {
                let f = v - v.floor();
                let score = f.min(1.0 - f);
                if best.is_none_or(|b| score > b.2 + 1e-12) {
                    best = Some((c, v, score));
                }
            }
            best.map(|(c, v, _)| (c, v))
        }
        BranchRule::Random => {
            let all: Vec<(usize, f64)> = fractional.map(|(c, &v)| (c, v)).collect();
            all.choose(rng).copied()
        }
        BranchRule::Pseudocost => {
            let mut best: Option<(usize, f64, f64)> = None;
            for (c, &v) in fractional {
                let f = v - v.floor();
                let down = (f * pseudocosts.estimate(c, false)).max(1e-6);
                let up = ((1.0 - f) * pseudocosts.estimate(c, true)).max(1e-6);
                let score = down * up;
                if best.is_none_or(|b| score > b.2 * (1.0 + 1e-12)) {
                    best = Some((c, v, score));
                }
            }
            best.map(|(c, v, _)| (c, v))
        }
    }
}

/// Row, bound and integrality check at the feasibility tolerance.
pub(crate) fn is_feasible(mip: &MipProblem, x: &[f64], int_tol: f64) -> bool {
    let lp = &mip.lp;
    for (c, &v) in x.iter().enumerate() {
        if v < lp.col_lower()[c] - FEASIBILITY_TOL || v > lp.col_upper()[c] + FEASIBILITY_TOL {
            return false;
        }
        if mip.integer[c] && (v - v.round()).abs() > int_tol {
            return false;
        }
    }
    let act = lp.row_activity(x);
    act.iter()
        .enumerate()
        .all(|(r, &a)| a >= lp.row_lower()[r] - FEASIBILITY_TOL && a <= lp.row_upper()[r] + FEASIBILITY_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn knapsack() -> MipProblem {
        // max 5a + 4b + 3c st 2a + 3b + c <= 5, 4a + b + 2c <= 11,
        // 3a + 4b + 2c <= 8, a, b, c in {0, 1, 2, ...}
        let mut lp = LpProblem::new(3);
        lp.set_column(0, -5.0, 0.0, f64::INFINITY);
        lp.set_column(1, -4.0, 0.0, f64::INFINITY);
        lp.set_column(2, -3.0, 0.0, f64::INFINITY);
        lp.add_row(f64::NEG_INFINITY, 5.0, &[(0, 2.0), (1, 3.0), (2, 1.0)]);
        lp.add_row(f64::NEG_INFINITY, 11.0, &[(0, 4.0), (1, 1.0), (2, 2.0)]);
        lp.add_row(f64::NEG_INFINITY, 8.0, &[(0, 3.0), (1, 4.0), (2, 2.0)]);
        MipProblem {
            lp,
            integer: vec![true; 3],
            priority: Vec::new(),
        }
    }

    fn brute(mip: &MipProblem, range: i32) -> Option<f64> {
        let mut best: Option<f64> = None;
        for a in 0..=range {
            for b in 0..=range {
                for c in 0..=range {
                    let x = [a as f64, b as f64, c as f64];
                    if is_feasible(mip, &x, 1e-9) {
                        let z = mip.lp.objective_value(&x);
                        if best.is_none_or(|v| z < v) {
                            best = Some(z);
                        }
                    }
                }
            }
        }
        best
    }

    #[test]
    fn small_integer_program_matches_enumeration() {
        let mip = knapsack();
        let out = solve_mip(&mip, &SolverOptions::default(), None);
        assert_eq!(out.status, MipStatus::Optimal);
        let want = brute(&mip, 5).unwrap();
        assert!((out.objective.unwrap() - want).abs() < 1e-9);
        assert!(out.bound.unwrap() <= out.objective.unwrap() + 1e-9);
        assert!(out.root_bound.unwrap() <= want + 1e-9);
    }

    #[test]
    fn infeasible_integer_program() {
        // 2x = 1 has no integer solution.
        let mut lp = LpProblem::new(1);
        lp.set_column(0, 0.0, 0.0, 10.0);
        lp.add_row(1.0, 1.0, &[(0, 2.0)]);
        let mip = MipProblem {
            lp,
            integer: vec![true],
            priority: Vec::new(),
        };
        let out = solve_mip(&mip, &SolverOptions::default(), None);
        assert_eq!(out.status, MipStatus::Infeasible);
        assert!(out.values.is_none());
    }

    #[test]
    fn random_branching_reaches_the_same_optimum() {
        let mip = knapsack();
        let options = SolverOptions {
            branching: BranchRule::Random,
            seed: 7,
            ..SolverOptions::default()
        };
        let a = solve_mip(&mip, &options, None);
        let b = solve_mip(&mip, &SolverOptions::default(), None);
        assert!((a.objective.unwrap() - b.objective.unwrap()).abs() < 1e-9);
    }

    #[test]
    fn heuristic_candidate_is_checked() {
        // max x + y st 2x + 2y <= 3: the root relaxation is fractional.
        let mut lp = LpProblem::new(3);
        lp.set_column(0, -1.0, 0.0, 5.0);
        lp.set_column(1, -1.0, 0.0, 5.0);
        lp.set_column(2, 0.0, 0.0, 0.0);
        lp.add_row(f64::NEG_INFINITY, 3.0, &[(0, 2.0), (1, 2.0)]);
        let mip = MipProblem {
            lp,
            integer: vec![true; 3],
            priority: Vec::new(),
        };
        let mut calls = 0;
        let mut bogus = |_: &[f64]| {
            calls += 1;
            Some(vec![100.0, 0.0, 0.0])
        };
        let out = solve_mip(&mip, &SolverOptions::default(), Some(&mut bogus));
        assert_eq!(out.status, MipStatus::Optimal);
        assert!(calls >= 1);
        assert_eq!(out.objective, Some(-1.0));
    }

    #[test]
    fn pseudocost_branching_reaches_the_same_optimum() {
        let mip = knapsack();
        let options = SolverOptions {
            branching: BranchRule::Pseudocost,
            ..SolverOptions::default()
        };
        let out = solve_mip(&mip, &options, None);
        assert_eq!(out.status, MipStatus::Optimal);
        assert!((out.objective.unwrap() - brute(&mip, 5).unwrap()).abs() < 1e-9);
    }

    /// Pick at least two of twenty binaries, item j costing j + 1. The root
    /// takes item 0 and half of item 1.
    fn pick_two() -> MipProblem {
        let n = 20;
        let mut lp = LpProblem::new(n);
        for j in 0..n {
            lp.set_column(j, (j + 1) as f64, 0.0, 1.0);
        }
        let row: Vec<(usize, f64)> = (0..n).map(|j| (j, 2.0)).collect();
        lp.add_row(3.0, f64::INFINITY, &row);
        MipProblem {
            lp,
            integer: vec![true; n],
            priority: Vec::new(),
        }
    }

    #[test]
    fn root_fixing_restart_keeps_or_improves_the_incumbent() {
        let mip = pick_two();
        for picks in [[0, 1], [0, 2]] {
            let mut heuristic = |_: &[f64]| {
                let mut x = vec![0.0; 20];
                picks.iter().for_each(|&j| x[j] = 1.0);
                Some(x)
            };
            let out = solve_mip(&mip, &SolverOptions::default(), Some(&mut heuristic));
            assert_eq!(out.status, MipStatus::Optimal, "picks {picks:?}");
            assert_eq!(out.objective, Some(3.0), "picks {picks:?}");
            let x = out.values.unwrap();
            assert!(is_feasible(&mip, &x, 1e-9));
            assert_eq!(mip.lp.objective_value(&x), 3.0);
            assert_eq!(out.root_bound, Some(2.0));
        }
    }
}
