//! Vertex-substitution local search over placements.

use crate::error::Result;
use crate::model::{Mode, Solution, Status};

use super::brute::{brute_force, placement_count, ENUMERATION_LIMIT};
use super::exact::solve_exact;
use super::lp::{solve_lp, LpProblem, LpStatus};
use super::{evaluate_placement, screened_out, plan_values, Placement, PlacementPlan, Scenario, SolverOptions};

#[derive(Clone, Debug)]
pub struct GreedyReport {
    pub solution: Solution,
    /// Accepted swaps.
    pub swaps: usize,
    /// Placements evaluated.
    pub evaluations: usize,
    /// Relaxation objective of the assembled program, when requested.
    pub lp_bound: Option<f64>,
    /// `(Z_greedy - lp_bound) / Z_greedy`.
    pub gap: Option<f64>,
    /// The search ended infeasible and an exact method supplied the answer.
    pub fallback: bool,
}

/// Placement score: infeasibility first, then cost.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Score {
    infeasibility: f64,
    cost: f64,
}

impl Score {
    fn better_than(&self, other: &Score) -> bool {
        if self.infeasibility < other.infeasibility - 1e-9 {
            return true;
        }
        self.infeasibility <= other.infeasibility + 1e-9
            && self.infeasibility == 0.0
            && other.infeasibility == 0.0
            && self.cost < other.cost - 1e-9
    }
}

/// Teitz-Bart style search: start from the idle stock where it stands and
/// move one server at a time to the best improving node-charge until no move
/// improves. Placements that cannot be served are ranked by how far they are
/// from feasibility. If the search ends infeasible, an exact method decides.
///
/// With `lp_bound` the relaxation of the assembled program is solved as
/// well and the relative gap is reported.
pub fn greedy_place(scenario: &Scenario, mode: Mode, lp_bound: bool) -> Result<GreedyReport> {
    if let Some(solution) = screened_out(scenario, mode) {
        return Ok(GreedyReport {
            solution,
            swaps: 0,
            evaluations: 0,
            lp_bound: None,
            gap: None,
            fallback: false,
        });
    }
    let model = scenario.assemble(mode)?;
    let inst = &scenario.instance;
    let v = inst.vertex_count();
    let cap = inst.max_servers as u32;
    let mut evaluations = 0usize;
    let mut current = Placement::from_stock(inst);
    let (mut score, mut plan) = rate(scenario, &current, mode);
    evaluations += 1;
    let mut swaps = 0usize;
    loop {
        let mut best: Option<(Score, Placement, Option<PlacementPlan>)> = None;
        let sites: Vec<usize> = current.sites().collect();
        for &from in &sites {
            for to in 0..v {
                if to == from || current.count(to) >= cap {
                    continue;
                }
                let mut candidate = current.clone();
                candidate.set(from, candidate.count(from) - 1);
                candidate.set(to, candidate.count(to) + 1);
                let (s, p) = rate(scenario, &candidate, mode);
                evaluations += 1;
                let reference = best.as_ref().map_or(score, |b| b.0);
                if s.better_than(&reference) {
                    best = Some((s, candidate, p));
                }
            }
        }
        match best {
            Some((s, p, pl)) => {
                current = p;
                score = s;
                plan = pl;
                swaps += 1;
            }
            None => break,
        }
    }
    log::debug!("greedy: {swaps} swaps, {evaluations} evaluations, score {score:?}");

    let (mut solution, fallback) = match plan {
        Some(plan) => {
            let values = plan_values(&model, &current, &plan);
            (Solution::from_values(&model, Status::Feasible, values), false)
        }
        None => {
            let b = inst.total_stock() as usize;
            let exact = if placement_count(v, b, cap as usize) <= ENUMERATION_LIMIT {
                brute_force(scenario, mode)?
            } else {
                solve_exact(scenario, mode, &SolverOptions::default())?
            };
            let mut exact = exact;
            if exact.status == Status::Optimal {
                exact.status = Status::Feasible;
            }
            exact
                .warnings
                .push("local search found no feasible placement; used an exact method".into());
            (exact, true)
        }
    };
    solution.bound = None;
    let lp = if lp_bound {
        let r = solve_lp(&LpProblem::from_model(&model));
        (r.status == LpStatus::Optimal).then_some(r.objective)
    } else {
        None
    };
    solution.bound = lp;
    let gap = match (solution.objective, lp) {
        (Some(z), Some(b)) => Some(((z - b) / z.abs().max(1e-9)).max(0.0)),
        _ => None,
    };
    Ok(GreedyReport {
        solution,
        swaps,
        evaluations,
        lp_bound: lp,
        gap,
        fallback,
    })
}

fn rate(scenario: &Scenario, placement: &Placement, mode: Mode) -> (Score, Option<PlacementPlan>) {
    let shortfall = shortfall(scenario, placement, mode);
    if shortfall > 0.0 {
        return (
            Score {
                infeasibility: shortfall,
                cost: f64::INFINITY,
            },
            None,
        );
    }
    match evaluate_placement(scenario, placement, mode) {
        Some(plan) => (
            Score {
                infeasibility: 0.0,
                cost: plan.objective,
            },
            Some(plan),
        ),
        // Passes the counting screens but the assignment or the flow fails.
        None => (
            Score {
                infeasibility: 0.5,
                cost: f64::INFINITY,
            },
            None,
        ),
    }
}

/// Counting screens: uncovered demand vertices, plus (non-myopic) the worst
/// excess of demand at or above a level over the capacity placed there.
fn shortfall(scenario: &Scenario, placement: &Placement, mode: Mode) -> f64 {
    let inst = &scenario.instance;
    let h = inst.levels;
    let top = placement
        .sites()
        .map(|s| inst.vertex_at(s).level)
        .max()
        .unwrap_or(0);
    let uncovered = inst.vertices().filter(|nc| nc.level > top).count() as f64;
    if mode == Mode::Myopic {
        return uncovered;
    }
    let mut demand_from = vec![0.0; h + 2];
    let mut capacity_from = vec![0.0; h + 2];
    for nc in inst.vertices() {
        demand_from[nc.level] += inst.lambda(nc);
    }
    for s in placement.sites() {
        capacity_from[inst.vertex_at(s).level] += scenario.capacity(s, placement.count(s));
    }
    let mut excess: f64 = 0.0;
    for g in (1..=h).rev() {
        demand_from[g] += demand_from[g + 1];
        capacity_from[g] += capacity_from[g + 1];
        excess = excess.max(demand_from[g] - capacity_from[g]);
    }
    uncovered + excess.max(0.0)
}
