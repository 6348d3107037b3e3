//! Branch-and-bound on the assembled program.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use crate::error::Result;
use crate::model::{Domain, MilpModel, Solution, Status, VarKind};

use super::bnb::{solve_mip_until, Heuristic, MipProblem, MipStatus};
use super::lp::LpProblem;
use super::{evaluate_placement, plan_values, Placement, Scenario, SolverOptions};

/// Solves `model` by branch-and-bound without problem-specific help.
pub fn branch_and_bound(model: &MilpModel, options: &SolverOptions) -> Solution {
    run(model, options, None)
}

/// Assembles the program for `scenario` and solves it by branch-and-bound,
/// seeding incumbents from placements rounded off the relaxation.
pub fn solve_exact(scenario: &Scenario, mode: crate::model::Mode, options: &SolverOptions) -> Result<Solution> {
    options.validate()?;
    if let Some(solution) = screened_out(scenario, mode) {
        return Ok(solution);
    }
    let model = scenario.assemble(mode)?;
    let mut tried: HashSet<Vec<u32>> = HashSet::new();
    let mut rounding = |x: &[f64]| -> Option<Vec<f64>> {
        let placement = round_placement(scenario, &model, x);
        // A placement already evaluated has nothing new to offer.
        if !tried.insert(placement.counts().to_vec()) {
            return None;
        }
        let plan = evaluate_placement(scenario, &placement, mode)?;
        Some(plan_values(&model, &placement, &plan))
    };
    Ok(run(&model, options, Some(&mut rounding)))
}

/// Infeasible answer when the fleet cannot meet demand even at full
/// capacity.
pub(crate) fn screened_out(scenario: &Scenario, mode: crate::model::Mode) -> Option<Solution> {
    if mode != crate::model::Mode::NonMyopic {
        return None;
    }
    let g = super::capacity_shortfall(scenario)?;
    let mut solution = Solution::infeasible(mode);
    solution
        .warnings
        .push(format!("demand at charge levels {g} and above exceeds the capacity of the whole fleet"));
    Some(solution)
}

fn to_mip(model: &MilpModel, relax_y: bool) -> MipProblem {
    let integer = (0..model.column_count())
        .map(|c| {
            let relaxed = relax_y && matches!(model.var_kind(c), VarKind::Y { .. });
            model.domain(c) != Domain::Continuous && !relaxed
        })
        .collect();
    // Placement first, then assignment, then the flow.
    let priority = (0..model.column_count())
        .map(|c| match model.var_kind(c) {
            VarKind::Y { .. } => 2,
            VarKind::X { .. } => 1,
            _ => 0,
        })
        .collect();
    MipProblem {
        lp: LpProblem::from_model(model),
        integer,
        priority,
    }
}

fn run(model: &MilpModel, options: &SolverOptions, mut heuristic: Option<&mut Heuristic<'_>>) -> Solution {
    let start = Instant::now();
    let deadline = start + Duration::from_secs_f64(options.time_limit);
    let relax = options.relaxes_y(model.mode);
    let mip = to_mip(model, relax);
    let out = solve_mip_until(&mip, options, deadline, heuristic.as_deref_mut());
    let mut nodes = out.nodes;
    let mut solution = to_solution(model, out.status, out.values, out.objective, out.bound);
    if relax && solution.status.has_values() {
        let y = model.layout.y_offset()..model.layout.w_offset();
        let worst = solution.values[y]
            .iter()
            .map(|v| (v - v.round()).abs())
            .fold(0.0, f64::max);
        if worst > options.integrality_tolerance {
            log::warn!("relaxed Y came out fractional ({worst:.3e}); re-solving with integer Y");
            let strict = to_mip(model, false);
            let out = solve_mip_until(&strict, options, deadline, heuristic);
            nodes += out.nodes;
            solution = to_solution(model, out.status, out.values, out.objective, out.bound);
            solution
                .warnings
                .push(format!("fractional Y ({worst:.3e}) in the relaxed solve; re-solved with integer Y"));
        }
    }
    solution.nodes = nodes;
    solution
}

fn to_solution(
    model: &MilpModel,
    status: MipStatus,
    values: Option<Vec<f64>>,
    objective: Option<f64>,
    bound: Option<f64>,
) -> Solution {
    let status = match status {
        MipStatus::Optimal => Status::Optimal,
        MipStatus::Feasible => Status::Feasible,
        MipStatus::Infeasible => Status::Infeasible,
        MipStatus::Unbounded => Status::Unbounded,
        MipStatus::TimeLimit => Status::TimeLimit,
    };
    let mut solution = match values {
        Some(values) => Solution::from_values(model, status, values),
        None => Solution::without_values(status, model.mode),
    };
    if let (Some(z), Some(s)) = (objective, solution.objective) {
        debug_assert!((z - s).abs() <= 1e-6 * (1.0 + z.abs()));
    }
    solution.bound = bound;
    solution
}

/// Server counts from a relaxation point: whole units first, then the
/// largest fractional remainders, lowest vertex on ties.
fn round_placement(scenario: &Scenario, model: &MilpModel, x: &[f64]) -> Placement {
    let layout = &model.layout;
    let cap = layout.servers as u32;
    let total = scenario.instance.total_stock();
    let score: Vec<f64> = (0..layout.vertices())
        .map(|v| {
            let base = layout.y_offset() + v * layout.servers;
            x[base..base + layout.servers].iter().sum()
        })
        .collect();
    let mut counts: Vec<u32> = score.iter().map(|s| ((s + 1e-6).floor() as u32).min(cap)).collect();
    let mut left = total.saturating_sub(counts.iter().sum());
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = score[a] - counts[a] as f64;
        let rb = score[b] - counts[b] as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &v in order.iter().cycle().take(order.len() * cap as usize) {
        if left == 0 {
            break;
        }
        if counts[v] < cap {
            counts[v] += 1;
            left -= 1;
        }
    }
    Placement::from_counts(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::tiny_instance;
    use crate::model::Mode;

    #[test]
    fn no_vehicles_means_no_solution() {
        let mut inst = tiny_instance(11);
        for row in inst.idle_stock.iter_mut() {
            row.iter_mut().for_each(|s| *s = 0);
        }
        let sc = Scenario::new(inst).unwrap();
        for mode in [Mode::Myopic, Mode::NonMyopic] {
            let sol = solve_exact(&sc, mode, &SolverOptions::default()).unwrap();
            assert_eq!(sol.status, Status::Infeasible);
        }
    }

    #[test]
    fn plain_and_seeded_searches_agree() {
        for seed in 0..10 {
            let sc = Scenario::new(tiny_instance(seed)).unwrap();
            let model = sc.assemble(Mode::Myopic).unwrap();
            let plain = branch_and_bound(&model, &SolverOptions::default());
            let seeded = solve_exact(&sc, Mode::Myopic, &SolverOptions::default()).unwrap();
            assert_eq!(plain.status, seeded.status);
            if let (Some(a), Some(b)) = (plain.objective, seeded.objective) {
                assert!((a - b).abs() < 1e-6, "seed {seed}: {a} vs {b}");
                assert!(plain.violations.as_ref().unwrap().feasible);
            }
        }
    }

    #[test]
    fn options_are_checked() {
        let sc = Scenario::new(tiny_instance(0)).unwrap();
        let bad = SolverOptions {
            time_limit: 0.0,
            ..SolverOptions::default()
        };
        assert!(solve_exact(&sc, Mode::Myopic, &bad).is_err());
    }
}
