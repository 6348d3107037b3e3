//! Exhaustive placement enumeration for tiny instances.

use crate::error::{Error, Result};
use crate::model::{Mode, Solution, Status};

use super::{evaluate_placement, plan_values, Placement, Scenario};

/// Largest number of placements [`brute_force`] will enumerate.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

/// Number of ways to put `servers` identical servers on `vertices`
/// vertices with at most `cap` per vertex.
pub fn placement_count(vertices: usize, servers: usize, cap: usize) -> u128 {
    // ways[k] = placements of k servers over the vertices seen so far.
    let mut ways = vec![0u128; servers + 1];
    ways[0] = 1;
    for _ in 0..vertices {
        let mut next = vec![0u128; servers + 1];
        for (k, &w) in ways.iter().enumerate() {
            if w == 0 {
                continue;
            }
            for add in 0..=cap.min(servers - k) {
                next[k + add] = next[k + add].saturating_add(w);
            }
        }
        ways = next;
    }
    ways[servers]
}

/// Global optimum over every placement of the idle fleet, each solved by
/// exact assignment and min-cost flow. Ties keep the first placement in
/// enumeration order.
pub fn brute_force(scenario: &Scenario, mode: Mode) -> Result<Solution> {
    let inst = &scenario.instance;
    let v = inst.vertex_count();
    let b = inst.total_stock() as usize;
    let cap = inst.max_servers;
    let count = placement_count(v, b, cap);
    if count > ENUMERATION_LIMIT {
        return Err(Error::EnumerationGuard {
            count,
            limit: ENUMERATION_LIMIT,
        });
    }
    let model = scenario.assemble(mode)?;
    let mut best: Option<(f64, Placement, super::PlacementPlan)> = None;
    let mut placement = Placement::empty(v);
    let mut visit = |p: &Placement| {
        if let Some(plan) = evaluate_placement(scenario, p, mode) {
            if best.as_ref().is_none_or(|(z, _, _)| plan.objective < *z - 1e-12) {
                best = Some((plan.objective, p.clone(), plan));
            }
        }
    };
    enumerate(&mut placement, 0, b as u32, cap as u32, &mut visit);
    Ok(match best {
        Some((_, placement, plan)) => {
            let mut sol = Solution::from_values(&model, Status::Optimal, plan_values(&model, &placement, &plan));
            sol.bound = sol.objective;
            sol.nodes = count as usize;
            sol
        }
        None => Solution::infeasible(mode),
    })
}

fn enumerate(p: &mut Placement, v: usize, left: u32, cap: u32, visit: &mut impl FnMut(&Placement)) {
    if v == p.counts().len() {
        if left == 0 {
            visit(p);
        }
        return;
    }
    let room = (p.counts().len() - v) as u32 * cap;
    if left > room {
        return;
    }
    for k in (0..=cap.min(left)).rev() {
        p.set(v, k);
        enumerate(p, v + 1, left - k, cap, visit);
    }
    p.set(v, 0);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{generate_instance, GeneratorConfig};

    #[test]
    fn placement_count_small_cases() {
        assert_eq!(placement_count(3, 2, 2), 6);
        assert_eq!(placement_count(3, 2, 1), 3);
        assert_eq!(placement_count(4, 0, 3), 1);
        assert_eq!(placement_count(2, 5, 2), 0);
    }

    #[test]
    fn enumeration_visits_every_placement_once() {
        let mut seen = std::collections::BTreeSet::new();
        let mut p = Placement::empty(4);
        enumerate(&mut p, 0, 3, 2, &mut |q: &Placement| {
            assert!(seen.insert(q.counts().to_vec()));
        });
        assert_eq!(seen.len() as u128, placement_count(4, 3, 2));
    }

    #[test]
    fn large_instances_are_refused() {
        let inst = generate_instance(&GeneratorConfig::with_nodes(10, 1)).unwrap();
        let sc = Scenario::new(inst).unwrap();
        match brute_force(&sc, Mode::Myopic) {
            Err(Error::EnumerationGuard { count, limit }) => assert!(count > limit),
            other => panic!("expected the guard, got {other:?}"),
        }
    }
}
