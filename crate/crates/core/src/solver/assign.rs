//! Demand assignment for a fixed placement.

use std::time::{Duration, Instant};

use crate::model::Mode;

use super::bnb::{solve_mip_until, MipProblem, MipStatus};
use super::lp::{solve_lp, LpProblem, LpStatus};
use super::{Placement, Scenario, SolverOptions};

/// Wall-clock cap on the single-server assignment search.
pub const ASSIGNMENT_BUDGET: Duration = Duration::from_secs(5);

/// One server per demand vertex, plus the weighted access cost.
#[derive(Clone, Debug, PartialEq)]
pub struct Assignment {
    /// `server_of[d]` is the vertex serving demand vertex `d`.
    pub server_of: Vec<usize>,
    pub cost: f64,
}

/// Assigns every demand vertex to a covering placed server.
///
/// Myopic: the nearest covering server, ties to the lowest node, then the
/// lowest level. Non-myopic: the cheapest assignment whose per-site load
/// stays within `mu * rho(k)`; found from the transportation relaxation and,
/// when that splits a demand, by branch-and-bound over single-server
/// assignments (the best one found within [`ASSIGNMENT_BUDGET`]). `None`
/// when some demand is uncovered or the capacities cannot absorb the load.
pub fn assign_demand(scenario: &Scenario, placement: &Placement, mode: Mode) -> Option<Assignment> {
    let inst = &scenario.instance;
    let v = inst.vertex_count();
    let sites: Vec<usize> = placement.sites().collect();
    let mut server_of = Vec::with_capacity(v);
    let mut cost = 0.0;
    for d in 0..v {
        let dn = inst.vertex_at(d);
        let best = sites
            .iter()
            .copied()
            .filter(|&s| inst.vertex_at(s).level >= dn.level)
            .min_by(|&a, &b| {
                let ta = inst.travel_time[dn.node][inst.vertex_at(a).node];
                let tb = inst.travel_time[dn.node][inst.vertex_at(b).node];
                ta.total_cmp(&tb).then(a.cmp(&b))
            })?;
        cost += inst.lambda(dn) * inst.travel_time[dn.node][inst.vertex_at(best).node];
        server_of.push(best);
    }
    let nearest = Assignment { server_of, cost };
    if mode == Mode::Myopic {
        return Some(nearest);
    }
    let mut load = vec![0.0; v];
    for (d, &s) in nearest.server_of.iter().enumerate() {
        load[s] += inst.lambda(inst.vertex_at(d));
    }
    if sites.iter().all(|&s| load[s] <= scenario.capacity(s, placement.count(s)) + 1e-9) {
        return Some(nearest);
    }
    capacitated(scenario, placement, &sites, nearest)
}

fn capacitated(scenario: &Scenario, placement: &Placement, sites: &[usize], nearest: Assignment) -> Option<Assignment> {
    let inst = &scenario.instance;
    // Zero-rate demand takes no capacity and keeps its nearest server.
    let loaded: Vec<usize> = (0..inst.vertex_count())
        .filter(|&d| inst.lambda(inst.vertex_at(d)) > 0.0)
        .collect();
    let mut columns: Vec<(usize, usize)> = Vec::new();
    for &d in &loaded {
        let level = inst.vertex_at(d).level;
        for &s in sites {
            if inst.vertex_at(s).level >= level {
                columns.push((d, s));
            }
        }
    }
    let mut lp = LpProblem::new(columns.len());
    for (c, &(d, s)) in columns.iter().enumerate() {
        let dn = inst.vertex_at(d);
        let cost = inst.lambda(dn) * inst.travel_time[dn.node][inst.vertex_at(s).node];
        lp.set_column(c, cost, 0.0, 1.0);
    }
    let mut by_demand: Vec<Vec<(usize, f64)>> = vec![Vec::new(); inst.vertex_count()];
    let mut by_site: Vec<Vec<(usize, f64)>> = vec![Vec::new(); inst.vertex_count()];
    for (c, &(d, s)) in columns.iter().enumerate() {
        by_demand[d].push((c, 1.0));
        by_site[s].push((c, inst.lambda(inst.vertex_at(d))));
    }
    for &d in &loaded {
        lp.add_row(1.0, 1.0, &by_demand[d]);
    }
    for &s in sites {
        lp.add_row(f64::NEG_INFINITY, scenario.capacity(s, placement.count(s)), &by_site[s]);
    }
    let relaxed = solve_lp(&lp);
    if relaxed.status != LpStatus::Optimal {
        return None;
    }
    let integral = relaxed.x.iter().all(|v| (v - v.round()).abs() <= 1e-9);
    let x = if integral {
        relaxed.x
    } else {
        let mip = MipProblem {
            integer: vec![true; columns.len()],
            priority: Vec::new(),
            lp,
        };
        let options = SolverOptions::default();
        let out = solve_mip_until(&mip, &options, Instant::now() + ASSIGNMENT_BUDGET, None);
        if !matches!(out.status, MipStatus::Optimal | MipStatus::Feasible) {
            return None;
        }
        out.values?
    };
    let mut server_of = nearest.server_of;
    for (c, &(d, s)) in columns.iter().enumerate() {
        if x[c] > 0.5 {
            server_of[d] = s;
        }
    }
    let cost = server_of
        .iter()
        .enumerate()
        .map(|(d, &s)| {
            let dn = inst.vertex_at(d);
            inst.lambda(dn) * inst.travel_time[dn.node][inst.vertex_at(s).node]
        })
        .sum();
    Some(Assignment { server_of, cost })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{ChargingCost, Instance, QueueParams};

    /// Four nodes on a line, two levels, unit spacing.
    fn line(lambda: [[f64; 2]; 4], mu: f64) -> Scenario {
        let n = 4;
        let travel_time = (0..n)
            .map(|i| (0..n).map(|j| (i as f64 - j as f64).abs()).collect())
            .collect();
        let inst = Instance {
            node_count: n,
            travel_time,
            levels: 2,
            charge_per_level: 0.5,
            stations: vec![],
            arrival_rate: lambda.iter().map(|r| r.to_vec()).collect(),
            service_rate: vec![vec![mu; 2]; n],
            idle_stock: vec![vec![0, 1], vec![0; 2], vec![0; 2], vec![0; 2]],
            theta: 0.2,
            max_servers: 2,
            big_m: 10_000.0,
            charging_arc_cost: ChargingCost::default(),
            queue_params: QueueParams::default(),
            spatial_arcs: None,
            charge_per_minute: None,
        };
        Scenario::new(inst).unwrap()
    }

    #[test]
    fn single_top_server_takes_everything() {
        let lam = [[0.1, 0.2], [0.3, 0.4], [0.5, 0.6], [0.7, 0.8]];
        let sc = line(lam, 10.0);
        let mut p = Placement::empty(8);
        p.set(sc.instance.vertex_index(crate::instance::NodeCharge::new(1, 2)), 1);
        let a = assign_demand(&sc, &p, Mode::Myopic).unwrap();
        assert!(a.server_of.iter().all(|&s| s == 3));
        let want: f64 = (0..4).map(|i| (lam[i][0] + lam[i][1]) * (i as f64 - 1.0).abs()).sum();
        assert!((a.cost - want).abs() < 1e-12);
    }

    #[test]
    fn low_server_cannot_cover_high_demand() {
        let sc = line([[0.1; 2]; 4], 10.0);
        let mut p = Placement::empty(8);
        p.set(0, 1);
        assert!(assign_demand(&sc, &p, Mode::Myopic).is_none());
    }

    #[test]
    fn ties_go_to_lowest_node_then_level() {
        let sc = line([[0.1; 2]; 4], 10.0);
        let mut p = Placement::empty(8);
        // Servers at (0, 2) and (2, 2): node 1 is one step from both.
        p.set(1, 1);
        p.set(5, 1);
        let a = assign_demand(&sc, &p, Mode::Myopic).unwrap();
        assert_eq!(a.server_of[2], 1);
        assert_eq!(a.server_of[3], 1);
    }

    #[test]
    fn capacity_below_demand_is_infeasible() {
        // mu * rho(1) = 1 * 0.2236 < total rate 0.8.
        let sc = line([[0.1; 2]; 4], 1.0);
        let mut p = Placement::empty(8);
        p.set(1, 1);
        assert!(assign_demand(&sc, &p, Mode::NonMyopic).is_none());
        assert!(assign_demand(&sc, &p, Mode::Myopic).is_some());
    }

    #[test]
    fn capacity_pushes_demand_to_the_far_server() {
        // Sites (0, 2) and (3, 2) hold 1.5 * 0.2236 = 0.335 each, so only
        // one demand of 0.2 fits per site. The relaxation splits node 1.
        let sc = line([[0.2, 0.0], [0.2, 0.0], [0.0, 0.0], [0.0, 0.0]], 1.5);
        let mut p = Placement::empty(8);
        p.set(1, 1);
        p.set(7, 1);
        let a = assign_demand(&sc, &p, Mode::NonMyopic).unwrap();
        assert_eq!(a.server_of[0], 1);
        assert_eq!(a.server_of[2], 7);
        assert!((a.cost - 0.2 * 2.0).abs() < 1e-9, "{}", a.cost);
    }
}
