//! Relocation flow for a fixed placement.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::graph::ArcKind;

use super::bnb::{solve_mip_until, MipProblem, MipStatus};
use super::lp::LpProblem;
use super::{Placement, Scenario, SolverOptions};

#[derive(Clone, Debug, PartialEq)]
pub struct Flow {
    /// Vehicles on each graph arc.
    pub arc_flow: Vec<f64>,
    /// Vehicles on each charging path.
    pub path_flow: Vec<f64>,
    /// `theta` times the arc costs of the flow.
    pub cost: f64,
}

struct Edge {
    to: usize,
    cap: i64,
    cost: f64,
    rev: usize,
}

struct Residual {
    adj: Vec<Vec<Edge>>,
}

impl Residual {
    fn new(n: usize) -> Self {
        Residual {
            adj: (0..n).map(|_| Vec::new()).collect(),
        }
    }

    /// Adds `from -> to`; returns the position of the forward edge.
    fn add(&mut self, from: usize, to: usize, cap: i64, cost: f64) -> (usize, usize) {
        let fwd = self.adj[from].len();
        let back = self.adj[to].len() + usize::from(from == to);
        self.adj[from].push(Edge { to, cap, cost, rev: back });
        self.adj[to].push(Edge {
            to: from,
            cap: 0,
            cost: -cost,
            rev: fwd,
        });
        (from, fwd)
    }
}

#[derive(PartialEq)]
struct Label(f64, usize);

impl Eq for Label {}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Cheapest integral flow moving the idle stock onto `placement`.
///
/// Successive shortest paths with Dijkstra on reduced costs, charging arcs
/// capped at the station capacity. Arc flows at each station are then split
/// into charging paths; if a station would need more paths than it has
/// chargers, the flow subsystem is solved exactly instead. `None` when the
/// placement cannot be reached.
pub fn min_cost_flow(scenario: &Scenario, placement: &Placement) -> Option<Flow> {
    let inst = &scenario.instance;
    let graph = &scenario.graph;
    let v = inst.vertex_count();
    if placement.total() != inst.total_stock() {
        return None;
    }
    let source = v;
    let sink = v + 1;
    let mut net = Residual::new(v + 2);
    let unbounded = inst.total_stock() as i64;
    let mut arc_edges = Vec::with_capacity(graph.arcs().len());
    for arc in graph.arcs() {
        let cap = match arc.kind {
            ArcKind::Spatial => unbounded,
            ArcKind::Charging { station } => inst.stations[station].capacity as i64,
        };
        let from = inst.vertex_index(arc.from);
        let to = inst.vertex_index(arc.to);
        arc_edges.push(net.add(from, to, cap, inst.theta * arc.cost));
    }
    let mut required = 0i64;
    for u in 0..v {
        let stock = inst.stock(inst.vertex_at(u)) as i64;
        let want = placement.count(u) as i64;
        if stock > want {
            net.add(source, u, stock - want, 0.0);
            required += stock - want;
        } else if want > stock {
            net.add(u, sink, want - stock, 0.0);
        }
    }

    let n = v + 2;
    let mut potential = vec![0.0; n];
    let mut dist = vec![f64::INFINITY; n];
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut sent = 0i64;
    while sent < required {
        dist.iter_mut().for_each(|d| *d = f64::INFINITY);
        prev.iter_mut().for_each(|p| *p = None);
        dist[source] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(Label(0.0, source));
        while let Some(Label(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for (k, e) in net.adj[u].iter().enumerate() {
                if e.cap <= 0 {
                    continue;
                }
                let reduced = (e.cost + potential[u] - potential[e.to]).max(0.0);
                let nd = d + reduced;
                if nd < dist[e.to] {
                    dist[e.to] = nd;
                    prev[e.to] = Some((u, k));
                    heap.push(Label(nd, e.to));
                }
            }
        }
        if !dist[sink].is_finite() {
            return None;
        }
        for u in 0..n {
            if dist[u].is_finite() {
                potential[u] += dist[u];
            }
        }
        let mut push = required - sent;
        let mut at = sink;
        while let Some((u, k)) = prev[at] {
            push = push.min(net.adj[u][k].cap);
            at = u;
        }
        let mut at = sink;
        while let Some((u, k)) = prev[at] {
            net.adj[u][k].cap -= push;
            let rev = net.adj[u][k].rev;
            net.adj[at][rev].cap += push;
            at = u;
        }
        sent += push;
    }

    let arc_flow: Vec<f64> = arc_edges
        .iter()
        .zip(graph.arcs())
        .map(|(&(u, k), arc)| {
            let cap = match arc.kind {
                ArcKind::Spatial => unbounded,
                ArcKind::Charging { station } => inst.stations[station].capacity as i64,
            };
            (cap - net.adj[u][k].cap) as f64
        })
        .collect();
    match split_into_paths(scenario, &arc_flow) {
        Some(path_flow) => {
            let cost = flow_cost(scenario, &arc_flow);
            Some(Flow {
                arc_flow,
                path_flow,
                cost,
            })
        }
        None => {
            log::debug!("charging paths exceed a station capacity; solving the flow exactly");
            exact_flow(scenario, placement)
        }
    }
}

fn flow_cost(scenario: &Scenario, arc_flow: &[f64]) -> f64 {
    scenario.instance.theta * scenario.graph.arcs().iter().zip(arc_flow).map(|(a, w)| a.cost * w).sum::<f64>()
}

/// Splits each station's charging-arc flows into the fewest paths; `None`
/// if some station needs more paths than its capacity.
fn split_into_paths(scenario: &Scenario, arc_flow: &[f64]) -> Option<Vec<f64>> {
    let inst = &scenario.instance;
    let paths = &scenario.paths;
    let h = inst.levels;
    let mut path_flow = vec![0.0; paths.len()];
    for (st, station) in inst.stations.iter().enumerate() {
        let range = paths.station_paths(st);
        let index_of = |from: usize, to: usize| {
            range
                .clone()
                .find(|&p| paths.paths()[p].from_level == from && paths.paths()[p].to_level == to)
                .expect("path exists")
        };
        // Open paths as (start level, count), oldest first.
        let mut open: Vec<(usize, u64)> = Vec::new();
        let mut prev = 0u64;
        let mut starts = 0u64;
        for g in 1..=h {
            let w = if g < h {
                arc_flow[scenario.graph.charging_arc(st, g)].round() as u64
            } else {
                0
            };
            if w > prev {
                open.push((g, w - prev));
                starts += w - prev;
            } else {
                let mut close = prev - w;
                while close > 0 {
                    let (from, count) = open.first_mut().expect("open path");
                    let k = (*count).min(close);
                    path_flow[index_of(*from, g)] += k as f64;
                    *count -= k;
                    close -= k;
                    if *count == 0 {
                        open.remove(0);
                    }
                }
            }
            prev = w;
        }
        if starts > station.capacity as u64 {
            return None;
        }
    }
    Some(path_flow)
}

fn exact_flow(scenario: &Scenario, placement: &Placement) -> Option<Flow> {
    let mip = flow_subsystem(scenario, placement);
    let deadline = Instant::now() + Duration::from_secs(3600);
    let out = solve_mip_until(&mip, &SolverOptions::default(), deadline, None);
    if out.status != MipStatus::Optimal {
        return None;
    }
    let values = out.values?;
    let arcs = scenario.graph.arcs().len();
    let arc_flow: Vec<f64> = values[..arcs].iter().map(|w| w.round()).collect();
    let path_flow = values[arcs..].to_vec();
    let cost = flow_cost(scenario, &arc_flow);
    Some(Flow {
        arc_flow,
        path_flow,
        cost,
    })
}

/// The flow rows of the assembled program with Y fixed to `placement`:
/// big-M linking for vertices without stock, vehicle balance, path
/// decomposition of charging arcs and the charger limit per station.
///
/// Columns are the arcs (integer) followed by the charging paths.
pub fn flow_subsystem(scenario: &Scenario, placement: &Placement) -> MipProblem {
    let inst = &scenario.instance;
    let graph = &scenario.graph;
    let paths = &scenario.paths;
    let arcs = graph.arcs().len();
    let mut lp = LpProblem::new(arcs + paths.len());
    for (a, arc) in graph.arcs().iter().enumerate() {
        lp.set_column(a, inst.theta * arc.cost, 0.0, f64::INFINITY);
    }
    let net_inflow = |nc, sign: f64| -> Vec<(usize, f64)> {
        let mut terms: Vec<(usize, f64)> = graph.in_arcs(nc).iter().map(|&a| (a, sign)).collect();
        terms.extend(graph.out_arcs(nc).iter().map(|&a| (a, -sign)));
        terms
    };
    for sign in [1.0, -1.0] {
        for nc in inst.vertices().filter(|&nc| inst.stock(nc) == 0) {
            let has_server = placement.count(inst.vertex_index(nc)) > 0;
            let rhs = if has_server { inst.big_m } else { 0.0 };
            lp.add_row(f64::NEG_INFINITY, rhs, &net_inflow(nc, sign));
        }
    }
    for nc in inst.vertices() {
        let rhs = placement.count(inst.vertex_index(nc)) as f64 - inst.stock(nc) as f64;
        lp.add_row(rhs, rhs, &net_inflow(nc, 1.0));
    }
    for st in 0..inst.stations.len() {
        for g in 1..inst.levels {
            let mut terms: Vec<(usize, f64)> = paths.traversing(st, g).map(|p| (arcs + p, 1.0)).collect();
            terms.push((graph.charging_arc(st, g), -1.0));
            lp.add_row(0.0, 0.0, &terms);
        }
    }
    for (st, station) in inst.stations.iter().enumerate() {
        let terms: Vec<(usize, f64)> = paths.station_paths(st).map(|p| (arcs + p, 1.0)).collect();
        lp.add_row(f64::NEG_INFINITY, station.capacity as f64, &terms);
    }
    let mut integer = vec![true; arcs];
    integer.resize(arcs + paths.len(), false);
    MipProblem {
        lp,
        integer,
        priority: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{ChargingCost, Instance, NodeCharge, QueueParams, Station};
    use crate::solver::lp::{solve_lp, LpStatus};

    /// Six nodes on a line, one minute apart, two levels, a station at 3.
    fn corridor(capacity: u32, levels: usize) -> Instance {
        let n = 6;
        let mut arcs = Vec::new();
        for i in 0..n - 1 {
            arcs.push([i, i + 1]);
            arcs.push([i + 1, i]);
        }
        Instance {
            node_count: n,
            travel_time: (0..n)
                .map(|i| (0..n).map(|j| (i as f64 - j as f64).abs()).collect())
                .collect(),
            levels,
            charge_per_level: 0.5,
            stations: vec![Station { node: 3, capacity }],
            arrival_rate: vec![vec![0.0; levels]; n],
            service_rate: vec![vec![1.0; levels]; n],
            idle_stock: vec![vec![0; levels]; n],
            theta: 1.0,
            max_servers: 2,
            big_m: 10_000.0,
            charging_arc_cost: ChargingCost::Uniform(0.5),
            queue_params: QueueParams::default(),
            spatial_arcs: Some(arcs),
            charge_per_minute: None,
        }
    }

    fn placement_of(inst: &Instance, servers: &[(usize, usize)]) -> Placement {
        let mut p = Placement::empty(inst.vertex_count());
        for &(node, level) in servers {
            let v = inst.vertex_index(NodeCharge::new(node, level));
            p.set(v, p.count(v) + 1);
        }
        p
    }

    #[test]
    fn stock_in_place_needs_no_flow() {
        let mut inst = corridor(1, 2);
        inst.idle_stock[4][1] = 1;
        let p = placement_of(&inst, &[(4, 2)]);
        let sc = Scenario::new(inst).unwrap();
        let f = min_cost_flow(&sc, &p).unwrap();
        assert_eq!(f.cost, 0.0);
        assert!(f.arc_flow.iter().all(|&w| w == 0.0));
    }

    #[test]
    fn vehicle_detours_through_the_station() {
        let mut inst = corridor(1, 2);
        inst.idle_stock[5][0] = 1;
        let p = placement_of(&inst, &[(4, 2)]);
        let sc = Scenario::new(inst).unwrap();
        let f = min_cost_flow(&sc, &p).unwrap();
        // 5 -> 4 -> 3 on level 1, charge, 3 -> 4 on level 2.
        assert!((f.cost - 3.5).abs() < 1e-12, "{}", f.cost);
        let charge = sc.graph.charging_arc(0, 1);
        assert_eq!(f.arc_flow[charge], 1.0);
        assert_eq!(f.path_flow, vec![1.0]);
    }

    #[test]
    fn station_capacity_blocks_the_second_vehicle() {
        let mut inst = corridor(1, 2);
        inst.idle_stock[5][0] = 1;
        inst.idle_stock[0][0] = 1;
        let p = placement_of(&inst, &[(4, 2), (1, 2)]);
        let sc = Scenario::new(inst).unwrap();
        assert!(min_cost_flow(&sc, &p).is_none());
    }

    #[test]
    fn consecutive_climbs_share_one_path() {
        // Vehicle A needs 1 -> 2, vehicle B needs 2 -> 3. Swapping targets
        // lets a single 1 -> 3 charge serve both.
        let mut inst = corridor(1, 3);
        inst.idle_stock[2][0] = 1;
        inst.idle_stock[4][1] = 1;
        let p = placement_of(&inst, &[(2, 2), (4, 3)]);
        let sc = Scenario::new(inst).unwrap();
        let f = min_cost_flow(&sc, &p).unwrap();
        assert!((f.cost - 5.0).abs() < 1e-12, "{}", f.cost);
        assert_eq!(f.path_flow.iter().sum::<f64>(), 1.0);
        let relaxed = solve_lp(&flow_subsystem(&sc, &p).lp);
        assert!((f.cost - relaxed.objective).abs() < 1e-9);
    }

    #[test]
    fn split_climbs_exceed_one_charger() {
        // A needs 1 -> 2 and B needs 3 -> 4: two paths on one charger.
        let mut inst = corridor(1, 4);
        inst.idle_stock[2][0] = 1;
        inst.idle_stock[4][2] = 1;
        let p = placement_of(&inst, &[(2, 2), (4, 4)]);
        let sc = Scenario::new(inst).unwrap();
        assert!(min_cost_flow(&sc, &p).is_none());
        assert_eq!(solve_lp(&flow_subsystem(&sc, &p).lp).status, LpStatus::Infeasible);
    }

    #[test]
    fn network_flow_matches_subsystem_relaxation() {
        let mut inst = corridor(2, 2);
        inst.idle_stock[0][0] = 1;
        inst.idle_stock[5][0] = 1;
        let p = placement_of(&inst, &[(2, 2), (4, 1)]);
        let sc = Scenario::new(inst).unwrap();
        let f = min_cost_flow(&sc, &p).unwrap();
        let relaxed = solve_lp(&flow_subsystem(&sc, &p).lp);
        assert!((f.cost - relaxed.objective).abs() < 1e-9);
    }
}
