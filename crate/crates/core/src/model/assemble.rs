use crate::error::{Error, Result};
use crate::graph::{ChargingPathSet, NodeChargeGraph};
use crate::instance::{Instance, NodeCharge};
use crate::queueing::{capacity_coefficients, RhoTable};

use super::{Domain, Family, Layout, MilpModel, Mode, RowKey, Sense};

/// Builds the rebalancing program for `instance`.
///
/// Row families are emitted in a fixed order (see [`Family`]); within a
/// family rows follow vertex-index order. X spans every pair of node-charges,
/// with the non-covering ones pinned to zero by the `EQ3` rows rather than
/// dropped.
pub fn assemble(
    instance: &Instance,
    graph: &NodeChargeGraph,
    paths: &ChargingPathSet,
    rho: &RhoTable,
    mode: Mode,
) -> Result<MilpModel> {
    let n = instance.node_count;
    let h = instance.levels;
    let c = instance.max_servers;
    if graph.node_count() != n || graph.levels() != h {
        return Err(Error::InvalidInstance(format!(
            "graph is {}x{} but the instance is {n}x{h}",
            graph.node_count(),
            graph.levels()
        )));
    }
    if paths.levels() != h || paths.len() != instance.stations.len() * paths.per_station() {
        return Err(Error::InvalidInstance("charging path set does not match the instance".into()));
    }
    if graph.station_count() != instance.stations.len() {
        return Err(Error::InvalidInstance("graph stations do not match the instance".into()));
    }
    if rho.max_servers() < c {
        return Err(Error::Queueing(format!(
            "rho table covers {} servers but max_servers is {c}",
            rho.max_servers()
        )));
    }
    let increments = if mode == Mode::NonMyopic {
        for nc in instance.vertices() {
            let rate = instance.mu(nc);
            if !(rate > 0.0) {
                return Err(Error::NonPositiveServiceRate {
                    node: nc.node,
                    level: nc.level,
                    rate,
                });
            }
        }
        Some(instance.vertices().map(|nc| capacity_coefficients(rho, instance.mu(nc))).collect::<Result<Vec<_>>>()?)
    } else {
        None
    };

    let layout = Layout {
        nodes: n,
        levels: h,
        servers: c,
        arcs: graph.arcs().len(),
        paths: paths.len(),
    };
    let arc_ends = graph.arcs().iter().map(|a| (a.from, a.to)).collect();
    let path_ends = paths
        .paths()
        .iter()
        .map(|p| (instance.stations[p.station].node, p.from_level, p.to_level))
        .collect();
    let mut model = MilpModel::empty(mode, layout, arc_ends, path_ends);

    let vertices: Vec<NodeCharge> = instance.vertices().collect();
    for &d in &vertices {
        let lam = instance.lambda(d);
        for &s in &vertices {
            model.set_objective(layout.x(d, s), lam * instance.travel_time[d.node][s.node]);
        }
    }
    for (a, arc) in graph.arcs().iter().enumerate() {
        model.set_column(
            layout.w(a),
            instance.theta * arc.cost,
            0.0,
            f64::INFINITY,
            Domain::Integer,
        );
    }

    let mut terms = Vec::new();

    for &d in &vertices {
        terms.extend(vertices.iter().filter(|s| s.level >= d.level).map(|&s| (layout.x(d, s), 1.0)));
        model.push_row(RowKey::new(Family::Eq2, &[d.node, d.level]), Sense::Eq, 1.0, &mut terms);
    }
    for &d in &vertices {
        terms.extend(vertices.iter().filter(|s| s.level < d.level).map(|&s| (layout.x(d, s), 1.0)));
        model.push_row(RowKey::new(Family::Eq3, &[d.node, d.level]), Sense::Eq, 0.0, &mut terms);
    }
    for &s in &vertices {
        for m in 2..=c {
            terms.push((layout.y(s, m), 1.0));
            terms.push((layout.y(s, m - 1), -1.0));
            model.push_row(RowKey::new(Family::Eq4, &[s.node, s.level, m]), Sense::Le, 0.0, &mut terms);
        }
    }
    if let Some(increments) = &increments {
        for (v, &s) in vertices.iter().enumerate() {
            for &d in &vertices {
                terms.push((layout.x(d, s), instance.lambda(d)));
            }
            for (m, inc) in increments[v].iter().take(c).enumerate() {
                terms.push((layout.y(s, m + 1), -inc));
            }
            model.push_row(RowKey::new(Family::Eq5, &[s.node, s.level]), Sense::Le, 0.0, &mut terms);
        }
    }
    for &s in &vertices {
        for m in 1..=c {
            terms.push((layout.y(s, m), 1.0));
        }
    }
    model.push_row(
        RowKey::new(Family::Eq6, &[]),
        Sense::Eq,
        instance.total_stock() as f64,
        &mut terms,
    );
    for &d in &vertices {
        for &s in &vertices {
            terms.push((layout.x(d, s), 1.0));
            terms.push((layout.y(s, 1), -1.0));
            model.push_row(
                RowKey::new(Family::Eq7, &[d.node, d.level, s.node, s.level]),
                Sense::Le,
                0.0,
                &mut terms,
            );
        }
    }

    let net_inflow = |nc: NodeCharge, sign: f64, terms: &mut Vec<(usize, f64)>| {
        terms.extend(graph.in_arcs(nc).iter().map(|&a| (layout.w(a), sign)));
        terms.extend(graph.out_arcs(nc).iter().map(|&a| (layout.w(a), -sign)));
    };
    let big_m = instance.big_m;
    for family in [Family::Eq8, Family::Eq9] {
        let sign = if family == Family::Eq8 { 1.0 } else { -1.0 };
        for &v in vertices.iter().filter(|&&v| instance.stock(v) == 0) {
            net_inflow(v, sign, &mut terms);
            terms.push((layout.y(v, 1), -big_m));
            model.push_row(RowKey::new(family, &[v.node, v.level]), Sense::Le, 0.0, &mut terms);
        }
    }
    for &s in &vertices {
        net_inflow(s, 1.0, &mut terms);
        for m in 1..=c {
            terms.push((layout.y(s, m), -1.0));
        }
        model.push_row(
            RowKey::new(Family::Eq10, &[s.node, s.level]),
            Sense::Eq,
            -(instance.stock(s) as f64),
            &mut terms,
        );
    }
    for (st, station) in instance.stations.iter().enumerate() {
        for g in 1..h {
            terms.extend(paths.traversing(st, g).map(|p| (layout.p(p), 1.0)));
            terms.push((layout.w(graph.charging_arc(st, g)), -1.0));
            model.push_row(RowKey::new(Family::Eq11, &[station.node, g]), Sense::Eq, 0.0, &mut terms);
        }
    }
    for (st, station) in instance.stations.iter().enumerate() {
        terms.extend(paths.station_paths(st).map(|p| (layout.p(p), 1.0)));
        model.push_row(
            RowKey::new(Family::Eq12, &[station.node]),
            Sense::Le,
            station.capacity as f64,
            &mut terms,
        );
    }
    // One row per node and level transition; rows at nodes without chargers
    // carry no flow and stay empty.
    for node in 0..n {
        let station = instance.station_index(node);
        for g in 1..h {
            let rhs = match station {
                Some(st) => {
                    terms.push((layout.w(graph.charging_arc(st, g)), 1.0));
                    instance.stations[st].capacity as f64
                }
                None => 0.0,
            };
            model.push_row(RowKey::new(Family::ChargeCap, &[node, g]), Sense::Le, rhs, &mut terms);
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, charging_paths};
    use crate::instance::{ChargingCost, QueueParams, Station};
    use crate::model::VarKind;

    fn single_vertex() -> Instance {
        Instance {
            node_count: 1,
            travel_time: vec![vec![0.0]],
            levels: 1,
            charge_per_level: 1.0,
            stations: vec![],
            arrival_rate: vec![vec![1.0]],
            service_rate: vec![vec![5.0]],
            idle_stock: vec![vec![1]],
            theta: 0.2,
            max_servers: 2,
            big_m: 10_000.0,
            charging_arc_cost: ChargingCost::default(),
            queue_params: QueueParams::default(),
            spatial_arcs: None,
            charge_per_minute: None,
        }
    }

    fn build(inst: &Instance, mode: Mode) -> Result<MilpModel> {
        let g = build_graph(inst)?;
        let p = charging_paths(inst);
        assemble(inst, &g, &p, &inst.rho_table()?, mode)
    }

    #[test]
    fn single_vertex_model() {
        let inst = single_vertex();
        let m = build(&inst, Mode::Myopic).unwrap();
        assert_eq!(m.layout.y_offset(), 1);
        assert_eq!(m.column_count(), 1 + 2);
        let eq2: Vec<_> = m.row_entries(0).collect();
        assert_eq!(eq2, vec![(0, 1.0)]);
        assert_eq!(m.rows()[0].rhs, 1.0);
        assert!(m.family_counts().get(Family::Eq5) == 0);
    }

    #[test]
    fn non_myopic_adds_one_capacity_row_per_vertex() {
        let inst = single_vertex();
        let m = build(&inst, Mode::NonMyopic).unwrap();
        assert_eq!(m.family_counts().get(Family::Eq5), 1);
        let row = m.rows().iter().position(|r| r.key.family == Family::Eq5).unwrap();
        let entries: Vec<_> = m.row_entries(row).collect();
        let rho = inst.rho_table().unwrap();
        assert_eq!(entries[0], (0, 1.0));
        assert!((entries[1].1 + 5.0 * rho.rho(1)).abs() < 1e-12);
        assert!((entries[2].1 + 5.0 * (rho.rho(2) - rho.rho(1))).abs() < 1e-12);
    }

    #[test]
    fn non_myopic_rejects_zero_service_rate() {
        let mut inst = single_vertex();
        inst.service_rate[0][0] = 0.0;
        assert!(matches!(
            build(&inst, Mode::NonMyopic),
            Err(Error::NonPositiveServiceRate { .. })
        ));
        assert!(build(&inst, Mode::Myopic).is_ok());
    }

    #[test]
    fn column_kinds_round_trip_through_layout() {
        let mut inst = single_vertex();
        inst.node_count = 2;
        inst.levels = 2;
        inst.travel_time = vec![vec![0.0, 3.0], vec![3.0, 0.0]];
        inst.arrival_rate = vec![vec![1.0, 0.5]; 2];
        inst.service_rate = vec![vec![1.0; 2]; 2];
        inst.idle_stock = vec![vec![1, 0], vec![0, 0]];
        inst.stations = vec![Station { node: 1, capacity: 1 }];
        let m = build(&inst, Mode::Myopic).unwrap();
        for col in 0..m.column_count() {
            let expect = match m.var_kind(col) {
                VarKind::X { demand, server } => m.layout.x(demand, server),
                VarKind::Y { at, server } => m.layout.y(at, server),
                VarKind::W { arc, .. } => m.layout.w(arc),
                VarKind::P { path, .. } => m.layout.p(path),
            };
            assert_eq!(col, expect);
        }
        assert_eq!(m.column_name(m.layout.x(NodeCharge::new(1, 2), NodeCharge::new(0, 1))), "X_1_2_0_1");
        assert_eq!(m.column_name(m.layout.p(0)), "P_1_1_2");
    }

    #[test]
    fn objective_prices_access_and_relocation() {
        let mut inst = single_vertex();
        inst.node_count = 2;
        inst.travel_time = vec![vec![0.0, 10.0], vec![10.0, 0.0]];
        inst.arrival_rate = vec![vec![2.0], vec![1.0]];
        inst.service_rate = vec![vec![1.0], vec![1.0]];
        inst.idle_stock = vec![vec![0], vec![1]];
        let m = build(&inst, Mode::Myopic).unwrap();
        let nc = NodeCharge::new;
        assert_eq!(m.objective()[m.layout.x(nc(0, 1), nc(1, 1))], 20.0);
        assert_eq!(m.objective()[m.layout.x(nc(1, 1), nc(0, 1))], 10.0);
        assert_eq!(m.objective()[m.layout.w(0)], 2.0);
    }
}
