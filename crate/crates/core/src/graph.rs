//! Node-charge graph: every zone is replicated once per charge level.
//!
//! Spatial arcs connect zones on the same level and cost the travel time.
//! Charging arcs exist only at station nodes and climb exactly one level.
//! A vehicle at `(j, h)` serves every demand `(i, g)` with `g <= h` at the
//! spatial cost `t[i][j]`.

use crate::error::{Error, Result};
use crate::instance::{Instance, NodeCharge};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArcKind {
    Spatial,
    /// Index into `Instance::stations`.
    Charging { station: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arc {
    pub from: NodeCharge,
    pub to: NodeCharge,
    pub cost: f64,
    pub kind: ArcKind,
}

#[derive(Clone, Debug)]
pub struct NodeChargeGraph {
    nodes: usize,
    levels: usize,
    arcs: Vec<Arc>,
    out_arcs: Vec<Vec<usize>>,
    in_arcs: Vec<Vec<usize>>,
    /// `charging_arc[station][g - 1]` is the arc `(j, g) -> (j, g + 1)`.
    charging_arc: Vec<Vec<usize>>,
}

/// Builds the node-charge graph of `instance`.
///
/// Arc order is deterministic: spatial arcs level by level in the order of
/// [`Instance::spatial_pairs`], then charging arcs station by station from
/// the bottom level up.
pub fn build_graph(instance: &Instance) -> Result<NodeChargeGraph> {
    if instance.levels == 0 {
        return Err(Error::InvalidInstance("levels must be at least 1".into()));
    }
    for (s, station) in instance.stations.iter().enumerate() {
        if station.node >= instance.node_count {
            return Err(Error::StationOutOfRange {
                station: s,
                node: station.node,
                node_count: instance.node_count,
            });
        }
    }
    let n = instance.node_count;
    let h = instance.levels;
    let mut arcs = Vec::new();
    let pairs = instance.spatial_pairs();
    for level in 1..=h {
        for &(i, j) in &pairs {
            if i >= n || j >= n || i == j {
                return Err(Error::InvalidInstance(format!("bad spatial arc ({i}, {j})")));
            }
            arcs.push(Arc {
                from: NodeCharge::new(i, level),
                to: NodeCharge::new(j, level),
                cost: instance.travel_time[i][j],
                kind: ArcKind::Spatial,
            });
        }
    }
    let mut charging_arc = Vec::with_capacity(instance.stations.len());
    for (s, station) in instance.stations.iter().enumerate() {
        let cost = instance.charging_cost(s);
        let mut per_level = Vec::with_capacity(h.saturating_sub(1));
        for g in 1..h {
            per_level.push(arcs.len());
            arcs.push(Arc {
                from: NodeCharge::new(station.node, g),
                to: NodeCharge::new(station.node, g + 1),
                cost,
                kind: ArcKind::Charging { station: s },
            });
        }
        charging_arc.push(per_level);
    }

    let mut out_arcs = vec![Vec::new(); n * h];
    let mut in_arcs = vec![Vec::new(); n * h];
    for (a, arc) in arcs.iter().enumerate() {
        out_arcs[instance.vertex_index(arc.from)].push(a);
        in_arcs[instance.vertex_index(arc.to)].push(a);
    }
    Ok(NodeChargeGraph {
        nodes: n,
        levels: h,
        arcs,
        out_arcs,
        in_arcs,
        charging_arc,
    })
}

impl NodeChargeGraph {
    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn vertex_count(&self) -> usize {
        self.nodes * self.levels
    }

    pub fn vertex_index(&self, nc: NodeCharge) -> usize {
        nc.node * self.levels + (nc.level - 1)
    }

    pub fn vertex_at(&self, index: usize) -> NodeCharge {
        NodeCharge::new(index / self.levels, index % self.levels + 1)
    }

    pub fn contains(&self, nc: NodeCharge) -> bool {
        nc.node < self.nodes && nc.level >= 1 && nc.level <= self.levels
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, index: usize) -> &Arc {
        &self.arcs[index]
    }

    /// Outgoing arc indices of a vertex.
    pub fn out_arcs(&self, nc: NodeCharge) -> &[usize] {
        &self.out_arcs[self.vertex_index(nc)]
    }

    /// Incoming arc indices of a vertex.
    pub fn in_arcs(&self, nc: NodeCharge) -> &[usize] {
        &self.in_arcs[self.vertex_index(nc)]
    }

    pub fn spatial_arc_count(&self) -> usize {
        self.arcs.len() - self.charging_arc_count()
    }

    pub fn charging_arc_count(&self) -> usize {
        self.charging_arc.iter().map(Vec::len).sum()
    }

    /// Arc index of the charging step `g -> g + 1` at `station`.
    pub fn charging_arc(&self, station: usize, from_level: usize) -> usize {
        self.charging_arc[station][from_level - 1]
    }

    pub fn station_count(&self) -> usize {
        self.charging_arc.len()
    }

    /// Whether a server at `server` can serve `demand`.
    pub fn covers(&self, server: NodeCharge, demand: NodeCharge) -> Result<bool> {
        self.check(server)?;
        self.check(demand)?;
        Ok(covers(server, demand))
    }

    /// Access cost of `demand` when served from `server`; spatial only.
    pub fn access_cost(
        &self,
        instance: &Instance,
        demand: NodeCharge,
        server: NodeCharge,
    ) -> Result<f64> {
        if !self.covers(server, demand)? {
            return Err(Error::NotCovering {
                demand_node: demand.node,
                demand_level: demand.level,
                server_node: server.node,
                server_level: server.level,
            });
        }
        Ok(instance.travel_time[demand.node][server.node])
    }

    fn check(&self, nc: NodeCharge) -> Result<()> {
        if self.contains(nc) {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange {
                node: nc.node,
                level: nc.level,
            })
        }
    }
}

/// Coverage on valid vertices: any node, any lower-or-equal charge.
#[inline]
pub fn covers(server: NodeCharge, demand: NodeCharge) -> bool {
    server.level >= demand.level
}

/// One partial charging path `(station, from_level -> to_level)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChargingPath {
    pub station: usize,
    pub from_level: usize,
    pub to_level: usize,
}

impl ChargingPath {
    /// Whether the path uses the charging arc leaving `level`.
    pub fn traverses(&self, level: usize) -> bool {
        self.from_level <= level && level < self.to_level
    }
}

/// Enumerated charging paths per station, with arc incidence.
#[derive(Clone, Debug)]
pub struct ChargingPathSet {
    levels: usize,
    paths: Vec<ChargingPath>,
    per_station: usize,
}

/// Every `(g, h)` with `g < h` at every station, ordered by station, then
/// `g`, then `h`.
pub fn charging_paths(instance: &Instance) -> ChargingPathSet {
    let h = instance.levels;
    let mut paths = Vec::new();
    for station in 0..instance.stations.len() {
        for from_level in 1..=h {
            for to_level in from_level + 1..=h {
                paths.push(ChargingPath {
                    station,
                    from_level,
                    to_level,
                });
            }
        }
    }
    ChargingPathSet {
        levels: h,
        paths,
        per_station: h * h.saturating_sub(1) / 2,
    }
}

impl ChargingPathSet {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn paths(&self) -> &[ChargingPath] {
        &self.paths
    }

    pub fn per_station(&self) -> usize {
        self.per_station
    }

    /// Global indices of the paths of one station.
    pub fn station_paths(&self, station: usize) -> std::ops::Range<usize> {
        station * self.per_station..(station + 1) * self.per_station
    }

    /// Global path indices traversing the charging arc `level -> level + 1`
    /// at `station`.
    pub fn traversing(&self, station: usize, level: usize) -> impl Iterator<Item = usize> + '_ {
        self.station_paths(station)
            .filter(move |&p| self.paths[p].traverses(level))
    }

    pub fn levels(&self) -> usize {
        self.levels
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{ChargingCost, QueueParams, Station};

    fn line(n: usize, levels: usize, stations: &[usize]) -> Instance {
        let mut arcs = Vec::new();
        for i in 0..n.saturating_sub(1) {
            arcs.push([i, i + 1]);
            arcs.push([i + 1, i]);
        }
        Instance {
            node_count: n,
            travel_time: (0..n)
                .map(|i| (0..n).map(|j| (i as f64 - j as f64).abs()).collect())
                .collect(),
            levels,
            charge_per_level: 1.0 / levels as f64,
            stations: stations.iter().map(|&node| Station { node, capacity: 1 }).collect(),
            arrival_rate: vec![vec![1.0; levels]; n],
            service_rate: vec![vec![1.0; levels]; n],
            idle_stock: vec![vec![0; levels]; n],
            theta: 0.2,
            max_servers: 1,
            big_m: 10_000.0,
            charging_arc_cost: ChargingCost::default(),
            queue_params: QueueParams::default(),
            spatial_arcs: Some(arcs),
            charge_per_minute: None,
        }
    }

    #[test]
    fn five_node_example() {
        // Stations at the first and third zone, four levels.
        let inst = line(5, 4, &[0, 2]);
        let g = build_graph(&inst).unwrap();
        assert_eq!(g.vertex_count(), 20);
        assert_eq!(g.charging_arc_count(), 6);
        for arc in g.arcs() {
            match arc.kind {
                ArcKind::Spatial => assert_eq!(arc.from.level, arc.to.level),
                ArcKind::Charging { station } => {
                    assert_eq!(arc.from.node, inst.stations[station].node);
                    assert_eq!(arc.to.level, arc.from.level + 1);
                }
            }
            assert!(arc.cost >= 0.0);
        }
    }

    #[test]
    fn degenerate_graph() {
        let inst = line(1, 1, &[]);
        let g = build_graph(&inst).unwrap();
        assert_eq!(g.vertex_count(), 1);
        assert!(g.arcs().is_empty());
    }

    #[test]
    fn line_topology_arc_count() {
        let inst = line(10, 4, &[1, 3, 6, 8]);
        let g = build_graph(&inst).unwrap();
        assert_eq!(g.spatial_arc_count(), 8 * 10 - 8);
        assert_eq!(g.arcs().len(), 84);
    }

    #[test]
    fn complete_topology_by_default() {
        let mut inst = line(3, 2, &[0]);
        inst.spatial_arcs = None;
        let g = build_graph(&inst).unwrap();
        assert_eq!(g.spatial_arc_count(), 3 * 2 * 2);
        assert_eq!(g.charging_arc_count(), 1);
    }

    #[test]
    fn rejects_out_of_range_station() {
        let mut inst = line(3, 2, &[0]);
        inst.stations[0].node = 3;
        assert!(matches!(build_graph(&inst), Err(Error::StationOutOfRange { .. })));
    }

    #[test]
    fn coverage_examples() {
        let inst = line(5, 4, &[0, 2]);
        let g = build_graph(&inst).unwrap();
        let nc = NodeCharge::new;
        assert!(g.covers(nc(3, 2), nc(1, 1)).unwrap());
        assert!(g.covers(nc(3, 2), nc(3, 2)).unwrap());
        assert!(!g.covers(nc(3, 1), nc(1, 2)).unwrap());
        assert!(g.covers(nc(5, 1), nc(0, 1)).is_err());
    }

    #[test]
    fn access_cost_is_spatial() {
        let inst = line(5, 4, &[0, 2]);
        let g = build_graph(&inst).unwrap();
        let nc = NodeCharge::new;
        assert_eq!(g.access_cost(&inst, nc(1, 1), nc(3, 2)).unwrap(), inst.travel_time[1][3]);
        assert_eq!(g.access_cost(&inst, nc(2, 1), nc(2, 4)).unwrap(), 0.0);
        assert!(matches!(
            g.access_cost(&inst, nc(1, 3), nc(3, 2)),
            Err(Error::NotCovering { .. })
        ));
    }

    #[test]
    fn four_level_paths() {
        let inst = line(3, 4, &[1]);
        let paths = charging_paths(&inst);
        let pairs: Vec<_> = paths.paths().iter().map(|p| (p.from_level, p.to_level)).collect();
        assert_eq!(pairs, vec![(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]);
        // 1->4 uses every arc, 2->3 only the middle one.
        let long = paths.paths()[2];
        assert!(long.traverses(1) && long.traverses(2) && long.traverses(3));
        let short = paths.paths()[3];
        assert!(!short.traverses(1) && short.traverses(2) && !short.traverses(3));
        let through_middle: Vec<_> = paths.traversing(0, 2).collect();
        assert_eq!(through_middle, vec![1, 2, 3, 4]);
    }

    #[test]
    fn single_level_has_no_paths() {
        let inst = line(3, 1, &[0, 1]);
        assert!(charging_paths(&inst).is_empty());
    }
}
