//! Problem instance: zones, travel times, charge levels, stations, demand and
//! service rates, idle-vehicle stock, and the scalar model parameters.
//!
//! Nodes are 0-indexed everywhere. Charge levels are 1-indexed in the public
//! API and in files (`level = 1` is the bottom interval); matrices indexed by
//! level are stored row-major as `[node][level - 1]`.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::queueing::{RhoTable, MAX_SERVERS};

/// A vertex of the node-charge graph: zone `node` at charge `level` (1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeCharge {
    pub node: usize,
    pub level: usize,
}

impl NodeCharge {
    pub fn new(node: usize, level: usize) -> Self {
        NodeCharge { node, level }
    }
}

impl fmt::Display for NodeCharge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.node, self.level)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Station {
    pub node: usize,
    pub capacity: u32,
}

/// Cost of one single-level charging step: either one value for every
/// station or one value per station (same order as `Instance::stations`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChargingCost {
    Uniform(f64),
    PerStation(Vec<f64>),
}

impl Default for ChargingCost {
    fn default() -> Self {
        ChargingCost::Uniform(1.0)
    }
}

/// Source of the queueing intensity coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QueueParams {
    Explicit { rho: Vec<f64> },
    Reliability { eta: f64, b: u32 },
}

impl Default for QueueParams {
    /// `eta = 0.95, b = 0` reproduces the reference coefficients
    /// `(0.2236, 0.6416, 1.1576)` for one to three servers.
    fn default() -> Self {
        QueueParams::Reliability { eta: 0.95, b: 0 }
    }
}

fn default_big_m() -> f64 {
    10_000.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub node_count: usize,
    /// `travel_time[i][j]`, minutes.
    pub travel_time: Vec<Vec<f64>>,
    pub levels: usize,
    /// Battery fraction held by one charge interval.
    pub charge_per_level: f64,
    pub stations: Vec<Station>,
    /// Customers per hour demanding at least `level` intervals at `node`.
    pub arrival_rate: Vec<Vec<f64>>,
    /// Services per hour of one vehicle placed at the node-charge.
    pub service_rate: Vec<Vec<f64>>,
    /// Idle vehicles at each node-charge at the start of the interval.
    pub idle_stock: Vec<Vec<u32>>,
    pub theta: f64,
    pub max_servers: usize,
    #[serde(default = "default_big_m")]
    pub big_m: f64,
    #[serde(default)]
    pub charging_arc_cost: ChargingCost,
    #[serde(default)]
    pub queue_params: QueueParams,
    /// Directed node pairs replicated on every level. `None` means the
    /// complete digraph.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spatial_arcs: Option<Vec<[usize; 2]>>,
    /// Battery fraction consumed per minute of travel. Only used to screen
    /// demand that no vehicle at its level could serve to every destination.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charge_per_minute: Option<f64>,
}

/// Non-fatal findings of [`Instance::validate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Warning {
    /// Demand at `at` is positive although a trip from `at.node` to
    /// `destination` needs more charge than `at.level` intervals hold.
    UnreachableDestination {
        at: NodeCharge,
        destination: usize,
        needed: f64,
        available: f64,
    },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::UnreachableDestination {
                at,
                destination,
                needed,
                available,
            } => write!(
                f,
                "demand at {at} is positive but reaching node {destination} needs {needed:.3} of the battery (level holds {available:.3})"
            ),
        }
    }
}

impl Instance {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Json { source, .. } => Error::Json {
                path: path.display().to_string(),
                source,
            },
            other => other,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let instance: Instance = serde_json::from_str(text).map_err(|source| Error::Json {
            path: "<instance>".into(),
            source,
        })?;
        instance.validate()?;
        Ok(instance)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json();
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    /// Number of node-charges, `N * |H|`.
    pub fn vertex_count(&self) -> usize {
        self.node_count * self.levels
    }

    pub fn vertex_index(&self, nc: NodeCharge) -> usize {
        nc.node * self.levels + (nc.level - 1)
    }

    pub fn vertex_at(&self, index: usize) -> NodeCharge {
        NodeCharge::new(index / self.levels, index % self.levels + 1)
    }

    /// All node-charges in vertex-index order.
    pub fn vertices(&self) -> impl Iterator<Item = NodeCharge> + '_ {
        (0..self.vertex_count()).map(move |v| self.vertex_at(v))
    }

    pub fn lambda(&self, nc: NodeCharge) -> f64 {
        self.arrival_rate[nc.node][nc.level - 1]
    }

    pub fn mu(&self, nc: NodeCharge) -> f64 {
        self.service_rate[nc.node][nc.level - 1]
    }

    pub fn stock(&self, nc: NodeCharge) -> u32 {
        self.idle_stock[nc.node][nc.level - 1]
    }

    /// Total idle vehicles `B`.
    pub fn total_stock(&self) -> u32 {
        self.idle_stock.iter().flatten().sum()
    }

    /// Node-charges holding idle vehicles (the origin set `O`).
    pub fn origins(&self) -> Vec<NodeCharge> {
        self.vertices().filter(|&nc| self.stock(nc) > 0).collect()
    }

    pub fn total_demand(&self) -> f64 {
        self.arrival_rate.iter().flatten().sum()
    }

    /// Position of `node` in `stations`, if it hosts chargers.
    pub fn station_index(&self, node: usize) -> Option<usize> {
        self.stations.iter().position(|s| s.node == node)
    }

    pub fn charging_cost(&self, station: usize) -> f64 {
        match &self.charging_arc_cost {
            ChargingCost::Uniform(c) => *c,
            ChargingCost::PerStation(costs) => costs[station],
        }
    }

    pub fn rho_table(&self) -> Result<RhoTable> {
        match &self.queue_params {
            QueueParams::Explicit { rho } => {
                if rho.len() < self.max_servers {
                    return Err(Error::Queueing(format!(
                        "explicit rho table has {} entries but max_servers is {}",
                        rho.len(),
                        self.max_servers
                    )));
                }
                RhoTable::from_values(rho[..self.max_servers].to_vec())
            }
            QueueParams::Reliability { eta, b } => RhoTable::solve(*eta, *b, self.max_servers),
        }
    }

    /// Directed spatial node pairs, replicated on every level.
    pub fn spatial_pairs(&self) -> Vec<(usize, usize)> {
        match &self.spatial_arcs {
            Some(arcs) => arcs.iter().map(|&[i, j]| (i, j)).collect(),
            None => (0..self.node_count)
                .flat_map(|i| (0..self.node_count).filter(move |&j| j != i).map(move |j| (i, j)))
                .collect(),
        }
    }

    /// Checks every structural invariant; returns the non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<Warning>> {
        let n = self.node_count;
        let h = self.levels;
        let bad = |msg: String| Err(Error::InvalidInstance(msg));
        if n == 0 {
            return bad("node_count must be at least 1".into());
        }
        if h == 0 {
            return bad("levels must be at least 1".into());
        }
        if !(self.charge_per_level.is_finite() && self.charge_per_level > 0.0) {
            return bad(format!("charge_per_level must be positive, got {}", self.charge_per_level));
        }
        check_matrix("travel_time", &self.travel_time, n, n)?;
        for (i, row) in self.travel_time.iter().enumerate() {
            for (j, &t) in row.iter().enumerate() {
                if !(t.is_finite() && t >= 0.0) {
                    return bad(format!("travel_time[{i}][{j}] = {t} must be finite and non-negative"));
                }
                if i == j && t != 0.0 {
                    return bad(format!("travel_time[{i}][{i}] must be 0, got {t}"));
                }
            }
        }
        check_matrix("arrival_rate", &self.arrival_rate, n, h)?;
        check_matrix("service_rate", &self.service_rate, n, h)?;
        check_matrix("idle_stock", &self.idle_stock, n, h)?;
        for (name, m) in [("arrival_rate", &self.arrival_rate), ("service_rate", &self.service_rate)] {
            for (i, row) in m.iter().enumerate() {
                for (g, &v) in row.iter().enumerate() {
                    if !(v.is_finite() && v >= 0.0) {
                        return bad(format!("{name}[{i}][{g}] = {v} must be finite and non-negative"));
                    }
                }
            }
        }
        for (s, station) in self.stations.iter().enumerate() {
            if station.node >= n {
                return Err(Error::StationOutOfRange {
                    station: s,
                    node: station.node,
                    node_count: n,
                });
            }
            if self.stations[..s].iter().any(|o| o.node == station.node) {
                return bad(format!("node {} is listed as a station twice", station.node));
            }
        }
        if !(self.theta.is_finite() && self.theta >= 0.0) {
            return bad(format!("theta must be non-negative, got {}", self.theta));
        }
        if self.max_servers == 0 || self.max_servers > MAX_SERVERS {
            return bad(format!(
                "max_servers must be in 1..={MAX_SERVERS}, got {}",
                self.max_servers
            ));
        }
        if !(self.big_m.is_finite() && self.big_m > 0.0) {
            return bad(format!("big_m must be positive, got {}", self.big_m));
        }
        match &self.charging_arc_cost {
            ChargingCost::Uniform(c) if !(c.is_finite() && *c >= 0.0) => {
                return bad(format!("charging_arc_cost must be non-negative, got {c}"));
            }
            ChargingCost::PerStation(costs) => {
                if costs.len() != self.stations.len() {
                    return bad(format!(
                        "charging_arc_cost lists {} costs for {} stations",
                        costs.len(),
                        self.stations.len()
                    ));
                }
                if let Some(c) = costs.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
                    return bad(format!("charging_arc_cost entries must be non-negative, got {c}"));
                }
            }
            _ => {}
        }
        if let Some(arcs) = &self.spatial_arcs {
            for (k, &[i, j]) in arcs.iter().enumerate() {
                if i >= n || j >= n {
                    return bad(format!("spatial_arcs[{k}] = [{i}, {j}] references a missing node"));
                }
                if i == j {
                    return bad(format!("spatial_arcs[{k}] is a self-loop on node {i}"));
                }
                if arcs[..k].contains(&[i, j]) {
                    return bad(format!("spatial_arcs[{k}] = [{i}, {j}] is duplicated"));
                }
            }
        }
        if let QueueParams::Reliability { eta, .. } = self.queue_params {
            if !(eta > 0.0 && eta < 1.0) {
                return bad(format!("queue_params.eta must lie in (0, 1), got {eta}"));
            }
        }
        self.rho_table()?;
        Ok(self.screen_demand())
    }

    fn screen_demand(&self) -> Vec<Warning> {
        let Some(rate) = self.charge_per_minute else {
            return Vec::new();
        };
        let mut warnings = Vec::new();
        for nc in self.vertices() {
            if self.lambda(nc) <= 0.0 {
                continue;
            }
            let available = nc.level as f64 * self.charge_per_level;
            for d in 0..self.node_count {
                let needed = self.travel_time[nc.node][d] * rate;
                if needed > available {
                    warnings.push(Warning::UnreachableDestination {
                        at: nc,
                        destination: d,
                        needed,
                        available,
                    });
                }
            }
        }
        warnings
    }
}

fn check_matrix<T>(name: &str, m: &[Vec<T>], rows: usize, cols: usize) -> Result<()> {
    if m.len() != rows {
        return Err(Error::InvalidInstance(format!(
            "{name} has {} rows, expected {rows}",
            m.len()
        )));
    }
    if let Some((i, row)) = m.iter().enumerate().find(|(_, r)| r.len() != cols) {
        return Err(Error::InvalidInstance(format!(
            "{name}[{i}] has {} entries, expected {cols}",
            row.len()
        )));
    }
    Ok(())
}
