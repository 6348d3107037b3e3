use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::NodeChargeGraph;
use crate::instance::Instance;

use super::{Family, MilpModel, Mode, Sense};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Optimal,
    Feasible,
    Infeasible,
    TimeLimit,
    Unbounded,
}

impl Status {
    /// Whether the solution carries usable variable values.
    pub fn has_values(self) -> bool {
        matches!(self, Status::Optimal | Status::Feasible | Status::TimeLimit)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Optimal => "optimal",
            Status::Feasible => "feasible",
            Status::Infeasible => "infeasible",
            Status::TimeLimit => "time-limit",
            Status::Unbounded => "unbounded",
        })
    }
}

/// Largest violation per constraint family, plus bound and integrality gaps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub families: BTreeMap<String, f64>,
    pub bounds: f64,
    pub integrality: f64,
    /// Column with the largest integrality gap, if any gap is positive.
    pub worst_integer: Option<usize>,
    pub tolerance: f64,
    pub feasible: bool,
}

impl ViolationReport {
    pub fn family(&self, family: Family) -> f64 {
        self.families.get(family.tag()).copied().unwrap_or(0.0)
    }

    pub fn max_row_violation(&self) -> f64 {
        self.families.values().copied().fold(0.0, f64::max)
    }
}

/// Checks `values` against every row, bound and integrality requirement of
/// `model`. Never fails; the report says what is off and by how much.
pub fn check_solution(model: &MilpModel, values: &[f64], tolerance: f64) -> ViolationReport {
    assert_eq!(values.len(), model.column_count(), "one value per column");
    let mut families: BTreeMap<String, f64> = BTreeMap::new();
    for (family, count) in model.family_counts().iter() {
        if count > 0 {
            families.insert(family.tag().to_string(), 0.0);
        }
    }
    let activity = model.row_activities(values);
    for (row, act) in model.rows().iter().zip(activity) {
        let v = match row.sense {
            Sense::Le => (act - row.rhs).max(0.0),
            Sense::Ge => (row.rhs - act).max(0.0),
            Sense::Eq => (act - row.rhs).abs(),
        };
        let slot = families.entry(row.key.family.tag().to_string()).or_insert(0.0);
        *slot = slot.max(v);
    }
    let mut bounds: f64 = 0.0;
    let mut integrality: f64 = 0.0;
    let mut worst_integer = None;
    for (c, &x) in values.iter().enumerate() {
        bounds = bounds.max(model.lower()[c] - x).max(x - model.upper()[c]);
        if model.domain(c).is_integral() {
            let gap = (x - x.round()).abs();
            if gap > integrality {
                integrality = gap;
                worst_integer = Some(c);
            }
        }
    }
    let feasible = families.values().all(|&v| v <= tolerance) && bounds <= tolerance && integrality <= tolerance;
    ViolationReport {
        families,
        bounds,
        integrality,
        worst_integer,
        tolerance,
        feasible,
    }
}

/// Access plus weighted relocation cost of a full variable vector, computed
/// from the instance data rather than the assembled objective.
pub fn evaluate_objective(instance: &Instance, graph: &NodeChargeGraph, values: &[f64]) -> f64 {
    let v = instance.vertex_count();
    let mut access = 0.0;
    for d in 0..v {
        let dn = instance.vertex_at(d);
        let lam = instance.lambda(dn);
        if lam == 0.0 {
            continue;
        }
        for s in 0..v {
            let x = values[d * v + s];
            if x != 0.0 {
                access += lam * instance.travel_time[dn.node][instance.vertex_at(s).node] * x;
            }
        }
    }
    let w_offset = v * v + v * instance.max_servers;
    let relocation: f64 = graph
        .arcs()
        .iter()
        .enumerate()
        .map(|(a, arc)| arc.cost * values[w_offset + a])
        .sum();
    access + instance.theta * relocation
}

/// Result of any solve method, in the column space of the assembled model.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub status: Status,
    pub mode: Mode,
    pub objective: Option<f64>,
    /// Best proven lower bound, when the method produces one.
    pub bound: Option<f64>,
    pub values: Vec<f64>,
    pub violations: Option<ViolationReport>,
    pub nodes: usize,
    pub warnings: Vec<String>,
}

impl Solution {
    pub fn infeasible(mode: Mode) -> Self {
        Solution::without_values(Status::Infeasible, mode)
    }

    pub fn without_values(status: Status, mode: Mode) -> Self {
        Solution {
            status,
            mode,
            objective: None,
            bound: None,
            values: Vec::new(),
            violations: None,
            nodes: 0,
            warnings: Vec::new(),
        }
    }

    /// Wraps a full value vector; the objective is recomputed from `model`.
    pub fn from_values(model: &MilpModel, status: Status, values: Vec<f64>) -> Self {
        let objective = model.objective().iter().zip(&values).map(|(c, x)| c * x).sum();
        let violations = check_solution(model, &values, 1e-6);
        Solution {
            status,
            mode: model.mode,
            objective: Some(objective),
            bound: None,
            values,
            violations: Some(violations),
            nodes: 0,
            warnings: Vec::new(),
        }
    }

    /// Relative gap between objective and bound, when both exist.
    pub fn gap(&self) -> Option<f64> {
        let (z, b) = (self.objective?, self.bound?);
        Some(((z - b) / z.abs().max(1e-9)).max(0.0))
    }

    pub fn value(&self, col: usize) -> f64 {
        self.values.get(col).copied().unwrap_or(0.0)
    }

    pub fn to_file(&self, model: &MilpModel) -> SolutionFile {
        let values = self
            .values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(c, &v)| (model.column_name(c), v))
            .collect();
        SolutionFile {
            status: self.status,
            mode: self.mode,
            objective: self.objective,
            bound: self.bound,
            gap: self.gap(),
            nodes: self.nodes,
            violations: self.violations.clone(),
            warnings: self.warnings.clone(),
            values,
        }
    }
}

/// On-disk form of a [`Solution`]: nonzero values keyed by column name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub status: Status,
    pub mode: Mode,
    pub objective: Option<f64>,
    pub bound: Option<f64>,
    pub gap: Option<f64>,
    pub nodes: usize,
    pub violations: Option<ViolationReport>,
    #[serde(default)]
    pub warnings: Vec<String>,
    pub values: BTreeMap<String, f64>,
}

impl SolutionFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("solution serializes");
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    /// Full column vector of `model` from the stored nonzeros.
    pub fn values_for(&self, model: &MilpModel) -> Result<Vec<f64>> {
        let index: std::collections::HashMap<String, usize> =
            (0..model.column_count()).map(|c| (model.column_name(c), c)).collect();
        let mut values = vec![0.0; model.column_count()];
        for (name, &v) in &self.values {
            let c = index
                .get(name)
                .ok_or_else(|| Error::SolutionFormat(format!("variable `{name}` is not in the model")))?;
            values[*c] = v;
        }
        Ok(values)
    }

    /// Parses a `W_i_g_j_h` or `Y_j_h_m` style name into its kind letter and
    /// indices.
    pub fn split_name(name: &str) -> Result<(char, Vec<usize>)> {
        let mut parts = name.split('_');
        let kind = parts
            .next()
            .and_then(|k| k.chars().next())
            .ok_or_else(|| Error::SolutionFormat(format!("empty variable name `{name}`")))?;
        let idx = parts
            .map(|p| {
                p.parse::<usize>()
                    .map_err(|_| Error::SolutionFormat(format!("bad index in `{name}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((kind, idx))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, charging_paths};
    use crate::instance::{ChargingCost, NodeCharge, QueueParams, Station};
    use crate::model::assemble;

    fn two_node() -> Instance {
        Instance {
            node_count: 2,
            travel_time: vec![vec![0.0, 10.0], vec![10.0, 0.0]],
            levels: 1,
            charge_per_level: 1.0,
            stations: vec![],
            arrival_rate: vec![vec![2.0], vec![1.0]],
            service_rate: vec![vec![1.0], vec![1.0]],
            idle_stock: vec![vec![0], vec![1]],
            theta: 0.2,
            max_servers: 1,
            big_m: 10_000.0,
            charging_arc_cost: ChargingCost::default(),
            queue_params: QueueParams::default(),
            spatial_arcs: None,
            charge_per_minute: None,
        }
    }

    #[test]
    fn hand_computed_two_node_objective() {
        let inst = two_node();
        let g = build_graph(&inst).unwrap();
        let m = assemble(&inst, &g, &charging_paths(&inst), &inst.rho_table().unwrap(), Mode::Myopic).unwrap();
        let nc = NodeCharge::new;
        let mut x = vec![0.0; m.column_count()];
        x[m.layout.x(nc(0, 1), nc(0, 1))] = 1.0;
        x[m.layout.x(nc(1, 1), nc(0, 1))] = 1.0;
        x[m.layout.y(nc(0, 1), 1)] = 1.0;
        // Arc 1 is 1 -> 0 in the complete digraph order.
        assert_eq!(g.arc(1).from, nc(1, 1));
        x[m.layout.w(1)] = 1.0;
        let z = evaluate_objective(&inst, &g, &x);
        assert!((z - 12.0).abs() < 1e-12);
        let sol = Solution::from_values(&m, Status::Feasible, x);
        assert!((sol.objective.unwrap() - z).abs() < 1e-12);
        let report = sol.violations.unwrap();
        assert!(report.feasible, "{report:?}");
    }

    #[test]
    fn theta_scales_only_relocation() {
        let mut inst = two_node();
        let g = build_graph(&inst).unwrap();
        let nc = NodeCharge::new;
        let m = assemble(&inst, &g, &charging_paths(&inst), &inst.rho_table().unwrap(), Mode::Myopic).unwrap();
        let mut x = vec![0.0; m.column_count()];
        x[m.layout.x(nc(0, 1), nc(0, 1))] = 1.0;
        x[m.layout.x(nc(1, 1), nc(0, 1))] = 1.0;
        x[m.layout.w(1)] = 1.0;
        let z1 = evaluate_objective(&inst, &g, &x);
        inst.theta *= 2.0;
        let z2 = evaluate_objective(&inst, &g, &x);
        assert!((z2 - z1 - 0.2 * 10.0).abs() < 1e-12);
    }

    #[test]
    fn empty_objective() {
        let mut inst = two_node();
        inst.arrival_rate = vec![vec![0.0], vec![0.0]];
        let g = build_graph(&inst).unwrap();
        let x = vec![1.0; 4 + 2 + g.arcs().len()];
        let mut y = x.clone();
        for v in y.iter_mut().skip(6) {
            *v = 0.0;
        }
        assert_eq!(evaluate_objective(&inst, &g, &y), 0.0);
    }

    #[test]
    fn ordering_breach_and_double_station_use() {
        let mut inst = two_node();
        inst.levels = 2;
        inst.max_servers = 2;
        inst.arrival_rate = vec![vec![0.0; 2]; 2];
        inst.service_rate = vec![vec![1.0; 2]; 2];
        inst.idle_stock = vec![vec![1, 0], vec![1, 0]];
        inst.stations = vec![Station { node: 0, capacity: 1 }];
        let g = build_graph(&inst).unwrap();
        let m = assemble(&inst, &g, &charging_paths(&inst), &inst.rho_table().unwrap(), Mode::Myopic).unwrap();
        let nc = NodeCharge::new;
        let mut x = vec![0.0; m.column_count()];
        x[m.layout.y(nc(0, 1), 2)] = 1.0;
        let report = check_solution(&m, &x, 1e-6);
        assert_eq!(report.family(Family::Eq4), 1.0);
        assert!(!report.feasible);

        // Two vehicles charged through the single charger.
        x[m.layout.p(0)] = 2.0;
        let report = check_solution(&m, &x, 1e-6);
        assert_eq!(report.family(Family::Eq12), 1.0);
    }

    #[test]
    fn name_splitting() {
        assert_eq!(SolutionFile::split_name("W_1_2_3_4").unwrap(), ('W', vec![1, 2, 3, 4]));
        assert!(SolutionFile::split_name("Y_a_1").is_err());
    }
}
