//! Exact and heuristic solution methods.
//!
//! [`solve_exact`] runs branch-and-bound on the assembled program. The
//! placement-based methods ([`greedy_place`], [`brute_force`]) fix the
//! server counts per node-charge and solve the two remaining subproblems
//! directly: demand assignment and the relocation flow.

mod assign;
mod bnb;
mod brute;
mod exact;
mod flow;
mod greedy;
pub mod lp;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{build_graph, charging_paths, ChargingPathSet, NodeChargeGraph};
use crate::instance::Instance;
use crate::model::{assemble, MilpModel, Mode};
use crate::queueing::RhoTable;

pub use assign::{assign_demand, Assignment};
pub use bnb::{solve_mip, Heuristic, MipOutcome, MipProblem, MipStatus};
pub use brute::{brute_force, placement_count, ENUMERATION_LIMIT};
pub use exact::{branch_and_bound, solve_exact};
use exact::screened_out;
pub use flow::{flow_subsystem, min_cost_flow, Flow};
pub use greedy::{greedy_place, GreedyReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BranchRule {
    /// Fractional part closest to one half; ties to the lowest column.
    #[default]
    MostFractional,
    /// Uniform among fractional columns, drawn from the seeded generator.
    Random,
    /// Largest product of estimated down and up objective gains, learned
    /// from earlier branchings; ties to the lowest column.
    Pseudocost,
}

impl FromStr for BranchRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "most-fractional" => Ok(BranchRule::MostFractional),
            "random" => Ok(BranchRule::Random),
            "pseudocost" => Ok(BranchRule::Pseudocost),
            _ => Err(Error::InvalidOption(format!("unknown branching rule `{s}`"))),
        }
    }
}

impl fmt::Display for BranchRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BranchRule::MostFractional => "most-fractional",
            BranchRule::Random => "random",
            BranchRule::Pseudocost => "pseudocost",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    /// Wall-clock budget in seconds.
    pub time_limit: f64,
    pub absolute_gap: f64,
    pub relative_gap: f64,
    pub integrality_tolerance: f64,
    /// Treat Y as continuous in `[0, 1]`. `None` relaxes Y for non-myopic
    /// solves only.
    pub relax_y: Option<bool>,
    pub branching: BranchRule,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            time_limit: 600.0,
            absolute_gap: 1e-7,
            relative_gap: 1e-9,
            integrality_tolerance: 1e-6,
            relax_y: None,
            branching: BranchRule::MostFractional,
            seed: 0,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.time_limit > 0.0) {
            return Err(Error::InvalidOption(format!(
                "time limit must be positive, got {}",
                self.time_limit
            )));
        }
        if !(self.absolute_gap >= 0.0 && self.relative_gap >= 0.0) {
            return Err(Error::InvalidOption("gaps must be non-negative".into()));
        }
        Ok(())
    }

    pub fn relaxes_y(&self, mode: Mode) -> bool {
        self.relax_y.unwrap_or(mode == Mode::NonMyopic)
    }
}

/// An instance together with its graph, charging paths and intensity table.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub instance: Instance,
    pub graph: NodeChargeGraph,
    pub paths: ChargingPathSet,
    pub rho: RhoTable,
}

impl Scenario {
    pub fn new(instance: Instance) -> Result<Self> {
        instance.validate()?;
        let graph = build_graph(&instance)?;
        let paths = charging_paths(&instance);
        let rho = instance.rho_table()?;
        Ok(Scenario {
            instance,
            graph,
            paths,
            rho,
        })
    }

    pub fn assemble(&self, mode: Mode) -> Result<MilpModel> {
        assemble(&self.instance, &self.graph, &self.paths, &self.rho, mode)
    }

    /// Capacity `mu * rho(k)` of `k` servers at vertex `v`.
    pub fn capacity(&self, v: usize, servers: u32) -> f64 {
        if servers == 0 {
            return 0.0;
        }
        let nc = self.instance.vertex_at(v);
        self.instance.mu(nc) * self.rho.rho(servers as usize)
    }
}

/// A level `g` at which the demand from levels `>= g` exceeds the largest
/// capacity the whole fleet could offer from vertices at levels `>= g`.
/// Such a level rules out every placement when capacity binds.
pub fn capacity_shortfall(scenario: &Scenario) -> Option<usize> {
    let inst = &scenario.instance;
    let fleet = inst.total_stock() as usize;
    let cap = inst.max_servers.min(fleet);
    let mut order: Vec<usize> = (0..inst.vertex_count()).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(inst.vertex_at(v).level));
    // most[k]: best capacity from k servers over the vertices seen so far.
    let mut most = vec![f64::NEG_INFINITY; fleet + 1];
    most[0] = 0.0;
    let mut demand = 0.0;
    let mut i = 0;
    for g in (1..=inst.levels).rev() {
        while i < order.len() && inst.vertex_at(order[i]).level >= g {
            let v = order[i];
            demand += inst.lambda(inst.vertex_at(v));
            for k in (1..=fleet).rev() {
                for add in 1..=cap.min(k) {
                    let c = most[k - add] + scenario.capacity(v, add as u32);
                    if c > most[k] {
                        most[k] = c;
                    }
                }
            }
            i += 1;
        }
        let supply = most.iter().cloned().fold(0.0, f64::max);
        if demand > supply * (1.0 + 1e-9) + 1e-9 {
            return Some(g);
        }
    }
    None
}

/// Number of servers at each node-charge, indexed by vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Placement {
    counts: Vec<u32>,
}

impl Placement {
    pub fn empty(vertices: usize) -> Self {
        Placement {
            counts: vec![0; vertices],
        }
    }

    pub fn from_counts(counts: Vec<u32>) -> Self {
        Placement { counts }
    }

    /// The idle stock where it stands, with counts above `max_servers`
    /// spilled to the nearest vertices with room (lowest index first).
    pub fn from_stock(instance: &Instance) -> Self {
        let cap = instance.max_servers as u32;
        let mut counts: Vec<u32> = instance.vertices().map(|nc| instance.stock(nc)).collect();
        let mut spill = 0;
        for c in counts.iter_mut() {
            if *c > cap {
                spill += *c - cap;
                *c = cap;
            }
        }
        for c in counts.iter_mut() {
            let room = (cap - *c).min(spill);
            *c += room;
            spill -= room;
        }
        Placement { counts }
    }

    /// Server counts read off the Y columns of a full value vector.
    pub fn from_values(model: &MilpModel, values: &[f64]) -> Self {
        let layout = &model.layout;
        let counts = (0..layout.vertices())
            .map(|v| {
                let base = layout.y_offset() + v * layout.servers;
                values[base..base + layout.servers].iter().sum::<f64>().round() as u32
            })
            .collect();
        Placement { counts }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn count(&self, v: usize) -> u32 {
        self.counts[v]
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn set(&mut self, v: usize, count: u32) {
        self.counts[v] = count;
    }

    /// Vertices holding at least one server, ascending.
    pub fn sites(&self) -> impl Iterator<Item = usize> + '_ {
        self.counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(v, _)| v)
    }
}

/// Everything a fixed placement implies: assignment, flow and the full
/// column vector of the assembled model.
#[derive(Clone, Debug)]
pub struct PlacementPlan {
    pub assignment: Assignment,
    pub flow: Flow,
    pub objective: f64,
}

/// Solves both subproblems for `placement`; `None` if either is infeasible.
pub fn evaluate_placement(scenario: &Scenario, placement: &Placement, mode: Mode) -> Option<PlacementPlan> {
    let assignment = assign_demand(scenario, placement, mode)?;
    let flow = min_cost_flow(scenario, placement)?;
    let objective = assignment.cost + flow.cost;
    Some(PlacementPlan {
        assignment,
        flow,
        objective,
    })
}

/// The column vector of `model` realizing a plan.
pub fn plan_values(model: &MilpModel, placement: &Placement, plan: &PlacementPlan) -> Vec<f64> {
    let layout = &model.layout;
    let v_count = layout.vertices();
    let mut values = vec![0.0; model.column_count()];
    for (d, &s) in plan.assignment.server_of.iter().enumerate() {
        values[d * v_count + s] = 1.0;
    }
    for v in 0..v_count {
        for m in 0..placement.count(v) as usize {
            values[layout.y_offset() + v * layout.servers + m] = 1.0;
        }
    }
    for (a, &w) in plan.flow.arc_flow.iter().enumerate() {
        values[layout.w_offset() + a] = w;
    }
    for (p, &f) in plan.flow.path_flow.iter().enumerate() {
        values[layout.p_offset() + p] = f;
    }
    values
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::tiny_instance;

    #[test]
    fn stock_placement_respects_server_cap() {
        let mut inst = (0..).map(tiny_instance).find(|i| i.vertex_count() >= 4).unwrap();
        inst.max_servers = 1;
        for row in inst.idle_stock.iter_mut() {
            row.iter_mut().for_each(|s| *s = 0);
        }
        inst.idle_stock[0][0] = 3;
        let p = Placement::from_stock(&inst);
        assert_eq!(p.total(), 3);
        assert!(p.counts().iter().all(|&c| c <= 1));
    }

    #[test]
    fn capacity_screen_only_rejects_infeasible_instances() {
        let mut fired = 0;
        for seed in 0..30 {
            for scale in [0.05, 0.3, 1.0] {
                let mut inst = tiny_instance(seed);
                inst.service_rate.iter_mut().flatten().for_each(|m| *m *= scale);
                let sc = Scenario::new(inst).unwrap();
                if capacity_shortfall(&sc).is_some() {
                    fired += 1;
                    let exact = brute_force(&sc, Mode::NonMyopic).unwrap();
                    assert_eq!(exact.status, crate::model::Status::Infeasible, "seed {seed} scale {scale}");
                }
            }
        }
        assert!(fired > 0);
    }

    #[test]
    fn branch_rule_names_round_trip() {
        for rule in [BranchRule::MostFractional, BranchRule::Random] {
            assert_eq!(rule.to_string().parse::<BranchRule>().unwrap(), rule);
        }
    }
}
