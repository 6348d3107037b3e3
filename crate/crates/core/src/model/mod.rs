//! The rebalancing mixed-integer program.
//!
//! Columns follow a fixed layout: all assignment variables `X(i,g,j,h)` over
//! every pair of node-charges, then the server indicators `Y(j,h,m)`, then
//! one flow variable `W` per graph arc, then one path-flow variable `P` per
//! enumerated charging path. Rows are grouped by the constraint family they
//! belong to; see [`Family`].

mod assemble;
mod counts;
pub mod mps;
mod solution;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::instance::NodeCharge;

pub use assemble::assemble;
pub use counts::{count_constraints, count_variables, FamilyCounts};
pub use mps::{export_mps, parse_mps};
pub use solution::{check_solution, evaluate_objective, Solution, SolutionFile, Status, ViolationReport};

/// Whether the queueing capacity rows are part of the model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Myopic,
    NonMyopic,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Myopic => "myopic",
            Mode::NonMyopic => "non-myopic",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "myopic" => Ok(Mode::Myopic),
            "non-myopic" | "nonmyopic" => Ok(Mode::NonMyopic),
            other => Err(format!("unknown mode `{other}` (expected myopic or non-myopic)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Domain {
    Binary,
    Integer,
    Continuous,
}

impl Domain {
    pub fn is_integral(self) -> bool {
        !matches!(self, Domain::Continuous)
    }
}

/// What a column stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarKind {
    /// Demand `demand` is served by the vehicle at `server`.
    X { demand: NodeCharge, server: NodeCharge },
    /// The `server`-th vehicle (1-based) sits at `at`.
    Y { at: NodeCharge, server: usize },
    /// Vehicle flow on arc `arc` of the node-charge graph.
    W { arc: usize, from: NodeCharge, to: NodeCharge },
    /// Partial charging path at station node `node`.
    P { path: usize, node: usize, from_level: usize, to_level: usize },
}

impl VarKind {
    pub fn name(&self) -> String {
        match *self {
            VarKind::X { demand, server } => format!(
                "X_{}_{}_{}_{}",
                demand.node, demand.level, server.node, server.level
            ),
            VarKind::Y { at, server } => format!("Y_{}_{}_{}", at.node, at.level, server),
            VarKind::W { from, to, .. } => {
                format!("W_{}_{}_{}_{}", from.node, from.level, to.node, to.level)
            }
            VarKind::P {
                node,
                from_level,
                to_level,
                ..
            } => format!("P_{node}_{from_level}_{to_level}"),
        }
    }
}

/// Column positions of every variable kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub nodes: usize,
    pub levels: usize,
    pub servers: usize,
    pub arcs: usize,
    pub paths: usize,
}

impl Layout {
    pub fn vertices(&self) -> usize {
        self.nodes * self.levels
    }

    fn vi(&self, nc: NodeCharge) -> usize {
        nc.node * self.levels + nc.level - 1
    }

    fn nc(&self, v: usize) -> NodeCharge {
        NodeCharge::new(v / self.levels, v % self.levels + 1)
    }

    pub fn x(&self, demand: NodeCharge, server: NodeCharge) -> usize {
        self.vi(demand) * self.vertices() + self.vi(server)
    }

    pub fn y(&self, at: NodeCharge, server: usize) -> usize {
        self.y_offset() + self.vi(at) * self.servers + server - 1
    }

    pub fn w(&self, arc: usize) -> usize {
        self.w_offset() + arc
    }

    pub fn p(&self, path: usize) -> usize {
        self.p_offset() + path
    }

    pub fn y_offset(&self) -> usize {
        self.vertices() * self.vertices()
    }

    pub fn w_offset(&self) -> usize {
        self.y_offset() + self.vertices() * self.servers
    }

    pub fn p_offset(&self) -> usize {
        self.w_offset() + self.arcs
    }

    pub fn columns(&self) -> usize {
        self.p_offset() + self.paths
    }
}

/// Constraint families. `ChargeCap` bounds the flow through each node's
/// level transition by the node's charger count (zero off-station).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// Each demand is served by exactly one covering vehicle.
    Eq2,
    /// No demand is served from a lower charge level.
    Eq3,
    /// The `m`-th server needs the `(m-1)`-th.
    Eq4,
    /// Queueing capacity (non-myopic only).
    Eq5,
    /// Servers placed equal idle vehicles.
    Eq6,
    /// Only placed servers serve demand.
    Eq7,
    /// Net inflow at a non-origin only where a server is placed.
    Eq8,
    /// Net outflow at a non-origin only where a server is placed.
    Eq9,
    /// Flow conservation into the placement.
    Eq10,
    /// Charging arc flow equals the path flows through it.
    Eq11,
    /// Station path-flow capacity.
    Eq12,
    ChargeCap,
}

impl Family {
    pub const ALL: [Family; 12] = [
        Family::Eq2,
        Family::Eq3,
        Family::Eq4,
        Family::Eq5,
        Family::Eq6,
        Family::Eq7,
        Family::Eq8,
        Family::Eq9,
        Family::Eq10,
        Family::Eq11,
        Family::Eq12,
        Family::ChargeCap,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Family::Eq2 => "EQ2",
            Family::Eq3 => "EQ3",
            Family::Eq4 => "EQ4",
            Family::Eq5 => "EQ5",
            Family::Eq6 => "EQ6",
            Family::Eq7 => "EQ7",
            Family::Eq8 => "EQ8",
            Family::Eq9 => "EQ9",
            Family::Eq10 => "EQ10",
            Family::Eq11 => "EQ11",
            Family::Eq12 => "EQ12",
            Family::ChargeCap => "CAP",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.tag() == tag)
    }

    /// Number of indices in the row name.
    pub fn arity(self) -> usize {
        match self {
            Family::Eq6 => 0,
            Family::Eq12 => 1,
            Family::Eq2
            | Family::Eq3
            | Family::Eq5
            | Family::Eq8
            | Family::Eq9
            | Family::Eq10
            | Family::Eq11
            | Family::ChargeCap => 2,
            Family::Eq4 => 3,
            Family::Eq7 => 4,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RowKey {
    pub family: Family,
    pub index: [u32; 4],
}

impl RowKey {
    pub fn new(family: Family, index: &[usize]) -> Self {
        let mut idx = [0u32; 4];
        for (slot, &v) in idx.iter_mut().zip(index) {
            *slot = v as u32;
        }
        RowKey { family, index: idx }
    }

    pub fn name(&self) -> String {
        let mut s = self.family.tag().to_string();
        for v in &self.index[..self.family.arity()] {
            s.push('_');
            s.push_str(&v.to_string());
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Row {
    pub key: RowKey,
    pub sense: Sense,
    pub rhs: f64,
}

/// Assembled model: objective, bounds and domains per column, and the
/// constraint rows in compressed row form.
#[derive(Clone, Debug, PartialEq)]
pub struct MilpModel {
    pub mode: Mode,
    pub layout: Layout,
    arc_ends: Vec<(NodeCharge, NodeCharge)>,
    path_ends: Vec<(usize, usize, usize)>,
    objective: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    domain: Vec<Domain>,
    rows: Vec<Row>,
    row_start: Vec<usize>,
    entries: Vec<(u32, f64)>,
}

impl MilpModel {
    pub(crate) fn empty(
        mode: Mode,
        layout: Layout,
        arc_ends: Vec<(NodeCharge, NodeCharge)>,
        path_ends: Vec<(usize, usize, usize)>,
    ) -> Self {
        let n = layout.columns();
        let mut model = MilpModel {
            mode,
            layout,
            arc_ends,
            path_ends,
            objective: vec![0.0; n],
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
            domain: vec![Domain::Continuous; n],
            rows: Vec::new(),
            row_start: vec![0],
            entries: Vec::new(),
        };
        for c in 0..layout.w_offset() {
            model.upper[c] = 1.0;
            model.domain[c] = Domain::Binary;
        }
        for c in layout.w_offset()..layout.p_offset() {
            model.domain[c] = Domain::Integer;
        }
        model
    }

    pub fn column_count(&self) -> usize {
        self.objective.len()
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn nonzero_count(&self) -> usize {
        self.entries.len()
    }

    pub fn var_kind(&self, col: usize) -> VarKind {
        let l = &self.layout;
        if col < l.y_offset() {
            let v = l.vertices();
            VarKind::X {
                demand: l.nc(col / v),
                server: l.nc(col % v),
            }
        } else if col < l.w_offset() {
            let k = col - l.y_offset();
            VarKind::Y {
                at: l.nc(k / l.servers),
                server: k % l.servers + 1,
            }
        } else if col < l.p_offset() {
            let arc = col - l.w_offset();
            let (from, to) = self.arc_ends[arc];
            VarKind::W { arc, from, to }
        } else {
            let path = col - l.p_offset();
            let (node, from_level, to_level) = self.path_ends[path];
            VarKind::P {
                path,
                node,
                from_level,
                to_level,
            }
        }
    }

    pub fn column_name(&self, col: usize) -> String {
        self.var_kind(col).name()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn domain(&self, col: usize) -> Domain {
        self.domain[col]
    }

    pub fn domains(&self) -> &[Domain] {
        &self.domain
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    /// Column/coefficient pairs of row `r`, sorted by column.
    pub fn row_entries(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries[self.row_start[r]..self.row_start[r + 1]]
            .iter()
            .map(|&(c, v)| (c as usize, v))
    }

    /// All nonzeros as `(row, column, value)` in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows.len()).flat_map(move |r| self.row_entries(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn arc_ends(&self) -> &[(NodeCharge, NodeCharge)] {
        &self.arc_ends
    }

    pub fn path_ends(&self) -> &[(usize, usize, usize)] {
        &self.path_ends
    }

    pub(crate) fn set_column(&mut self, col: usize, objective: f64, lower: f64, upper: f64, domain: Domain) {
        self.objective[col] = objective;
        self.lower[col] = lower;
        self.upper[col] = upper;
        self.domain[col] = domain;
    }

    pub(crate) fn set_objective(&mut self, col: usize, value: f64) {
        self.objective[col] = value;
    }

    /// Appends a row. Zero coefficients are dropped and repeated columns
    /// merged; entries are stored sorted by column.
    pub(crate) fn push_row(&mut self, key: RowKey, sense: Sense, rhs: f64, terms: &mut Vec<(usize, f64)>) {
        terms.sort_unstable_by_key(|&(c, _)| c);
        let mut last: Option<usize> = None;
        for &(c, v) in terms.iter() {
            if last == Some(c) {
                self.entries.last_mut().expect("merged entry").1 += v;
            } else {
                self.entries.push((c as u32, v));
                last = Some(c);
            }
        }
        // Remove entries that cancelled or were zero to begin with.
        let start = *self.row_start.last().expect("row start");
        let mut write = start;
        for read in start..self.entries.len() {
            if self.entries[read].1 != 0.0 {
                self.entries[write] = self.entries[read];
                write += 1;
            }
        }
        self.entries.truncate(write);
        self.row_start.push(self.entries.len());
        self.rows.push(Row { key, sense, rhs });
        terms.clear();
    }

    /// Row activity `a_r . values` for every row.
    pub fn row_activities(&self, values: &[f64]) -> Vec<f64> {
        (0..self.rows.len())
            .map(|r| self.row_entries(r).map(|(c, v)| v * values[c]).sum())
            .collect()
    }

    /// Rows per family, in family order.
    pub fn family_counts(&self) -> FamilyCounts {
        let mut counts = FamilyCounts::default();
        for row in &self.rows {
            counts.add(row.key.family, 1);
        }
        counts
    }

    /// Plain-text summary of column and row counts by kind and family.
    pub fn summary(&self) -> String {
        let l = &self.layout;
        let mut s = String::new();
        s.push_str(&format!(
            "mode: {}\nnodes: {}  levels: {}  servers: {}  arcs: {}  paths: {}\n",
            self.mode, l.nodes, l.levels, l.servers, l.arcs, l.paths
        ));
        s.push_str(&format!(
            "variables: {}  (X {}, Y {}, W {}, P {})\n",
            self.column_count(),
            l.y_offset(),
            l.w_offset() - l.y_offset(),
            l.arcs,
            l.paths
        ));
        s.push_str(&format!(
            "constraints: {}  nonzeros: {}\n",
            self.row_count(),
            self.nonzero_count()
        ));
        for (family, count) in self.family_counts().iter() {
            s.push_str(&format!("  {:<5} {}\n", family.tag(), count));
        }
        s
    }

    /// Reassembles a model from parsed parts; used by the MPS reader.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        mode: Mode,
        layout: Layout,
        arc_ends: Vec<(NodeCharge, NodeCharge)>,
        path_ends: Vec<(usize, usize, usize)>,
        objective: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        domain: Vec<Domain>,
        rows: Vec<Row>,
        row_start: Vec<usize>,
        entries: Vec<(u32, f64)>,
    ) -> Self {
        MilpModel {
            mode,
            layout,
            arc_ends,
            path_ends,
            objective,
            lower,
            upper,
            domain,
            rows,
            row_start,
            entries,
        }
    }
}
