//! Free-format MPS export and import of the assembled program.
//!
//! Integer and binary columns sit between `INTORG`/`INTEND` markers; binary
//! columns carry a `BV` bound and other integers an explicit `PL` bound so
//! readers that default marker columns to `[0, 1]` stay correct. Numbers are
//! written in shortest round-trip form, so reading an export reproduces the
//! model bit for bit.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::instance::NodeCharge;

use super::{Domain, Family, Layout, MilpModel, Mode, Row, RowKey, Sense};

const OBJECTIVE_ROW: &str = "COST";

fn num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{v}")
    } else {
        format!("{v:?}")
    }
}

pub fn export_mps(model: &MilpModel) -> String {
    let mut out = String::new();
    let l = &model.layout;
    let _ = writeln!(
        out,
        "NAME          rebalance_n{}_h{}_c{}_{}",
        l.nodes, l.levels, l.servers, model.mode
    );
    out.push_str("ROWS\n");
    let _ = writeln!(out, " N  {OBJECTIVE_ROW}");
    let row_names: Vec<String> = model.rows().iter().map(|r| r.key.name()).collect();
    for (row, name) in model.rows().iter().zip(&row_names) {
        let sense = match row.sense {
            Sense::Le => 'L',
            Sense::Ge => 'G',
            Sense::Eq => 'E',
        };
        let _ = writeln!(out, " {sense}  {name}");
    }

    // Column-major view of the row-major storage.
    let n = model.column_count();
    let mut start = vec![0usize; n + 1];
    for (_, c, _) in model.triplets() {
        start[c + 1] += 1;
    }
    for c in 0..n {
        start[c + 1] += start[c];
    }
    let mut fill = start.clone();
    let mut by_col = vec![(0usize, 0.0f64); model.nonzero_count()];
    for (r, c, v) in model.triplets() {
        by_col[fill[c]] = (r, v);
        fill[c] += 1;
    }

    out.push_str("COLUMNS\n");
    let mut in_marker = false;
    let mut marker = 0;
    for c in 0..n {
        let integral = model.domain(c).is_integral();
        if integral != in_marker {
            let tag = if integral { "INTORG" } else { "INTEND" };
            let _ = writeln!(out, "    MARKER{marker}  'MARKER'  '{tag}'");
            marker += 1;
            in_marker = integral;
        }
        let name = model.column_name(c);
        let cost = model.objective()[c];
        let entries = &by_col[start[c]..start[c + 1]];
        if cost != 0.0 || entries.is_empty() {
            let _ = writeln!(out, "    {name}  {OBJECTIVE_ROW}  {}", num(cost));
        }
        for &(r, v) in entries {
            let _ = writeln!(out, "    {name}  {}  {}", row_names[r], num(v));
        }
    }
    if in_marker {
        let _ = writeln!(out, "    MARKER{marker}  'MARKER'  'INTEND'");
    }

    out.push_str("RHS\n");
    for (row, name) in model.rows().iter().zip(&row_names) {
        if row.rhs != 0.0 {
            let _ = writeln!(out, "    RHS  {name}  {}", num(row.rhs));
        }
    }
    out.push_str("RANGES\n");
    out.push_str("BOUNDS\n");
    for c in 0..n {
        let (lo, up) = (model.lower()[c], model.upper()[c]);
        let name = model.column_name(c);
        if model.domain(c) == Domain::Binary && lo == 0.0 && up == 1.0 {
            let _ = writeln!(out, " BV BND  {name}");
            continue;
        }
        if lo == up {
            let _ = writeln!(out, " FX BND  {name}  {}", num(lo));
            continue;
        }
        if lo == f64::NEG_INFINITY && up == f64::INFINITY {
            let _ = writeln!(out, " FR BND  {name}");
            continue;
        }
        if lo == f64::NEG_INFINITY {
            let _ = writeln!(out, " MI BND  {name}");
        } else if lo != 0.0 {
            let _ = writeln!(out, " LO BND  {name}  {}", num(lo));
        }
        if up.is_finite() {
            let _ = writeln!(out, " UP BND  {name}  {}", num(up));
        } else if model.domain(c).is_integral() {
            let _ = writeln!(out, " PL BND  {name}");
        }
    }
    out.push_str("ENDATA\n");
    out
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    End,
}

struct Column {
    name: String,
    objective: f64,
    lower: f64,
    upper: f64,
    integer: bool,
    binary: bool,
}

/// Reads an MPS document produced by [`export_mps`] back into a model.
///
/// The reader accepts general free-format input (comments, any bound type),
/// but the column and row names must follow the rebalancing layout since the
/// model is rebuilt from them.
pub fn parse_mps(text: &str) -> Result<MilpModel> {
    let err = |line: usize, message: String| Error::Mps { line, message };
    let mut section = Section::None;
    let mut objective_row: Option<String> = None;
    let mut rows: Vec<(String, Sense)> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut columns: Vec<Column> = Vec::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut in_marker = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(' ') && !raw.starts_with('\t') {
            section = match fields[0] {
                "NAME" => Section::None,
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::End,
                "OBJSENSE" => {
                    if fields.get(1).is_some_and(|s| *s != "MIN" && *s != "MINIMIZE") {
                        return Err(err(line_no, "only minimization is supported".into()));
                    }
                    Section::None
                }
                other => return Err(err(line_no, format!("unknown section `{other}`"))),
            };
            continue;
        }
        match section {
            Section::None => {}
            Section::End => return Err(err(line_no, "data after ENDATA".into())),
            Section::Rows => {
                let [kind, name] = fields[..] else {
                    return Err(err(line_no, "expected `<type> <name>`".into()));
                };
                let sense = match kind {
                    "N" => {
                        if objective_row.is_some() {
                            return Err(err(line_no, "more than one objective row".into()));
                        }
                        objective_row = Some(name.to_string());
                        continue;
                    }
                    "L" => Sense::Le,
                    "G" => Sense::Ge,
                    "E" => Sense::Eq,
                    other => return Err(err(line_no, format!("unknown row type `{other}`"))),
                };
                if row_index.insert(name.to_string(), rows.len()).is_some() {
                    return Err(err(line_no, format!("duplicate row `{name}`")));
                }
                rows.push((name.to_string(), sense));
                rhs.push(0.0);
            }
            Section::Columns => {
                if fields.len() == 3 && fields[1] == "'MARKER'" {
                    in_marker = match fields[2] {
                        "'INTORG'" => true,
                        "'INTEND'" => false,
                        other => return Err(err(line_no, format!("unknown marker {other}"))),
                    };
                    continue;
                }
                if fields.len() != 3 && fields.len() != 5 {
                    return Err(err(line_no, "expected `<column> <row> <value> [<row> <value>]`".into()));
                }
                let name = fields[0];
                let col = match col_index.get(name) {
                    Some(&c) => {
                        if c + 1 != columns.len() {
                            return Err(err(line_no, format!("column `{name}` is not contiguous")));
                        }
                        c
                    }
                    None => {
                        col_index.insert(name.to_string(), columns.len());
                        columns.push(Column {
                            name: name.to_string(),
                            objective: 0.0,
                            lower: 0.0,
                            upper: f64::INFINITY,
                            integer: in_marker,
                            binary: false,
                        });
                        columns.len() - 1
                    }
                };
                for pair in fields[1..].chunks(2) {
                    let value = parse_num(pair[1]).ok_or_else(|| err(line_no, format!("bad number `{}`", pair[1])))?;
                    if Some(pair[0]) == objective_row.as_deref() {
                        columns[col].objective = value;
                    } else {
                        let &r = row_index
                            .get(pair[0])
                            .ok_or_else(|| err(line_no, format!("unknown row `{}`", pair[0])))?;
                        triplets.push((r, col, value));
                    }
                }
            }
            Section::Rhs => {
                if fields.len() != 3 && fields.len() != 5 {
                    return Err(err(line_no, "expected `<set> <row> <value> [<row> <value>]`".into()));
                }
                for pair in fields[1..].chunks(2) {
                    let value = parse_num(pair[1]).ok_or_else(|| err(line_no, format!("bad number `{}`", pair[1])))?;
                    if Some(pair[0]) == objective_row.as_deref() {
                        return Err(err(line_no, "objective constants are not supported".into()));
                    }
                    let &r = row_index
                        .get(pair[0])
                        .ok_or_else(|| err(line_no, format!("unknown row `{}`", pair[0])))?;
                    rhs[r] = value;
                }
            }
            Section::Ranges => {
                return Err(err(line_no, "ranged rows are not supported".into()));
            }
            Section::Bounds => {
                if fields.len() < 3 {
                    return Err(err(line_no, "expected `<type> <set> <column> [<value>]`".into()));
                }
                let &c = col_index
                    .get(fields[2])
                    .ok_or_else(|| err(line_no, format!("unknown column `{}`", fields[2])))?;
                let value = match fields.get(3) {
                    Some(s) => Some(parse_num(s).ok_or_else(|| err(line_no, format!("bad number `{s}`")))?),
                    None => None,
                };
                let need = |v: Option<f64>| v.ok_or_else(|| err(line_no, format!("bound {} needs a value", fields[0])));
                let col = &mut columns[c];
                match fields[0] {
                    "UP" => col.upper = need(value)?,
                    "LO" => col.lower = need(value)?,
                    "FX" => {
                        let v = need(value)?;
                        col.lower = v;
                        col.upper = v;
                    }
                    "FR" => {
                        col.lower = f64::NEG_INFINITY;
                        col.upper = f64::INFINITY;
                    }
                    "MI" => col.lower = f64::NEG_INFINITY,
                    "PL" => col.upper = f64::INFINITY,
                    "BV" => {
                        col.lower = 0.0;
                        col.upper = 1.0;
                        col.integer = true;
                        col.binary = true;
                    }
                    "LI" => {
                        col.lower = need(value)?;
                        col.integer = true;
                    }
                    "UI" => {
                        col.upper = need(value)?;
                        col.integer = true;
                    }
                    other => return Err(err(line_no, format!("unknown bound type `{other}`"))),
                }
            }
        }
    }
    if section != Section::End {
        return Err(err(text.lines().count(), "missing ENDATA".into()));
    }
    build_model(rows, rhs, columns, triplets)
}

fn parse_num(s: &str) -> Option<f64> {
    match s {
        "inf" | "Inf" | "+inf" | "Infinity" => Some(f64::INFINITY),
        "-inf" | "-Inf" | "-Infinity" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

fn split(name: &str) -> Option<(&str, Vec<usize>)> {
    let mut parts = name.split('_');
    let head = parts.next()?;
    let idx = parts.map(|p| p.parse().ok()).collect::<Option<Vec<usize>>>()?;
    Some((head, idx))
}

fn build_model(
    rows: Vec<(String, Sense)>,
    rhs: Vec<f64>,
    columns: Vec<Column>,
    triplets: Vec<(usize, usize, f64)>,
) -> Result<MilpModel> {
    let bad = |message: String| Error::Mps { line: 0, message };
    let (mut x_count, mut nodes, mut levels, mut servers) = (0usize, 0usize, 0usize, 0usize);
    let mut arc_ends = Vec::new();
    let mut path_ends = Vec::new();
    for col in &columns {
        let (kind, idx) = split(&col.name).ok_or_else(|| bad(format!("unrecognized column `{}`", col.name)))?;
        match (kind, idx.len()) {
            ("X", 4) => {
                x_count += 1;
                nodes = nodes.max(idx[0] + 1).max(idx[2] + 1);
                levels = levels.max(idx[1]).max(idx[3]);
            }
            ("Y", 3) => servers = servers.max(idx[2]),
            ("W", 4) => arc_ends.push((NodeCharge::new(idx[0], idx[1]), NodeCharge::new(idx[2], idx[3]))),
            ("P", 3) => path_ends.push((idx[0], idx[1], idx[2])),
            _ => return Err(bad(format!("unrecognized column `{}`", col.name))),
        }
    }
    let layout = Layout {
        nodes,
        levels,
        servers,
        arcs: arc_ends.len(),
        paths: path_ends.len(),
    };
    if x_count != layout.vertices() * layout.vertices() || layout.columns() != columns.len() {
        return Err(bad("column set does not match the rebalancing layout".into()));
    }

    let mut parsed_rows = Vec::with_capacity(rows.len());
    let mut mode = Mode::Myopic;
    for ((name, sense), rhs) in rows.into_iter().zip(rhs) {
        let (tag, idx) = split(&name).ok_or_else(|| bad(format!("unrecognized row `{name}`")))?;
        let family = Family::from_tag(tag).ok_or_else(|| bad(format!("unknown row family in `{name}`")))?;
        if idx.len() != family.arity() {
            return Err(bad(format!("row `{name}` has the wrong number of indices")));
        }
        if family == Family::Eq5 {
            mode = Mode::NonMyopic;
        }
        parsed_rows.push(Row {
            key: RowKey::new(family, &idx),
            sense,
            rhs,
        });
    }

    let n = columns.len();
    let mut objective = Vec::with_capacity(n);
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    let mut domain = Vec::with_capacity(n);
    for col in &columns {
        objective.push(col.objective);
        lower.push(col.lower);
        upper.push(col.upper);
        domain.push(if col.binary {
            Domain::Binary
        } else if col.integer {
            Domain::Integer
        } else {
            Domain::Continuous
        });
    }

    // Triplets arrive column by column; a stable bucket by row keeps each
    // row's entries in column order.
    let m = parsed_rows.len();
    let mut row_start = vec![0usize; m + 1];
    for &(r, _, _) in &triplets {
        row_start[r + 1] += 1;
    }
    for r in 0..m {
        row_start[r + 1] += row_start[r];
    }
    let mut fill = row_start.clone();
    let mut entries = vec![(0u32, 0.0f64); triplets.len()];
    for &(r, c, v) in &triplets {
        entries[fill[r]] = (c as u32, v);
        fill[r] += 1;
    }
    for r in 0..m {
        if entries[row_start[r]..row_start[r + 1]].windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(bad(format!("row `{}` lists a column twice", parsed_rows[r].key.name())));
        }
    }

    let model = MilpModel::from_parts(
        mode, layout, arc_ends, path_ends, objective, lower, upper, domain, parsed_rows, row_start, entries,
    );
    for (c, col) in columns.iter().enumerate() {
        if model.column_name(c) != col.name {
            return Err(bad(format!(
                "column `{}` is out of place (expected `{}`)",
                col.name,
                model.column_name(c)
            )));
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, charging_paths};
    use crate::instance::{ChargingCost, Instance, QueueParams, Station};
    use crate::model::assemble;

    fn small() -> Instance {
        Instance {
            node_count: 3,
            travel_time: vec![vec![0.0, 1.5, 3.0], vec![1.5, 0.0, 1.5], vec![3.0, 1.5, 0.0]],
            levels: 2,
            charge_per_level: 0.5,
            stations: vec![Station { node: 1, capacity: 2 }],
            arrival_rate: vec![vec![0.1, 0.7], vec![0.3, 0.0], vec![0.9, 0.25]],
            service_rate: vec![vec![2.0; 2]; 3],
            idle_stock: vec![vec![1, 0], vec![0, 0], vec![0, 1]],
            theta: 0.2,
            max_servers: 2,
            big_m: 10_000.0,
            charging_arc_cost: ChargingCost::default(),
            queue_params: QueueParams::default(),
            spatial_arcs: None,
            charge_per_minute: None,
        }
    }

    fn model(mode: Mode) -> MilpModel {
        let inst = small();
        let g = build_graph(&inst).unwrap();
        assemble(&inst, &g, &charging_paths(&inst), &inst.rho_table().unwrap(), mode).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        for mode in [Mode::Myopic, Mode::NonMyopic] {
            let m = model(mode);
            let text = export_mps(&m);
            let back = parse_mps(&text).unwrap();
            assert_eq!(back, m);
            assert_eq!(export_mps(&back), text);
        }
    }

    #[test]
    fn row_section_lists_every_constraint() {
        let m = model(Mode::Myopic);
        let text = export_mps(&m);
        let rows = text
            .lines()
            .skip_while(|l| *l != "ROWS")
            .skip(1)
            .take_while(|l| l.starts_with(' '))
            .count();
        assert_eq!(rows, m.row_count() + 1);
    }

    #[test]
    fn reports_line_of_bad_number() {
        let text = export_mps(&model(Mode::Myopic));
        let broken = text.replacen("  1\n", "  one\n", 1);
        let line = broken.lines().position(|l| l.ends_with("  one")).unwrap() + 1;
        match parse_mps(&broken) {
            Err(Error::Mps { line: l, .. }) => assert_eq!(l, line),
            other => panic!("expected MPS error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_missing_end() {
        let text = export_mps(&model(Mode::Myopic));
        let cut = text.trim_end().trim_end_matches("ENDATA");
        assert!(parse_mps(cut).is_err());
    }

    #[test]
    fn number_format() {
        assert_eq!(num(1.0), "1");
        assert_eq!(num(-10000.0), "-10000");
        assert_eq!(num(0.1), "0.1");
        assert_eq!(parse_num(&num(1e-300)), Some(1e-300));
    }
}
