//! Graphviz rendering of a rebalancing plan on the node-charge graph.

use std::fmt::Write;

use crate::graph::{ArcKind, NodeChargeGraph};
use crate::instance::Instance;
use crate::model::{MilpModel, Solution};

/// DOT text with one rank per charge level, vertices labeled
/// `(i, level, lambda)`, vertices holding servers filled, and one edge per
/// arc with positive flow, labeled with the flow.
pub fn render_dot(instance: &Instance, graph: &NodeChargeGraph, arc_flow: &[f64], servers: &[u32]) -> String {
    let mut out = String::new();
    out.push_str("digraph rebalancing {\n");
    out.push_str("  rankdir=LR;\n  node [shape=ellipse, fontsize=10];\n");
    for level in (1..=instance.levels).rev() {
        let _ = writeln!(out, "  subgraph level_{level} {{\n    rank=same;");
        for node in 0..instance.node_count {
            let v = graph.vertex_index(crate::instance::NodeCharge::new(node, level));
            let lambda = instance.arrival_rate[node][level - 1];
            let label = format!("({node}, {level}, {lambda})");
            let count = servers.get(v).copied().unwrap_or(0);
            if count > 0 {
                let _ = writeln!(
                    out,
                    "    v{node}_{level} [label=\"{label}\\nservers {count}\", style=filled, fillcolor=gold];"
                );
            } else {
                let _ = writeln!(out, "    v{node}_{level} [label=\"{label}\"];");
            }
        }
        out.push_str("  }\n");
    }
    for (a, arc) in graph.arcs().iter().enumerate() {
        let w = arc_flow.get(a).copied().unwrap_or(0.0);
        if w <= 0.0 {
            continue;
        }
        let style = match arc.kind {
            ArcKind::Charging { .. } => ", style=dashed",
            _ => "",
        };
        let _ = writeln!(
            out,
            "  v{}_{} -> v{}_{} [label=\"{}\", color=red{style}];",
            arc.from.node,
            arc.from.level,
            arc.to.node,
            arc.to.level,
            format_flow(w)
        );
    }
    out.push_str("}\n");
    out
}

/// [`render_dot`] with the flow and server counts read off a solution.
pub fn render_solution(instance: &Instance, graph: &NodeChargeGraph, model: &MilpModel, solution: &Solution) -> String {
    let layout = &model.layout;
    let arc_flow: Vec<f64> = (0..layout.arcs).map(|a| solution.value(layout.w(a))).collect();
    let servers: Vec<u32> = (0..layout.vertices())
        .map(|v| {
            let base = layout.y_offset() + v * layout.servers;
            (0..layout.servers)
                .map(|m| solution.value(base + m))
                .sum::<f64>()
                .round() as u32
        })
        .collect();
    render_dot(instance, graph, &arc_flow, &servers)
}

fn format_flow(w: f64) -> String {
    if (w - w.round()).abs() < 1e-9 {
        format!("{}", w.round() as i64)
    } else {
        format!("{w:.3}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::illustrative_instance;
    use crate::graph::build_graph;

    fn edges(dot: &str) -> usize {
        dot.lines().filter(|l| l.contains("->")).count()
    }

    #[test]
    fn zero_flow_has_no_edges() {
        let inst = illustrative_instance(0, 2);
        let g = build_graph(&inst).unwrap();
        let dot = render_dot(&inst, &g, &vec![0.0; g.arcs().len()], &[]);
        assert_eq!(edges(&dot), 0);
        assert_eq!(dot.matches("rank=same").count(), inst.levels);
        assert!(dot.contains("(2, 3, 3.8)"));
    }

    #[test]
    fn one_edge_per_positive_arc() {
        let inst = illustrative_instance(0, 2);
        let g = build_graph(&inst).unwrap();
        let mut flow = vec![0.0; g.arcs().len()];
        flow[0] = 1.0;
        flow[3] = 2.0;
        flow[g.arcs().len() - 1] = 1.0;
        let mut servers = vec![0; g.vertex_count()];
        servers[5] = 2;
        let dot = render_dot(&inst, &g, &flow, &servers);
        assert_eq!(edges(&dot), 3);
        assert!(dot.contains("label=\"2\""));
        assert_eq!(dot.matches("fillcolor=gold").count(), 1);
    }
}
