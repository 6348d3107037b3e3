//! Property checks shared by the `properties` test target and the
//! acceptance harness. Each runs a proptest runner and returns the first
//! failure as text.

#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use rebalance_core::generator::{generate_instance, tiny_instance, GeneratorConfig, ServiceRate};
use rebalance_core::graph::{build_graph, covers};
use rebalance_core::instance::{Instance, NodeCharge};
use rebalance_core::model::{export_mps, parse_mps, Mode, Status};
use rebalance_core::queueing::{eq17_lhs, solve_rho};
use rebalance_core::solver::lp::{solve_lp, LpProblem, LpStatus};
use rebalance_core::solver::{brute_force, Scenario};

pub type Check = fn() -> Result<(), String>;

/// Every property with its name.
pub const ALL: [(&str, Check); 9] = [
    ("coverage monotonicity", coverage_monotonicity),
    ("reliability residual", reliability_residual),
    ("rho monotonicity", rho_monotonicity),
    ("myopic <= non-myopic", myopic_not_above_non_myopic),
    ("seeded determinism", seeded_determinism),
    ("instance round trip", instance_round_trip),
    ("MPS round trip", mps_round_trip),
    ("LP optimality residuals", lp_residuals),
    ("tiny seeds stay within bounds", tiny_seeds_stay_tiny),
];

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

pub fn coverage_monotonicity() -> Result<(), String> {
    let vertex = |h: usize| (0usize..6, 1usize..=h);
    run(256, (vertex(4), vertex(4)), |((sn, sl), (dn, dl))| {
        let s = NodeCharge::new(sn, sl);
        let d = NodeCharge::new(dn, dl);
        if covers(s, d) {
            if sl < 4 {
                prop_assert!(covers(NodeCharge::new(sn, sl + 1), d));
            }
            if dl > 1 {
                prop_assert!(covers(s, NodeCharge::new(dn, dl - 1)));
            }
        } else {
            prop_assert!(sl < dl);
        }
        Ok(())
    })
}

pub fn reliability_residual() -> Result<(), String> {
    let mut worst: f64 = 0.0;
    for m in 1..=6usize {
        for b in 0..=4u32 {
            for eta in [0.5, 0.8, 0.9, 0.95, 0.99, 0.999] {
                let rho = solve_rho(m, b, eta).map_err(|e| e.to_string())?;
                let target = 1.0 / (1.0 - eta);
                let lhs = eq17_lhs(rho, m, b).map_err(|e| e.to_string())?;
                worst = worst.max((lhs - target).abs() / target);
            }
        }
    }
    if worst > 1e-9 {
        return Err(format!("relative residual {worst:e} exceeds 1e-9"));
    }
    run(64, (1usize..=8, 0u32..=5, 0.05f64..0.999), |(m, b, eta)| {
        let rho = solve_rho(m, b, eta).unwrap();
        let target = 1.0 / (1.0 - eta);
        let lhs = eq17_lhs(rho, m, b).unwrap();
        prop_assert!((lhs - target).abs() / target <= 1e-9, "m={m} b={b} eta={eta}: {lhs} vs {target}");
        Ok(())
    })
}

pub fn rho_monotonicity() -> Result<(), String> {
    run(128, (1usize..=6, 0u32..=4, 0.05f64..0.99), |(m, b, eta)| {
        let rho = solve_rho(m, b, eta).unwrap();
        prop_assert!(solve_rho(m + 1, b, eta).unwrap() > rho, "not increasing in m");
        prop_assert!(solve_rho(m, b + 1, eta).unwrap() > rho, "not increasing in b");
        let stricter = eta + (1.0 - eta) / 2.0;
        prop_assert!(solve_rho(m, b, stricter).unwrap() < rho, "not decreasing in eta");
        Ok(())
    })
}

pub fn myopic_not_above_non_myopic() -> Result<(), String> {
    run(40, 0u64..10_000, |seed| {
        let sc = Scenario::new(tiny_instance(seed)).unwrap();
        let my = brute_force(&sc, Mode::Myopic).unwrap();
        let nm = brute_force(&sc, Mode::NonMyopic).unwrap();
        if let Some(z_nm) = nm.objective {
            let z_my = my.objective.expect("capacity rows only remove placements");
            prop_assert!(z_my <= z_nm + 1e-9, "seed {seed}: {z_my} > {z_nm}");
        }
        if my.status == Status::Infeasible {
            prop_assert_eq!(nm.status, Status::Infeasible);
        }
        Ok(())
    })
}

pub fn seeded_determinism() -> Result<(), String> {
    run(16, (4usize..=20, 0u64..1000), |(n, seed)| {
        let config = GeneratorConfig::with_nodes(n, seed);
        let a = generate_instance(&config).unwrap();
        let b = generate_instance(&config).unwrap();
        prop_assert_eq!(a.to_json(), b.to_json());
        let t = tiny_instance(seed);
        let sc = Scenario::new(t.clone()).unwrap();
        let first = brute_force(&sc, Mode::NonMyopic).unwrap();
        let again = brute_force(&Scenario::new(t).unwrap(), Mode::NonMyopic).unwrap();
        prop_assert_eq!(first.values, again.values);
        Ok(())
    })
}

fn generated(n: usize, seed: u64, mu: Option<f64>) -> Instance {
    let mut config = GeneratorConfig::with_nodes(n, seed);
    if let Some(mu) = mu {
        config.service_rate = ServiceRate::Uniform(mu);
    }
    generate_instance(&config).unwrap()
}

pub fn instance_round_trip() -> Result<(), String> {
    run(32, (4usize..=30, any::<u64>(), prop::option::of(0.5f64..100.0)), |(n, seed, mu)| {
        let inst = generated(n, seed, mu);
        let back = Instance::from_json(&inst.to_json()).unwrap();
        prop_assert_eq!(&back, &inst);
        let tiny = tiny_instance(seed);
        prop_assert_eq!(Instance::from_json(&tiny.to_json()).unwrap(), tiny);
        Ok(())
    })
}

pub fn mps_round_trip() -> Result<(), String> {
    run(12, (4usize..=8, any::<u64>(), prop::bool::ANY), |(n, seed, non_myopic)| {
        let mode = if non_myopic { Mode::NonMyopic } else { Mode::Myopic };
        let sc = Scenario::new(generated(n, seed, None)).unwrap();
        let model = sc.assemble(mode).unwrap();
        let text = export_mps(&model);
        let back = parse_mps(&text).unwrap();
        prop_assert!(back == model, "parsed model differs");
        prop_assert_eq!(export_mps(&back), text);
        Ok(())
    })
}

/// Random bounded LPs: optimal answers satisfy the rows and bounds, and the
/// multipliers are complementary.
pub fn lp_residuals() -> Result<(), String> {
    let lp_strategy = (2usize..8, 1usize..6).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(-5.0f64..5.0, n),
            prop::collection::vec(prop::collection::vec(-3i32..=3, n), m),
            prop::collection::vec(0.0f64..10.0, m),
            prop::collection::vec(1.0f64..4.0, n),
        )
    });
    run(200, lp_strategy, |(cost, rows, rhs, upper)| {
        let n = cost.len();
        let mut lp = LpProblem::new(n);
        for j in 0..n {
            lp.set_column(j, cost[j], 0.0, upper[j]);
        }
        for (row, &b) in rows.iter().zip(&rhs) {
            let entries: Vec<(usize, f64)> = row.iter().enumerate().map(|(j, &a)| (j, a as f64)).collect();
            lp.add_row(f64::NEG_INFINITY, b, &entries);
        }
        // x = 0 is feasible and every column is boxed, so an optimum exists.
        let r = solve_lp(&lp);
        prop_assert_eq!(r.status, LpStatus::Optimal);
        prop_assert!(r.primal_residual(&lp) <= 1e-7, "primal {}", r.primal_residual(&lp));
        prop_assert!(
            r.complementarity_residual(&lp) <= 1e-7,
            "complementarity {}",
            r.complementarity_residual(&lp)
        );
        Ok(())
    })
}

pub fn tiny_seeds_stay_tiny() -> Result<(), String> {
    run(64, any::<u64>(), |seed| {
        let inst = tiny_instance(seed);
        prop_assert!(inst.node_count <= 4 && inst.levels <= 2);
        prop_assert!(inst.total_stock() <= 2 && inst.max_servers <= 2);
        let g = build_graph(&inst).unwrap();
        prop_assert_eq!(g.vertex_count(), inst.node_count * inst.levels);
        Ok(())
    })
}
