use std::path::Path;
use std::process::{Command, Output};

fn rebalance(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rebalance"))
        .args(args)
        .current_dir(dir)
        .env_remove("REBALANCE_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn illustrative(dir: &Path, capacity: u32) -> String {
    let name = format!("ill{capacity}.json");
    let o = rebalance(dir, &["generate", "--illustrative", "--station-capacity", &capacity.to_string(), "-o", &name]);
    assert!(o.status.success(), "{}", stderr(&o));
    name
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = rebalance(dir.path(), &["generate", "-N", "12", "--seed", "5"]);
    let b = rebalance(dir.path(), &["generate", "-N", "12", "--seed", "5"]);
    let c = rebalance(dir.path(), &["generate", "-N", "12", "--seed", "6"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let json: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(json["node_count"], 12);
}

#[test]
fn counts_match_reference_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let o = rebalance(dir.path(), &["counts", "-N", "10,200"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("1828") && text.contains("1907"), "{text}");
    assert!(text.contains("644028") && text.contains("646197"), "{text}");
}

#[test]
fn solve_writes_solution_and_render_draws_it() {
    let dir = tempfile::tempdir().unwrap();
    let inst = illustrative(dir.path(), 2);
    let o = rebalance(dir.path(), &["solve", &inst, "-o", "sol.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("status: optimal"), "{text}");
    assert!(text.contains("servers: "), "{text}");
    let brute = rebalance(dir.path(), &["solve", &inst, "--method", "brute"]);
    let objective = |t: &str| t.lines().find(|l| l.starts_with("objective:")).map(str::to_owned);
    assert_eq!(objective(&text), objective(&stdout(&brute)));

    let o = rebalance(dir.path(), &["render", &inst, "sol.json", "-o", "plan.dot"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let dot = std::fs::read_to_string(dir.path().join("plan.dot")).unwrap();
    assert!(dot.starts_with("digraph rebalancing {"));
    assert!(dot.contains("->"));
    assert!(dot.contains("fillcolor=gold"));
}

#[test]
fn infeasible_instance_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let inst = illustrative(dir.path(), 0);
    let o = rebalance(dir.path(), &["solve", &inst]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("status: infeasible"));
}

#[test]
fn sweep_writes_csv_with_nf_rows() {
    let dir = tempfile::tempdir().unwrap();
    let inst = illustrative(dir.path(), 2);
    let o = rebalance(
        dir.path(),
        &["sweep", &inst, "--kind", "capacity", "--values", "3,2,1,0", "--method", "brute", "-o", "sweep.csv"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "param_value,mode,status,Z,wall_seconds,gap");
    assert_eq!(lines.len(), 5);
    assert!(lines[4].starts_with("0,myopic,NF,NF,"), "{csv}");
    assert!(lines[1].starts_with("3,myopic,optimal,"), "{csv}");
}

#[test]
fn build_exports_mps() {
    let dir = tempfile::tempdir().unwrap();
    let inst = illustrative(dir.path(), 2);
    let o = rebalance(dir.path(), &["build", &inst, "--mode", "non-myopic"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mps = stdout(&o);
    assert!(mps.contains("ROWS") && mps.contains("COLUMNS") && mps.contains("ENDATA"));
}

#[test]
fn bad_input_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("broken.json"), "{ not json").unwrap();
    let o = rebalance(dir.path(), &["solve", "broken.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("broken.json"), "{}", stderr(&o));

    let o = rebalance(dir.path(), &["solve", "missing.json"]);
    assert_eq!(o.status.code(), Some(2));

    let inst = illustrative(dir.path(), 2);
    let o = rebalance(dir.path(), &["sweep", &inst, "--kind", "mu", "--values", "3,1,2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("monotone"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = rebalance(dir.path(), &["solve"]);
    assert_eq!(o.status.code(), Some(2));
    let o = rebalance(dir.path(), &["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    let o = rebalance(dir.path(), &["--help"]);
    assert!(o.status.success());
}
