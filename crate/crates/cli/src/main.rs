//! `rebalance`: generate instances, build and export models, solve, sweep
//! parameters and render plans.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use rebalance_core::generator::{generate_instance, illustrative_instance, GeneratorConfig, ServiceRate};
use rebalance_core::instance::Instance;
use rebalance_core::model::{count_constraints, count_variables, export_mps, MilpModel, Mode, Solution, SolutionFile, Status};
use rebalance_core::render::render_solution;
use rebalance_core::solver::{brute_force, greedy_place, solve_exact, BranchRule, Scenario, SolverOptions};
use rebalance_core::sweep::{run_sweep, write_csv, SweepKind, SweepMethod, SweepSpec};

#[derive(Parser)]
#[command(name = "rebalance", version, about = "Idle-vehicle rebalancing for electric carsharing")]
struct Cli {
    /// More log output (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance as JSON.
    Generate(GenerateArgs),
    /// Print variable and constraint counts of the generated family.
    Counts(CountsArgs),
    /// Assemble the program for an instance and export it.
    Build(BuildArgs),
    /// Solve an instance.
    Solve(SolveArgs),
    /// Solve an instance once per value of a parameter; CSV out.
    Sweep(SweepArgs),
    /// DOT rendering of a solution on the node-charge graph.
    Render(RenderArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of zones.
    #[arg(short = 'N', long, default_value_t = 10)]
    nodes: usize,
    #[arg(long, env = "REBALANCE_SEED", default_value_t = 0)]
    seed: u64,
    /// Same service rate at every node-charge (default: 1.0 * N).
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long, default_value_t = 4)]
    levels: usize,
    #[arg(long, default_value_t = 10)]
    idle_vehicles: usize,
    #[arg(long, default_value_t = 4)]
    stations: usize,
    #[arg(long, default_value_t = 4)]
    station_capacity: u32,
    #[arg(long, default_value_t = 3)]
    max_servers: usize,
    /// The six-zone, two-station illustrative instance instead.
    #[arg(long)]
    illustrative: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CountsArgs {
    /// Zone counts; defaults to the reference table.
    #[arg(short = 'N', long = "nodes", value_delimiter = ',')]
    nodes: Vec<usize>,
    /// Also assemble each model and compare.
    #[arg(long)]
    assemble: bool,
}

#[derive(Args)]
struct BuildArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Myopic)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = Format::Mps)]
    format: Format,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SolverArgs {
    /// Seconds.
    #[arg(long, default_value_t = 600.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 1e-7)]
    absolute_gap: f64,
    #[arg(long, default_value_t = 1e-9)]
    relative_gap: f64,
    /// Treat Y as continuous (default: on for non-myopic).
    #[arg(long)]
    relax_y: Option<bool>,
    #[arg(long, default_value = "most-fractional")]
    branching: BranchRule,
    #[arg(long, env = "REBALANCE_SEED", default_value_t = 0)]
    seed: u64,
}

impl SolverArgs {
    fn options(&self) -> SolverOptions {
        SolverOptions {
            time_limit: self.time_limit,
            absolute_gap: self.absolute_gap,
            relative_gap: self.relative_gap,
            relax_y: self.relax_y,
            branching: self.branching,
            seed: self.seed,
            ..SolverOptions::default()
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Myopic)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = Method::Exact)]
    method: Method,
    #[command(flatten)]
    solver: SolverArgs,
    /// Solution file (JSON).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    instance: PathBuf,
    #[arg(long)]
    kind: SweepKind,
    /// Comma-separated, strictly monotone.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Myopic)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = Method::Exact)]
    method: Method,
    /// Points solved at once.
    #[arg(long, default_value_t = default_workers())]
    workers: usize,
    #[command(flatten)]
    solver: SolverArgs,
    /// CSV file; stdout if absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    instance: PathBuf,
    solution: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Myopic,
    NonMyopic,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Myopic => Mode::Myopic,
            ModeArg::NonMyopic => Mode::NonMyopic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Exact,
    Greedy,
    Brute,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Mps,
    /// Column and row counts by kind and family.
    Summary,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

const REFERENCE_SIZES: [usize; 7] = [10, 50, 100, 200, 400, 800, 1000];

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.command) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Infeasible) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

enum Outcome {
    Done,
    Infeasible,
}

fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Generate(a) => generate(a),
        Command::Counts(a) => counts(a),
        Command::Build(a) => build(a),
        Command::Solve(a) => solve(a),
        Command::Sweep(a) => sweep(a),
        Command::Render(a) => render(a),
    }
}

fn load_instance(path: &Path) -> Result<Instance> {
    Instance::load(path).with_context(|| format!("reading instance {}", path.display()))
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn generate(a: GenerateArgs) -> Result<Outcome> {
    let inst = if a.illustrative {
        illustrative_instance(a.seed, a.station_capacity)
    } else {
        let config = GeneratorConfig {
            nodes: a.nodes,
            levels: a.levels,
            idle_vehicles: a.idle_vehicles,
            stations: a.stations,
            station_capacity: a.station_capacity,
            max_servers: a.max_servers,
            service_rate: match a.mu {
                Some(mu) => ServiceRate::Uniform(mu),
                None => ServiceRate::PerNode(1.0),
            },
            seed: a.seed,
            ..GeneratorConfig::default()
        };
        generate_instance(&config)?
    };
    let mut text = inst.to_json();
    text.push('\n');
    emit(a.output.as_deref(), &text)?;
    Ok(Outcome::Done)
}

fn counts(a: CountsArgs) -> Result<Outcome> {
    let sizes = if a.nodes.is_empty() { REFERENCE_SIZES.to_vec() } else { a.nodes };
    let d = GeneratorConfig::default();
    println!("{:>6} {:>12} {:>12}", "N", "variables", "constraints");
    for n in sizes {
        if n < d.stations {
            bail!("N = {n} is smaller than the {} stations", d.stations);
        }
        let arcs = 2 * (n - 1) * d.levels + d.stations * (d.levels - 1);
        let vars = count_variables(n, d.levels, arcs, d.stations, d.max_servers);
        let rows = count_constraints(n, d.levels, d.stations, d.max_servers, d.idle_vehicles);
        print!("{n:>6} {vars:>12} {rows:>12}");
        if a.assemble {
            let sc = Scenario::new(generate_instance(&GeneratorConfig::with_nodes(n, 0))?)?;
            let model = sc.assemble(Mode::Myopic)?;
            let ok = model.column_count() == vars && model.row_count() == rows;
            print!("  assembled {} {} {}", model.column_count(), model.row_count(), if ok { "ok" } else { "MISMATCH" });
        }
        println!();
    }
    Ok(Outcome::Done)
}

fn build(a: BuildArgs) -> Result<Outcome> {
    let sc = Scenario::new(load_instance(&a.instance)?)?;
    let model = sc.assemble(a.mode.into())?;
    eprint!("{}", model.summary());
    match a.format {
        Format::Mps => emit(a.output.as_deref(), &export_mps(&model))?,
        Format::Summary => emit(a.output.as_deref(), &model.summary())?,
    }
    Ok(Outcome::Done)
}

fn solve_with(sc: &Scenario, mode: Mode, method: Method, options: &SolverOptions) -> Result<Solution> {
    Ok(match method {
        Method::Exact => solve_exact(sc, mode, options)?,
        Method::Greedy => {
            let report = greedy_place(sc, mode, false)?;
            log::info!("greedy: {} swaps, {} evaluations", report.swaps, report.evaluations);
            report.solution
        }
        Method::Brute => brute_force(sc, mode)?,
    })
}

fn solve(a: SolveArgs) -> Result<Outcome> {
    let options = a.solver.options();
    options.validate()?;
    let sc = Scenario::new(load_instance(&a.instance)?)?;
    let mode: Mode = a.mode.into();
    let start = Instant::now();
    let solution = solve_with(&sc, mode, a.method, &options)?;
    let elapsed = start.elapsed().as_secs_f64();
    let model = sc.assemble(mode)?;
    print_summary(&sc, &model, &solution, elapsed);
    if let Some(path) = &a.output {
        solution
            .to_file(&model)
            .save(path)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(match solution.status {
        Status::Infeasible => Outcome::Infeasible,
        _ => Outcome::Done,
    })
}

fn print_summary(sc: &Scenario, model: &MilpModel, s: &Solution, seconds: f64) {
    println!("status: {}", s.status);
    println!("mode: {}", s.mode);
    if let Some(z) = s.objective {
        println!("objective: {z:.6}");
    }
    if let Some(b) = s.bound {
        println!("bound: {b:.6}");
    }
    if let Some(g) = s.gap() {
        println!("gap: {g:.3e}");
    }
    println!("nodes: {}", s.nodes);
    println!("wall seconds: {seconds:.3}");
    if let Some(v) = &s.violations {
        println!("max violation: {:.3e} ({})", v.max_row_violation(), if v.feasible { "feasible" } else { "infeasible" });
    }
    if s.status.has_values() {
        let layout = &model.layout;
        let mut sites = Vec::new();
        for v in 0..layout.vertices() {
            let base = layout.y_offset() + v * layout.servers;
            let k = (0..layout.servers).map(|m| s.value(base + m)).sum::<f64>().round() as u32;
            if k > 0 {
                sites.push(format!("{}x{k}", sc.instance.vertex_at(v)));
            }
        }
        println!("servers: {}", sites.join(" "));
        let moved: f64 = (0..layout.arcs).map(|a| s.value(layout.w(a))).sum();
        println!("vehicle arc traversals: {moved}");
    }
    for w in &s.warnings {
        println!("warning: {w}");
    }
}

fn sweep(a: SweepArgs) -> Result<Outcome> {
    let base = load_instance(&a.instance)?;
    let spec = SweepSpec::new(a.kind, a.values, base, a.mode.into())?;
    let method = match a.method {
        Method::Exact => SweepMethod::Exact(a.solver.options()),
        Method::Greedy => SweepMethod::Greedy,
        Method::Brute => SweepMethod::Brute,
    };
    let points = run_sweep(&spec, &method, a.workers)?;
    let mut out = Vec::new();
    write_csv(&points, &mut out)?;
    emit(a.output.as_deref(), &String::from_utf8(out).expect("csv is UTF-8"))?;
    Ok(Outcome::Done)
}

fn render(a: RenderArgs) -> Result<Outcome> {
    let sc = Scenario::new(load_instance(&a.instance)?)?;
    let file = SolutionFile::load(&a.solution).with_context(|| format!("reading solution {}", a.solution.display()))?;
    if !file.status.has_values() {
        bail!("solution status is {}; nothing to render", file.status);
    }
    let model = sc.assemble(file.mode)?;
    let mut solution = Solution::without_values(file.status, file.mode);
    solution.values = file.values_for(&model)?;
    let dot = render_solution(&sc.instance, &sc.graph, &model, &solution);
    emit(a.output.as_deref(), &dot)?;
    Ok(Outcome::Done)
}
