//! `drrt-bench`: build roadmaps, plan, benchmark and render scenarios.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use drrt_core::bench::{
    emit_csv, emit_svg, load_scenario, run_experiment, save_scenario, Algorithm, ExperimentOptions, ExperimentReport,
    Scenario, SeedPlan,
};
use drrt_core::{CostModel, Trajectory};

const EXIT_INVALID_SCENARIO: u8 = 2;
const EXIT_PLANNING_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "drrt-bench", version, about = "Multi-robot planning over tensor-product roadmaps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample and save the per-robot roadmaps of a scenario.
    BuildRoadmaps(BuildArgs),
    /// Run one algorithm once and save the trajectory.
    Plan(PlanArgs),
    /// Run algorithms over a seed plan and write CSV and JSON reports.
    Bench(BenchArgs),
    /// Draw a scenario, optionally with a trajectory, as SVG.
    Render(RenderArgs),
}

/// Overrides applied on top of the scenario file.
#[derive(Args, Clone)]
struct Overrides {
    /// Expansion budget per run.
    #[arg(long)]
    budget: Option<usize>,
    /// Expansions between connection attempts.
    #[arg(long)]
    n_it: Option<usize>,
    /// Per-robot goal sampling probability.
    #[arg(long)]
    goal_bias: Option<f64>,
    /// sum, max or composite-euclidean.
    #[arg(long)]
    cost_model: Option<CostModel>,
    /// Roadmap samples per robot.
    #[arg(long)]
    samples: Option<usize>,
}

impl Overrides {
    fn apply(&self, sc: &mut Scenario) {
        if let Some(b) = self.budget {
            sc.planner.iteration_budget = b;
        }
        if let Some(n) = self.n_it {
            sc.planner.n_it = n;
        }
        if let Some(g) = self.goal_bias {
            sc.planner.goal_bias = g;
        }
        if let Some(c) = self.cost_model {
            sc.cost_model = c;
        }
        if let Some(s) = self.samples {
            sc.roadmap.samples = s;
        }
    }
}

#[derive(Args)]
struct BuildArgs {
    /// Scenario JSON file.
    #[arg(long, short)]
    scenario: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for robot_<i>.json and a scenario that references them.
    #[arg(long, short)]
    out: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long, short)]
    scenario: PathBuf,
    #[arg(long, short, default_value = "drrt-star")]
    algorithm: Algorithm,
    /// Planner seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Roadmap seed; defaults to the planner seed.
    #[arg(long)]
    roadmap_seed: Option<u64>,
    /// Trajectory JSON output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// SVG drawing of the result.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Incumbent trace as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, short)]
    scenario: PathBuf,
    /// Comma-separated algorithm ids.
    #[arg(long, short, value_delimiter = ',', default_value = "drrt-star,ao-drrt")]
    algorithms: Vec<Algorithm>,
    /// Number of roadmap seeds (0, 1, ...).
    #[arg(long, default_value_t = 10)]
    roadmap_seeds: u64,
    /// Number of run seeds per roadmap seed.
    #[arg(long, default_value_t = 5)]
    run_seeds: u64,
    /// Pair roadmap seed k with run seed k instead of the cross product.
    #[arg(long)]
    paired: bool,
    /// Run sequentially.
    #[arg(long)]
    serial: bool,
    /// Samples for composite PRM*.
    #[arg(long)]
    prm_samples: Option<usize>,
    /// Steering step for composite RRT*.
    #[arg(long)]
    rrt_step: Option<f64>,
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Full report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long, short)]
    scenario: PathBuf,
    /// Trajectory JSON written by `plan`.
    #[arg(long, short)]
    trajectory: Option<PathBuf>,
    #[arg(long, short)]
    out: PathBuf,
}

/// Error carrying the process exit code.
#[derive(Debug)]
struct Exit(u8, String);

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.1)
    }
}

impl std::error::Error for Exit {}

fn load(path: &Path, overrides: Option<&Overrides>) -> Result<Scenario> {
    let mut sc = load_scenario(path).map_err(|e| Exit(EXIT_INVALID_SCENARIO, format!("{}: {e}", path.display())))?;
    if let Some(o) = overrides {
        o.apply(&mut sc);
        sc.validate()
            .map_err(|e| Exit(EXIT_INVALID_SCENARIO, format!("{}: {e}", path.display())))?;
    }
    Ok(sc)
}

fn base_dir(path: &Path) -> Option<PathBuf> {
    path.parent().map(Path::to_path_buf)
}

fn build_roadmaps(args: BuildArgs) -> Result<()> {
    let mut sc = load(&args.scenario, Some(&args.overrides))?;
    let roadmaps = sc.build_roadmaps(args.seed, base_dir(&args.scenario).as_deref())?;
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut files = Vec::new();
    for (i, rm) in roadmaps.iter().enumerate() {
        let name = PathBuf::from(format!("robot_{i}.json"));
        let path = args.out.join(&name);
        std::fs::write(&path, rm.to_json()).with_context(|| format!("writing {}", path.display()))?;
        println!("robot {i}: {} vertices, {} edges -> {}", rm.len(), rm.edge_count(), path.display());
        files.push(name);
    }
    sc.roadmap.files = Some(files);
    let path = args.out.join("scenario.json");
    save_scenario(&sc, &path)?;
    println!("scenario using these roadmaps -> {}", path.display());
    Ok(())
}

fn plan(args: PlanArgs) -> Result<()> {
    let sc = load(&args.scenario, Some(&args.overrides))?;
    let seeds = SeedPlan {
        roadmap_seeds: vec![args.roadmap_seed.unwrap_or(args.seed)],
        run_seeds: vec![args.seed],
        paired: true,
    };
    let opts = ExperimentOptions { base_dir: base_dir(&args.scenario), parallel: false, ..Default::default() };
    let rep = run_experiment(&sc, args.algorithm, &seeds, &opts);
    if let Some(path) = &args.csv {
        emit_csv(std::slice::from_ref(&rep), path).with_context(|| format!("writing {}", path.display()))?;
    }
    let run = &rep.runs[0];
    if let Some(e) = &run.error {
        return Err(Exit(EXIT_PLANNING_FAILED, format!("{}: {e}", args.algorithm)).into());
    }
    let Some(traj) = &run.trajectory else {
        if let Some(path) = &args.svg {
            emit_svg(&sc, None, path)?;
        }
        return Err(Exit(EXIT_PLANNING_FAILED, format!("{}: no solution found", args.algorithm)).into());
    };
    println!(
        "{} found a solution: cost {} ({} waypoints, normalized {:.4}), first at iteration {}",
        args.algorithm,
        traj.cost,
        traj.len(),
        run.normalized_final_cost().unwrap_or(f64::NAN),
        run.first_solution_iteration().unwrap_or(0)
    );
    if let Some(path) = &args.out {
        let text = serde_json::to_string_pretty(traj)?;
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.svg {
        emit_svg(&sc, Some(traj), path).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn print_summary(rep: &ExperimentReport) {
    let fmt = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
    println!(
        "{:<20} runs {:>3}  success {:.2}  first-iter median {:>10}  final-cost median {:>10}  normalized median {:>8}",
        rep.algorithm.id(),
        rep.runs.len(),
        rep.success_ratio,
        fmt(rep.median_first_iteration),
        fmt(rep.median_final_cost),
        fmt(rep.median_normalized_cost),
    );
    for run in rep.runs.iter().filter(|r| r.error.is_some()) {
        println!("  {} failed: {}", run.seed_label(), run.error.as_deref().unwrap_or_default());
    }
}

fn bench(args: BenchArgs) -> Result<()> {
    let sc = load(&args.scenario, Some(&args.overrides))?;
    let seeds = if args.paired {
        if args.roadmap_seeds != args.run_seeds {
            bail!("--paired needs equal --roadmap-seeds and --run-seeds");
        }
        SeedPlan::paired(args.roadmap_seeds)
    } else {
        SeedPlan::cross(args.roadmap_seeds, args.run_seeds)
    };
    let opts = ExperimentOptions {
        base_dir: base_dir(&args.scenario),
        parallel: !args.serial,
        prm_samples: args.prm_samples,
        rrt_step: args.rrt_step,
    };
    let mut reports = Vec::new();
    for &alg in &args.algorithms {
        let rep = run_experiment(&sc, alg, &seeds, &opts);
        print_summary(&rep);
        reports.push(rep);
    }
    if let Some(path) = &args.csv {
        emit_csv(&reports, path).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.report {
        let text = serde_json::to_string_pretty(&reports)?;
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn render(args: RenderArgs) -> Result<()> {
    let sc = load(&args.scenario, None)?;
    let traj: Option<Trajectory> = match &args.trajectory {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let traj: Trajectory =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            if traj.robot_count() != sc.robot_count() {
                bail!("trajectory has {} robots, scenario has {}", traj.robot_count(), sc.robot_count());
            }
            Some(traj)
        }
        None => None,
    };
    emit_svg(&sc, traj.as_ref(), &args.out).with_context(|| format!("writing {}", args.out.display()))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::BuildRoadmaps(a) => build_roadmaps(a),
        Command::Plan(a) => plan(a),
        Command::Bench(a) => bench(a),
        Command::Render(a) => render(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Exit>() {
                Some(Exit(code, _)) => ExitCode::from(*code),
                None => ExitCode::FAILURE,
            }
        }
    }
}
