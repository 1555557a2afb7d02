//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines always reach the console.

mod common;

use std::collections::HashSet;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use common::*;
use drrt_core::baselines::implicit_astar;
use drrt_core::bench::*;
use drrt_core::planner::{plan, Variant};
use drrt_core::geometry::{DiskRobot, Environment, Point, Polygon};
use drrt_core::roadmap::{build_prm, heuristic_table, star_radius};
use drrt_core::{CompositeVertex, CostModel, PlannerParams, Trajectory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEEDS: u64 = 10;
const C1_ALGORITHMS: [Algorithm; 6] = Algorithm::ALL;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

struct Batch {
    scenario: Scenario,
    reports: Vec<ExperimentReport>,
}

fn run_batch(scenario: &Scenario, algorithms: &[Algorithm]) -> Batch {
    let reports = algorithms
        .iter()
        .map(|&alg| run_experiment(scenario, alg, &SeedPlan::paired(SEEDS), &ExperimentOptions::default()))
        .collect();
    Batch { scenario: scenario.clone(), reports }
}

fn csv_without_clock(batches: &[Batch]) -> String {
    let mut out = String::new();
    for b in batches {
        let mut buf = Vec::new();
        write_csv(&b.reports, &mut buf).expect("in-memory write");
        for line in String::from_utf8(buf).expect("utf-8").lines() {
            let mut cols: Vec<&str> = line.split(',').collect();
            cols.remove(3);
            out.push_str(&cols.join(","));
            out.push('\n');
        }
    }
    out
}

fn report(batch: &Batch, alg: Algorithm) -> &ExperimentReport {
    batch.reports.iter().find(|r| r.algorithm == alg).expect("algorithm in batch")
}

fn c1_batch() -> Batch {
    let sc = load_scenario(fixture("two_disk_swap.json")).expect("fixture");
    run_batch(&sc, &C1_ALGORITHMS)
}

fn c3_batches() -> Vec<Batch> {
    (3..=6)
        .map(|r| {
            let sc = load_scenario(fixture(&format!("perimeter_crossing_{r}.json"))).expect("fixture");
            let mut algs = vec![Algorithm::DrrtStar, Algorithm::Drrt];
            if r == 6 {
                algs.push(Algorithm::CompositeRrtStar);
            }
            run_batch(&sc, &algs)
        })
        .collect()
}

fn median(xs: &[f64]) -> Option<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    match v.len() {
        0 => None,
        n if n % 2 == 1 => Some(v[m]),
        _ => Some((v[m - 1] + v[m]) / 2.0),
    }
}

fn criterion_1(batch: &Batch, c_star: &[f64]) -> Outcome {
    let ratios = |alg| -> Vec<f64> {
        report(batch, alg)
            .runs
            .iter()
            .map(|r| r.final_cost.unwrap_or(f64::INFINITY) / c_star[r.roadmap_seed as usize])
            .collect()
    };
    let star = median(&ratios(Algorithm::DrrtStar)).unwrap_or(f64::INFINITY);
    let ao = median(&ratios(Algorithm::AoDrrt)).unwrap_or(f64::INFINITY);
    let mut below = 0;
    for alg in [Algorithm::Drrt, Algorithm::AoDrrt, Algorithm::DrrtStar, Algorithm::ImplicitAstar] {
        for run in &report(batch, alg).runs {
            let c = c_star[run.roadmap_seed as usize];
            below += run.trace.events.iter().filter(|e| e.best_cost < c - 1e-9).count();
        }
    }
    Outcome::new(
        star <= 1.05 && ao <= 1.15 && below == 0,
        format!(
            "median cost / C*: drrt-star {star:.4} (<= 1.05), ao-drrt {ao:.4} (<= 1.15); costs below C* - 1e-9: {below}"
        ),
    )
}

fn criterion_2(batch: &Batch) -> Outcome {
    let star = report(batch, Algorithm::DrrtStar).median_first_iteration;
    let ao = report(batch, Algorithm::AoDrrt).median_first_iteration;
    match (star, ao) {
        (Some(s), Some(a)) => Outcome::new(
            s <= 0.1 * a,
            format!("median first-solution expansion: drrt-star {s}, ao-drrt {a} (ratio {:.3} <= 0.10)", s / a),
        ),
        _ => Outcome::new(false, format!("missing first solutions: drrt-star {star:?}, ao-drrt {ao:?}")),
    }
}

fn criterion_3(batches: &[Batch], elapsed_s: f64) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for b in batches {
        let r = b.scenario.robot_count();
        let star = report(b, Algorithm::DrrtStar).success_ratio;
        let drrt = report(b, Algorithm::Drrt).success_ratio;
        pass &= star == 1.0 && star >= drrt;
        let mut part = format!("R={r}: drrt-star {star}, drrt {drrt}");
        if r == 6 {
            let rrt = report(b, Algorithm::CompositeRrtStar).success_ratio;
            pass &= rrt < star;
            part.push_str(&format!(", composite-rrt-star {rrt}"));
        }
        parts.push(part);
    }
    pass &= elapsed_s <= 20.0 * 60.0;
    Outcome::new(pass, format!("success ratios {}; sweep {elapsed_s:.0} s (<= 1200)", parts.join("; ")))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let models = [CostModel::Sum, CostModel::Max, CostModel::CompositeEuclidean];
    let mut mismatches = Vec::new();
    let mut solved = 0;
    let mut vertices = 0;
    for k in 0..20 {
        let ts = random_instance(&mut rng, 2 + k % 2, 8, models[k % 3]);
        let (s, t) = (ts.start(), ts.target());
        let got = implicit_astar(&ts, &s, &t).map(|r| r.cost);
        let want = explicit_product_dijkstra(&ts, &s, &t);
        match (got, want) {
            (Some(a), Some(b)) if (a - b).abs() <= 1e-9 => solved += 1,
            (None, None) => {}
            other => mismatches.push(format!("instance {k} cost {other:?}")),
        }
        let tuples = all_tuples(&ts);
        vertices += tuples.len();
        for (v, want) in tuples.iter().zip(brute_force_adjacency(&ts, &tuples)) {
            let got: Vec<CompositeVertex> = ts.tensor_adj(v).collect();
            let set: HashSet<CompositeVertex> = got.iter().cloned().collect();
            if set.len() != got.len() || set != want {
                mismatches.push(format!("instance {k} adjacency at {v}"));
            }
        }
    }
    Outcome::new(
        mismatches.is_empty(),
        format!(
            "20 instances ({solved} solvable, {vertices} product vertices checked exhaustively); mismatches: {}",
            if mismatches.is_empty() { "none".to_string() } else { mismatches.join(", ") }
        ),
    )
}

fn criterion_5(batches: &[&Batch]) -> Outcome {
    let mut checked = 0;
    let mut failures = Vec::new();
    for b in batches {
        let robots = b.scenario.disk_robots();
        for rep in &b.reports {
            for run in &rep.runs {
                if let Some(traj) = &run.trajectory {
                    checked += 1;
                    if let Err(e) = dense_check(&b.scenario.environment, &robots, traj) {
                        failures.push(format!("{} {} {}: {e}", b.scenario.name, rep.algorithm, run.seed_label()));
                    }
                    if !endpoints_match(&b.scenario, traj) {
                        failures.push(format!("{} {} {}: wrong endpoints", b.scenario.name, rep.algorithm, run.seed_label()));
                    }
                }
            }
        }
    }
    Outcome::new(
        failures.is_empty() && checked > 0,
        format!("{checked} trajectories checked at resolution {RESOLUTION}; failures: {}", failures.len())
            + &failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default(),
    )
}

fn endpoints_match(sc: &Scenario, traj: &Trajectory) -> bool {
    traj.waypoints.first() == Some(&sc.starts()) && traj.waypoints.last() == Some(&sc.goals())
}

fn criterion_6(batches: &[&Batch]) -> Outcome {
    let mut traces = 0;
    let mut bad_traces = 0;
    for b in batches {
        for rep in &b.reports {
            for run in &rep.runs {
                traces += 1;
                let consistent = match (&run.trajectory, run.trace.last()) {
                    (Some(t), Some(e)) => t.cost == e.best_cost,
                    (None, None) => true,
                    _ => false,
                };
                if !run.trace.is_strictly_decreasing() || !consistent {
                    bad_traces += 1;
                }
            }
        }
    }
    let mut audits = 0;
    let mut audit_failures = Vec::new();
    let scenarios = [
        load_scenario(fixture("two_disk_swap.json")).expect("fixture"),
        load_scenario(fixture("perimeter_crossing_3.json")).expect("fixture"),
        load_scenario(fixture("perimeter_crossing_4.json")).expect("fixture"),
    ];
    for sc in &scenarios {
        for seed in 0..3 {
            let ts = sc.tensor_space(sc.build_roadmaps(seed, None).expect("roadmaps"));
            for v in [Variant::Drrt, Variant::AoDrrt, Variant::DrrtStar] {
                let params = PlannerParams {
                    iteration_budget: 10_000,
                    audit_every: Some(250),
                    ..sc.planner.clone().with_seed(seed)
                };
                let out = plan(&ts, &ts.start(), &ts.target(), &params, v);
                audits += out.audits;
                audit_failures.extend(out.audit_failures.iter().map(|f| format!("{} {v:?}: {f}", sc.name)));
                if !out.trace.is_strictly_decreasing() {
                    audit_failures.push(format!("{} {v:?}: trace not decreasing", sc.name));
                }
            }
        }
    }
    Outcome::new(
        bad_traces == 0 && audit_failures.is_empty() && audits > 0,
        format!(
            "{traces} traces, {bad_traces} not strictly decreasing; {audits} mid-run audits, {} failed",
            audit_failures.len()
        ) + &audit_failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default(),
    )
}

fn criterion_7() -> Outcome {
    let mut worst = 0.0f64;
    let mut grid = 0;
    for n in [2, 3, 10, 52, 100, 1000, 2502, 100_000] {
        for d in [1, 2, 3, 4, 6, 8, 12] {
            for mu in [0.5, 1.0, 100.0, 1e4, 1e8] {
                for eta in [0.01, 0.1, 0.5, 1.0] {
                    let want = reference_radius(n, d, mu, eta);
                    let got = star_radius(n, d, mu, eta).unwrap_or(f64::NAN);
                    let rel = ((got - want) / want).abs();
                    worst = if rel.is_nan() { f64::INFINITY } else { worst.max(rel) };
                    grid += 1;
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let robot = DiskRobot::new(0.2);
    let mut mismatched = 0;
    for k in 0..50 {
        let mut env = Environment::empty(square(10.0));
        for _ in 0..rng.gen_range(0..4) {
            let (x, y) = (rng.gen_range(0.5..8.0), rng.gen_range(0.5..8.0));
            env.obstacles.push(Polygon::rect(x, y, x + rng.gen_range(0.3..2.0), y + rng.gen_range(0.3..2.0)));
        }
        let mut free = || loop {
            let q = Point::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0));
            if disk_clear(&env, 0.2, q) {
                break q;
            }
        };
        let (s, g) = (free(), free());
        let n = 10 + k;
        let radius = star_radius(n + 2, 2, 100.0, 0.1).expect("valid");
        let rm = build_prm(&env, &robot, n, radius, s, g, k as u64).expect("roadmap");
        let want = bellman_ford(&rm, rm.goal_id());
        let got = heuristic_table(&rm, rm.goal_id());
        if (0..rm.len()).any(|v| got.get(v).to_bits() != want[v].to_bits()) {
            mismatched += 1;
        }
    }
    Outcome::new(
        worst <= 1e-9 && mismatched == 0,
        format!(
            "star_radius worst relative error {worst:.2e} over {grid} grid points (<= 1e-9); heuristic tables differing from Bellman-Ford: {mismatched}/50"
        ),
    )
}

fn main() -> ExitCode {
    let clock = Instant::now();
    let mut results: Vec<(usize, Outcome)> = Vec::new();

    results.push((7, criterion_7()));
    results.push((4, criterion_4()));

    let c1 = c1_batch();
    let c_star: Vec<f64> = (0..SEEDS)
        .map(|k| {
            let ts = c1.scenario.tensor_space(c1.scenario.build_roadmaps(k, None).expect("roadmaps"));
            implicit_astar(&ts, &ts.start(), &ts.target()).map_or(f64::NAN, |r| r.cost)
        })
        .collect();
    results.push((1, criterion_1(&c1, &c_star)));
    results.push((2, criterion_2(&c1)));

    let sweep = Instant::now();
    let c3 = c3_batches();
    results.push((3, criterion_3(&c3, sweep.elapsed().as_secs_f64())));

    let all: Vec<&Batch> = std::iter::once(&c1).chain(&c3).collect();
    results.push((5, criterion_5(&all)));
    results.push((6, criterion_6(&all)));

    let first = csv_without_clock(std::slice::from_ref(&c1)) + &csv_without_clock(&c3);
    let rerun = csv_without_clock(&[c1_batch()]) + &csv_without_clock(&c3_batches());
    let rows = first.lines().count();
    results.push((
        8,
        Outcome::new(
            first == rerun && rows > 1,
            format!("criteria 1 and 3 batches rerun: {rows} CSV rows, identical excluding elapsed_s: {}", first == rerun),
        ),
    ));

    results.sort_by_key(|r| r.0);
    let mut failed = 0;
    for (n, o) in &results {
        println!("{} criterion {n}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.0} s",
        results.len() - failed,
        clock.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
