//! Seeded batch runs of one algorithm on one scenario.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::Scenario;
use crate::baselines::{composite_prm_star_with, composite_rrt_star, implicit_astar, PrmStarOptions, RrtStarParams};
use crate::error::ScenarioError;
use crate::planner::{plan, RunTrace, Trajectory, Variant};
use crate::roadmap::{heuristic_table, Roadmap};
use crate::tensor::{CostModel, TensorSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Drrt,
    AoDrrt,
    DrrtStar,
    ImplicitAstar,
    CompositePrmStar,
    CompositeRrtStar,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Drrt,
        Algorithm::AoDrrt,
        Algorithm::DrrtStar,
        Algorithm::ImplicitAstar,
        Algorithm::CompositePrmStar,
        Algorithm::CompositeRrtStar,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Algorithm::Drrt => "drrt",
            Algorithm::AoDrrt => "ao-drrt",
            Algorithm::DrrtStar => "drrt-star",
            Algorithm::ImplicitAstar => "implicit-astar",
            Algorithm::CompositePrmStar => "composite-prm-star",
            Algorithm::CompositeRrtStar => "composite-rrt-star",
        }
    }

    /// Whether the algorithm searches the tensor roadmap (as opposed to the
    /// continuous composite space).
    pub fn uses_roadmaps(self) -> bool {
        !matches!(self, Algorithm::CompositePrmStar | Algorithm::CompositeRrtStar)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.id() == s)
            .ok_or_else(|| {
                let ids: Vec<_> = Algorithm::ALL.iter().map(|a| a.id()).collect();
                format!("unknown algorithm {s:?}; expected one of {}", ids.join(", "))
            })
    }
}

/// Which (roadmap seed, run seed) pairs a batch runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedPlan {
    pub roadmap_seeds: Vec<u64>,
    pub run_seeds: Vec<u64>,
    /// Zip the two lists instead of taking their cross product.
    #[serde(default)]
    pub paired: bool,
}

impl Default for SeedPlan {
    /// Ten roadmap sets, five runs on each.
    fn default() -> Self {
        Self::cross(10, 5)
    }
}

impl SeedPlan {
    pub fn cross(roadmap_sets: u64, runs: u64) -> Self {
        Self {
            roadmap_seeds: (0..roadmap_sets).collect(),
            run_seeds: (0..runs).collect(),
            paired: false,
        }
    }

    /// `n` runs, run `k` on roadmap set `k` with run seed `k`.
    pub fn paired(n: u64) -> Self {
        Self {
            roadmap_seeds: (0..n).collect(),
            run_seeds: (0..n).collect(),
            paired: true,
        }
    }

    pub fn runs(&self) -> Vec<(u64, u64)> {
        if self.paired {
            self.roadmap_seeds.iter().copied().zip(self.run_seeds.iter().copied()).collect()
        } else {
            self.roadmap_seeds
                .iter()
                .flat_map(|&r| self.run_seeds.iter().map(move |&s| (r, s)))
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOptions {
    /// Directory that relative roadmap file paths are resolved against.
    pub base_dir: Option<PathBuf>,
    /// Run independent seeds on the rayon pool.
    pub parallel: bool,
    /// Composite PRM* sample count; defaults to the square of the per-robot
    /// sample count.
    pub prm_samples: Option<usize>,
    /// Composite RRT* extension length; defaults to the per-robot roadmap
    /// radius.
    pub rrt_step: Option<f64>,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            base_dir: None,
            parallel: true,
            prm_samples: None,
            rrt_step: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub roadmap_seed: u64,
    pub run_seed: u64,
    pub success: bool,
    pub trace: RunTrace,
    /// Lower bound used to normalize this run's costs.
    pub lower_bound: f64,
    pub final_cost: Option<f64>,
    pub trajectory: Option<Trajectory>,
    /// Why the run could not be carried out (not set for plain failures to
    /// find a solution).
    pub error: Option<String>,
}

impl RunRecord {
    pub fn first_solution_iteration(&self) -> Option<usize> {
        self.trace.first().map(|e| e.iteration)
    }

    pub fn first_solution_time(&self) -> Option<f64> {
        self.trace.first().map(|e| e.elapsed_s)
    }

    pub fn normalized_final_cost(&self) -> Option<f64> {
        self.final_cost.map(|c| normalize(c, self.lower_bound))
    }

    /// `"roadmapSeed/runSeed"`, the seed column of the CSV output.
    pub fn seed_label(&self) -> String {
        format!("{}/{}", self.roadmap_seed, self.run_seed)
    }
}

/// Cost divided by its lower bound; a zero bound maps zero cost to 1.
pub fn normalize(cost: f64, lower_bound: f64) -> f64 {
    if lower_bound > 0.0 {
        cost / lower_bound
    } else if cost == 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub scenario: String,
    pub algorithm: Algorithm,
    pub runs: Vec<RunRecord>,
    pub success_ratio: f64,
    pub median_first_iteration: Option<f64>,
    pub mean_first_iteration: Option<f64>,
    pub median_first_time_s: Option<f64>,
    pub median_final_cost: Option<f64>,
    pub median_normalized_cost: Option<f64>,
    pub mean_normalized_cost: Option<f64>,
}

impl ExperimentReport {
    pub fn from_runs(scenario: &str, algorithm: Algorithm, runs: Vec<RunRecord>) -> Self {
        let ok = runs.iter().filter(|r| r.success).count();
        let firsts: Vec<f64> = runs.iter().filter_map(|r| r.first_solution_iteration()).map(|i| i as f64).collect();
        let times: Vec<f64> = runs.iter().filter_map(|r| r.first_solution_time()).collect();
        let finals: Vec<f64> = runs.iter().filter_map(|r| r.final_cost).collect();
        let normalized: Vec<f64> = runs.iter().filter_map(|r| r.normalized_final_cost()).collect();
        Self {
            scenario: scenario.to_string(),
            algorithm,
            success_ratio: if runs.is_empty() { 0.0 } else { ok as f64 / runs.len() as f64 },
            median_first_iteration: median(&firsts),
            mean_first_iteration: mean(&firsts),
            median_first_time_s: median(&times),
            median_final_cost: median(&finals),
            median_normalized_cost: median(&normalized),
            mean_normalized_cost: mean(&normalized),
            runs,
        }
    }

    /// Total number of incumbent events over all runs.
    pub fn event_count(&self) -> usize {
        self.runs.iter().map(|r| r.trace.events.len()).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Median (mean of the middle pair for even counts); `None` when empty.
pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { (v[m - 1] + v[m]) / 2.0 })
}

pub fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Cost-model aggregation of each robot's shortest roadmap path length from
/// start to goal, ignoring the other robots. Infinite if some robot's goal
/// is unreachable on its roadmap.
pub fn optimistic_lower_bound(scenario: &Scenario, roadmaps: &[Roadmap]) -> f64 {
    let lengths = roadmaps
        .iter()
        .map(|rm| heuristic_table(rm, rm.goal_id()).get(rm.start_id()));
    scenario.cost_model.aggregate(lengths)
}

/// Lower bound for planners that leave the roadmaps: the aggregated
/// straight-line start-goal distances.
pub fn straight_line_lower_bound(scenario: &Scenario) -> f64 {
    scenario
        .cost_model
        .aggregate(scenario.robots.iter().map(|r| r.start.dist(r.goal)))
}

/// Runs `algorithm` once per seed pair. Roadmaps are built once per roadmap
/// seed. Failures are recorded per run and never abort the batch; results
/// are ordered as in [`SeedPlan::runs`] regardless of `opts.parallel`.
pub fn run_experiment(
    scenario: &Scenario,
    algorithm: Algorithm,
    seeds: &SeedPlan,
    opts: &ExperimentOptions,
) -> ExperimentReport {
    let runs = seeds.runs();
    let mut roadmap_seeds: Vec<u64> = runs.iter().map(|r| r.0).collect();
    roadmap_seeds.sort_unstable();
    roadmap_seeds.dedup();
    let base = opts.base_dir.as_deref();
    let build = |&seed: &u64| (seed, scenario.build_roadmaps(seed, base).map(|rms| scenario.tensor_space(rms)));
    let spaces: Vec<(u64, Result<TensorSpace, ScenarioError>)> = if opts.parallel {
        roadmap_seeds.par_iter().map(build).collect()
    } else {
        roadmap_seeds.iter().map(build).collect()
    };
    let space_of = |seed: u64| &spaces.iter().find(|(s, _)| *s == seed).expect("built").1;
    let exec = |&(rs, seed): &(u64, u64)| run_one(scenario, algorithm, space_of(rs), rs, seed, opts);
    let records: Vec<RunRecord> = if opts.parallel {
        runs.par_iter().map(exec).collect()
    } else {
        runs.iter().map(exec).collect()
    };
    ExperimentReport::from_runs(&scenario.name, algorithm, records)
}

fn run_one(
    scenario: &Scenario,
    algorithm: Algorithm,
    space: &Result<TensorSpace, ScenarioError>,
    roadmap_seed: u64,
    run_seed: u64,
    opts: &ExperimentOptions,
) -> RunRecord {
    let mut record = RunRecord {
        algorithm,
        roadmap_seed,
        run_seed,
        success: false,
        trace: RunTrace::default(),
        lower_bound: f64::INFINITY,
        final_cost: None,
        trajectory: None,
        error: None,
    };
    let ts = match space {
        Ok(ts) => ts,
        Err(e) => {
            record.error = Some(e.to_string());
            return record;
        }
    };
    record.lower_bound = if algorithm.uses_roadmaps() {
        optimistic_lower_bound(scenario, ts.roadmaps())
    } else {
        straight_line_lower_bound(scenario)
    };
    let (s, t) = (ts.start(), ts.target());
    let params = scenario.planner.clone().with_seed(run_seed);
    let (trajectory, trace) = match algorithm {
        Algorithm::Drrt | Algorithm::AoDrrt | Algorithm::DrrtStar => {
            let variant = match algorithm {
                Algorithm::Drrt => Variant::Drrt,
                Algorithm::AoDrrt => Variant::AoDrrt,
                _ => Variant::DrrtStar,
            };
            let out = plan(ts, &s, &t, &params, variant);
            (out.trajectory, out.trace)
        }
        Algorithm::ImplicitAstar => {
            let clock = Instant::now();
            let mut trace = RunTrace::default();
            let traj = implicit_astar(ts, &s, &t).map(|rec| {
                trace.record(rec.expanded, clock.elapsed().as_secs_f64(), rec.cost);
                Trajectory::from_vertices(ts, rec.waypoints)
            });
            (traj, trace)
        }
        Algorithm::CompositePrmStar => {
            let n = opts.prm_samples.unwrap_or(scenario.roadmap.samples * scenario.roadmap.samples);
            let prm_opts = PrmStarOptions {
                cost: scenario.cost_model,
                eta: scenario.roadmap.eta,
                ..Default::default()
            };
            let clock = Instant::now();
            let robots = scenario.disk_robots();
            match composite_prm_star_with(
                &scenario.environment,
                &robots,
                n,
                run_seed,
                &scenario.starts(),
                &scenario.goals(),
                &prm_opts,
            ) {
                Ok(traj) => {
                    let mut trace = RunTrace::default();
                    if let Some(tr) = &traj {
                        trace.record(n, clock.elapsed().as_secs_f64(), tr.cost);
                    }
                    (traj, trace)
                }
                Err(e) => {
                    record.error = Some(e.to_string());
                    return record;
                }
            }
        }
        Algorithm::CompositeRrtStar => {
            let step = match opts.rrt_step {
                Some(step) => step,
                None => ts.roadmap(0).radius(),
            };
            let rrt = RrtStarParams {
                iteration_budget: params.iteration_budget,
                goal_bias: params.goal_bias,
                seed: run_seed,
                step,
                eta: scenario.roadmap.eta,
                cost: scenario.cost_model,
                nn_index: params.nn_index,
            };
            composite_rrt_star(&scenario.environment, &scenario.disk_robots(), &rrt, &scenario.starts(), &scenario.goals())
        }
    };
    record.success = trajectory.is_some();
    record.final_cost = trajectory.as_ref().map(|tr| tr.cost);
    record.trajectory = trajectory;
    record.trace = trace;
    record
}

/// Convenience for callers that only need one cost model variant of a
/// scenario.
pub fn with_cost_model(scenario: &Scenario, cost: CostModel) -> Scenario {
    Scenario {
        cost_model: cost,
        ..scenario.clone()
    }
}
