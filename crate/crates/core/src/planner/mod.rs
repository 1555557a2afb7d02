//! Tree planners over the implicit tensor-product roadmap: dRRT, ao-dRRT and
//! dRRT*.

mod drrt;
pub mod nn;
pub mod trajectory;
pub mod tree;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{Config, Point};
use crate::tensor::TensorSpace;

pub use drrt::{ao_drrt, connect_to_target, drrt, drrt_star, plan, PlanOutcome, Variant};
pub use nn::NnIndex;
pub use trajectory::{RunTrace, TraceEvent, Trajectory};
pub use tree::{NodeId, SearchTree, TreeNode, COST_TOLERANCE};

/// Incumbent improvements smaller than this are ignored.
pub const IMPROVEMENT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerParams {
    /// Expansions between two connection attempts.
    pub n_it: usize,
    /// Total expansion budget.
    pub iteration_budget: usize,
    /// Per-robot probability of sampling the goal configuration.
    pub goal_bias: f64,
    pub seed: u64,
    /// Tree vertices nearest to the target examined by a connection attempt.
    pub connect_k: usize,
    pub nn_index: NnIndex,
    /// Reject per-robot samples that cannot lie on a path cheaper than the
    /// incumbent.
    pub informed_sampling: bool,
    /// Audit the tree every this many expansions (test instrumentation).
    pub audit_every: Option<usize>,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self {
            n_it: 50,
            iteration_budget: 100_000,
            goal_bias: 0.05,
            seed: 0,
            connect_k: 16,
            nn_index: NnIndex::Indexed,
            informed_sampling: false,
            audit_every: None,
        }
    }
}

impl PlannerParams {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.iteration_budget = budget;
        self
    }

    pub fn check(&self) -> Result<(), String> {
        if self.n_it == 0 {
            return Err("n_it must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.goal_bias) {
            return Err(format!("goal_bias {} must lie in [0, 1)", self.goal_bias));
        }
        Ok(())
    }
}

/// Draws a composite configuration: per robot, the goal verbatim with
/// probability `goal_bias`, otherwise a uniform point of the workspace.
pub fn random_composite_sample<R: Rng + ?Sized>(
    ts: &TensorSpace,
    goal_bias: f64,
    rng: &mut R,
) -> Vec<Config> {
    let b = ts.env().bounds;
    ts.roadmaps()
        .iter()
        .map(|rm| {
            if goal_bias > 0.0 && rng.gen_bool(goal_bias.min(1.0)) {
                rm.config(rm.goal_id())
            } else {
                Point::new(
                    rng.gen_range(b.min.x..b.max.x),
                    rng.gen_range(b.min.y..b.max.y),
                )
            }
        })
        .collect()
}

const INFORMED_ATTEMPTS: usize = 100;

/// Like [`random_composite_sample`], but each non-goal per-robot sample is
/// redrawn (up to a fixed number of times) until the straight-line detour
/// start -> sample -> goal is no longer than `incumbent`. Every cost model
/// bounds each robot's own path length by the total cost, so this never
/// discards a point of an improving solution.
pub fn informed_composite_sample<R: Rng + ?Sized>(
    ts: &TensorSpace,
    goal_bias: f64,
    incumbent: f64,
    rng: &mut R,
) -> Vec<Config> {
    let mut q = random_composite_sample(ts, goal_bias, rng);
    if !incumbent.is_finite() {
        return q;
    }
    let b = ts.env().bounds;
    for (i, rm) in ts.roadmaps().iter().enumerate() {
        let (s, g) = (rm.config(rm.start_id()), rm.config(rm.goal_id()));
        if q[i] == g {
            continue;
        }
        for _ in 0..INFORMED_ATTEMPTS {
            if s.dist(q[i]) + q[i].dist(g) <= incumbent {
                break;
            }
            q[i] = Point::new(
                rng.gen_range(b.min.x..b.max.x),
                rng.gen_range(b.min.y..b.max.y),
            );
        }
    }
    q
}
