use serde::{Deserialize, Serialize};

use crate::geometry::{pair_motion_clear, segment_free, Config, DiskRobot, Environment};
use crate::tensor::{CompositeVertex, CostModel, TensorSpace};

/// A composite trajectory: simultaneous straight-line motions between
/// consecutive composite configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// `waypoints[k][i]` is robot `i`'s configuration at waypoint `k`.
    pub waypoints: Vec<Vec<Config>>,
    /// The tensor-roadmap vertices behind the waypoints, when the trajectory
    /// lives on the tensor roadmap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<CompositeVertex>>,
    pub cost: f64,
    pub per_robot_lengths: Vec<f64>,
}

impl Trajectory {
    pub fn from_vertices(ts: &TensorSpace, vertices: Vec<CompositeVertex>) -> Self {
        let waypoints = vertices.iter().map(|v| ts.configs(v)).collect();
        let mut traj = Self::from_configs(ts.cost_model(), waypoints);
        traj.vertices = Some(vertices);
        traj
    }

    pub fn from_configs(cost: CostModel, waypoints: Vec<Vec<Config>>) -> Self {
        let robots = waypoints.first().map_or(0, Vec::len);
        let mut per_robot_lengths = vec![0.0; robots];
        for w in waypoints.windows(2) {
            for (i, len) in per_robot_lengths.iter_mut().enumerate() {
                *len += w[0][i].dist(w[1][i]);
            }
        }
        let mut traj = Self {
            waypoints,
            vertices: None,
            cost: 0.0,
            per_robot_lengths,
        };
        traj.cost = traj.recompute_cost(cost);
        traj
    }

    pub fn recompute_cost(&self, cost: CostModel) -> f64 {
        self.waypoints
            .windows(2)
            .map(|w| cost.motion_cost(&w[0], &w[1]))
            .sum()
    }

    pub fn robot_count(&self) -> usize {
        self.per_robot_lengths.len()
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    /// Path of one robot as a polyline.
    pub fn robot_path(&self, i: usize) -> Vec<Config> {
        self.waypoints.iter().map(|w| w[i]).collect()
    }

    /// Exact validity check with the library's own predicates: every robot
    /// segment is obstacle-free and every robot pair stays clear during each
    /// simultaneous motion.
    pub fn is_valid(&self, env: &Environment, robots: &[DiskRobot]) -> bool {
        if self.waypoints.iter().any(|w| w.len() != robots.len()) {
            return false;
        }
        if self.waypoints.len() == 1 {
            let w = &self.waypoints[0];
            return (0..robots.len()).all(|i| segment_free(env, &robots[i], w[i], w[i]))
                && pairs(robots.len()).all(|(i, j)| {
                    pair_motion_clear(w[i], w[i], robots[i].radius, w[j], w[j], robots[j].radius)
                });
        }
        self.waypoints.windows(2).all(|w| {
            (0..robots.len()).all(|i| segment_free(env, &robots[i], w[0][i], w[1][i]))
                && pairs(robots.len()).all(|(i, j)| {
                    pair_motion_clear(
                        w[0][i],
                        w[1][i],
                        robots[i].radius,
                        w[0][j],
                        w[1][j],
                        robots[j].radius,
                    )
                })
        })
    }
}

fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)))
}

/// One improvement of the incumbent solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub iteration: usize,
    pub elapsed_s: f64,
    pub best_cost: f64,
}

/// Incumbent history of a single planner run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub events: Vec<TraceEvent>,
    pub success: bool,
}

impl RunTrace {
    pub fn record(&mut self, iteration: usize, elapsed_s: f64, best_cost: f64) {
        self.events.push(TraceEvent {
            iteration,
            elapsed_s,
            best_cost,
        });
        self.success = true;
    }

    pub fn first(&self) -> Option<&TraceEvent> {
        self.events.first()
    }

    pub fn last(&self) -> Option<&TraceEvent> {
        self.events.last()
    }

    /// True iff the recorded costs strictly decrease.
    pub fn is_strictly_decreasing(&self) -> bool {
        self.events
            .windows(2)
            .all(|w| w[1].best_cost < w[0].best_cost)
    }

    /// Best cost known after `iteration` expansions, if any.
    pub fn best_at(&self, iteration: usize) -> Option<f64> {
        self.events
            .iter()
            .take_while(|e| e.iteration <= iteration)
            .last()
            .map(|e| e.best_cost)
    }
}
