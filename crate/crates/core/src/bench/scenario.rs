//! Versioned JSON scenario files and the built-in benchmark scenarios.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ScenarioError;
use crate::geometry::{pair_static_clear, point_free, Bounds, Config, DiskRobot, Environment, Point, Polygon};
use crate::planner::PlannerParams;
use crate::roadmap::{build_prm_with_rng, star_radius, Roadmap, DEFAULT_ETA};
use crate::tensor::{CostModel, TensorSpace};

pub const SCENARIO_FORMAT: &str = "drrt-scenario";
pub const SCENARIO_VERSION: u32 = 1;

/// Draws allowed per robot when a connected roadmap is required.
pub const CONNECT_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotSpec {
    pub radius: f64,
    pub start: Config,
    pub goal: Config,
}

/// How the per-robot roadmaps are obtained: sampled with the PRM* radius, or
/// read from roadmap files (paths relative to the scenario file).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RoadmapSpec {
    /// Free samples per robot, not counting start and goal.
    pub samples: usize,
    pub eta: f64,
    /// Overrides the PRM* radius.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub files: Option<Vec<PathBuf>>,
    /// Redraw a sampled roadmap until its start and goal are connected.
    pub require_connected: bool,
}

impl Default for RoadmapSpec {
    fn default() -> Self {
        Self {
            samples: 50,
            eta: DEFAULT_ETA,
            radius: None,
            files: None,
            require_connected: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub format: String,
    pub version: u32,
    pub name: String,
    pub environment: Environment,
    pub robots: Vec<RobotSpec>,
    #[serde(default)]
    pub roadmap: RoadmapSpec,
    #[serde(default)]
    pub cost_model: CostModel,
    #[serde(default)]
    pub planner: PlannerParams,
}

impl Scenario {
    pub fn new(name: impl Into<String>, environment: Environment, robots: Vec<RobotSpec>) -> Self {
        Self {
            format: SCENARIO_FORMAT.to_string(),
            version: SCENARIO_VERSION,
            name: name.into(),
            environment,
            robots,
            roadmap: RoadmapSpec::default(),
            cost_model: CostModel::Sum,
            planner: PlannerParams::default(),
        }
    }

    pub fn robot_count(&self) -> usize {
        self.robots.len()
    }

    pub fn disk_robots(&self) -> Vec<DiskRobot> {
        self.robots.iter().map(|r| DiskRobot::new(r.radius)).collect()
    }

    pub fn starts(&self) -> Vec<Config> {
        self.robots.iter().map(|r| r.start).collect()
    }

    pub fn goals(&self) -> Vec<Config> {
        self.robots.iter().map(|r| r.goal).collect()
    }

    /// Checks the format header, the environment, and that every start and
    /// goal is collision-free and clear of the other robots.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.format != SCENARIO_FORMAT {
            return Err(ScenarioError::Invalid(format!("unknown format {:?}", self.format)));
        }
        if self.version != SCENARIO_VERSION {
            return Err(ScenarioError::Invalid(format!("unsupported version {}", self.version)));
        }
        self.environment.check().map_err(ScenarioError::Invalid)?;
        if self.robots.is_empty() {
            return Err(ScenarioError::Invalid("at least one robot is required".into()));
        }
        for (i, r) in self.robots.iter().enumerate() {
            if !(r.radius.is_finite() && r.radius > 0.0) {
                return Err(ScenarioError::Invalid(format!("robot {i} has radius {}", r.radius)));
            }
            if !r.start.is_finite() || !r.goal.is_finite() {
                return Err(ScenarioError::Invalid(format!("robot {i} has a non-finite endpoint")));
            }
            let robot = DiskRobot::new(r.radius);
            if !point_free(&self.environment, &robot, r.start) {
                return Err(ScenarioError::NotFree(i, "start"));
            }
            if !point_free(&self.environment, &robot, r.goal) {
                return Err(ScenarioError::NotFree(i, "goal"));
            }
        }
        for i in 0..self.robots.len() {
            for j in (i + 1)..self.robots.len() {
                let (a, b) = (&self.robots[i], &self.robots[j]);
                if !pair_static_clear(a.start, a.radius, b.start, b.radius) {
                    return Err(ScenarioError::Overlap(i, j, "start"));
                }
                if !pair_static_clear(a.goal, a.radius, b.goal, b.radius) {
                    return Err(ScenarioError::Overlap(i, j, "goal"));
                }
            }
        }
        if let Some(files) = &self.roadmap.files {
            if files.len() != self.robots.len() {
                return Err(ScenarioError::Invalid(format!(
                    "{} roadmap files for {} robots",
                    files.len(),
                    self.robots.len()
                )));
            }
        }
        self.planner.check().map_err(ScenarioError::Invalid)
    }

    /// The per-robot connection radius used when sampling roadmaps.
    pub fn roadmap_radius(&self) -> Result<f64, ScenarioError> {
        match self.roadmap.radius {
            Some(r) => Ok(r),
            None => star_radius(
                self.roadmap.samples + 2,
                2,
                self.environment.bounds.area(),
                self.roadmap.eta,
            )
            .map_err(|source| ScenarioError::Roadmap { robot: 0, source }),
        }
    }

    /// Per-robot roadmaps: loaded from the listed files (resolved against
    /// `base_dir`), or sampled from stream `i` of the generator seeded with
    /// `seed` for robot `i`. With `require_connected`, a roadmap whose start
    /// and goal are disconnected is discarded and redrawn from the same
    /// stream, up to [`CONNECT_ATTEMPTS`] times.
    pub fn build_roadmaps(&self, seed: u64, base_dir: Option<&Path>) -> Result<Vec<Roadmap>, ScenarioError> {
        if let Some(files) = &self.roadmap.files {
            return files
                .iter()
                .enumerate()
                .map(|(i, f)| self.load_roadmap(i, &resolve(base_dir, f)))
                .collect();
        }
        let radius = self.roadmap_radius()?;
        self.robots
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                let robot = DiskRobot::new(r.radius);
                let mut attempts = 0;
                loop {
                    let rm = build_prm_with_rng(
                        &self.environment,
                        &robot,
                        self.roadmap.samples,
                        radius,
                        r.start,
                        r.goal,
                        &mut rng,
                    )
                    .map_err(|source| ScenarioError::Roadmap { robot: i, source })?;
                    attempts += 1;
                    let connected = rm.shortest_path(rm.start_id(), rm.goal_id()).is_some();
                    if connected || !self.roadmap.require_connected {
                        return Ok(rm);
                    }
                    if attempts == CONNECT_ATTEMPTS {
                        return Err(ScenarioError::Invalid(format!(
                            "robot {i}: no connected roadmap in {CONNECT_ATTEMPTS} draws"
                        )));
                    }
                }
            })
            .collect()
    }

    fn load_roadmap(&self, i: usize, path: &Path) -> Result<Roadmap, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let rm = Roadmap::from_json(&text).map_err(|source| ScenarioError::Roadmap { robot: i, source })?;
        let spec = &self.robots[i];
        if rm.config(rm.start_id()) != spec.start || rm.config(rm.goal_id()) != spec.goal {
            return Err(ScenarioError::Invalid(format!(
                "roadmap {} does not join robot {i}'s start and goal",
                path.display()
            )));
        }
        Ok(rm)
    }

    pub fn tensor_space(&self, roadmaps: Vec<Roadmap>) -> TensorSpace {
        TensorSpace::new(self.environment.clone(), self.disk_robots(), roadmaps, self.cost_model)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Parses and validates a scenario.
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }
}

fn resolve(base: Option<&Path>, f: &Path) -> PathBuf {
    match base {
        Some(b) if f.is_relative() => b.join(f),
        _ => f.to_path_buf(),
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Scenario::from_json(&text)
}

pub fn save_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> Result<(), ScenarioError> {
    let path = path.as_ref();
    std::fs::write(path, scenario.to_json() + "\n").map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// The 10 x 10 world with four square obstacles used by both built-in
/// scenarios.
pub fn four_block_world() -> Environment {
    Environment::new(
        Bounds::new(Point::new(-0.5, -0.5), Point::new(9.5, 9.5)),
        vec![
            Polygon::rect(1.5, 1.5, 3.5, 3.5),
            Polygon::rect(5.5, 1.5, 7.5, 3.5),
            Polygon::rect(1.5, 5.5, 3.5, 7.5),
            Polygon::rect(5.5, 5.5, 7.5, 7.5),
        ],
    )
}

/// Two disks of radius 0.2 swapping (0, 0) and (9, 9).
pub fn two_disk_swap() -> Scenario {
    let a = Point::new(0.0, 0.0);
    let b = Point::new(9.0, 9.0);
    Scenario::new(
        "two-disk-swap",
        four_block_world(),
        vec![
            RobotSpec { radius: 0.2, start: a, goal: b },
            RobotSpec { radius: 0.2, start: b, goal: a },
        ],
    )
}

/// `r` disks of radius 0.2 starting on the boundary of the square
/// [0, 9]^2 at evenly spaced directions over a half turn from its center;
/// every goal is the antipodal boundary point, so all paths cross the
/// middle of the world.
pub fn perimeter_crossing(r: usize) -> Scenario {
    assert!(r > 0);
    let c = Point::new(4.5, 4.5);
    let robots = (0..r)
        .map(|k| {
            let theta = PI * k as f64 / r as f64;
            let (s, co) = theta.sin_cos();
            let scale = 4.5 / co.abs().max(s.abs());
            let start = snap(Point::new(c.x + scale * co, c.y + scale * s));
            let goal = snap(Point::new(2.0 * c.x - start.x, 2.0 * c.y - start.y));
            RobotSpec { radius: 0.2, start, goal }
        })
        .collect();
    Scenario::new(format!("perimeter-crossing-{r}"), four_block_world(), robots)
}

// keeps fixture coordinates short and exactly representable in JSON
fn snap(p: Point) -> Point {
    let q = |v: f64| (v * 1e6).round() / 1e6;
    Point::new(q(p.x), q(p.y))
}
