//! Multi-robot motion planning over implicit tensor-product roadmaps.
//!
//! Each robot gets its own PRM* roadmap; the joint search space is the tensor
//! product of those roadmaps, explored without ever being built. The crate
//! provides the dRRT family of tree planners over that product (dRRT,
//! ao-dRRT, dRRT*), an exact implicit A* baseline, explicit composite-space
//! PRM* and RRT* baselines, and a seeded benchmark harness.

// NaN-rejecting checks are written as negated comparisons
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod bench;
pub mod error;
pub mod geometry;
pub mod planner;
pub mod roadmap;
pub mod tensor;

pub use error::{BaselineError, RoadmapError, ScenarioError};
pub use geometry::{Bounds, Config, DiskRobot, Environment, Point, Polygon};
pub use planner::{PlannerParams, RunTrace, Trajectory};
pub use roadmap::{Roadmap, VertexId};
pub use tensor::{CompositeVertex, CostModel, TensorSpace};
