//! Reference planners: exact A* over the tensor roadmap and PRM*/RRT* run
//! directly in the composite configuration space.

mod astar;
mod prm_star;
mod rrt_star;

pub use astar::{implicit_astar, implicit_astar_with, AStarRecord, HeuristicMode};
pub use prm_star::{composite_prm_star, composite_prm_star_with, PrmStarOptions, MAX_COMPOSITE_DIM};
pub use rrt_star::{composite_rrt_star, rrt_star_gamma, RrtStarParams};
