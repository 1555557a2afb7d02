//! Benchmark harness: scenario files, seeded batch runs, and CSV/SVG output.

pub mod experiment;
pub mod output;
pub mod scenario;

pub use experiment::{
    optimistic_lower_bound, run_experiment, straight_line_lower_bound, Algorithm, ExperimentOptions,
    ExperimentReport, RunRecord, SeedPlan,
};
pub use output::{emit_csv, emit_svg, render_svg, write_csv, CSV_HEADER};
pub use scenario::{load_scenario, perimeter_crossing, save_scenario, two_disk_swap, RobotSpec, RoadmapSpec, Scenario};
