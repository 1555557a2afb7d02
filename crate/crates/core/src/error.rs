use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RoadmapError {
    #[error("star radius needs n >= 2, got {0}")]
    TooFewSamples(usize),
    #[error("star radius needs d >= 1")]
    ZeroDimension,
    #[error("free-space measure must be positive, got {0}")]
    NonPositiveMeasure(f64),
    #[error("eta must be positive, got {0}")]
    NonPositiveEta(f64),
    #[error("connection radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("{which} configuration ({x}, {y}) is not collision-free")]
    EndpointInCollision { which: &'static str, x: f64, y: f64 },
    #[error("placed only {placed} of {requested} free samples after {attempts} failed attempts")]
    SamplingBudget {
        placed: usize,
        requested: usize,
        attempts: usize,
    },
    #[error("malformed roadmap document: {0}")]
    Malformed(String),
}

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("composite dimension {0} exceeds the explicit-roadmap limit of 8")]
    DimensionTooLarge(usize),
    #[error("{0} candidate vertex pairs exceed the configured cap of {1}")]
    TooManyPairs(u128, u128),
    #[error(transparent)]
    Roadmap(#[from] RoadmapError),
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("robots {0} and {1} overlap at their {2} configurations")]
    Overlap(usize, usize, &'static str),
    #[error("robot {0} {1} configuration is not collision-free")]
    NotFree(usize, &'static str),
    #[error("roadmap for robot {robot}: {source}")]
    Roadmap {
        robot: usize,
        source: RoadmapError,
    },
}

impl From<serde_json::Error> for ScenarioError {
    fn from(e: serde_json::Error) -> Self {
        ScenarioError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}
