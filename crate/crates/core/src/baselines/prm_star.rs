//! PRM* built directly in the composite configuration space.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::BaselineError;
use crate::geometry::{pair_motion_clear, pair_static_clear, point_free, segment_free, Config, DiskRobot, Environment, Point};
use crate::planner::nn::{NnIndex, PointIndex};
use crate::planner::Trajectory;
use crate::roadmap::{dijkstra, star_radius, DEFAULT_ETA};
use crate::tensor::CostModel;

/// Largest composite dimension an explicit roadmap is built for.
pub const MAX_COMPOSITE_DIM: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrmStarOptions {
    pub cost: CostModel,
    pub eta: f64,
    /// Upper bound on the number of vertex pairs the roadmap may consider.
    pub pair_cap: u128,
    /// Rejection-sampling failures allowed per requested sample.
    pub attempts_per_sample: usize,
}

impl Default for PrmStarOptions {
    fn default() -> Self {
        Self {
            cost: CostModel::Sum,
            eta: DEFAULT_ETA,
            pair_cap: 100_000_000,
            attempts_per_sample: 100,
        }
    }
}

/// Composite PRM* with default options.
pub fn composite_prm_star(
    env: &Environment,
    robots: &[DiskRobot],
    n_composite: usize,
    seed: u64,
    s: &[Config],
    t: &[Config],
) -> Result<Option<Trajectory>, BaselineError> {
    composite_prm_star_with(env, robots, n_composite, seed, s, t, &PrmStarOptions::default())
}

/// Samples `n_composite` collision-free composite configurations, joins
/// every pair within the composite PRM* radius whose straight-line motion is
/// valid, and returns the shortest `s -> t` path. `s` and `t` are added as
/// extra vertices. Fails before allocating when the composite dimension or
/// the vertex-pair count exceeds its guard.
pub fn composite_prm_star_with(
    env: &Environment,
    robots: &[DiskRobot],
    n_composite: usize,
    seed: u64,
    s: &[Config],
    t: &[Config],
    opts: &PrmStarOptions,
) -> Result<Option<Trajectory>, BaselineError> {
    let r = robots.len();
    assert!(r > 0 && s.len() == r && t.len() == r);
    let dim = 2 * r;
    if dim > MAX_COMPOSITE_DIM {
        return Err(BaselineError::DimensionTooLarge(dim));
    }
    let n = n_composite as u128 + 2;
    let pairs = n * (n - 1) / 2;
    if pairs > opts.pair_cap {
        return Err(BaselineError::TooManyPairs(pairs, opts.pair_cap));
    }
    if !composite_free(env, robots, s) || !composite_free(env, robots, t) {
        return Ok(None);
    }
    let mu = env.bounds.area().powi(r as i32);
    let radius = star_radius(n as usize, dim, mu, opts.eta)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vertices: Vec<Vec<Config>> = vec![s.to_vec(), t.to_vec()];
    let budget = n_composite.saturating_mul(opts.attempts_per_sample);
    let mut failures = 0;
    while vertices.len() < n as usize {
        let q = uniform_composite(env, r, &mut rng);
        if composite_free(env, robots, &q) {
            vertices.push(q);
        } else {
            failures += 1;
            if failures > budget {
                break;
            }
        }
    }

    let mut index = PointIndex::new(dim, NnIndex::Indexed);
    for v in &vertices {
        index.insert(&flatten(v));
    }
    let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); vertices.len()];
    for i in 0..vertices.len() {
        for j in index.within_radius(index.point(i), radius) {
            if j <= i || !motion_valid(env, robots, &vertices[i], &vertices[j]) {
                continue;
            }
            let c = opts.cost.motion_cost(&vertices[i], &vertices[j]);
            adjacency[i].push((j, c));
            adjacency[j].push((i, c));
        }
    }
    let (dist, pred) = dijkstra(&adjacency, 0);
    if !dist[1].is_finite() {
        return Ok(None);
    }
    let mut ids = vec![1];
    let mut cur = 1;
    while let Some(p) = pred[cur] {
        ids.push(p);
        cur = p;
    }
    ids.reverse();
    let waypoints = ids.into_iter().map(|k| vertices[k].clone()).collect();
    Ok(Some(Trajectory::from_configs(opts.cost, waypoints)))
}

pub(crate) fn flatten(q: &[Config]) -> Vec<f64> {
    q.iter().flat_map(|p| [p.x, p.y]).collect()
}

pub(crate) fn uniform_composite<R: Rng + ?Sized>(env: &Environment, r: usize, rng: &mut R) -> Vec<Config> {
    let b = env.bounds;
    (0..r)
        .map(|_| Point::new(rng.gen_range(b.min.x..b.max.x), rng.gen_range(b.min.y..b.max.y)))
        .collect()
}

pub(crate) fn composite_free(env: &Environment, robots: &[DiskRobot], q: &[Config]) -> bool {
    (0..robots.len()).all(|i| point_free(env, &robots[i], q[i]))
        && (0..robots.len()).all(|i| {
            ((i + 1)..robots.len()).all(|j| pair_static_clear(q[i], robots[i].radius, q[j], robots[j].radius))
        })
}

/// Straight-line composite motion: each robot's segment avoids obstacles and
/// every pair stays clear throughout.
pub(crate) fn motion_valid(env: &Environment, robots: &[DiskRobot], a: &[Config], b: &[Config]) -> bool {
    (0..robots.len()).all(|i| segment_free(env, &robots[i], a[i], b[i]))
        && (0..robots.len()).all(|i| {
            ((i + 1)..robots.len())
                .all(|j| pair_motion_clear(a[i], b[i], robots[i].radius, a[j], b[j], robots[j].radius))
        })
}
