//! RRT* in the composite configuration space.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::prm_star::{composite_free, flatten, motion_valid, uniform_composite};
use crate::geometry::{Config, DiskRobot, Environment};
use crate::planner::nn::{NnIndex, PointIndex};
use crate::planner::{RunTrace, Trajectory, IMPROVEMENT_SLACK};
use crate::roadmap::{unit_ball_volume, DEFAULT_ETA};
use crate::tensor::CostModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RrtStarParams {
    pub iteration_budget: usize,
    /// Probability of sampling the goal configuration.
    pub goal_bias: f64,
    pub seed: u64,
    /// Maximum composite-space extension length.
    pub step: f64,
    pub eta: f64,
    pub cost: CostModel,
    pub nn_index: NnIndex,
}

impl Default for RrtStarParams {
    fn default() -> Self {
        Self {
            iteration_budget: 100_000,
            goal_bias: 0.05,
            seed: 0,
            step: 1.0,
            eta: DEFAULT_ETA,
            cost: CostModel::Sum,
            nn_index: NnIndex::Indexed,
        }
    }
}

/// The RRT* rewiring constant for dimension `d`.
pub fn rrt_star_gamma(d: usize, mu_free: f64, eta: f64) -> f64 {
    let inv_d = 1.0 / d as f64;
    (1.0 + eta) * 2.0 * (1.0 + inv_d).powf(inv_d) * (mu_free / unit_ball_volume(d)).powf(inv_d)
}

struct Node {
    q: Vec<Config>,
    parent: Option<usize>,
    cost: f64,
    /// Cost of the edge from the parent.
    edge: f64,
    children: Vec<usize>,
}

/// Runs RRT* from `s` toward `t` for the full iteration budget and returns
/// the best trajectory found (if any) with its incumbent history.
pub fn composite_rrt_star(
    env: &Environment,
    robots: &[DiskRobot],
    params: &RrtStarParams,
    s: &[Config],
    t: &[Config],
) -> (Option<Trajectory>, RunTrace) {
    let r = robots.len();
    assert!(r > 0 && s.len() == r && t.len() == r);
    let mut trace = RunTrace::default();
    if !composite_free(env, robots, s) || !composite_free(env, robots, t) {
        return (None, trace);
    }
    let started = Instant::now();
    if s == t {
        trace.record(0, started.elapsed().as_secs_f64(), 0.0);
        return (Some(Trajectory::from_configs(params.cost, vec![s.to_vec()])), trace);
    }
    let dim = 2 * r;
    let gamma = rrt_star_gamma(dim, env.bounds.area().powi(r as i32), params.eta);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut index = PointIndex::new(dim, params.nn_index);
    index.insert(&flatten(s));
    let mut nodes = vec![Node {
        q: s.to_vec(),
        parent: None,
        cost: 0.0,
        edge: 0.0,
        children: Vec::new(),
    }];
    // the goal is kept out of the index so it never becomes a parent
    let mut goal: Option<(usize, f64)> = None;
    let mut best = f64::INFINITY;
    let mut best_chain: Option<Vec<Vec<Config>>> = None;
    let edge = |a: &[Config], b: &[Config]| params.cost.motion_cost(a, b);

    for it in 1..=params.iteration_budget {
        let sample = if rng.gen_bool(params.goal_bias.clamp(0.0, 1.0)) {
            t.to_vec()
        } else {
            uniform_composite(env, r, &mut rng)
        };
        let flat = flatten(&sample);
        let nearest = index.nearest(&flat).expect("tree is never empty");
        let from = index.point(nearest);
        let d = dist(from, &flat);
        let q_new: Vec<Config> = if d <= params.step {
            sample
        } else {
            let k = params.step / d;
            nodes[nearest]
                .q
                .iter()
                .zip(&sample)
                .map(|(a, b)| a.lerp(*b, k))
                .collect()
        };
        if motion_valid(env, robots, &nodes[nearest].q, &q_new) && q_new != nodes[nearest].q {
            let k = nodes.len() as f64;
            let radius = (gamma * (k.ln() / k).powf(1.0 / dim as f64)).min(params.step);
            let flat_new = flatten(&q_new);
            let mut near = index.within_radius(&flat_new, radius);
            if !near.contains(&nearest) {
                near.push(nearest);
            }
            let valid: Vec<(usize, f64)> = near
                .iter()
                .filter(|&&j| j == nearest || motion_valid(env, robots, &nodes[j].q, &q_new))
                .map(|&j| (j, edge(&nodes[j].q, &q_new)))
                .collect();
            let (parent, c, c_edge) = valid
                .iter()
                .map(|&(j, c)| (j, nodes[j].cost + c, c))
                .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
                .expect("nearest is always valid");
            let id = nodes.len();
            nodes.push(Node {
                q: q_new,
                parent: Some(parent),
                cost: c,
                edge: c_edge,
                children: Vec::new(),
            });
            nodes[parent].children.push(id);
            index.insert(&flat_new);
            for &(j, c_edge) in &valid {
                let via = nodes[id].cost + c_edge;
                if j != parent && via < nodes[j].cost - IMPROVEMENT_SLACK {
                    reparent(&mut nodes, j, id, c_edge);
                }
            }
            if dist(&flat_new, &flatten(t)) <= params.step {
                let c_goal = nodes[id].cost + edge(&nodes[id].q, t);
                let current = goal.map_or(f64::INFINITY, |(g, e)| nodes[g].cost + e);
                if c_goal < current && motion_valid(env, robots, &nodes[id].q, t) {
                    goal = Some((id, edge(&nodes[id].q, t)));
                }
            }
        }
        if let Some((g, e)) = goal {
            let c = nodes[g].cost + e;
            if c < best - IMPROVEMENT_SLACK {
                best = c;
                best_chain = Some(chain_to(&nodes, g, t));
                trace.record(it, started.elapsed().as_secs_f64(), c);
            }
        }
    }

    // the incumbent as recorded; later sub-slack improvements are not reported
    let traj = best_chain.map(|chain| Trajectory::from_configs(params.cost, chain));
    (traj, trace)
}

fn chain_to(nodes: &[Node], g: usize, t: &[Config]) -> Vec<Vec<Config>> {
    let mut chain = vec![t.to_vec()];
    let mut cur = Some(g);
    while let Some(k) = cur {
        chain.push(nodes[k].q.clone());
        cur = nodes[k].parent;
    }
    chain.reverse();
    chain
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Costs are re-summed from the parent so they match a path's cost summed from the root.
fn reparent(nodes: &mut [Node], child: usize, parent: usize, edge: f64) {
    if let Some(old) = nodes[child].parent {
        nodes[old].children.retain(|&c| c != child);
    }
    nodes[child].parent = Some(parent);
    nodes[child].edge = edge;
    nodes[parent].children.push(child);
    let mut stack = vec![child];
    while let Some(k) = stack.pop() {
        let p = nodes[k].parent.expect("reparented nodes have parents");
        nodes[k].cost = nodes[p].cost + nodes[k].edge;
        stack.extend(nodes[k].children.iter().copied());
    }
}
