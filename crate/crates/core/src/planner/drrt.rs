use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::tensor::{CompositeVertex, TensorSpace};

use super::tree::{NodeId, SearchTree};
use super::{
    informed_composite_sample, random_composite_sample, PlannerParams, RunTrace, Trajectory,
    IMPROVEMENT_SLACK,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Feasibility only: stops at the first solution.
    Drrt,
    /// Direction-oracle expansion plus single-edge rewiring; anytime.
    AoDrrt,
    /// Informed expansion, best-parent choice, neighborhood rewiring,
    /// branch-and-bound and greedy child promotion; anytime.
    DrrtStar,
}

/// Result of one planner run.
#[derive(Debug, Clone)]
pub struct PlanOutcome {
    pub trajectory: Option<Trajectory>,
    pub trace: RunTrace,
    pub expansions: usize,
    pub tree_size: usize,
    /// Number of tree audits run (only with `audit_every`).
    pub audits: usize,
    pub audit_failures: Vec<String>,
}

impl PlanOutcome {
    pub fn success(&self) -> bool {
        self.trajectory.is_some()
    }

    pub fn cost(&self) -> Option<f64> {
        self.trajectory.as_ref().map(|t| t.cost)
    }

    pub fn first_solution_iteration(&self) -> Option<usize> {
        self.trace.first().map(|e| e.iteration)
    }
}

pub fn drrt(ts: &TensorSpace, s: &CompositeVertex, t: &CompositeVertex, params: &PlannerParams) -> PlanOutcome {
    plan(ts, s, t, params, Variant::Drrt)
}

pub fn ao_drrt(ts: &TensorSpace, s: &CompositeVertex, t: &CompositeVertex, params: &PlannerParams) -> PlanOutcome {
    plan(ts, s, t, params, Variant::AoDrrt)
}

pub fn drrt_star(ts: &TensorSpace, s: &CompositeVertex, t: &CompositeVertex, params: &PlannerParams) -> PlanOutcome {
    plan(ts, s, t, params, Variant::DrrtStar)
}

/// Tries to reach `target` from the tree. If it is already a tree node it is
/// returned as is; otherwise the `k` tree nodes nearest to it are examined and
/// `target` is attached under the cheapest one with a valid tensor edge.
pub fn connect_to_target(
    ts: &TensorSpace,
    tree: &mut SearchTree,
    target: &CompositeVertex,
    k: usize,
) -> Option<NodeId> {
    if let Some(id) = tree.get(target) {
        return Some(id);
    }
    let mut candidates: Vec<(f64, NodeId)> = tree
        .k_nearest(&ts.configs(target), k)
        .into_iter()
        .filter(|&id| ts.is_tensor_edge(&tree.node(id).vertex, target))
        .map(|id| (tree.node(id).cost + ts.edge_cost(&tree.node(id).vertex, target), id))
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let parent = candidates
        .into_iter()
        .find(|&(_, id)| ts.validate_tensor_edge(&tree.node(id).vertex, target))?
        .1;
    Some(tree.add(ts, target.clone(), parent))
}

struct Run<'a> {
    ts: &'a TensorSpace,
    params: &'a PlannerParams,
    target: &'a CompositeVertex,
    goal_configs: Vec<crate::geometry::Config>,
    tree: SearchTree,
    rng: ChaCha8Rng,
    best_cost: f64,
}

impl Run<'_> {
    fn sample(&mut self) -> Vec<crate::geometry::Config> {
        if self.params.informed_sampling {
            informed_composite_sample(self.ts, self.params.goal_bias, self.best_cost, &mut self.rng)
        } else {
            random_composite_sample(self.ts, self.params.goal_bias, &mut self.rng)
        }
    }

    /// Records the path to the target node if it beats the incumbent.
    fn improve(
        &mut self,
        node: NodeId,
        expansions: usize,
        clock: &Instant,
        trace: &mut RunTrace,
        best: &mut Option<Trajectory>,
    ) {
        let cost = self.tree.node(node).cost;
        if cost < self.best_cost - IMPROVEMENT_SLACK {
            self.best_cost = cost;
            let traj = self.tree.trace(self.ts, node);
            trace.record(expansions, clock.elapsed().as_secs_f64(), traj.cost);
            *best = Some(traj);
        }
    }

    /// Direction-oracle expansion shared by dRRT and ao-dRRT.
    fn expand_direction(&mut self, rewire: bool) {
        let q = self.sample();
        let near = self.tree.nearest(&q);
        let near_v = self.tree.node(near).vertex.clone();
        let new_v = self.ts.oracle_direction(&near_v, &q, &mut self.rng);
        if new_v == near_v {
            return;
        }
        match self.tree.get(&new_v) {
            None => {
                if self.ts.validate_tensor_edge(&near_v, &new_v) {
                    self.tree.add(self.ts, new_v, near);
                }
            }
            Some(existing) if rewire => {
                self.tree.rewire(self.ts, near, existing);
            }
            Some(_) => {}
        }
    }

    /// Informed expansion; returns the node to promote next, if any.
    fn expand_star(&mut self, last: Option<NodeId>) -> Option<NodeId> {
        let ts = self.ts;
        let (near, q) = match last {
            Some(node) => (node, self.goal_configs.clone()),
            None => {
                let q = self.sample();
                (self.tree.nearest(&q), q)
            }
        };
        let near_v = self.tree.node(near).vertex.clone();
        let new_v = ts.oracle_informed(&near_v, &q, &mut self.rng);

        let neighbors = self.tree.tensor_neighbors(ts, &new_v);
        let mut candidates: Vec<(f64, NodeId)> = neighbors
            .iter()
            .map(|&id| (self.tree.node(id).cost + ts.edge_cost(&self.tree.node(id).vertex, &new_v), id))
            .collect();
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let (best_cost, best) = candidates
            .into_iter()
            .find(|&(_, id)| ts.validate_tensor_edge(&self.tree.node(id).vertex, &new_v))?;
        if best_cost > self.best_cost {
            return None;
        }
        let new_id = match self.tree.get(&new_v) {
            None => self.tree.add(ts, new_v, best),
            Some(existing) => {
                self.tree.rewire_prevalidated(ts, best, existing);
                existing
            }
        };
        for &other in &neighbors {
            let through = self.tree.node(new_id).cost
                + ts.edge_cost(&self.tree.node(new_id).vertex, &self.tree.node(other).vertex);
            if through < self.tree.node(other).cost {
                self.tree.rewire(ts, new_id, other);
            }
        }
        (self.tree.node(new_id).h < self.tree.node(near).h).then_some(new_id)
    }
}

/// Runs one of the tree planners from `s` to `t`.
pub fn plan(
    ts: &TensorSpace,
    s: &CompositeVertex,
    t: &CompositeVertex,
    params: &PlannerParams,
    variant: Variant,
) -> PlanOutcome {
    let clock = Instant::now();
    let mut trace = RunTrace::default();
    let tree = SearchTree::new(ts, s.clone(), params.nn_index);
    if s == t {
        trace.record(0, clock.elapsed().as_secs_f64(), 0.0);
        return PlanOutcome {
            trajectory: Some(tree.trace(ts, tree.root())),
            trace,
            expansions: 0,
            tree_size: 1,
            audits: 0,
            audit_failures: Vec::new(),
        };
    }
    let mut run = Run {
        ts,
        params,
        target: t,
        goal_configs: ts.configs(t),
        tree,
        rng: ChaCha8Rng::seed_from_u64(params.seed),
        best_cost: f64::INFINITY,
    };
    let mut best: Option<Trajectory> = None;
    let mut expansions = 0;
    let mut audits = 0;
    let mut audit_failures = Vec::new();
    let mut last = Some(run.tree.root());
    let n_it = params.n_it.max(1);

    while expansions < params.iteration_budget {
        let batch = n_it.min(params.iteration_budget - expansions);
        for _ in 0..batch {
            match variant {
                Variant::Drrt => run.expand_direction(false),
                Variant::AoDrrt => run.expand_direction(true),
                Variant::DrrtStar => last = run.expand_star(last),
            }
            expansions += 1;
            if let Some(every) = params.audit_every {
                if expansions % every.max(1) == 0 {
                    audits += 1;
                    if let Err(e) = run.tree.audit(ts) {
                        audit_failures.push(format!("after {expansions} expansions: {e}"));
                    }
                }
            }
            // an expansion may itself reach the target or cheapen it
            if let Some(node) = run.tree.get(run.target) {
                run.improve(node, expansions, &clock, &mut trace, &mut best);
                if variant == Variant::Drrt && best.is_some() {
                    break;
                }
            }
        }
        if variant == Variant::Drrt && best.is_some() {
            break;
        }
        if let Some(node) = connect_to_target(ts, &mut run.tree, run.target, params.connect_k) {
            run.improve(node, expansions, &clock, &mut trace, &mut best);
        }
    }
    PlanOutcome {
        trajectory: best,
        trace,
        expansions,
        tree_size: run.tree.len(),
        audits,
        audit_failures,
    }
}
