//! The implicit tensor-product roadmap.
//!
//! A composite vertex is a tuple of per-robot roadmap vertices. Two composite
//! vertices are adjacent when every robot either stays put or traverses one
//! roadmap edge, and at least one robot moves. The product graph is never
//! materialized; neighborhoods are enumerated on demand.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{pair_motion_clear, Config, DiskRobot, Environment};
use crate::roadmap::{heuristic_table, HeuristicTable, Roadmap, VertexId};

/// A node of the tensor-product roadmap: one roadmap vertex per robot, in
/// robot index order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CompositeVertex(pub Vec<VertexId>);

impl CompositeVertex {
    pub fn new(ids: Vec<VertexId>) -> Self {
        Self(ids)
    }

    pub fn ids(&self) -> &[VertexId] {
        &self.0
    }

    pub fn robots(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for CompositeVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, id) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{id}")?;
        }
        write!(f, ")")
    }
}

/// How per-robot motion lengths combine into a composite cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostModel {
    /// Sum of individual path lengths.
    #[default]
    Sum,
    /// Per edge, the longest individual motion.
    Max,
    /// Euclidean arc length in the composite space.
    CompositeEuclidean,
}

impl CostModel {
    pub fn aggregate<I: IntoIterator<Item = f64>>(self, parts: I) -> f64 {
        let parts = parts.into_iter();
        match self {
            CostModel::Sum => parts.sum(),
            CostModel::Max => parts.fold(0.0, f64::max),
            CostModel::CompositeEuclidean => parts.map(|x| x * x).sum::<f64>().sqrt(),
        }
    }

    /// Cost of the straight simultaneous motion between two composite configurations.
    pub fn motion_cost(self, from: &[Config], to: &[Config]) -> f64 {
        self.aggregate(from.iter().zip(to).map(|(a, b)| a.dist(*b)))
    }

    /// True when the aggregated heuristic is provably consistent over tensor edges.
    pub fn heuristic_provably_consistent(self) -> bool {
        !matches!(self, CostModel::Max)
    }

    pub fn name(self) -> &'static str {
        match self {
            CostModel::Sum => "sum",
            CostModel::Max => "max",
            CostModel::CompositeEuclidean => "composite-euclidean",
        }
    }
}

impl std::str::FromStr for CostModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sum" => Ok(CostModel::Sum),
            "max" => Ok(CostModel::Max),
            "composite-euclidean" | "euclidean" => Ok(CostModel::CompositeEuclidean),
            other => Err(format!("unknown cost model {other:?}")),
        }
    }
}

/// Everything needed to search the tensor-product roadmap. Immutable once
/// built and shareable across planner instances.
#[derive(Debug, Clone)]
pub struct TensorSpace {
    env: Environment,
    robots: Vec<DiskRobot>,
    roadmaps: Vec<Roadmap>,
    heuristics: Vec<HeuristicTable>,
    cost: CostModel,
}

impl TensorSpace {
    /// # Panics
    /// If the robot and roadmap counts differ or are zero.
    pub fn new(
        env: Environment,
        robots: Vec<DiskRobot>,
        roadmaps: Vec<Roadmap>,
        cost: CostModel,
    ) -> Self {
        assert_eq!(robots.len(), roadmaps.len(), "one roadmap per robot");
        assert!(!robots.is_empty(), "at least one robot");
        let heuristics = roadmaps
            .iter()
            .map(|rm| heuristic_table(rm, rm.goal_id()))
            .collect();
        Self {
            env,
            robots,
            roadmaps,
            heuristics,
            cost,
        }
    }

    pub fn with_cost(&self, cost: CostModel) -> Self {
        Self {
            cost,
            ..self.clone()
        }
    }

    pub fn robot_count(&self) -> usize {
        self.robots.len()
    }

    pub fn env(&self) -> &Environment {
        &self.env
    }

    pub fn robots(&self) -> &[DiskRobot] {
        &self.robots
    }

    pub fn roadmaps(&self) -> &[Roadmap] {
        &self.roadmaps
    }

    pub fn roadmap(&self, i: usize) -> &Roadmap {
        &self.roadmaps[i]
    }

    pub fn heuristic(&self, i: usize) -> &HeuristicTable {
        &self.heuristics[i]
    }

    pub fn cost_model(&self) -> CostModel {
        self.cost
    }

    pub fn start(&self) -> CompositeVertex {
        CompositeVertex(self.roadmaps.iter().map(Roadmap::start_id).collect())
    }

    pub fn target(&self) -> CompositeVertex {
        CompositeVertex(self.roadmaps.iter().map(Roadmap::goal_id).collect())
    }

    pub fn goal_configs(&self) -> Vec<Config> {
        self.roadmaps.iter().map(|rm| rm.config(rm.goal_id())).collect()
    }

    pub fn configs(&self, v: &CompositeVertex) -> Vec<Config> {
        v.0.iter()
            .zip(&self.roadmaps)
            .map(|(&id, rm)| rm.config(id))
            .collect()
    }

    pub fn config_of(&self, robot: usize, v: &CompositeVertex) -> Config {
        self.roadmaps[robot].config(v.0[robot])
    }

    pub fn is_valid_vertex(&self, v: &CompositeVertex) -> bool {
        v.robots() == self.robot_count()
            && v.0.iter().zip(&self.roadmaps).all(|(&id, rm)| id < rm.len())
    }

    /// True iff `(a, b)` is an edge of the tensor-product roadmap.
    pub fn is_tensor_edge(&self, a: &CompositeVertex, b: &CompositeVertex) -> bool {
        a != b
            && a.0
                .iter()
                .zip(&b.0)
                .zip(&self.roadmaps)
                .all(|((&u, &v), rm)| rm.adjacent_or_equal(u, v))
    }

    /// Number of tensor neighbors: the product of the self-inclusive degrees, minus one.
    pub fn tensor_degree(&self, v: &CompositeVertex) -> u128 {
        v.0.iter()
            .zip(&self.roadmaps)
            .map(|(&id, rm)| rm.degree(id) as u128 + 1)
            .product::<u128>()
            - 1
    }

    /// Lazily enumerates the tensor neighbors of `v` (the Cartesian product of
    /// the self-inclusive adjacencies, without `v` itself).
    pub fn tensor_adj(&self, v: &CompositeVertex) -> TensorNeighbors {
        let lists = v
            .0
            .iter()
            .zip(&self.roadmaps)
            .map(|(&id, rm)| rm.adj_self(id))
            .collect();
        TensorNeighbors::new(lists)
    }

    /// Per-robot edge lengths of the simultaneous motion `a -> b`.
    pub fn motion_lengths<'a>(
        &'a self,
        a: &'a CompositeVertex,
        b: &'a CompositeVertex,
    ) -> impl Iterator<Item = f64> + 'a {
        a.0.iter()
            .zip(&b.0)
            .zip(&self.roadmaps)
            .map(|((&u, &v), rm)| rm.config(u).dist(rm.config(v)))
    }

    pub fn edge_cost(&self, a: &CompositeVertex, b: &CompositeVertex) -> f64 {
        self.cost.aggregate(self.motion_lengths(a, b))
    }

    /// Robot-robot check of the simultaneous straight motion `a -> b`.
    /// Robot-obstacle freedom is implied by the roadmap edges.
    pub fn validate_tensor_edge(&self, a: &CompositeVertex, b: &CompositeVertex) -> bool {
        let r = self.robot_count();
        for i in 0..r {
            let (ai, bi) = (self.config_of(i, a), self.config_of(i, b));
            let ri = self.robots[i].radius;
            for j in (i + 1)..r {
                let (aj, bj) = (self.config_of(j, a), self.config_of(j, b));
                if !pair_motion_clear(ai, bi, ri, aj, bj, self.robots[j].radius) {
                    return false;
                }
            }
        }
        true
    }

    /// Cost-model aggregation of the per-robot distances to goal. Infinite if
    /// some robot cannot reach its goal.
    pub fn composite_heuristic(&self, v: &CompositeVertex) -> f64 {
        self.cost.aggregate(
            v.0.iter()
                .zip(&self.heuristics)
                .map(|(&id, h)| h.get(id)),
        )
    }

    /// Direction oracle: per robot, the roadmap neighbor (self excluded) whose
    /// ray from the current configuration makes the smallest angle with the
    /// ray toward the sample. Ties go to the lowest vertex id; a sample that
    /// coincides with the current configuration picks a uniform neighbor.
    pub fn oracle_direction<R: Rng + ?Sized>(
        &self,
        near: &CompositeVertex,
        sample: &[Config],
        rng: &mut R,
    ) -> CompositeVertex {
        let ids = near
            .0
            .iter()
            .zip(&self.roadmaps)
            .zip(sample)
            .map(|((&v, rm), &q)| direction_pick(rm, v, q, rng))
            .collect();
        CompositeVertex(ids)
    }

    /// Informed oracle: robots whose sample is exactly their goal descend the
    /// heuristic over the self-inclusive adjacency; the others pick a uniform
    /// member of it.
    pub fn oracle_informed<R: Rng + ?Sized>(
        &self,
        near: &CompositeVertex,
        sample: &[Config],
        rng: &mut R,
    ) -> CompositeVertex {
        let ids = (0..self.robot_count())
            .map(|i| {
                let rm = &self.roadmaps[i];
                let v = near.0[i];
                let goal = rm.config(rm.goal_id());
                if sample[i] == goal {
                    let h = &self.heuristics[i];
                    let mut best = v;
                    let mut best_h = h.get(v);
                    for &(u, _) in rm.neighbors(v) {
                        if h.get(u) < best_h {
                            best = u;
                            best_h = h.get(u);
                        }
                    }
                    best
                } else {
                    let k = rng.gen_range(0..=rm.degree(v));
                    if k == 0 {
                        v
                    } else {
                        rm.neighbors(v)[k - 1].0
                    }
                }
            })
            .collect();
        CompositeVertex(ids)
    }
}

fn direction_pick<R: Rng + ?Sized>(rm: &Roadmap, v: VertexId, q: Config, rng: &mut R) -> VertexId {
    let neighbors = rm.neighbors(v);
    if neighbors.is_empty() {
        return v;
    }
    let origin = rm.config(v);
    let toward = q - origin;
    if toward.norm_sq() == 0.0 {
        return neighbors[rng.gen_range(0..neighbors.len())].0;
    }
    let mut best = neighbors[0].0;
    let mut best_angle = f64::INFINITY;
    for &(u, _) in neighbors {
        let d = rm.config(u) - origin;
        let angle = toward.cross(d).atan2(toward.dot(d)).abs();
        if angle < best_angle {
            best_angle = angle;
            best = u;
        }
    }
    best
}

/// Odometer over the Cartesian product of per-robot candidate lists,
/// skipping the all-first (self) tuple.
#[derive(Debug, Clone)]
pub struct TensorNeighbors {
    lists: Vec<Vec<VertexId>>,
    digits: Vec<usize>,
    done: bool,
}

impl TensorNeighbors {
    fn new(lists: Vec<Vec<VertexId>>) -> Self {
        let digits = vec![0; lists.len()];
        let mut it = Self {
            lists,
            digits,
            done: false,
        };
        it.advance();
        it
    }

    fn advance(&mut self) {
        for (d, list) in self.digits.iter_mut().zip(&self.lists).rev() {
            *d += 1;
            if *d < list.len() {
                return;
            }
            *d = 0;
        }
        self.done = true;
    }
}

impl Iterator for TensorNeighbors {
    type Item = CompositeVertex;

    fn next(&mut self) -> Option<CompositeVertex> {
        if self.done {
            return None;
        }
        let v = CompositeVertex(
            self.digits
                .iter()
                .zip(&self.lists)
                .map(|(&d, list)| list[d])
                .collect(),
        );
        self.advance();
        Some(v)
    }
}
