//! Per-robot PRM* roadmaps, the asymptotically-optimal connection radius and
//! goal-rooted shortest-path heuristic tables.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::RoadmapError;
use crate::geometry::{point_free, segment_free, Config, DiskRobot, Environment, Point};

pub type VertexId = usize;

/// Default slack in the connection-radius constant.
pub const DEFAULT_ETA: f64 = 0.1;

/// Rejection sampling gives up after this many failures per requested sample.
pub const ATTEMPTS_PER_SAMPLE: usize = 100;

/// Volume of the unit ball in `d` dimensions.
pub fn unit_ball_volume(d: usize) -> f64 {
    // V_0 = 1, V_1 = 2, V_d = V_{d-2} * 2 pi / d
    let mut v = if d.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut k = if d.is_multiple_of(2) { 2 } else { 3 };
    while k <= d {
        v *= 2.0 * PI / k as f64;
        k += 2;
    }
    v
}

/// The constant `gamma` of the PRM* radius for dimension `d`.
pub fn star_gamma(d: usize, mu_free: f64, eta: f64) -> f64 {
    let inv_d = 1.0 / d as f64;
    (1.0 + eta) * 2.0 * inv_d.powf(inv_d) * (mu_free / unit_ball_volume(d)).powf(inv_d)
}

/// Connection radius `gamma * (ln n / n)^(1/d)` that makes the tensor product
/// of PRM* roadmaps asymptotically optimal.
pub fn star_radius(n: usize, d: usize, mu_free: f64, eta: f64) -> Result<f64, RoadmapError> {
    if n < 2 {
        return Err(RoadmapError::TooFewSamples(n));
    }
    if d == 0 {
        return Err(RoadmapError::ZeroDimension);
    }
    if !(mu_free > 0.0) {
        return Err(RoadmapError::NonPositiveMeasure(mu_free));
    }
    if !(eta > 0.0) {
        return Err(RoadmapError::NonPositiveEta(eta));
    }
    let nf = n as f64;
    Ok(star_gamma(d, mu_free, eta) * (nf.ln() / nf).powf(1.0 / d as f64))
}

/// Undirected roadmap of collision-free configurations for one robot.
///
/// Adjacency lists are sorted by neighbor id and store the Euclidean edge
/// length alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct Roadmap {
    vertices: Vec<Config>,
    adjacency: Vec<Vec<(VertexId, f64)>>,
    start_id: VertexId,
    goal_id: VertexId,
    radius: f64,
    seed: Option<u64>,
}

impl Roadmap {
    /// Builds a roadmap over explicit vertices, connecting every pair within
    /// `radius` whose straight segment is collision-free.
    pub fn connect(
        env: &Environment,
        robot: &DiskRobot,
        vertices: Vec<Config>,
        radius: f64,
        start_id: VertexId,
        goal_id: VertexId,
    ) -> Result<Self, RoadmapError> {
        if !(radius > 0.0) {
            return Err(RoadmapError::NonPositiveRadius(radius));
        }
        let n = vertices.len();
        if start_id >= n || goal_id >= n {
            return Err(RoadmapError::Malformed("start or goal id out of range".into()));
        }
        let mut adjacency = vec![Vec::new(); n];
        let r_sq = radius * radius;
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (vertices[i], vertices[j]);
                if a.dist_sq(b) <= r_sq && segment_free(env, robot, a, b) {
                    let len = a.dist(b);
                    adjacency[i].push((j, len));
                    adjacency[j].push((i, len));
                }
            }
        }
        Ok(Self {
            vertices,
            adjacency,
            start_id,
            goal_id,
            radius,
            seed: None,
        })
    }

    /// Builds a roadmap from explicit vertices and edges without any
    /// geometric test. Edge lengths are computed from the vertices.
    pub fn from_edges(
        vertices: Vec<Config>,
        edges: &[(VertexId, VertexId)],
        radius: f64,
        start_id: VertexId,
        goal_id: VertexId,
    ) -> Result<Self, RoadmapError> {
        let n = vertices.len();
        if start_id >= n || goal_id >= n {
            return Err(RoadmapError::Malformed("start or goal id out of range".into()));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(RoadmapError::Malformed(format!("edge ({u}, {v}) out of range")));
            }
            if u == v {
                return Err(RoadmapError::Malformed(format!("self loop at {u}")));
            }
            let len = vertices[u].dist(vertices[v]);
            adjacency[u].push((v, len));
            adjacency[v].push((u, len));
        }
        for (v, list) in adjacency.iter_mut().enumerate() {
            list.sort_by_key(|&(u, _)| u);
            let before = list.len();
            list.dedup_by_key(|&mut (u, _)| u);
            if list.len() != before {
                return Err(RoadmapError::Malformed(format!("duplicate edge at vertex {v}")));
            }
        }
        Ok(Self {
            vertices,
            adjacency,
            start_id,
            goal_id,
            radius,
            seed: None,
        })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Config] {
        &self.vertices
    }

    pub fn config(&self, v: VertexId) -> Config {
        self.vertices[v]
    }

    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, f64)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v].len()
    }

    pub fn start_id(&self) -> VertexId {
        self.start_id
    }

    pub fn goal_id(&self) -> VertexId {
        self.goal_id
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .filter(move |&&(v, _)| v > u)
                .map(move |&(v, _)| (u, v))
        })
    }

    pub fn edge_length(&self, u: VertexId, v: VertexId) -> Option<f64> {
        let list = &self.adjacency[u];
        list.binary_search_by_key(&v, |&(w, _)| w)
            .ok()
            .map(|k| list[k].1)
    }

    pub fn is_adjacent(&self, u: VertexId, v: VertexId) -> bool {
        self.adjacency[u]
            .binary_search_by_key(&v, |&(w, _)| w)
            .is_ok()
    }

    pub fn adjacent_or_equal(&self, u: VertexId, v: VertexId) -> bool {
        u == v || self.is_adjacent(u, v)
    }

    /// The neighbors of `v` with `v` itself first, so a robot may stay put.
    pub fn adj_self(&self, v: VertexId) -> Vec<VertexId> {
        std::iter::once(v)
            .chain(self.adjacency[v].iter().map(|&(u, _)| u))
            .collect()
    }

    /// Minimum-length vertex path, or `None` if disconnected.
    pub fn shortest_path(&self, from: VertexId, to: VertexId) -> Option<RoadmapPath> {
        let (dist, pred) = dijkstra(&self.adjacency, from);
        if !dist[to].is_finite() {
            return None;
        }
        let mut vertices = vec![to];
        let mut cur = to;
        while let Some(p) = pred[cur] {
            vertices.push(p);
            cur = p;
        }
        vertices.reverse();
        Some(RoadmapPath {
            vertices,
            length: dist[to],
        })
    }

    /// Re-checks every geometric invariant against `env`; returns the first
    /// violation found.
    pub fn audit(&self, env: &Environment, robot: &DiskRobot) -> Result<(), String> {
        for (v, q) in self.vertices.iter().enumerate() {
            if !point_free(env, robot, *q) {
                return Err(format!("vertex {v} is in collision"));
            }
        }
        for (u, list) in self.adjacency.iter().enumerate() {
            for &(v, len) in list {
                let (a, b) = (self.vertices[u], self.vertices[v]);
                if !self.is_adjacent(v, u) {
                    return Err(format!("edge ({u}, {v}) is not symmetric"));
                }
                if len != a.dist(b) {
                    return Err(format!("edge ({u}, {v}) stores a wrong length"));
                }
                if len > self.radius {
                    return Err(format!("edge ({u}, {v}) is longer than the radius"));
                }
                if !segment_free(env, robot, a, b) {
                    return Err(format!("edge ({u}, {v}) is in collision"));
                }
            }
        }
        Ok(())
    }

    pub fn to_document(&self) -> RoadmapDocument {
        RoadmapDocument {
            format: ROADMAP_FORMAT.to_string(),
            version: ROADMAP_VERSION,
            seed: self.seed,
            radius: self.radius,
            start_id: self.start_id,
            goal_id: self.goal_id,
            vertices: self.vertices.clone(),
            edges: self.edges().map(|(u, v)| [u, v]).collect(),
        }
    }

    pub fn from_document(doc: &RoadmapDocument) -> Result<Self, RoadmapError> {
        if doc.format != ROADMAP_FORMAT {
            return Err(RoadmapError::Malformed(format!("unknown format {:?}", doc.format)));
        }
        if doc.version != ROADMAP_VERSION {
            return Err(RoadmapError::Malformed(format!(
                "unsupported version {}",
                doc.version
            )));
        }
        let edges: Vec<_> = doc.edges.iter().map(|e| (e[0], e[1])).collect();
        let mut rm = Self::from_edges(
            doc.vertices.clone(),
            &edges,
            doc.radius,
            doc.start_id,
            doc.goal_id,
        )?;
        rm.seed = doc.seed;
        Ok(rm)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("roadmap serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, RoadmapError> {
        let doc: RoadmapDocument =
            serde_json::from_str(s).map_err(|e| RoadmapError::Malformed(e.to_string()))?;
        Self::from_document(&doc)
    }
}

pub const ROADMAP_FORMAT: &str = "drrt-roadmap";
pub const ROADMAP_VERSION: u32 = 1;

/// On-disk form of a roadmap. Edge lengths are recomputed on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadmapDocument {
    pub format: String,
    pub version: u32,
    pub seed: Option<u64>,
    pub radius: f64,
    pub start_id: VertexId,
    pub goal_id: VertexId,
    pub vertices: Vec<Point>,
    pub edges: Vec<[VertexId; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoadmapPath {
    pub vertices: Vec<VertexId>,
    pub length: f64,
}

/// Samples `n` free configurations uniformly in the bounds and connects them,
/// together with `start` (id 0) and `goal` (id 1), using `radius`.
///
/// When `start == goal` the goal shares id 0.
pub fn build_prm(
    env: &Environment,
    robot: &DiskRobot,
    n: usize,
    radius: f64,
    start: Config,
    goal: Config,
    seed: u64,
) -> Result<Roadmap, RoadmapError> {
    build_prm_with_rng(env, robot, n, radius, start, goal, &mut ChaCha8Rng::seed_from_u64(seed))
        .map(|mut rm| {
            rm.seed = Some(seed);
            rm
        })
}

pub fn build_prm_with_rng<R: Rng>(
    env: &Environment,
    robot: &DiskRobot,
    n: usize,
    radius: f64,
    start: Config,
    goal: Config,
    rng: &mut R,
) -> Result<Roadmap, RoadmapError> {
    if !(radius > 0.0) {
        return Err(RoadmapError::NonPositiveRadius(radius));
    }
    for (which, q) in [("start", start), ("goal", goal)] {
        if !point_free(env, robot, q) {
            return Err(RoadmapError::EndpointInCollision { which, x: q.x, y: q.y });
        }
    }
    let mut vertices = vec![start];
    let goal_id = if goal == start {
        0
    } else {
        vertices.push(goal);
        1
    };
    let samples = sample_free(env, robot, n, rng)?;
    vertices.extend(samples);
    Roadmap::connect(env, robot, vertices, radius, 0, goal_id)
}

/// Rejection-samples `n` free configurations uniformly inside the bounds.
pub fn sample_free<R: Rng>(
    env: &Environment,
    robot: &DiskRobot,
    n: usize,
    rng: &mut R,
) -> Result<Vec<Config>, RoadmapError> {
    let b = env.bounds;
    let budget = ATTEMPTS_PER_SAMPLE * n;
    let mut out = Vec::with_capacity(n);
    let mut failed = 0;
    while out.len() < n {
        let q = Point::new(
            rng.gen_range(b.min.x..b.max.x),
            rng.gen_range(b.min.y..b.max.y),
        );
        if point_free(env, robot, q) {
            out.push(q);
        } else {
            failed += 1;
            if failed >= budget {
                return Err(RoadmapError::SamplingBudget {
                    placed: out.len(),
                    requested: n,
                    attempts: failed,
                });
            }
        }
    }
    Ok(out)
}

/// Exact goal-rooted shortest-path distances over a roadmap.
#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicTable {
    dist_to_goal: Vec<f64>,
}

impl HeuristicTable {
    pub fn get(&self, v: VertexId) -> f64 {
        self.dist_to_goal[v]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.dist_to_goal
    }
}

/// Single-source Dijkstra from `goal`; unreachable vertices get infinity.
pub fn heuristic_table(rm: &Roadmap, goal: VertexId) -> HeuristicTable {
    HeuristicTable {
        dist_to_goal: dijkstra(&rm.adjacency, goal).0,
    }
}

#[derive(Debug, Clone, Copy)]
struct HeapEntry {
    cost: f64,
    vertex: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on cost, then on vertex id
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra over nonnegative adjacency lists. Returns distances and
/// predecessors.
pub(crate) fn dijkstra(
    adjacency: &[Vec<(usize, f64)>],
    source: usize,
) -> (Vec<f64>, Vec<Option<usize>>) {
    let n = adjacency.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![None; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(HeapEntry { cost: 0.0, vertex: source });
    while let Some(HeapEntry { cost, vertex }) = heap.pop() {
        if cost > dist[vertex] {
            continue;
        }
        for &(next, w) in &adjacency[vertex] {
            let nd = cost + w;
            if nd < dist[next] {
                dist[next] = nd;
                pred[next] = Some(vertex);
                heap.push(HeapEntry { cost: nd, vertex: next });
            }
        }
    }
    (dist, pred)
}
