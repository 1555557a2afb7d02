//! Search tree over the tensor-product roadmap.

use std::collections::HashMap;

use crate::geometry::Config;
use crate::roadmap::VertexId;
use crate::tensor::{CompositeVertex, TensorSpace};

use super::nn::{NnIndex, PointIndex};
use super::trajectory::Trajectory;

pub type NodeId = usize;

/// Absolute tolerance for the cost bookkeeping identities.
pub const COST_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct TreeNode {
    pub vertex: CompositeVertex,
    pub parent: Option<NodeId>,
    pub cost: f64,
    /// Cost of the edge from the parent.
    pub edge_cost: f64,
    /// Cached composite heuristic.
    pub h: f64,
    children: Vec<NodeId>,
}

impl TreeNode {
    pub fn children(&self) -> &[NodeId] {
        &self.children
    }
}

/// A spanning tree of visited tensor-roadmap vertices, rooted at node 0.
///
/// Besides the node arena it keeps a nearest-neighbor index over composite
/// configurations and buckets keyed by the first two robots' vertex ids, used
/// to intersect a tensor neighborhood with the tree without enumerating the
/// whole product.
#[derive(Debug, Clone)]
pub struct SearchTree {
    nodes: Vec<TreeNode>,
    lookup: HashMap<CompositeVertex, NodeId>,
    points: PointIndex,
    buckets: HashMap<(VertexId, VertexId), Vec<NodeId>>,
    // vertex ids of node k at ids[k * R..(k + 1) * R]
    ids: Vec<VertexId>,
    adjacency: Vec<Option<AdjacencyBits>>,
}

/// Largest roadmap for which a dense self-inclusive adjacency matrix is kept.
const DENSE_ADJACENCY_MAX: usize = 4096;

/// Self-inclusive roadmap adjacency as a bit matrix.
#[derive(Debug, Clone)]
struct AdjacencyBits {
    words: usize,
    bits: Vec<u64>,
}

impl AdjacencyBits {
    fn new(rm: &crate::roadmap::Roadmap) -> Self {
        let n = rm.len();
        let words = n.div_ceil(64);
        let mut bits = vec![0u64; n * words];
        for u in 0..n {
            for v in rm.adj_self(u) {
                bits[u * words + v / 64] |= 1 << (v % 64);
            }
        }
        Self { words, bits }
    }

    fn get(&self, u: VertexId, v: VertexId) -> bool {
        self.bits[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }
}

fn flatten(configs: &[Config]) -> Vec<f64> {
    configs.iter().flat_map(|q| [q.x, q.y]).collect()
}

fn bucket_key(v: &CompositeVertex) -> (VertexId, VertexId) {
    (v.0[0], v.0.get(1).copied().unwrap_or(0))
}

impl SearchTree {
    pub fn new(ts: &TensorSpace, root: CompositeVertex, nn: NnIndex) -> Self {
        let mut tree = Self {
            nodes: Vec::new(),
            lookup: HashMap::new(),
            points: PointIndex::new(2 * ts.robot_count(), nn),
            buckets: HashMap::new(),
            ids: Vec::new(),
            adjacency: ts
                .roadmaps()
                .iter()
                .map(|rm| (rm.len() <= DENSE_ADJACENCY_MAX).then(|| AdjacencyBits::new(rm)))
                .collect(),
        };
        let h = ts.composite_heuristic(&root);
        tree.push(ts, root, None, 0.0, 0.0, h);
        tree
    }

    fn push(
        &mut self,
        ts: &TensorSpace,
        vertex: CompositeVertex,
        parent: Option<NodeId>,
        cost: f64,
        edge_cost: f64,
        h: f64,
    ) -> NodeId {
        let id = self.nodes.len();
        let pid = self.points.insert(&flatten(&ts.configs(&vertex)));
        debug_assert_eq!(pid, id);
        self.buckets.entry(bucket_key(&vertex)).or_default().push(id);
        self.ids.extend_from_slice(&vertex.0);
        self.lookup.insert(vertex.clone(), id);
        if let Some(p) = parent {
            self.nodes[p].children.push(id);
        }
        self.nodes.push(TreeNode {
            vertex,
            parent,
            cost,
            edge_cost,
            h,
            children: Vec::new(),
        });
        id
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn get(&self, v: &CompositeVertex) -> Option<NodeId> {
        self.lookup.get(v).copied()
    }

    pub fn contains(&self, v: &CompositeVertex) -> bool {
        self.lookup.contains_key(v)
    }

    /// Adds `vertex` as a child of `parent`. The caller has validated the edge.
    pub fn add(&mut self, ts: &TensorSpace, vertex: CompositeVertex, parent: NodeId) -> NodeId {
        debug_assert!(!self.contains(&vertex));
        let edge_cost = ts.edge_cost(&self.nodes[parent].vertex, &vertex);
        let cost = self.nodes[parent].cost + edge_cost;
        let h = ts.composite_heuristic(&vertex);
        self.push(ts, vertex, Some(parent), cost, edge_cost, h)
    }

    /// Tree node closest to the composite configuration `q` in composite
    /// Euclidean distance; ties to the earliest inserted node.
    pub fn nearest(&self, q: &[Config]) -> NodeId {
        self.points.nearest(&flatten(q)).expect("tree is never empty")
    }

    pub fn k_nearest(&self, q: &[Config], k: usize) -> Vec<NodeId> {
        self.points.k_nearest(&flatten(q), k)
    }

    /// Tree nodes that are tensor neighbors of `v`, ascending by node id.
    pub fn tensor_neighbors(&self, ts: &TensorSpace, v: &CompositeVertex) -> Vec<NodeId> {
        let lists: Vec<Vec<VertexId>> = v
            .0
            .iter()
            .zip(ts.roadmaps())
            .map(|(&id, rm)| rm.adj_self(id))
            .collect();
        let product: u128 = lists.iter().map(|l| l.len() as u128).product();
        let second: &[VertexId] = lists.get(1).map_or(&[0], Vec::as_slice);
        let buckets: Vec<&Vec<NodeId>> = lists[0]
            .iter()
            .flat_map(|&a| second.iter().map(move |&b| (a, b)))
            .filter_map(|key| self.buckets.get(&key))
            .collect();
        let bucket_total: usize = buckets.iter().map(|b| b.len()).sum();
        let r = v.0.len();
        let mut out: Vec<NodeId> = if product <= bucket_total as u128 {
            ts.tensor_adj(v).filter_map(|w| self.get(&w)).collect()
        } else {
            let mut out = Vec::new();
            for &id in buckets.into_iter().flatten() {
                let w = &self.ids[id * r..(id + 1) * r];
                let adjacent = (2..r).all(|i| self.adjacent_or_equal(ts, i, w[i], v.0[i]));
                if adjacent && w != v.0.as_slice() {
                    out.push(id);
                }
            }
            out
        };
        out.sort_unstable();
        out
    }

    fn adjacent_or_equal(&self, ts: &TensorSpace, robot: usize, a: VertexId, b: VertexId) -> bool {
        match &self.adjacency[robot] {
            Some(bits) => bits.get(a, b),
            None => ts.roadmap(robot).adjacent_or_equal(a, b),
        }
    }

    /// True iff `node` lies in the subtree rooted at `ancestor` (inclusive).
    pub fn is_descendant(&self, node: NodeId, ancestor: NodeId) -> bool {
        let mut cur = Some(node);
        while let Some(c) = cur {
            if c == ancestor {
                return true;
            }
            cur = self.nodes[c].parent;
        }
        false
    }

    /// Reparents `child` under `parent` when that lowers its cost, the edge
    /// validates, and no cycle would form. Returns whether the tree changed.
    pub fn rewire(&mut self, ts: &TensorSpace, parent: NodeId, child: NodeId) -> bool {
        self.rewire_inner(ts, parent, child, false)
    }

    /// As [`rewire`](Self::rewire) for an edge the caller already validated.
    pub(crate) fn rewire_prevalidated(
        &mut self,
        ts: &TensorSpace,
        parent: NodeId,
        child: NodeId,
    ) -> bool {
        self.rewire_inner(ts, parent, child, true)
    }

    fn rewire_inner(
        &mut self,
        ts: &TensorSpace,
        parent: NodeId,
        child: NodeId,
        validated: bool,
    ) -> bool {
        if parent == child || child == self.root() || self.nodes[child].parent == Some(parent) {
            return false;
        }
        let edge_cost = ts.edge_cost(&self.nodes[parent].vertex, &self.nodes[child].vertex);
        let new_cost = self.nodes[parent].cost + edge_cost;
        if !(new_cost < self.nodes[child].cost) {
            return false;
        }
        if self.is_descendant(parent, child) {
            return false;
        }
        if !validated
            && !ts.validate_tensor_edge(&self.nodes[parent].vertex, &self.nodes[child].vertex)
        {
            return false;
        }
        if let Some(old) = self.nodes[child].parent {
            self.nodes[old].children.retain(|&c| c != child);
        }
        self.nodes[parent].children.push(child);
        let node = &mut self.nodes[child];
        node.parent = Some(parent);
        node.edge_cost = edge_cost;
        node.cost = new_cost;
        self.propagate(child);
        true
    }

    fn propagate(&mut self, from: NodeId) {
        let mut stack = self.nodes[from].children.clone();
        while let Some(id) = stack.pop() {
            let parent = self.nodes[id].parent.expect("child has a parent");
            let cost = self.nodes[parent].cost + self.nodes[id].edge_cost;
            self.nodes[id].cost = cost;
            stack.extend_from_slice(&self.nodes[id].children);
        }
    }

    /// Vertices on the tree path from the root to `node`.
    pub fn path_to(&self, node: NodeId) -> Vec<CompositeVertex> {
        let mut out = Vec::new();
        let mut cur = Some(node);
        while let Some(c) = cur {
            out.push(self.nodes[c].vertex.clone());
            cur = self.nodes[c].parent;
        }
        out.reverse();
        out
    }

    /// Follows parents from `node` to the root and returns the trajectory
    /// with its cost recomputed from the waypoints.
    pub fn trace(&self, ts: &TensorSpace, node: NodeId) -> Trajectory {
        Trajectory::from_vertices(ts, self.path_to(node))
    }

    /// Full structural audit: root shape, tensor-subgraph property, edge
    /// validity, cost consistency, child lists and acyclicity.
    pub fn audit(&self, ts: &TensorSpace) -> Result<(), String> {
        let root = &self.nodes[0];
        if root.parent.is_some() || root.cost != 0.0 {
            return Err("root must have no parent and zero cost".into());
        }
        for (id, node) in self.nodes.iter().enumerate().skip(1) {
            let Some(p) = node.parent else {
                return Err(format!("node {id} has no parent"));
            };
            let pv = &self.nodes[p].vertex;
            if !ts.is_tensor_edge(pv, &node.vertex) {
                return Err(format!("edge {p} -> {id} is not a tensor-roadmap edge"));
            }
            if !ts.validate_tensor_edge(pv, &node.vertex) {
                return Err(format!("edge {p} -> {id} has a robot-robot collision"));
            }
            let expect = self.nodes[p].cost + ts.edge_cost(pv, &node.vertex);
            if (node.cost - expect).abs() > COST_TOLERANCE {
                return Err(format!(
                    "node {id} cost {} differs from parent-derived {expect}",
                    node.cost
                ));
            }
            if !self.nodes[p].children.contains(&id) {
                return Err(format!("node {id} missing from its parent's children"));
            }
            // the walk to the root must terminate within len steps
            let mut cur = Some(id);
            let mut steps = 0;
            while let Some(c) = cur {
                steps += 1;
                if steps > self.nodes.len() {
                    return Err(format!("cycle through node {id}"));
                }
                cur = self.nodes[c].parent;
            }
            if self.lookup.get(&node.vertex) != Some(&id) {
                return Err(format!("lookup table out of sync at node {id}"));
            }
        }
        for (id, node) in self.nodes.iter().enumerate() {
            for &c in &node.children {
                if self.nodes[c].parent != Some(id) {
                    return Err(format!("node {c} listed as a child of {id} but has another parent"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Bounds, DiskRobot, Environment, Point};
    use crate::roadmap::Roadmap;
    use crate::tensor::CostModel;

    fn env() -> Environment {
        Environment::empty(Bounds::new(Point::new(-10.0, -10.0), Point::new(10.0, 10.0)))
    }

    /// S = 0, A = 1, B = 2 with |SB| = 5 and |SA| + |AB| = 7.
    fn triangle() -> TensorSpace {
        let vs = vec![Point::new(0.0, 0.0), Point::new(0.0, 3.0), Point::new(4.0, 3.0)];
        let rm = Roadmap::from_edges(vs, &[(0, 1), (1, 2), (0, 2)], 10.0, 0, 2).unwrap();
        TensorSpace::new(env(), vec![DiskRobot::new(0.2)], vec![rm], CostModel::Sum)
    }

    fn cv(ids: &[usize]) -> CompositeVertex {
        CompositeVertex::new(ids.to_vec())
    }

    #[test]
    fn rewire_takes_cheaper_direct_edge() {
        let ts = triangle();
        let mut tree = SearchTree::new(&ts, cv(&[0]), NnIndex::LinearScan);
        let a = tree.add(&ts, cv(&[1]), 0);
        let b = tree.add(&ts, cv(&[2]), a);
        assert_eq!(tree.node(b).cost, 7.0);
        assert!(tree.rewire(&ts, 0, b));
        assert_eq!(tree.node(b).cost, 5.0);
        assert_eq!(tree.node(b).parent, Some(0));
        assert!(!tree.rewire(&ts, a, b));
        tree.audit(&ts).unwrap();
    }

    #[test]
    fn rewire_refuses_cycles() {
        let ts = triangle();
        let mut tree = SearchTree::new(&ts, cv(&[0]), NnIndex::LinearScan);
        let b = tree.add(&ts, cv(&[2]), 0);
        let a = tree.add(&ts, cv(&[1]), b);
        // force a situation where the descendant looks cheaper
        tree.nodes[a].cost = -100.0;
        assert!(!tree.rewire(&ts, a, b));
        assert_eq!(tree.node(b).parent, Some(0));
    }

    #[test]
    fn rewire_propagates_into_subtree() {
        // chain 0 - 1 - 2 - 3 plus a shortcut 0 - 2
        let vs = vec![
            Point::new(0.0, 0.0),
            Point::new(0.0, 3.0),
            Point::new(4.0, 3.0),
            Point::new(4.0, 5.0),
        ];
        let rm = Roadmap::from_edges(vs, &[(0, 1), (1, 2), (0, 2), (2, 3)], 10.0, 0, 3).unwrap();
        let ts = TensorSpace::new(env(), vec![DiskRobot::new(0.2)], vec![rm], CostModel::Sum);
        let mut tree = SearchTree::new(&ts, cv(&[0]), NnIndex::Indexed);
        let a = tree.add(&ts, cv(&[1]), 0);
        let b = tree.add(&ts, cv(&[2]), a);
        let c = tree.add(&ts, cv(&[3]), b);
        assert_eq!(tree.node(c).cost, 9.0);
        assert!(tree.rewire(&ts, 0, b));
        assert_eq!(tree.node(c).cost, 7.0);
        tree.audit(&ts).unwrap();
        let traj = tree.trace(&ts, c);
        assert_eq!(traj.len(), 3);
        assert!((traj.cost - tree.node(c).cost).abs() < COST_TOLERANCE);
    }

    #[test]
    fn trace_root_and_chain() {
        let ts = triangle();
        let mut tree = SearchTree::new(&ts, cv(&[0]), NnIndex::LinearScan);
        let root = tree.trace(&ts, 0);
        assert_eq!(root.len(), 1);
        assert_eq!(root.cost, 0.0);
        let a = tree.add(&ts, cv(&[1]), 0);
        let b = tree.add(&ts, cv(&[2]), a);
        let t = tree.trace(&ts, b);
        assert_eq!(t.vertices.unwrap(), vec![cv(&[0]), cv(&[1]), cv(&[2])]);
        assert_eq!(t.cost, 7.0);
    }

    #[test]
    fn nearest_vertex_and_ties() {
        let ts = triangle();
        let mut tree = SearchTree::new(&ts, cv(&[0]), NnIndex::Indexed);
        assert_eq!(tree.nearest(&[Point::new(9.0, 9.0)]), 0);
        tree.add(&ts, cv(&[1]), 0);
        tree.add(&ts, cv(&[2]), 0);
        assert_eq!(tree.nearest(&[Point::new(4.0, 3.0)]), 2);
        // (0, 1.5) is equidistant from S and A
        assert_eq!(tree.nearest(&[Point::new(0.0, 1.5)]), 0);
    }
}
