//! Exact A* over the implicit tensor-product roadmap.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use crate::tensor::{CompositeVertex, TensorSpace};

#[derive(Debug, Clone, PartialEq)]
pub struct AStarRecord {
    /// Number of node expansions (pops that were not stale).
    pub expanded: usize,
    pub cost: f64,
    pub waypoints: Vec<CompositeVertex>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeuristicMode {
    /// Composite heuristic from the per-robot goal distances.
    Composite,
    /// Plain Dijkstra.
    Zero,
}

struct OpenEntry {
    f: f64,
    h: f64,
    id: usize,
    g: f64,
}

impl PartialEq for OpenEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenEntry {}

impl Ord for OpenEntry {
    // min-heap on f, then h, then discovery id
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.h.total_cmp(&self.h))
            .then_with(|| other.id.cmp(&self.id))
    }
}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest `s -> t` path over the tensor roadmap under the space's cost
/// model. Neighborhoods are enumerated lazily and edges are validated for
/// robot-robot collisions only when they would improve a cost-to-come.
/// Nodes are reopened whenever a cheaper path to them appears, which keeps
/// the search exact for heuristics that are admissible but not consistent.
pub fn implicit_astar(
    ts: &TensorSpace,
    s: &CompositeVertex,
    t: &CompositeVertex,
) -> Option<AStarRecord> {
    implicit_astar_with(ts, s, t, HeuristicMode::Composite)
}

pub fn implicit_astar_with(
    ts: &TensorSpace,
    s: &CompositeVertex,
    t: &CompositeVertex,
    mode: HeuristicMode,
) -> Option<AStarRecord> {
    let h = |v: &CompositeVertex| match mode {
        HeuristicMode::Composite => ts.composite_heuristic(v),
        HeuristicMode::Zero => 0.0,
    };
    let mut ids: HashMap<CompositeVertex, usize> = HashMap::new();
    let mut verts: Vec<CompositeVertex> = Vec::new();
    let mut g: Vec<f64> = Vec::new();
    let mut hv: Vec<f64> = Vec::new();
    let mut pred: Vec<Option<usize>> = Vec::new();
    let mut intern = |v: CompositeVertex,
                      verts: &mut Vec<CompositeVertex>,
                      g: &mut Vec<f64>,
                      hv: &mut Vec<f64>,
                      pred: &mut Vec<Option<usize>>| {
        *ids.entry(v.clone()).or_insert_with(|| {
            hv.push(h(&v));
            verts.push(v);
            g.push(f64::INFINITY);
            pred.push(None);
            verts.len() - 1
        })
    };

    let s_id = intern(s.clone(), &mut verts, &mut g, &mut hv, &mut pred);
    let h0 = hv[s_id];
    if !h0.is_finite() {
        return None;
    }
    g[s_id] = 0.0;
    let mut open = BinaryHeap::new();
    open.push(OpenEntry {
        f: h0,
        h: h0,
        id: s_id,
        g: 0.0,
    });
    let mut expanded = 0;
    while let Some(OpenEntry { id, g: g_entry, .. }) = open.pop() {
        if g_entry > g[id] {
            continue;
        }
        if verts[id] == *t {
            let mut path = vec![id];
            let mut cur = id;
            while let Some(p) = pred[cur] {
                path.push(p);
                cur = p;
            }
            path.reverse();
            return Some(AStarRecord {
                expanded,
                cost: g[id],
                waypoints: path.into_iter().map(|k| verts[k].clone()).collect(),
            });
        }
        expanded += 1;
        let v = verts[id].clone();
        for w in ts.tensor_adj(&v) {
            let cand = g[id] + ts.edge_cost(&v, &w);
            let w_id = intern(w, &mut verts, &mut g, &mut hv, &mut pred);
            if cand < g[w_id] && hv[w_id].is_finite() && ts.validate_tensor_edge(&v, &verts[w_id]) {
                g[w_id] = cand;
                pred[w_id] = Some(id);
                open.push(OpenEntry {
                    f: cand + hv[w_id],
                    h: hv[w_id],
                    id: w_id,
                    g: cand,
                });
            }
        }
    }
    None
}
