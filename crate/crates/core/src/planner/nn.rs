//! Exact nearest-neighbor queries over points in `R^dim`.
//!
//! Two interchangeable back ends answer identically, ties included (equal
//! distances resolve to the lowest insertion id): a linear scan and a
//! logarithmic-method forest of static k-d trees. The scan keeps coordinates
//! column by column so that distances to a block of points vectorize. Above
//! [`KD_MAX_DIM`] dimensions k-d pruning stops paying for itself and the
//! indexed mode scans as well.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NnIndex {
    LinearScan,
    /// A forest of static k-d trees.
    #[default]
    Indexed,
}

const LEAF: usize = 8;

/// Highest dimension for which the indexed mode builds k-d trees.
pub const KD_MAX_DIM: usize = 8;

const BLOCK: usize = 256;

/// Dimensions between two cutoff checks of a scanned block.
const PRUNE_EVERY: usize = 4;

#[derive(Debug, Clone)]
pub struct PointIndex {
    dim: usize,
    mode: NnIndex,
    coords: Vec<f64>,
    // coordinate k of point i at columns[k][i]
    columns: Vec<Vec<f64>>,
    forest: Vec<Option<StaticKd>>,
}

#[derive(Debug, Clone)]
struct StaticKd {
    ids: Vec<usize>,
    // split axis for the subtree whose median sits at this position
    axes: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Hit {
    d2: f64,
    id: usize,
}

impl Hit {
    fn better_than(&self, other: &Hit) -> bool {
        self.d2 < other.d2 || (self.d2 == other.d2 && self.id < other.id)
    }
}

impl Eq for Hit {}

impl Ord for Hit {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d2.total_cmp(&other.d2).then(self.id.cmp(&other.id))
    }
}

impl PartialOrd for Hit {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PointIndex {
    pub fn new(dim: usize, mode: NnIndex) -> Self {
        assert!(dim > 0 && dim <= u8::MAX as usize);
        Self {
            dim,
            mode,
            coords: Vec::new(),
            columns: vec![Vec::new(); dim],
            forest: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, id: usize) -> &[f64] {
        &self.coords[id * self.dim..(id + 1) * self.dim]
    }

    /// Appends a point; its id is the current length.
    pub fn insert(&mut self, p: &[f64]) -> usize {
        assert_eq!(p.len(), self.dim);
        let id = self.len();
        self.coords.extend_from_slice(p);
        for (col, &x) in self.columns.iter_mut().zip(p) {
            col.push(x);
        }
        if self.uses_kd() {
            let mut carry = vec![id];
            let mut level = 0;
            loop {
                if level == self.forest.len() {
                    self.forest.push(None);
                }
                match self.forest[level].take() {
                    None => {
                        self.forest[level] = Some(self.build(carry));
                        break;
                    }
                    Some(tree) => {
                        carry.extend(tree.ids);
                        level += 1;
                    }
                }
            }
        }
        id
    }

    fn uses_kd(&self) -> bool {
        self.mode == NnIndex::Indexed && self.dim <= KD_MAX_DIM
    }

    /// Calls `f(first_id, distances)` for consecutive blocks of points. Each
    /// distance is summed in coordinate order, exactly as [`Self::d2`]. `f`
    /// returns a cutoff: later blocks whose partial sums all exceed it are
    /// skipped, which is exact because partial sums never decrease.
    fn scan<F: FnMut(usize, &[f64]) -> f64>(&self, q: &[f64], mut f: F) {
        let n = self.len();
        let mut acc = [0.0f64; BLOCK];
        let mut cutoff = f64::INFINITY;
        let mut start = 0;
        while start < n {
            let m = BLOCK.min(n - start);
            let acc = &mut acc[..m];
            acc.fill(0.0);
            let mut skipped = false;
            for (k, (col, &qk)) in self.columns.iter().zip(q).enumerate() {
                for (a, &x) in acc.iter_mut().zip(&col[start..start + m]) {
                    let d = x - qk;
                    *a += d * d;
                }
                if k % PRUNE_EVERY == PRUNE_EVERY - 1 && acc.iter().all(|&a| a > cutoff) {
                    skipped = true;
                    break;
                }
            }
            if !skipped {
                cutoff = f(start, acc);
            }
            start += m;
        }
    }

    fn d2(&self, id: usize, q: &[f64]) -> f64 {
        self.point(id)
            .iter()
            .zip(q)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    fn build(&self, mut ids: Vec<usize>) -> StaticKd {
        let mut axes = vec![0u8; ids.len()];
        self.build_rec(&mut ids, &mut axes);
        StaticKd { ids, axes }
    }

    fn build_rec(&self, ids: &mut [usize], axes: &mut [u8]) {
        if ids.len() <= LEAF {
            return;
        }
        // split on the axis of widest spread
        let mut axis = 0;
        let mut spread = f64::NEG_INFINITY;
        for a in 0..self.dim {
            let (lo, hi) = ids.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &id| {
                let x = self.coords[id * self.dim + a];
                (lo.min(x), hi.max(x))
            });
            if hi - lo > spread {
                spread = hi - lo;
                axis = a;
            }
        }
        let mid = ids.len() / 2;
        ids.select_nth_unstable_by(mid, |&a, &b| {
            self.coords[a * self.dim + axis].total_cmp(&self.coords[b * self.dim + axis])
        });
        axes[mid] = axis as u8;
        let (left, rest) = ids.split_at_mut(mid);
        let (left_axes, rest_axes) = axes.split_at_mut(mid);
        self.build_rec(left, left_axes);
        self.build_rec(&mut rest[1..], &mut rest_axes[1..]);
    }

    /// Id of the nearest point, ties to the lowest id.
    pub fn nearest(&self, q: &[f64]) -> Option<usize> {
        if self.is_empty() {
            return None;
        }
        let mut best = Hit {
            d2: f64::INFINITY,
            id: usize::MAX,
        };
        if self.uses_kd() {
            for tree in self.forest.iter().flatten() {
                self.nearest_rec(&tree.ids, &tree.axes, q, &mut best);
            }
        } else {
            self.scan(q, |start, d| {
                for (k, &d2) in d.iter().enumerate() {
                    if d2 < best.d2 {
                        best = Hit { d2, id: start + k };
                    }
                }
                best.d2
            });
        }
        Some(best.id)
    }

    fn nearest_rec(&self, ids: &[usize], axes: &[u8], q: &[f64], best: &mut Hit) {
        if ids.len() <= LEAF {
            for &id in ids {
                let h = Hit { d2: self.d2(id, q), id };
                if h.better_than(best) {
                    *best = h;
                }
            }
            return;
        }
        let mid = ids.len() / 2;
        let pivot = ids[mid];
        let axis = axes[mid] as usize;
        let h = Hit { d2: self.d2(pivot, q), id: pivot };
        if h.better_than(best) {
            *best = h;
        }
        let diff = q[axis] - self.coords[pivot * self.dim + axis];
        let (near, far) = if diff < 0.0 {
            ((&ids[..mid], &axes[..mid]), (&ids[mid + 1..], &axes[mid + 1..]))
        } else {
            ((&ids[mid + 1..], &axes[mid + 1..]), (&ids[..mid], &axes[..mid]))
        };
        self.nearest_rec(near.0, near.1, q, best);
        if diff * diff <= best.d2 {
            self.nearest_rec(far.0, far.1, q, best);
        }
    }

    /// Up to `k` nearest ids in ascending (distance, id) order.
    pub fn k_nearest(&self, q: &[f64], k: usize) -> Vec<usize> {
        if k == 0 {
            return Vec::new();
        }
        let mut heap: BinaryHeap<Hit> = BinaryHeap::with_capacity(k + 1);
        let mut offer = |h: Hit, heap: &mut BinaryHeap<Hit>| {
            if heap.len() < k {
                heap.push(h);
            } else if h.better_than(heap.peek().expect("nonempty")) {
                heap.pop();
                heap.push(h);
            }
        };
        if self.uses_kd() {
            for tree in self.forest.iter().flatten() {
                self.knn_rec(&tree.ids, &tree.axes, q, k, &mut heap, &mut offer);
            }
        } else {
            self.scan(q, |start, d| {
                for (j, &d2) in d.iter().enumerate() {
                    offer(Hit { d2, id: start + j }, &mut heap);
                }
                if heap.len() < k {
                    f64::INFINITY
                } else {
                    heap.peek().expect("nonempty").d2
                }
            });
        }
        let mut hits = heap.into_vec();
        hits.sort();
        hits.into_iter().map(|h| h.id).collect()
    }

    fn knn_rec<F: FnMut(Hit, &mut BinaryHeap<Hit>)>(
        &self,
        ids: &[usize],
        axes: &[u8],
        q: &[f64],
        k: usize,
        heap: &mut BinaryHeap<Hit>,
        offer: &mut F,
    ) {
        if ids.len() <= LEAF {
            for &id in ids {
                offer(Hit { d2: self.d2(id, q), id }, heap);
            }
            return;
        }
        let mid = ids.len() / 2;
        let pivot = ids[mid];
        let axis = axes[mid] as usize;
        offer(Hit { d2: self.d2(pivot, q), id: pivot }, heap);
        let diff = q[axis] - self.coords[pivot * self.dim + axis];
        let (near, far) = if diff < 0.0 {
            ((&ids[..mid], &axes[..mid]), (&ids[mid + 1..], &axes[mid + 1..]))
        } else {
            ((&ids[mid + 1..], &axes[mid + 1..]), (&ids[..mid], &axes[..mid]))
        };
        self.knn_rec(near.0, near.1, q, k, heap, offer);
        let worst = if heap.len() < k {
            f64::INFINITY
        } else {
            heap.peek().expect("nonempty").d2
        };
        if diff * diff <= worst {
            self.knn_rec(far.0, far.1, q, k, heap, offer);
        }
    }

    /// All ids within distance `r` (closed ball), ascending.
    pub fn within_radius(&self, q: &[f64], r: f64) -> Vec<usize> {
        let r2 = r * r;
        let mut out = Vec::new();
        if self.uses_kd() {
            for tree in self.forest.iter().flatten() {
                self.radius_rec(&tree.ids, &tree.axes, q, r2, &mut out);
            }
            out.sort_unstable();
        } else {
            self.scan(q, |start, d| {
                out.extend(d.iter().enumerate().filter(|(_, &d2)| d2 <= r2).map(|(j, _)| start + j));
                r2
            });
        }
        out
    }

    fn radius_rec(&self, ids: &[usize], axes: &[u8], q: &[f64], r2: f64, out: &mut Vec<usize>) {
        if ids.len() <= LEAF {
            out.extend(ids.iter().copied().filter(|&id| self.d2(id, q) <= r2));
            return;
        }
        let mid = ids.len() / 2;
        let pivot = ids[mid];
        let axis = axes[mid] as usize;
        if self.d2(pivot, q) <= r2 {
            out.push(pivot);
        }
        let diff = q[axis] - self.coords[pivot * self.dim + axis];
        if diff <= 0.0 || diff * diff <= r2 {
            self.radius_rec(&ids[..mid], &axes[..mid], q, r2, out);
        }
        if diff >= 0.0 || diff * diff <= r2 {
            self.radius_rec(&ids[mid + 1..], &axes[mid + 1..], q, r2, out);
        }
    }
}
