//! Independent oracles shared by the integration tests. Nothing here calls
//! the library's geometry predicates, heuristic tables or search code.
#![allow(dead_code)]

use std::collections::HashSet;

use drrt_core::geometry::{Bounds, DiskRobot, Environment, Point, Polygon};
use drrt_core::{CompositeVertex, CostModel, Roadmap, TensorSpace, Trajectory};
use rand::Rng;

/// Sampling resolution of the dense collision oracle.
pub const RESOLUTION: f64 = 1e-4;
/// Slack for rounding in interpolated sample points.
pub const SLACK: f64 = 1e-9;

fn dist(a: Point, b: Point) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

fn lerp(a: Point, b: Point, t: f64) -> Point {
    Point::new(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t)
}

/// Distance from `q` to the closed segment `ab`.
pub fn point_segment_distance(q: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return dist(q, a);
    }
    let t = (((q.x - a.x) * dx + (q.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    dist(q, Point::new(a.x + t * dx, a.y + t * dy))
}

/// Even-odd ray casting; boundary points may land on either side.
pub fn inside_polygon(q: Point, poly: &Polygon) -> bool {
    let v = &poly.vertices;
    let mut inside = false;
    let mut j = v.len() - 1;
    for i in 0..v.len() {
        let (a, b) = (v[i], v[j]);
        if (a.y > q.y) != (b.y > q.y) {
            let x = a.x + (q.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if q.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn boundary_distance(q: Point, poly: &Polygon) -> f64 {
    let v = &poly.vertices;
    (0..v.len())
        .map(|i| point_segment_distance(q, v[i], v[(i + 1) % v.len()]))
        .fold(f64::INFINITY, f64::min)
}

/// Static check of one disk placement against bounds and obstacles.
pub fn disk_clear(env: &Environment, r: f64, q: Point) -> bool {
    let b = env.bounds;
    if q.x - b.min.x < r - SLACK || b.max.x - q.x < r - SLACK || q.y - b.min.y < r - SLACK || b.max.y - q.y < r - SLACK
    {
        return false;
    }
    env.obstacles
        .iter()
        .all(|p| !inside_polygon(q, p) && boundary_distance(q, p) >= r - SLACK)
}

fn steps_for(max_len: f64) -> usize {
    ((max_len / RESOLUTION).ceil() as usize).max(1)
}

/// Samples the straight motion of one disk.
pub fn dense_segment_free(env: &Environment, r: f64, a: Point, b: Point) -> bool {
    let n = steps_for(dist(a, b));
    (0..=n).all(|k| disk_clear(env, r, lerp(a, b, k as f64 / n as f64)))
}

/// Minimum sampled center distance of two disks moving simultaneously.
pub fn dense_pair_min_distance(a_i: Point, b_i: Point, a_j: Point, b_j: Point) -> f64 {
    let n = steps_for(dist(a_i, b_i).max(dist(a_j, b_j)));
    (0..=n)
        .map(|k| {
            let t = k as f64 / n as f64;
            dist(lerp(a_i, b_i, t), lerp(a_j, b_j, t))
        })
        .fold(f64::INFINITY, f64::min)
}

/// Dense-sampling validity of a whole composite trajectory: obstacles,
/// bounds and every robot pair, at [`RESOLUTION`] per robot.
pub fn dense_check(env: &Environment, robots: &[DiskRobot], traj: &Trajectory) -> Result<(), String> {
    let w = &traj.waypoints;
    if w.is_empty() {
        return Err("empty trajectory".into());
    }
    let r = robots.len();
    let legs: Vec<(&Vec<Point>, &Vec<Point>)> = if w.len() == 1 {
        vec![(&w[0], &w[0])]
    } else {
        w.windows(2).map(|p| (&p[0], &p[1])).collect()
    };
    for (k, (a, b)) in legs.into_iter().enumerate() {
        if a.len() != r || b.len() != r {
            return Err(format!("leg {k}: wrong robot count"));
        }
        let longest = (0..r).map(|i| dist(a[i], b[i])).fold(0.0, f64::max);
        let n = steps_for(longest);
        for s in 0..=n {
            let t = s as f64 / n as f64;
            let q: Vec<Point> = (0..r).map(|i| lerp(a[i], b[i], t)).collect();
            for i in 0..r {
                if !disk_clear(env, robots[i].radius, q[i]) {
                    return Err(format!("leg {k}, t={t}: robot {i} hits an obstacle at {:?}", q[i]));
                }
                for j in (i + 1)..r {
                    let need = robots[i].radius + robots[j].radius;
                    if dist(q[i], q[j]) < need - SLACK {
                        return Err(format!("leg {k}, t={t}: robots {i} and {j} collide"));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Gamma at integer or half-integer arguments.
fn gamma_half(x2: usize) -> f64 {
    // x2 = 2x
    match x2 {
        1 => std::f64::consts::PI.sqrt(),
        2 => 1.0,
        _ => (x2 as f64 / 2.0 - 1.0) * gamma_half(x2 - 2),
    }
}

pub fn ball(d: usize) -> f64 {
    std::f64::consts::PI.powf(d as f64 / 2.0) / gamma_half(d + 2)
}

pub fn reference_radius(n: usize, d: usize, mu: f64, eta: f64) -> f64 {
    let df = d as f64;
    let gamma = (1.0 + eta) * 2.0 * (1.0 / df).powf(1.0 / df) * (mu / ball(d)).powf(1.0 / df);
    gamma * ((n as f64).ln() / n as f64).powf(1.0 / df)
}

pub fn aggregate(cost: CostModel, parts: &[f64]) -> f64 {
    match cost {
        CostModel::Sum => parts.iter().sum(),
        CostModel::Max => parts.iter().cloned().fold(0.0, f64::max),
        CostModel::CompositeEuclidean => parts.iter().map(|x| x * x).sum::<f64>().sqrt(),
    }
}

/// Bellman-Ford distances to `goal` over the roadmap's stored edge weights.
pub fn bellman_ford(rm: &Roadmap, goal: usize) -> Vec<f64> {
    let edges: Vec<(usize, usize, f64)> = rm.edges().map(|(u, v)| (u, v, rm.edge_length(u, v).unwrap())).collect();
    let mut d = vec![f64::INFINITY; rm.len()];
    d[goal] = 0.0;
    for _ in 0..rm.len() {
        let mut changed = false;
        for &(u, v, w) in &edges {
            if d[v] + w < d[u] {
                d[u] = d[v] + w;
                changed = true;
            }
            if d[u] + w < d[v] {
                d[v] = d[u] + w;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    d
}

/// Every tuple of per-robot vertex ids, in lexicographic order.
pub fn all_tuples(ts: &TensorSpace) -> Vec<CompositeVertex> {
    let mut out = vec![Vec::new()];
    for rm in ts.roadmaps() {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<usize>| {
                (0..rm.len()).map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out.into_iter().map(CompositeVertex).collect()
}

/// Tensor neighbors by exhaustive comparison of all tuple pairs.
pub fn brute_force_adjacency(ts: &TensorSpace, tuples: &[CompositeVertex]) -> Vec<HashSet<CompositeVertex>> {
    let edge_sets: Vec<HashSet<(usize, usize)>> = ts
        .roadmaps()
        .iter()
        .map(|rm| rm.edges().flat_map(|(u, v)| [(u, v), (v, u)]).collect())
        .collect();
    tuples
        .iter()
        .map(|a| {
            tuples
                .iter()
                .filter(|b| {
                    a != *b
                        && (0..a.0.len()).all(|i| a.0[i] == b.0[i] || edge_sets[i].contains(&(a.0[i], b.0[i])))
                })
                .cloned()
                .collect()
        })
        .collect()
}

/// Exact minimum distance between two disks in simultaneous linear motion,
/// via the closed-form minimum of a quadratic in t.
fn motion_clear(a_i: Point, b_i: Point, a_j: Point, b_j: Point, need: f64) -> bool {
    let (px, py) = (a_i.x - a_j.x, a_i.y - a_j.y);
    let (vx, vy) = ((b_i.x - a_i.x) - (b_j.x - a_j.x), (b_i.y - a_i.y) - (b_j.y - a_j.y));
    let vv = vx * vx + vy * vy;
    let t = if vv == 0.0 { 0.0 } else { (-(px * vx + py * vy) / vv).clamp(0.0, 1.0) };
    let (dx, dy) = (px + vx * t, py + vy * t);
    dx * dx + dy * dy >= need * need
}

/// Shortest path cost from `s` to `t` over the explicitly materialized
/// product graph, with O(V^2) Dijkstra.
pub fn explicit_product_dijkstra(ts: &TensorSpace, s: &CompositeVertex, t: &CompositeVertex) -> Option<f64> {
    let tuples = all_tuples(ts);
    let adj = brute_force_adjacency(ts, &tuples);
    let index = |v: &CompositeVertex| tuples.iter().position(|w| w == v).unwrap();
    let n = tuples.len();
    let mut d = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    d[index(s)] = 0.0;
    let cfg = |v: &CompositeVertex, i: usize| ts.roadmap(i).config(v.0[i]);
    loop {
        let mut u = None;
        for k in 0..n {
            if !done[k] && d[k].is_finite() && u.is_none_or(|m: usize| d[k] < d[m]) {
                u = Some(k);
            }
        }
        let Some(u) = u else { break };
        done[u] = true;
        let a = &tuples[u];
        for b in &adj[u] {
            let r = ts.robot_count();
            let ok = (0..r).all(|i| {
                ((i + 1)..r).all(|j| {
                    motion_clear(
                        cfg(a, i),
                        cfg(b, i),
                        cfg(a, j),
                        cfg(b, j),
                        ts.robots()[i].radius + ts.robots()[j].radius,
                    )
                })
            });
            if !ok {
                continue;
            }
            let parts: Vec<f64> = (0..r).map(|i| dist(cfg(a, i), cfg(b, i))).collect();
            let w = aggregate(ts.cost_model(), &parts);
            let k = index(b);
            if d[u] + w < d[k] {
                d[k] = d[u] + w;
            }
        }
    }
    let dt = d[index(t)];
    dt.is_finite().then_some(dt)
}

pub fn square(side: f64) -> Bounds {
    Bounds::new(Point::new(0.0, 0.0), Point::new(side, side))
}

/// A random small multi-robot instance: an optional central obstacle and,
/// per robot, a roadmap on `2..=max_vertices` random free points joined
/// within a generous radius.
pub fn random_instance<R: Rng>(rng: &mut R, robots: usize, max_vertices: usize, cost: CostModel) -> TensorSpace {
    let mut env = Environment::empty(square(10.0));
    if rng.gen_bool(0.5) {
        env.obstacles.push(Polygon::rect(4.0, 4.0, 6.0, 6.0));
    }
    let radius = 0.4;
    let disks = vec![DiskRobot::new(radius); robots];
    let roadmaps = (0..robots)
        .map(|_| {
            let n = rng.gen_range(2..=max_vertices);
            let mut pts = Vec::with_capacity(n);
            while pts.len() < n {
                let q = Point::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0));
                if disk_clear(&env, radius, q) {
                    pts.push(q);
                }
            }
            let (s, g) = (rng.gen_range(0..n), rng.gen_range(0..n));
            Roadmap::connect(&env, &disks[0], pts, 6.0, s, g).unwrap()
        })
        .collect();
    TensorSpace::new(env, disks, roadmaps, cost)
}
