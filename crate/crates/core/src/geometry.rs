//! Exact 2D collision predicates for disk robots among polygonal obstacles.
//!
//! The free set is closed: a disk whose clearance equals its radius exactly
//! (or two disks whose center distance equals the radius sum) is free.
//! All distance comparisons are done on squared quantities so that the
//! boundary convention is not blurred by a square root.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

/// A point in the plane. Serialized as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

/// Robot configuration: the disk center.
pub type Config = Point;

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn dist_sq(self, other: Point) -> f64 {
        (self - other).norm_sq()
    }

    /// `(1 - t) * self + t * other`
    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Point::new(v[0], v[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

/// Axis-aligned workspace rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: Point,
    pub max: Point,
}

impl Bounds {
    pub fn new(min: Point, max: Point) -> Self {
        Self { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point {
        self.min.lerp(self.max, 0.5)
    }

    pub fn diameter(&self) -> f64 {
        self.min.dist(self.max)
    }

    /// True iff a disk of `radius` centered at `q` lies inside the rectangle.
    pub fn contains_disk(&self, q: Point, radius: f64) -> bool {
        q.x - self.min.x >= radius
            && self.max.x - q.x >= radius
            && q.y - self.min.y >= radius
            && self.max.y - q.y >= radius
    }

    pub fn contains(&self, q: Point) -> bool {
        self.contains_disk(q, 0.0)
    }
}

/// Simple polygon given by its vertices in counterclockwise order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polygon {
    pub vertices: Vec<Point>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point>) -> Self {
        Self { vertices }
    }

    /// Axis-aligned rectangle `[x0, x1] x [y0, y1]`, counterclockwise.
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self::new(vec![
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ])
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Signed area, positive for counterclockwise vertex order.
    pub fn signed_area(&self) -> f64 {
        0.5 * self.edges().map(|(a, b)| a.cross(b)).sum::<f64>()
    }

    /// Crossing-number containment test (interior only; boundary handling is
    /// left to the distance checks that always accompany it).
    pub fn contains(&self, q: Point) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > q.y) != (b.y > q.y) {
                let x = a.x + (q.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if q.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Squared distance from `q` to the polygon boundary.
    pub fn boundary_dist_sq(&self, q: Point) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_dist_sq(q, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// True iff no two non-adjacent edges intersect.
    pub fn is_simple(&self) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return false;
        }
        let edges: Vec<_> = self.edges().collect();
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                let (a, b) = edges[i];
                let (c, d) = edges[j];
                if segments_intersect(a, b, c, d) {
                    return false;
                }
            }
        }
        true
    }
}

/// Workspace: bounds plus polygonal obstacles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub bounds: Bounds,
    #[serde(default)]
    pub obstacles: Vec<Polygon>,
}

impl Environment {
    pub fn new(bounds: Bounds, obstacles: Vec<Polygon>) -> Self {
        Self { bounds, obstacles }
    }

    pub fn empty(bounds: Bounds) -> Self {
        Self::new(bounds, Vec::new())
    }

    /// Checks the structural invariants: simple polygons whose vertices lie
    /// within the bounds. Returns a description of the first violation.
    pub fn check(&self) -> Result<(), String> {
        let b = &self.bounds;
        if !(b.min.is_finite() && b.max.is_finite()) || b.width() <= 0.0 || b.height() <= 0.0 {
            return Err("workspace bounds must be a finite rectangle of positive area".into());
        }
        for (k, poly) in self.obstacles.iter().enumerate() {
            if !poly.is_simple() {
                return Err(format!("obstacle {k} is not a simple polygon"));
            }
            if let Some(v) = poly.vertices.iter().find(|v| !b.contains(**v)) {
                return Err(format!(
                    "obstacle {k} has vertex ({}, {}) outside the bounds",
                    v.x, v.y
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskRobot {
    pub radius: f64,
}

impl DiskRobot {
    pub fn new(radius: f64) -> Self {
        Self { radius }
    }
}

pub fn point_segment_dist_sq(q: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return q.dist_sq(a);
    }
    let t = ((q - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    q.dist_sq(a.lerp(b, t))
}

fn orientation(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Point, b: Point, q: Point) -> bool {
    q.x >= a.x.min(b.x) && q.x <= a.x.max(b.x) && q.y >= a.y.min(b.y) && q.y <= a.y.max(b.y)
}

/// Closed segment intersection (touching counts).
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = orientation(a, b, c);
    let o2 = orientation(a, b, d);
    let o3 = orientation(c, d, a);
    let o4 = orientation(c, d, b);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0))
        && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0))
    {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

/// Squared distance between two closed segments.
pub fn segment_segment_dist_sq(a: Point, b: Point, c: Point, d: Point) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_dist_sq(a, c, d)
        .min(point_segment_dist_sq(b, c, d))
        .min(point_segment_dist_sq(c, a, b))
        .min(point_segment_dist_sq(d, a, b))
}

/// True iff the disk at `q` is inside the bounds and at distance at least
/// `radius` from every obstacle.
pub fn point_free(env: &Environment, robot: &DiskRobot, q: Config) -> bool {
    if !q.is_finite() || !env.bounds.contains_disk(q, robot.radius) {
        return false;
    }
    let r_sq = robot.radius * robot.radius;
    env.obstacles
        .iter()
        .all(|poly| !poly.contains(q) && poly.boundary_dist_sq(q) >= r_sq)
}

/// True iff the disk stays free along the whole straight motion `a -> b`.
pub fn segment_free(env: &Environment, robot: &DiskRobot, a: Config, b: Config) -> bool {
    if !a.is_finite() || !b.is_finite() {
        return false;
    }
    // the shrunk bounds are convex, so both endpoints inside suffices
    if !env.bounds.contains_disk(a, robot.radius) || !env.bounds.contains_disk(b, robot.radius) {
        return false;
    }
    let r_sq = robot.radius * robot.radius;
    env.obstacles.iter().all(|poly| {
        // without an edge crossing the segment is either fully inside or fully outside
        let min_sq = poly
            .edges()
            .map(|(c, d)| segment_segment_dist_sq(a, b, c, d))
            .fold(f64::INFINITY, f64::min);
        min_sq >= r_sq && !poly.contains(a)
    })
}

pub fn pair_static_clear(q_i: Config, r_i: f64, q_j: Config, r_j: f64) -> bool {
    let sum = r_i + r_j;
    q_i.dist_sq(q_j) >= sum * sum
}

/// Minimum squared center distance of two disks moving simultaneously and
/// linearly from `a_*` to `b_*` over a common unit time interval.
pub fn min_motion_dist_sq(a_i: Config, b_i: Config, a_j: Config, b_j: Config) -> f64 {
    let d0 = a_i - a_j;
    let dv = (b_i - a_i) - (b_j - a_j);
    let dv_sq = dv.norm_sq();
    let t = if dv_sq == 0.0 {
        0.0
    } else {
        (-d0.dot(dv) / dv_sq).clamp(0.0, 1.0)
    };
    (d0 + dv * t).norm_sq()
}

pub fn pair_motion_clear(
    a_i: Config,
    b_i: Config,
    r_i: f64,
    a_j: Config,
    b_j: Config,
    r_j: f64,
) -> bool {
    let sum = r_i + r_j;
    min_motion_dist_sq(a_i, b_i, a_j, b_j) >= sum * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ten_box() -> Environment {
        Environment::empty(Bounds::new(Point::new(0.0, 0.0), Point::new(10.0, 10.0)))
    }

    fn box_with_block() -> Environment {
        let mut env = ten_box();
        env.obstacles.push(Polygon::rect(4.0, 4.0, 6.0, 6.0));
        env
    }

    #[test]
    fn empty_environment_center_is_free() {
        assert!(point_free(&ten_box(), &DiskRobot::new(0.2), Point::new(5.0, 5.0)));
    }

    #[test]
    fn disk_overlapping_obstacle_edge_is_not_free() {
        let env = box_with_block();
        let robot = DiskRobot::new(0.2);
        assert!(!point_free(&env, &robot, Point::new(3.9, 5.0)));
        assert!(!point_free(&env, &robot, Point::new(3.8 + 1e-9, 5.0)));
        assert!(point_free(&env, &robot, Point::new(3.75, 5.0)));
        // fully inside the obstacle
        assert!(!point_free(&env, &robot, Point::new(5.0, 5.0)));
    }

    #[test]
    fn disk_leaving_bounds_is_not_free() {
        assert!(!point_free(&ten_box(), &DiskRobot::new(0.2), Point::new(0.1, 0.1)));
        assert!(point_free(&ten_box(), &DiskRobot::new(0.25), Point::new(0.25, 0.25)));
    }

    #[test]
    fn zero_length_segment_matches_point_check() {
        let env = box_with_block();
        let robot = DiskRobot::new(0.2);
        let q = Point::new(1.0, 1.0);
        assert!(segment_free(&env, &robot, q, q));
        let bad = Point::new(4.1, 4.1);
        assert!(!segment_free(&env, &robot, bad, bad));
    }

    #[test]
    fn segment_through_obstacle_is_blocked() {
        let env = box_with_block();
        let robot = DiskRobot::new(0.2);
        assert!(!segment_free(&env, &robot, Point::new(1.0, 5.0), Point::new(9.0, 5.0)));
        assert!(segment_free(&env, &robot, Point::new(1.0, 1.0), Point::new(9.0, 1.0)));
    }

    #[test]
    fn segment_grazing_inflated_corner() {
        // obstacle corner at (4, 4); the segment runs along the anti-diagonal
        // direction so the closest point is the corner itself.
        let env = box_with_block();
        let r: f64 = 0.2;
        let robot = DiskRobot::new(r);
        let u = Point::new(-1.0, 1.0) * (1.0 / 2f64.sqrt());
        let n = Point::new(-1.0, -1.0) * (1.0 / 2f64.sqrt());
        let corner = Point::new(4.0, 4.0);
        let at = |gap: f64| {
            let mid = corner + n * gap;
            (mid - u * 2.0, mid + u * 2.0)
        };
        let (a, b) = at(r - 1e-12);
        // closed-form point-segment distance confirms the gap is below the radius
        assert!(point_segment_dist_sq(corner, a, b) < r * r);
        assert!(!segment_free(&env, &robot, a, b));
        let (a, b) = at(r + 1e-9);
        assert!(segment_free(&env, &robot, a, b));
    }

    #[test]
    fn pair_static_examples() {
        assert!(pair_static_clear(Point::new(0.0, 0.0), 0.2, Point::new(0.5, 0.0), 0.2));
        assert!(!pair_static_clear(Point::new(1.0, 1.0), 0.2, Point::new(1.0, 1.0), 0.2));
        // exactly touching is free
        assert!(pair_static_clear(Point::new(0.0, 0.0), 0.2, Point::new(0.4, 0.0), 0.2));
        assert!(pair_static_clear(Point::new(0.0, 0.0), 0.25, Point::new(0.0, 0.5), 0.25));
    }

    #[test]
    fn pair_motion_examples() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(2.0, 0.0);
        // swap along one line
        assert!(!pair_motion_clear(a, b, 0.2, b, a, 0.2));
        // static and clear
        assert!(pair_motion_clear(a, a, 0.2, b, b, 0.2));
        // parallel translation, gap 1.0
        let c = Point::new(0.0, 1.0);
        let d = Point::new(2.0, 1.0);
        assert!(pair_motion_clear(a, b, 0.2, c, d, 0.2));
        assert!((min_motion_dist_sq(a, b, c, d) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rect_is_ccw_and_simple() {
        let p = Polygon::rect(0.0, 0.0, 1.0, 2.0);
        assert!(p.signed_area() > 0.0);
        assert!(p.is_simple());
        let bowtie = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ]);
        assert!(!bowtie.is_simple());
    }

    #[test]
    fn environment_check_flags_outside_vertex() {
        let mut env = ten_box();
        env.obstacles.push(Polygon::rect(9.0, 9.0, 11.0, 11.0));
        assert!(env.check().unwrap_err().contains("obstacle 0"));
        assert!(box_with_block().check().is_ok());
    }

    fn pt() -> impl Strategy<Value = Point> {
        (-1.0..11.0f64, -1.0..11.0f64).prop_map(|(x, y)| Point::new(x, y))
    }

    proptest! {
        #[test]
        fn pair_checks_symmetric(a in pt(), b in pt(), c in pt(), d in pt(),
                                 ri in 0.01..1.0f64, rj in 0.01..1.0f64) {
            prop_assert_eq!(pair_static_clear(a, ri, c, rj), pair_static_clear(c, rj, a, ri));
            prop_assert_eq!(
                pair_motion_clear(a, b, ri, c, d, rj),
                pair_motion_clear(c, d, rj, a, b, ri)
            );
        }

        #[test]
        fn zero_motion_equals_static(a in pt(), c in pt(), ri in 0.01..1.0f64, rj in 0.01..1.0f64) {
            prop_assert_eq!(pair_motion_clear(a, a, ri, c, c, rj), pair_static_clear(a, ri, c, rj));
        }

        #[test]
        fn segment_free_is_symmetric(a in pt(), b in pt(), r in 0.05..0.6f64) {
            let env = box_with_block();
            let robot = DiskRobot::new(r);
            prop_assert_eq!(segment_free(&env, &robot, a, b), segment_free(&env, &robot, b, a));
        }
    }
}
