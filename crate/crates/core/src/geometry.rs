//! Planar vectors, poses and convex-polygon distance queries.
//!
//! Angles are radians, counterclockwise positive. Headings are kept in
//! `(-pi, pi]`.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point or displacement in the plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Vec2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Vec2 { x, y }
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Unit vector pointing along `angle`.
    pub fn from_angle(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Vec2 { x: c, y: s }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    pub fn distance_sq(self, o: Vec2) -> f64 {
        (self - o).norm_sq()
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec2> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self * (1.0 / n))
    }

    /// Rotated counterclockwise by a quarter turn.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn midpoint(self, o: Vec2) -> Vec2 {
        Vec2::new(0.5 * (self.x + o.x), 0.5 * (self.y + o.y))
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Position plus heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec2,
    /// Radians in `(-pi, pi]`.
    pub heading: f64,
}

impl Pose {
    pub fn new(position: Vec2, heading: f64) -> Self {
        Pose {
            position,
            heading: wrap_angle_unchecked(heading),
        }
    }

    pub fn forward(&self) -> Vec2 {
        Vec2::from_angle(self.heading)
    }

    /// Pose advanced `distance` meters along its heading.
    pub fn advanced(&self, distance: f64) -> Pose {
        Pose {
            position: self.position + self.forward() * distance,
            heading: self.heading,
        }
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> Result<f64> {
    if !theta.is_finite() {
        return Err(Error::NonFinite("angle"));
    }
    Ok(wrap_angle_unchecked(theta))
}

pub(crate) fn wrap_angle_unchecked(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Signed angle from the pose heading to the ray toward `target`.
///
/// Positive means the target is on the left (counterclockwise).
pub fn bearing_from(pose: &Pose, target: Vec2) -> Result<f64> {
    let d = target - pose.position;
    if !d.is_finite() {
        return Err(Error::NonFinite("target"));
    }
    if d.norm_sq() == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    Ok(wrap_angle_unchecked(d.angle() - pose.heading))
}

/// Closest point to `p` on segment `[a, b]`.
pub fn closest_on_segment(p: Vec2, a: Vec2, b: Vec2) -> Vec2 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return a;
    }
    let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    a + ab * t
}

/// Whether segments `[a, b]` and `[c, d]` intersect (touching counts).
pub fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> Option<Vec2> {
    let r = b - a;
    let s = d - c;
    let denom = r.cross(s);
    let qp = c - a;
    if denom == 0.0 {
        // parallel: only collinear overlap counts
        if qp.cross(r) != 0.0 {
            return None;
        }
        for p in [c, d] {
            if closest_on_segment(p, a, b) == p {
                return Some(p);
            }
        }
        for p in [a, b] {
            if closest_on_segment(p, c, d) == p {
                return Some(p);
            }
        }
        return None;
    }
    let t = qp.cross(s) / denom;
    let u = qp.cross(r) / denom;
    ((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u)).then(|| a + r * t)
}

/// Checks that `vertices` form a strictly convex counterclockwise polygon
/// with no repeated vertices. Returns a reason on failure.
pub fn check_convex_ccw(vertices: &[Vec2]) -> std::result::Result<(), &'static str> {
    let n = vertices.len();
    if n < 3 {
        return Err("polygon needs at least 3 vertices");
    }
    if vertices.iter().any(|v| !v.is_finite()) {
        return Err("polygon vertex is not finite");
    }
    for i in 0..n {
        for j in i + 1..n {
            if vertices[i] == vertices[j] {
                return Err("polygon has repeated vertices");
            }
        }
    }
    let mut turning = 0.0;
    for i in 0..n {
        let e0 = vertices[(i + 1) % n] - vertices[i];
        let e1 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
        if e0.cross(e1) <= 0.0 {
            return Err("polygon is not strictly convex and counterclockwise");
        }
        turning += e0.cross(e1).atan2(e0.dot(e1));
    }
    // a star polygon turns left everywhere but winds more than once
    if (turning - TAU).abs() > 1e-6 {
        return Err("polygon is self-intersecting");
    }
    Ok(())
}

/// Edges of a closed polygon as `(start, end)` pairs.
pub fn edges(vertices: &[Vec2]) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
    let n = vertices.len();
    (0..n).map(move |i| (vertices[i], vertices[(i + 1) % n]))
}

/// Point-in-convex-polygon test (boundary counts as inside). Vertices must be
/// counterclockwise.
pub fn convex_contains(vertices: &[Vec2], p: Vec2) -> bool {
    edges(vertices).all(|(a, b)| (b - a).cross(p - a) >= 0.0)
}

/// Distance from `p` to a convex polygon and the realizing boundary point.
/// Points inside the polygon have distance zero and return themselves.
pub fn point_polygon_closest(p: Vec2, vertices: &[Vec2]) -> (f64, Vec2) {
    if convex_contains(vertices, p) {
        return (0.0, p);
    }
    let mut best = (f64::INFINITY, p);
    for (a, b) in edges(vertices) {
        let q = closest_on_segment(p, a, b);
        let d = p.distance(q);
        if d < best.0 {
            best = (d, q);
        }
    }
    best
}

/// Closest pair of points between two convex polygons.
///
/// Returns `(distance, point_on_a, point_on_b)`. Overlapping polygons report
/// distance zero with a shared witness point.
pub fn polygon_polygon_closest(a: &[Vec2], b: &[Vec2]) -> (f64, Vec2, Vec2) {
    if let Some(w) = overlap_witness(a, b) {
        return (0.0, w, w);
    }
    let mut best = (f64::INFINITY, a[0], b[0]);
    for &v in a {
        for (s, e) in edges(b) {
            let q = closest_on_segment(v, s, e);
            let d = v.distance(q);
            if d < best.0 {
                best = (d, v, q);
            }
        }
    }
    for &v in b {
        for (s, e) in edges(a) {
            let q = closest_on_segment(v, s, e);
            let d = v.distance(q);
            if d < best.0 {
                best = (d, q, v);
            }
        }
    }
    best
}

fn overlap_witness(a: &[Vec2], b: &[Vec2]) -> Option<Vec2> {
    if let Some(&v) = a.iter().find(|&&v| convex_contains(b, v)) {
        return Some(v);
    }
    if let Some(&v) = b.iter().find(|&&v| convex_contains(a, v)) {
        return Some(v);
    }
    for (p, q) in edges(a) {
        for (r, s) in edges(b) {
            if let Some(x) = segments_intersect(p, q, r, s) {
                return Some(x);
            }
        }
    }
    None
}

/// Minimum distance between segment `[p, q]` and a convex polygon.
pub fn segment_polygon_distance(p: Vec2, q: Vec2, vertices: &[Vec2]) -> f64 {
    segment_polygon_closest(p, q, vertices).0
}

/// Minimum distance between segment `[p, q]` and a convex polygon, with the
/// polygon point realizing it. A segment entering the polygon reports
/// distance zero and the crossing nearest `p`.
pub fn segment_polygon_closest(p: Vec2, q: Vec2, vertices: &[Vec2]) -> (f64, Vec2) {
    for end in [p, q] {
        if convex_contains(vertices, end) {
            return (0.0, end);
        }
    }
    let entry = edges(vertices)
        .filter_map(|(a, b)| segments_intersect(p, q, a, b))
        .min_by(|x, y| p.distance_sq(*x).total_cmp(&p.distance_sq(*y)));
    if let Some(x) = entry {
        return (0.0, x);
    }
    let mut best = (f64::INFINITY, vertices[0]);
    for (a, b) in edges(vertices) {
        for end in [p, q] {
            let c = closest_on_segment(end, a, b);
            let d = end.distance(c);
            if d < best.0 {
                best = (d, c);
            }
        }
    }
    for &v in vertices {
        let d = v.distance(closest_on_segment(v, p, q));
        if d < best.0 {
            best = (d, v);
        }
    }
    best
}
