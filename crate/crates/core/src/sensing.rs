//! Range-limited obstacle detection and gap measurement between obstacles.

use crate::geometry::{bearing_from, point_polygon_closest, polygon_polygon_closest, Pose, Vec2};
use crate::model::{AgentState, WorldState};

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub obstacle_id: u32,
    /// Distance from the agent to the closest boundary point.
    pub distance: f64,
    /// Signed bearing of the closest point, positive to the left.
    pub bearing: f64,
    pub closest_point: Vec2,
}

/// A traversable opening between two obstacles.
#[derive(Debug, Clone, PartialEq)]
pub struct GapInfo {
    /// Minimum clearance between the two obstacles.
    pub width: f64,
    pub midpoint: Vec2,
    /// Bearing of the midpoint as seen by the observer that measured it.
    pub bearing: f64,
    /// Ascending.
    pub obstacle_ids: (u32, u32),
    /// The clearance segment, oriented so the observer lies on its left.
    pub segment: (Vec2, Vec2),
}

impl GapInfo {
    /// Signed side of `p` relative to the gap segment: positive on the
    /// observer's (approach) side, negative once crossed.
    pub fn side(&self, p: Vec2) -> f64 {
        let (a, b) = self.segment;
        (b - a).cross(p - a)
    }

    /// Unit vector pointing through the gap, away from the approach side.
    pub fn crossing_direction(&self) -> Vec2 {
        let (a, b) = self.segment;
        // left normal of (b - a) points to the approach side
        -(b - a).perp().normalized().unwrap_or(Vec2::new(1.0, 0.0))
    }
}

/// All obstacles whose boundary lies within `detection_range` of the agent,
/// nearest first (ties by id).
pub fn detect_obstacles(
    agent: &AgentState,
    world: &WorldState,
    detection_range: f64,
) -> (bool, Vec<Detection>) {
    let mut detections: Vec<Detection> = world
        .obstacles
        .iter()
        .filter_map(|o| {
            let (distance, closest_point) = point_polygon_closest(agent.pose.position, &o.vertices);
            (distance <= detection_range).then(|| Detection {
                obstacle_id: o.id,
                distance,
                bearing: bearing_from(&agent.pose, closest_point).unwrap_or(0.0),
                closest_point,
            })
        })
        .collect();
    detections.sort_by(|a, b| {
        a.distance
            .total_cmp(&b.distance)
            .then(a.obstacle_id.cmp(&b.obstacle_id))
    });
    (!detections.is_empty(), detections)
}

/// Narrowest opening among the detected obstacles, or `None` with fewer than
/// two detected obstacles.
pub fn compute_gap(
    observer: &Pose,
    detections: &[Detection],
    world: &WorldState,
) -> Option<GapInfo> {
    let mut ids: Vec<u32> = detections.iter().map(|d| d.obstacle_id).collect();
    ids.sort_unstable();
    ids.dedup();
    let polys: Vec<_> = ids.iter().filter_map(|&id| world.obstacle(id)).collect();
    let mut best: Option<(f64, usize, usize)> = None;
    for i in 0..polys.len() {
        for j in i + 1..polys.len() {
            let (d, _, _) = polygon_polygon_closest(&polys[i].vertices, &polys[j].vertices);
            if best.is_none_or(|(bd, _, _)| d < bd) {
                best = Some((d, i, j));
            }
        }
    }
    let (width, i, j) = best?;
    let (pa, pb) = central_clearance_pair(&polys[i].vertices, &polys[j].vertices, width);
    let midpoint = pa.midpoint(pb);
    let mut segment = (pa, pb);
    if (pb - pa).cross(observer.position - pa) < 0.0 {
        segment = (pb, pa);
    }
    Some(GapInfo {
        width,
        midpoint,
        bearing: bearing_from(observer, midpoint).unwrap_or(0.0),
        obstacle_ids: (polys[i].id, polys[j].id),
        segment,
    })
}

/// Among all closest pairs realizing `width`, the one centered in the
/// clearance region. Parallel facing edges realize the minimum along a whole
/// stretch; the center of that stretch is independent of argument order.
fn central_clearance_pair(a: &[Vec2], b: &[Vec2], width: f64) -> (Vec2, Vec2) {
    use crate::geometry::{closest_on_segment, edges};
    let tol = 1e-9 * width.max(1.0);
    let mut pairs: Vec<(Vec2, Vec2)> = Vec::new();
    for &v in a {
        for (s, e) in edges(b) {
            let q = closest_on_segment(v, s, e);
            if v.distance(q) <= width + tol {
                pairs.push((v, q));
            }
        }
    }
    for &v in b {
        for (s, e) in edges(a) {
            let q = closest_on_segment(v, s, e);
            if v.distance(q) <= width + tol {
                pairs.push((q, v));
            }
        }
    }
    if pairs.is_empty() {
        // overlapping polygons
        let (_, pa, pb) = polygon_polygon_closest(a, b);
        return (pa, pb);
    }
    let mut extreme = (pairs[0], pairs[0]);
    let mut spread = -1.0;
    for p in &pairs {
        for q in &pairs {
            let d = p.0.midpoint(p.1).distance_sq(q.0.midpoint(q.1));
            if d > spread {
                spread = d;
                extreme = (*p, *q);
            }
        }
    }
    let ((a1, b1), (a2, b2)) = extreme;
    (a1.midpoint(a2), b1.midpoint(b2))
}
