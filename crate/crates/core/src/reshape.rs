//! Reshaping decisions: the avoidance case table, leg-merge direction,
//! temporary-leader reassignment and the waypoints used while avoiding or
//! transiting a gap in single file.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{bearing_from, segment_polygon_closest, wrap_angle_unchecked, Pose, Vec2};
use crate::model::Obstacle;
use crate::sensing::{Detection, GapInfo};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AvoidanceCase {
    /// One obstacle in range.
    SingleObstacle,
    /// Several obstacles, but the opening between them is too narrow.
    TreatAsSingle,
    /// Several obstacles with a wide enough opening: reshape into a queue.
    PassThrough,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MergeDirection {
    /// Queue order 1, 2, 3, 4, ...
    LeftIntoRight,
    /// Queue order 1, 3, 2, 5, 4, ...
    RightIntoLeft,
}

pub fn classify(obs_num: usize, gap: Option<&GapInfo>, safe_dist: f64) -> Result<AvoidanceCase> {
    match (obs_num, gap) {
        (0, _) => Err(Error::InvalidObstacleCount(obs_num)),
        (1, _) => Ok(AvoidanceCase::SingleObstacle),
        (_, Some(g)) if g.width >= safe_dist => Ok(AvoidanceCase::PassThrough),
        _ => Ok(AvoidanceCase::TreatAsSingle),
    }
}

/// Negative bearing (opening to the right) merges the left leg into the
/// right one; positive does the opposite. Zero falls back to left-into-right.
pub fn merge_direction(obs_ang: f64) -> MergeDirection {
    if obs_ang > 0.0 {
        MergeDirection::RightIntoLeft
    } else {
        MergeDirection::LeftIntoRight
    }
}

/// Temporary leader of agent `id` in a swarm of `n_agents` while queueing.
///
/// Left-into-right: every agent follows `id - 1`. Right-into-left: even ids
/// follow `id + 1` and odd ids follow `id - 3`, with agent 3 following the
/// leader and an even tail agent (no `id + 1`) following `id - 2`, the last
/// agent already in the queue.
pub fn temp_leader_for(id: u32, dir: MergeDirection, n_agents: usize) -> Result<u32> {
    if id < 2 || id as usize > n_agents {
        return Err(Error::InvalidAgentId(id));
    }
    Ok(match dir {
        MergeDirection::LeftIntoRight => id - 1,
        MergeDirection::RightIntoLeft if id.is_multiple_of(2) => {
            if (id + 1) as usize <= n_agents {
                id + 1
            } else if id >= 4 {
                id - 2
            } else {
                1
            }
        }
        MergeDirection::RightIntoLeft => {
            if id == 3 {
                1
            } else {
                id - 3
            }
        }
    })
}

/// Queue order produced by following temporary leaders from the front.
/// Returns `None` unless the temp-leader graph is a single path from id 1.
pub fn queue_order(dir: MergeDirection, n_agents: usize) -> Option<Vec<u32>> {
    let mut follower_of = vec![None; n_agents + 1];
    for id in 2..=n_agents as u32 {
        let lead = temp_leader_for(id, dir, n_agents).ok()? as usize;
        if follower_of[lead].replace(id).is_some() {
            return None;
        }
    }
    let mut order = vec![1];
    let mut cur = 1usize;
    while let Some(next) = follower_of[cur] {
        order.push(next);
        cur = next as usize;
    }
    (order.len() == n_agents).then_some(order)
}

/// Slot directly behind the temporary leader along its heading.
pub fn queue_waypoint(temp_leader: &Pose, queue_gap: f64) -> Vec2 {
    temp_leader.position - temp_leader.forward() * queue_gap
}

/// The leader aims at the gap midpoint until it has crossed the gap
/// segment (being on it counts as crossed), then at the destination.
pub fn leader_passage_waypoint(leader_position: Vec2, gap: &GapInfo, destination: Vec2) -> Vec2 {
    if gap.side(leader_position) > 0.0 {
        gap.midpoint
    } else {
        destination
    }
}

/// Lateral avoidance waypoint: the obstacle's closest point shifted by
/// `clearance` perpendicular to the heading, toward whichever side needs
/// the smaller turn. Equal turns go right.
pub fn avoid_single(pose: &Pose, nearest: &Detection, clearance: f64) -> Vec2 {
    let lateral = pose.forward().perp();
    let left = nearest.closest_point + lateral * clearance;
    let right = nearest.closest_point - lateral * clearance;
    let dev = |p: Vec2| bearing_from(pose, p).map_or(0.0, f64::abs);
    if dev(left) < dev(right) - 1e-12 {
        left
    } else {
        right
    }
}

/// Whether an agent has emerged from the gap: strictly past the gap
/// segment, beyond the far end of both gap obstacles along the crossing
/// direction, and more than `clearance` from each of them.
pub fn passage_complete(
    position: Vec2,
    gap: &GapInfo,
    obstacles: &[Obstacle],
    clearance: f64,
) -> bool {
    if gap.side(position) >= 0.0 {
        return false;
    }
    let dir = gap.crossing_direction();
    [gap.obstacle_ids.0, gap.obstacle_ids.1].iter().all(|id| {
        obstacles
            .iter()
            .find(|o| o.id == *id)
            .is_none_or(|o| emerged_from(position, o, dir, clearance))
    })
}

/// `position` is past every vertex of `obstacle` along `dir` and more than
/// `clearance` away from it.
pub fn emerged_from(position: Vec2, obstacle: &Obstacle, dir: Vec2, clearance: f64) -> bool {
    obstacle
        .vertices
        .iter()
        .all(|v| (*v - position).dot(dir) < 0.0)
        && obstacle.distance_to(position) > clearance
}

/// First detected obstacle that the straight path from `position` toward
/// `heading_to` (truncated to `lookahead`) brings closer than both
/// `clearance` and the agent's current distance to it. A path running
/// parallel to or away from a nearby wall is not a threat.
///
/// The returned detection points at the obstacle point nearest the path.
pub fn path_threat(
    position: Vec2,
    heading_to: Vec2,
    lookahead: f64,
    detections: &[Detection],
    obstacles: &[Obstacle],
    clearance: f64,
) -> Option<Detection> {
    let dir = (heading_to - position).normalized()?;
    let end = position + dir * lookahead;
    detections.iter().find_map(|d| {
        let o = obstacles.iter().find(|o| o.id == d.obstacle_id)?;
        let (gap, point) = segment_polygon_closest(position, end, &o.vertices);
        (gap < clearance && gap < d.distance - 1e-9).then(|| Detection {
            obstacle_id: d.obstacle_id,
            distance: position.distance(point),
            bearing: wrap_angle_unchecked((point - position).angle() - dir.angle()),
            closest_point: point,
        })
    })
}
