//! V-formation geometry and shape point sets.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Pose, Vec2};
use crate::model::{AgentState, Leg, WorldState};

/// V layout: leader at the apex, even ids trail on the left leg and odd ids
/// (> 1) on the right leg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormationSpec {
    pub n_agents: usize,
    /// Distance between consecutive slots on one leg, meters.
    pub spacing: f64,
    /// Angle between each leg and the reversed leader heading, radians.
    pub half_angle: f64,
}

impl FormationSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_agents < 1 {
            return Err(Error::config("n_agents", "must be at least 1"));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(Error::config("formation.spacing", "must be positive"));
        }
        if !(self.half_angle > 0.0 && self.half_angle < FRAC_PI_2) {
            return Err(Error::config(
                "formation.half_angle",
                "must lie strictly between 0 and pi/2",
            ));
        }
        Ok(())
    }

    /// Offset of slot `index` (0-based, index 0 is the apex) in the leader
    /// frame: x forward, y left.
    pub fn local_offset(&self, index: usize) -> Vec2 {
        let id = index + 1;
        if id == 1 {
            return Vec2::ZERO;
        }
        let depth = (id / 2) as f64 * self.spacing;
        let side = if id.is_multiple_of(2) { 1.0 } else { -1.0 };
        Vec2::new(
            -depth * self.half_angle.cos(),
            side * depth * self.half_angle.sin(),
        )
    }
}

/// Ordered 2D points, index `k` belonging to agent id `k + 1` (or to slot
/// `k` for target shapes).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ShapePointSet {
    pub points: Vec<Vec2>,
}

impl ShapePointSet {
    pub fn new(points: Vec<Vec2>) -> Self {
        ShapePointSet { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn translated(&self, by: Vec2) -> ShapePointSet {
        ShapePointSet::new(self.points.iter().map(|&p| p + by).collect())
    }
}

pub fn leg_of(id: u32) -> Result<Leg> {
    match id {
        0 => Err(Error::InvalidAgentId(id)),
        1 => Ok(Leg::Leader),
        id if id % 2 == 0 => Ok(Leg::Left),
        _ => Ok(Leg::Right),
    }
}

/// Target shape anchored at the leader pose.
pub fn slot_positions(leader_pose: &Pose, spec: &FormationSpec) -> ShapePointSet {
    let origin = leader_pose.position;
    ShapePointSet::new(
        (0..spec.n_agents)
            .map(|k| origin + spec.local_offset(k).rotated(leader_pose.heading))
            .collect(),
    )
}

/// Current positions indexed by agent id.
pub fn current_shape(world: &WorldState) -> ShapePointSet {
    let mut points = vec![Vec2::ZERO; world.agents.len()];
    for a in &world.agents {
        points[(a.id - 1) as usize] = a.pose.position;
    }
    ShapePointSet::new(points)
}

/// The follower's own V slot relative to the swarm leader.
pub fn formation_waypoint(
    agent: &AgentState,
    leader_state: &AgentState,
    spec: &FormationSpec,
) -> Result<Vec2> {
    if agent.id == 1 {
        return Err(Error::LeaderHasNoLeader);
    }
    if agent.id == 0 {
        return Err(Error::InvalidAgentId(agent.id));
    }
    let offset = spec.local_offset((agent.id - 1) as usize);
    Ok(leader_state.pose.position + offset.rotated(leader_state.pose.heading))
}
