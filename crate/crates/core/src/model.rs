//! Agent and world state plus constant-speed kinematics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_convex_ccw, wrap_angle_unchecked, Pose, Vec2};

/// Flight mode of a single agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Formation,
    QueueTransition,
    Queue,
    TurnBack,
}

/// Which part of the V an agent belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Leg {
    Leader,
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    /// 1 is the swarm leader.
    pub id: u32,
    pub pose: Pose,
    /// Ground speed in m/s, fixed for the whole run.
    pub speed: f64,
    pub permanent_leader_id: Option<u32>,
    pub temp_leader_id: Option<u32>,
    pub mode: Mode,
    pub leg: Leg,
    /// Smoothed direction of travel. Equals the heading unless the agent is
    /// weaving to hold station behind a slower reference.
    pub course: f64,
}

impl AgentState {
    /// Fresh agent in formation mode. The id must be at least 1.
    pub fn new(id: u32, pose: Pose, speed: f64) -> Result<Self> {
        let leg = crate::formation::leg_of(id)?;
        if !(speed > 0.0 && speed.is_finite()) {
            return Err(Error::config("agent_speed", "must be positive and finite"));
        }
        Ok(AgentState {
            id,
            pose,
            speed,
            permanent_leader_id: permanent_leader_of(id),
            temp_leader_id: None,
            mode: Mode::Formation,
            leg,
            course: pose.heading,
        })
    }

    /// Temporary leader when set, otherwise the permanent one.
    pub fn effective_leader_id(&self) -> Option<u32> {
        self.temp_leader_id.or(self.permanent_leader_id)
    }

    /// Pose whose heading is the agent's course.
    pub fn course_pose(&self) -> Pose {
        Pose {
            position: self.pose.position,
            heading: self.course,
        }
    }

    pub fn velocity(&self) -> Vec2 {
        Vec2::from_angle(self.pose.heading) * self.speed
    }
}

/// Immediate formation leader: the apex for the first row, otherwise the
/// agent one row ahead on the same leg.
pub fn permanent_leader_of(id: u32) -> Option<u32> {
    match id {
        0 | 1 => None,
        2 | 3 => Some(1),
        _ => Some(id - 2),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub id: u32,
    /// Strictly convex, counterclockwise.
    pub vertices: Vec<Vec2>,
}

impl Obstacle {
    pub fn new(id: u32, vertices: Vec<Vec2>) -> Result<Self> {
        check_convex_ccw(&vertices)
            .map_err(|reason| Error::config(format!("obstacles[{id}]"), reason))?;
        Ok(Obstacle { id, vertices })
    }

    /// Axis-aligned rectangle from its min and max corners.
    pub fn rectangle(id: u32, min: Vec2, max: Vec2) -> Result<Self> {
        Obstacle::new(
            id,
            vec![min, Vec2::new(max.x, min.y), max, Vec2::new(min.x, max.y)],
        )
    }

    pub fn distance_to(&self, p: Vec2) -> f64 {
        crate::geometry::point_polygon_closest(p, &self.vertices).0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub tick: u64,
    /// Always `tick * dt`.
    pub time: f64,
    /// Ordered by id, ids are `1..=n`.
    pub agents: Vec<AgentState>,
    pub obstacles: Vec<Obstacle>,
    pub destination: Vec2,
}

impl WorldState {
    pub fn agent(&self, id: u32) -> Option<&AgentState> {
        id.checked_sub(1)
            .and_then(|i| self.agents.get(i as usize))
            .filter(|a| a.id == id)
    }

    pub fn leader(&self) -> &AgentState {
        &self.agents[0]
    }

    pub fn obstacle(&self, id: u32) -> Option<&Obstacle> {
        self.obstacles.iter().find(|o| o.id == id)
    }
}

/// Advances the agent exactly `speed * dt` toward `waypoint`.
///
/// The step is never shortened: a waypoint closer than one step is flown
/// through. A waypoint equal to the current position keeps the old heading.
pub fn step_toward(agent: &AgentState, waypoint: Vec2, dt: f64) -> Result<AgentState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::config("dt", "must be positive and finite"));
    }
    if !waypoint.is_finite() {
        return Err(Error::NonFinite("waypoint"));
    }
    let mut next = agent.clone();
    let heading = match (waypoint - agent.pose.position).normalized() {
        Some(dir) => dir.angle(),
        None => agent.pose.heading,
    };
    let heading = wrap_angle_unchecked(heading);
    next.pose = Pose {
        position: agent.pose.position + Vec2::from_angle(heading) * (agent.speed * dt),
        heading,
    };
    Ok(next)
}

/// Steering decision toward a moving reference point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Steer {
    pub waypoint: Vec2,
    pub course: f64,
}

/// Chooses a waypoint that brings an agent of the given speed onto a
/// reference point moving with constant velocity.
///
/// `target` is where the reference will be after this step. When it is
/// within one step, the agent lands level with it along the reference's
/// direction of motion, on the side nearer to it (it weaves when faster than
/// the reference). Otherwise it flies the straight interception course, or
/// pursues directly when interception is impossible.
pub fn track_moving_point(
    position: Vec2,
    speed: f64,
    dt: f64,
    target: Vec2,
    target_velocity: Vec2,
) -> Steer {
    let reach = speed * dt;
    let d = target - position;
    let direct = Steer {
        waypoint: target,
        course: d.normalized().map_or(target_velocity.angle(), Vec2::angle),
    };
    let Some(along_dir) = target_velocity.normalized() else {
        return direct;
    };
    let course = along_dir.angle();
    if d.norm() <= reach {
        let along = d.dot(along_dir);
        let lateral_dir = along_dir.perp();
        let lateral = d.dot(lateral_dir);
        let spare = (reach * reach - along * along).max(0.0).sqrt();
        let side = if lateral < 0.0 { -spare } else { spare };
        return Steer {
            waypoint: position + along_dir * along + lateral_dir * side,
            course,
        };
    }
    // |d + w t| = speed * t, smallest positive root
    let a = target_velocity.norm_sq() - speed * speed;
    let b = 2.0 * d.dot(target_velocity);
    let c = d.norm_sq();
    let t = if a.abs() < 1e-12 {
        (b < 0.0).then(|| -c / b)
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            None
        } else {
            let sq = disc.sqrt();
            [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)]
                .into_iter()
                .filter(|t| *t > 0.0)
                .min_by(f64::total_cmp)
        }
    };
    match t {
        Some(t) => {
            let meet = target + target_velocity * t;
            Steer {
                waypoint: meet,
                course: (meet - position).normalized().map_or(course, Vec2::angle),
            }
        }
        None => direct,
    }
}
