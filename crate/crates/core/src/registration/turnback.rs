//! Turn-back: flying every agent to its registered slot.

use super::assignment::Assignment;
use crate::formation::ShapePointSet;
use crate::geometry::Vec2;
use crate::model::WorldState;

/// Straight-line waypoint for each agent (indexed by id - 1): its assigned
/// slot of `target`.
pub fn turn_back_step(
    world: &WorldState,
    target: &ShapePointSet,
    assignment: &Assignment,
) -> Vec<Vec2> {
    world
        .agents
        .iter()
        .map(|a| target.points[assignment.slot_of[(a.id - 1) as usize]])
        .collect()
}

/// Every agent is within `tol` of its assigned slot.
pub fn shapes_match(
    current: &ShapePointSet,
    target: &ShapePointSet,
    assignment: &Assignment,
    tol: f64,
) -> bool {
    max_slot_error(current, target, assignment) <= tol
}

/// Largest distance between an agent and its assigned slot.
pub fn max_slot_error(
    current: &ShapePointSet,
    target: &ShapePointSet,
    assignment: &Assignment,
) -> f64 {
    current
        .points
        .iter()
        .zip(&assignment.slot_of)
        .map(|(p, &j)| p.distance(target.points[j]))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pose;
    use crate::model::AgentState;
    use crate::registration::assignment::{exact_assignment, squared_distance_matrix};

    fn world(points: &[(f64, f64)]) -> WorldState {
        WorldState {
            tick: 0,
            time: 0.0,
            agents: points
                .iter()
                .enumerate()
                .map(|(k, &(x, y))| {
                    AgentState::new(k as u32 + 1, Pose::new(Vec2::new(x, y), 0.0), 1.0).unwrap()
                })
                .collect(),
            obstacles: vec![],
            destination: Vec2::ZERO,
        }
    }

    #[test]
    fn on_slots_stays_put() {
        let w = world(&[(0.0, 0.0), (-5.0, 5.0)]);
        let t = crate::formation::current_shape(&w);
        assert_eq!(turn_back_step(&w, &t, &Assignment::identity(2)), t.points);
    }

    #[test]
    fn single_agent() {
        let w = world(&[(0.0, 0.0)]);
        let t = ShapePointSet::new(vec![Vec2::new(10.0, 10.0)]);
        assert_eq!(
            turn_back_step(&w, &t, &Assignment::identity(1)),
            vec![Vec2::new(10.0, 10.0)]
        );
    }

    #[test]
    fn optimal_assignment_uncrosses() {
        // agent 2 sits near slot 2 and agent 3 near slot 1: identity crosses
        let w = world(&[(0.0, 0.0), (-10.0, -9.0), (-10.0, 9.0)]);
        let t = ShapePointSet::new(vec![
            Vec2::ZERO,
            Vec2::new(-10.0, 10.0),
            Vec2::new(-10.0, -10.0),
        ]);
        let c = crate::formation::current_shape(&w);
        let a = exact_assignment(&squared_distance_matrix(&c, &t).unwrap()).unwrap();
        assert_eq!(a.slot_of, vec![0, 2, 1]);
        let wp = turn_back_step(&w, &t, &a);
        assert_eq!(wp[1], Vec2::new(-10.0, -10.0));
        assert!(
            crate::geometry::segments_intersect(c.points[1], wp[1], c.points[2], wp[2]).is_none()
        );
    }

    #[test]
    fn tolerance() {
        let t = ShapePointSet::new(vec![Vec2::ZERO, Vec2::new(5.0, 0.0)]);
        let id = Assignment::identity(2);
        assert!(shapes_match(&t, &t, &id, 1e-9));
        let off = ShapePointSet::new(vec![Vec2::ZERO, Vec2::new(7.0, 0.0)]);
        assert!(!shapes_match(&off, &t, &id, 1.0));
        let near = t.translated(Vec2::new(0.4, 0.0));
        assert!(shapes_match(&near, &t, &id, 0.5));
    }
}
