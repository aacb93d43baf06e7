//! Registers a scrambled queue back onto the V and shows each agent's slot
//! and how far it has to fly.

use swarm_reshape::formation::{slot_positions, FormationSpec, ShapePointSet};
use swarm_reshape::registration::{anneal_assignment, max_slot_error, AnnealSchedule};
use swarm_reshape::{Pose, Vec2};

fn main() -> swarm_reshape::Result<()> {
    let spec = FormationSpec {
        n_agents: 7,
        spacing: 10.0,
        half_angle: std::f64::consts::FRAC_PI_4,
    };
    let leader = Pose::new(Vec2::new(140.0, -4.0), 0.0);
    let target = slot_positions(&leader, &spec);
    // a queue behind the leader after the gap, in right-into-left order
    let order = [1u32, 3, 2, 5, 4, 7, 6];
    let mut queue = vec![Vec2::ZERO; 7];
    for (rank, id) in order.iter().enumerate() {
        queue[(*id - 1) as usize] = leader.position - Vec2::new(5.0 * rank as f64, 0.0);
    }
    let current = ShapePointSet::new(queue);
    let assignment = anneal_assignment(&current, &target, &AnnealSchedule::default())?;
    for (i, &slot) in assignment.slot_of.iter().enumerate() {
        println!(
            "agent {} -> slot {} ({:.1} m)",
            i + 1,
            slot,
            current.points[i].distance(target.points[slot])
        );
    }
    println!(
        "largest slot error {:.1} m",
        max_slot_error(&current, &target, &assignment)
    );
    Ok(())
}
