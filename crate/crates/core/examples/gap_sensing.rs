//! What the leader sees in front of two walls: detections, the gap, and
//! which avoidance case and merge direction follow from them.

use swarm_reshape::model::{AgentState, Obstacle, WorldState};
use swarm_reshape::reshape::{classify, merge_direction};
use swarm_reshape::sensing::{compute_gap, detect_obstacles};
use swarm_reshape::{Pose, Vec2};

fn main() -> swarm_reshape::Result<()> {
    let obstacles = vec![
        Obstacle::rectangle(0, Vec2::new(115.0, 2.0), Vec2::new(125.0, 40.0))?,
        Obstacle::rectangle(1, Vec2::new(115.0, -40.0), Vec2::new(125.0, -10.0))?,
    ];
    let leader = AgentState::new(1, Pose::new(Vec2::new(90.0, 0.0), 0.0), 2.0)?;
    let world = WorldState {
        tick: 0,
        time: 0.0,
        agents: vec![leader.clone()],
        obstacles,
        destination: Vec2::new(250.0, 0.0),
    };
    let (_, detections) = detect_obstacles(&leader, &world, 30.0);
    for d in &detections {
        println!(
            "obstacle {} at {:.2} m, bearing {:+.1} deg",
            d.obstacle_id,
            d.distance,
            d.bearing.to_degrees()
        );
    }
    let gap = compute_gap(&leader.pose, &detections, &world);
    if let Some(g) = &gap {
        println!(
            "gap width {:.2} m, midpoint ({:.1}, {:.1}), bearing {:+.1} deg",
            g.width,
            g.midpoint.x,
            g.midpoint.y,
            g.bearing.to_degrees()
        );
        println!("merge direction {:?}", merge_direction(g.bearing));
    }
    for safe_dist in [7.0, 15.0] {
        let case = classify(detections.len(), gap.as_ref(), safe_dist)?;
        println!("safe_dist {safe_dist}: {case:?}");
    }
    Ok(())
}
