//! Temporary-leader chains for both merge directions.

use swarm_reshape::reshape::{queue_order, temp_leader_for, MergeDirection};

fn main() -> swarm_reshape::Result<()> {
    let n = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(7usize);
    for dir in [MergeDirection::LeftIntoRight, MergeDirection::RightIntoLeft] {
        println!("{dir:?}");
        for id in 2..=n as u32 {
            println!("  {id} follows {}", temp_leader_for(id, dir, n)?);
        }
        if let Some(order) = queue_order(dir, n) {
            println!("  queue: {order:?}");
        }
    }
    Ok(())
}
