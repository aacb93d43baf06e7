//! Flies the bundled reference scenario in DFRPSR mode and writes the run
//! files. Usage: `cargo run --example reference_flight [out_dir]`.

use std::path::PathBuf;

use swarm_reshape::{run, write_outputs, ScenarioConfig, SimMode};

fn main() -> swarm_reshape::Result<()> {
    let out: PathBuf = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "out/reference".into())
        .into();
    let result = run(&ScenarioConfig::reference(SimMode::Dfrpsr))?;
    for e in &result.events {
        println!(
            "{:8.1} s  {:<20} agent {}",
            e.time,
            e.kind.as_str(),
            e.agent_id
        );
    }
    for path in write_outputs(&result, &out)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
