//! Queue reshaping versus every-agent-for-itself avoidance on the reference
//! scenario.

use swarm_reshape::engine::EventKind;
use swarm_reshape::{run, ScenarioConfig, SimMode};

fn main() -> swarm_reshape::Result<()> {
    let dfrpsr = run(&ScenarioConfig::reference(SimMode::Dfrpsr))?;
    let baseline = run(&ScenarioConfig::reference(SimMode::BaselineSenseAvoid))?;
    for r in [&dfrpsr, &baseline] {
        let passed = r.event_time(EventKind::PassageComplete);
        let restored = r.reformation_time();
        println!(
            "{:<9} passage complete {:>7}  formation restored {:>7}",
            r.mode.as_str(),
            passed.map_or("-".into(), |t| format!("{t:.1}")),
            restored.map_or("-".into(), |t| format!("{t:.1}")),
        );
    }
    if let (Some(a), Some(b)) = (dfrpsr.reformation_time(), baseline.reformation_time()) {
        println!("reshaping restores the V {:.1} s earlier", b - a);
    }
    Ok(())
}
