//! Registration energy of a V against shifted and bent copies of itself.

use swarm_reshape::formation::{slot_positions, FormationSpec, ShapePointSet};
use swarm_reshape::registration::{tps_energy, Assignment, TpsParams};
use swarm_reshape::{Pose, Vec2};

fn main() -> swarm_reshape::Result<()> {
    let spec = FormationSpec {
        n_agents: 7,
        spacing: 10.0,
        half_angle: std::f64::consts::FRAC_PI_4,
    };
    let v = slot_positions(&Pose::new(Vec2::ZERO, 0.0), &spec);
    let identity = Assignment::identity(v.len());
    let shifted = v.translated(Vec2::new(3.0, -1.0));
    let bent = ShapePointSet::new(
        v.points
            .iter()
            .map(|p| Vec2::new(p.x, p.y + 0.02 * p.x * p.x))
            .collect(),
    );
    for lambda in [0.0, 1.0, 10.0] {
        let params = TpsParams { lambda };
        println!(
            "lambda {lambda:>4}: shifted {:>10.3}  bent {:>10.3}",
            tps_energy(&shifted, &v, &identity, &params)?,
            tps_energy(&bent, &v, &identity, &params)?
        );
    }
    Ok(())
}
