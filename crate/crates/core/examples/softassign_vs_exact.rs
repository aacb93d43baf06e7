//! Annealed soft assignment next to the exact optimum on a few random point
//! sets, with the cooling trace of the first one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use swarm_reshape::formation::ShapePointSet;
use swarm_reshape::registration::{
    anneal_assignment_traced, exact_assignment, squared_distance_matrix, AnnealSchedule,
};
use swarm_reshape::Vec2;

fn main() -> swarm_reshape::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let schedule = AnnealSchedule::default();
    for k in 0..5 {
        let n = 4 + k;
        let mut draw = || {
            ShapePointSet::new(
                (0..n)
                    .map(|_| Vec2::new(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)))
                    .collect(),
            )
        };
        let (current, target) = (draw(), draw());
        let outcome = anneal_assignment_traced(&current, &target, &schedule)?;
        let exact = exact_assignment(&squared_distance_matrix(&current, &target)?)?;
        println!(
            "n={n}: annealed {:?} cost {:.3} | exact {:?} cost {:.3}",
            outcome.assignment.slot_of, outcome.assignment.cost, exact.slot_of, exact.cost
        );
        if k == 0 {
            for step in outcome.trace.iter().step_by(10) {
                println!(
                    "    T={:>10.3} sweeps={:>3} mean row max {:.3}",
                    step.temperature, step.sinkhorn_iterations, step.mean_row_max
                );
            }
        }
    }
    Ok(())
}
