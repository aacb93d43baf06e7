//! Built-in oracle suites run by `swarm verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::formation::ShapePointSet;
use crate::geometry::{edges, Pose, Vec2};
use crate::model::{Obstacle, WorldState};
use crate::registration::{
    anneal_assignment, exact_assignment_with, squared_distance_matrix, AnnealSchedule, ExactMethod,
};
use crate::reshape::{temp_leader_for, MergeDirection};
use crate::sensing::{compute_gap, detect_obstacles};

/// Outcome of one oracle suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub checked: usize,
    /// Draws excluded from the comparison (e.g. near-tied optima).
    pub skipped: usize,
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn new(name: &'static str) -> Self {
        SuiteReport {
            name,
            checked: 0,
            skipped: 0,
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Runs every suite with its default size.
pub fn run_all(seed: u64) -> Vec<SuiteReport> {
    vec![
        annealer_vs_exact(seed, 200, &AnnealSchedule::default()),
        gap_width_sampling(seed, 50, 10_000),
        chain_connectivity(3..=15),
    ]
}

/// Minimum cost plus the margin to the best different permutation.
/// Every other permutation differs from the optimum in some row `i`, so the
/// runner-up is the best solution with entry `(i, opt[i])` forbidden.
pub fn optimum_with_margin(cost: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let best = exact_assignment_with(cost, ExactMethod::Hungarian).expect("square cost matrix");
    let n = cost.len();
    if n < 2 {
        return (best.slot_of, f64::INFINITY);
    }
    let big = 1.0 + cost.iter().flatten().map(|c| c.abs()).sum::<f64>() * 2.0;
    let mut margin = f64::INFINITY;
    for i in 0..n {
        let mut c = cost.to_vec();
        c[i][best.slot_of[i]] = big;
        let alt = exact_assignment_with(&c, ExactMethod::Hungarian).expect("square cost matrix");
        margin = margin.min(alt.cost - best.cost);
    }
    (best.slot_of, margin)
}

/// Annealed assignment against the exact optimum on seeded random point
/// sets in `[0, 100]^2`, `n` cycling through 2..=10.
pub fn annealer_vs_exact(seed: u64, instances: usize, schedule: &AnnealSchedule) -> SuiteReport {
    let mut report = SuiteReport::new("annealer-vs-exact");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..instances {
        let n = 2 + k % 9;
        let mut draw = || {
            ShapePointSet::new(
                (0..n)
                    .map(|_| Vec2::new(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)))
                    .collect(),
            )
        };
        let (current, target) = (draw(), draw());
        let cost = squared_distance_matrix(&current, &target).expect("equal sizes");
        let (optimum, margin) = optimum_with_margin(&cost);
        if margin <= 1e-6 {
            report.skipped += 1;
            continue;
        }
        report.checked += 1;
        match anneal_assignment(&current, &target, schedule) {
            Ok(a) if a.slot_of == optimum => {}
            Ok(a) => report.failures.push(format!(
                "instance {k} (n={n}): annealed {:?} cost {:.6}, optimum {:?}",
                a.slot_of, a.cost, optimum
            )),
            Err(e) => report.failures.push(format!("instance {k} (n={n}): {e}")),
        }
    }
    report
}

/// Random strictly convex polygon: vertices on a circle at sorted random
/// angles, at least 3 and at most 8 of them.
pub fn random_convex_polygon(rng: &mut impl Rng, id: u32, center: Vec2, radius: f64) -> Obstacle {
    loop {
        let count = rng.gen_range(3..=8);
        let mut angles: Vec<f64> = (0..count)
            .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
            .collect();
        angles.sort_by(f64::total_cmp);
        let vertices = angles
            .iter()
            .map(|&a| center + Vec2::from_angle(a) * radius)
            .collect();
        if let Ok(o) = Obstacle::new(id, vertices) {
            return o;
        }
    }
}

/// `samples` points spread over the boundary by arc length, vertices
/// included.
pub fn sample_boundary(vertices: &[Vec2], samples: usize) -> Vec<Vec2> {
    let perimeter: f64 = edges(vertices).map(|(a, b)| a.distance(b)).sum();
    let mut out = Vec::with_capacity(samples + vertices.len());
    for (a, b) in edges(vertices) {
        let len = a.distance(b);
        let k = ((samples as f64) * len / perimeter).round().max(1.0) as usize;
        for s in 0..k {
            out.push(a + (b - a) * (s as f64 / k as f64));
        }
    }
    out
}

/// Smallest distance between two sampled point clouds. Pairs are visited in
/// order of their separation along `axis` (pointing from `a` toward `b`),
/// which bounds every remaining distance from below and lets the scan stop
/// early.
pub fn min_sampled_distance(a: &[Vec2], b: &[Vec2], axis: Vec2) -> f64 {
    let mut a: Vec<(f64, Vec2)> = a.iter().map(|p| (p.dot(axis), *p)).collect();
    let mut b: Vec<(f64, Vec2)> = b.iter().map(|p| (p.dot(axis), *p)).collect();
    a.sort_by(|p, q| q.0.total_cmp(&p.0));
    b.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut best = f64::INFINITY;
    for (pa, p) in &a {
        if b[0].0 - pa >= best {
            break;
        }
        for (pb, q) in &b {
            if pb - pa >= best {
                break;
            }
            best = best.min(p.distance(*q));
        }
    }
    best
}

/// Gap width against dense boundary sampling on random polygon pairs.
pub fn gap_width_sampling(seed: u64, pairs: usize, samples: usize) -> SuiteReport {
    let mut report = SuiteReport::new("gap-width-sampling");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    for k in 0..pairs {
        let r1 = rng.gen_range(2.0..10.0);
        let r2 = rng.gen_range(2.0..10.0);
        let c1 = Vec2::new(rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0));
        let sep = r1 + r2 + rng.gen_range(0.5..15.0);
        let c2 = c1 + Vec2::from_angle(rng.gen_range(0.0..std::f64::consts::TAU)) * sep;
        let a = random_convex_polygon(&mut rng, 1, c1, r1);
        let b = random_convex_polygon(&mut rng, 2, c2, r2);
        let axis = (c2 - c1).normalized().unwrap_or(Vec2::new(1.0, 0.0));
        let oracle = min_sampled_distance(
            &sample_boundary(&a.vertices, samples),
            &sample_boundary(&b.vertices, samples),
            axis,
        );
        let observer = Pose::new(c1.midpoint(c2) + (c2 - c1).perp() * 2.0, 0.0);
        let world = WorldState {
            tick: 0,
            time: 0.0,
            agents: Vec::new(),
            obstacles: vec![a, b],
            destination: Vec2::ZERO,
        };
        let probe = crate::model::AgentState::new(1, observer, 1.0).expect("valid probe agent");
        let (_, detections) = detect_obstacles(&probe, &world, f64::MAX);
        report.checked += 1;
        match compute_gap(&observer, &detections, &world) {
            Some(g) if (g.width - oracle).abs() <= 1e-3 => {}
            Some(g) => report.failures.push(format!(
                "pair {k}: width {:.6}, sampled {:.6}",
                g.width, oracle
            )),
            None => report.failures.push(format!("pair {k}: no gap found")),
        }
    }
    report
}

/// Temp-leader graphs for both merge directions form one path from the
/// leader through every agent; left-into-right is exactly 1, 2, ..., n.
pub fn chain_connectivity(sizes: std::ops::RangeInclusive<usize>) -> SuiteReport {
    let mut report = SuiteReport::new("chain-connectivity");
    for n in sizes {
        for dir in [MergeDirection::LeftIntoRight, MergeDirection::RightIntoLeft] {
            report.checked += 1;
            match walk_chain(n, dir) {
                Ok(order) => {
                    let expected: Vec<u32> = (1..=n as u32).collect();
                    if dir == MergeDirection::LeftIntoRight && order != expected {
                        report
                            .failures
                            .push(format!("n={n} {dir:?}: order {order:?}"));
                    }
                }
                Err(msg) => report.failures.push(format!("n={n} {dir:?}: {msg}")),
            }
        }
    }
    report
}

fn walk_chain(n: usize, dir: MergeDirection) -> Result<Vec<u32>, String> {
    let mut children: Vec<Vec<u32>> = vec![Vec::new(); n + 1];
    for id in 2..=n as u32 {
        let lead = temp_leader_for(id, dir, n).map_err(|e| e.to_string())?;
        if lead == id || lead == 0 || lead as usize > n {
            return Err(format!("agent {id} follows invalid id {lead}"));
        }
        children[lead as usize].push(id);
    }
    let mut order = vec![1u32];
    let mut cur = 1usize;
    loop {
        match children[cur].as_slice() {
            [] => break,
            [next] => {
                if order.contains(next) {
                    return Err(format!("cycle at {next}"));
                }
                order.push(*next);
                cur = *next as usize;
            }
            many => return Err(format!("agent {cur} leads {many:?}")),
        }
    }
    if order.len() != n {
        return Err(format!("path {order:?} misses agents"));
    }
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margin_of_clear_optimum() {
        let (opt, margin) = optimum_with_margin(&[vec![5.0, 1.0], vec![2.0, 9.0]]);
        assert_eq!(opt, vec![1, 0]);
        assert!((margin - 11.0).abs() < 1e-12);
        let (_, tied) = optimum_with_margin(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert!(tied.abs() < 1e-12);
    }

    #[test]
    fn sampled_distance_of_parallel_squares() {
        let a = Obstacle::rectangle(1, Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0)).unwrap();
        let b = Obstacle::rectangle(2, Vec2::new(3.0, 0.5), Vec2::new(4.0, 1.5)).unwrap();
        let d = min_sampled_distance(
            &sample_boundary(&a.vertices, 400),
            &sample_boundary(&b.vertices, 400),
            Vec2::new(1.0, 0.0),
        );
        assert!((d - 2.0).abs() < 1e-9);
    }

    #[test]
    fn chains() {
        assert!(chain_connectivity(3..=15).passed());
        assert_eq!(
            walk_chain(7, MergeDirection::RightIntoLeft).unwrap(),
            vec![1, 3, 2, 5, 4, 7, 6]
        );
    }
}
