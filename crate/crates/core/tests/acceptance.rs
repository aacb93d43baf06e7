//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary
//! under `cargo test` and exits nonzero when any criterion fails.

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use swarm_reshape::engine::{EventKind, SimulationResult};
use swarm_reshape::formation::ShapePointSet;
use swarm_reshape::geometry::segment_polygon_distance;
use swarm_reshape::output::{
    write_outputs, DISTANCES_CSV, EVENTS_CSV, SUMMARY_JSON, TRAJECTORIES_CSV,
};
use swarm_reshape::registration::{tps_energy, AnnealSchedule, Assignment, TpsParams};
use swarm_reshape::reshape::{classify, merge_direction, AvoidanceCase, MergeDirection};
use swarm_reshape::sensing::GapInfo;
use swarm_reshape::verify::{annealer_vs_exact, chain_connectivity, gap_width_sampling};
use swarm_reshape::{run, ScenarioConfig, SimMode, Vec2};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn timed(limit: Duration, outcome: Outcome, start: Instant) -> Outcome {
    let took = start.elapsed();
    let detail = outcome?;
    if took > limit {
        return Err(format!("{detail}; took {took:.2?}, limit {limit:?}"));
    }
    Ok(format!("{detail} ({took:.2?})"))
}

fn reference(mode: SimMode) -> Result<SimulationResult, String> {
    run(&ScenarioConfig::reference(mode)).map_err(|e| e.to_string())
}

fn reformation_ordering() -> Outcome {
    let start = Instant::now();
    let outcome = (|| {
        let d = reference(SimMode::Dfrpsr)?;
        let b = reference(SimMode::BaselineSenseAvoid)?;
        let (Some(td), Some(tb)) = (d.reformation_time(), b.reformation_time()) else {
            return Err("a mode never restored the formation".into());
        };
        let passed = b
            .event_time(EventKind::PassageComplete)
            .ok_or("baseline has no PassageComplete")?;
        let needed = 0.05 * (tb - passed);
        let detail = format!(
            "dfrpsr {td:.1} s, baseline {tb:.1} s, lead {:.1} s, needed {needed:.2} s",
            tb - td
        );
        if td < tb && tb - td >= needed {
            Ok(detail)
        } else {
            Err(detail)
        }
    })();
    timed(Duration::from_secs(10), outcome, start)
}

fn event_structure() -> Outcome {
    let start = Instant::now();
    let outcome = (|| {
        let r = reference(SimMode::Dfrpsr)?;
        use EventKind::*;
        let order = [
            ObstacleDetected,
            ReshapeStart,
            QueueFormed,
            PassageComplete,
            TurnBackStart,
            FormationRestored,
            DestinationReached,
        ];
        let mut times = Vec::new();
        for kind in order {
            if r.event_count(kind) != 1 {
                return Err(format!(
                    "{} emitted {} times",
                    kind.as_str(),
                    r.event_count(kind)
                ));
            }
            times.push(r.event_time(kind).unwrap());
        }
        for (k, w) in times.windows(2).enumerate() {
            // ReshapeStart <= QueueFormed; every other pair is strict
            let ok = if k == 1 { w[0] <= w[1] } else { w[0] < w[1] };
            if !ok {
                return Err(format!(
                    "{} at {} then {} at {}",
                    order[k].as_str(),
                    w[0],
                    order[k + 1].as_str(),
                    w[1]
                ));
            }
        }
        Ok(times
            .iter()
            .map(|t| format!("{t:.1}"))
            .collect::<Vec<_>>()
            .join(" < "))
    })();
    timed(Duration::from_secs(5), outcome, start)
}

fn annealer_equivalence() -> Outcome {
    let start = Instant::now();
    let report = annealer_vs_exact(2024, 200, &AnnealSchedule::default());
    let detail = format!(
        "{} matched, {} degenerate skipped",
        report.checked, report.skipped
    );
    let outcome = if !report.passed() {
        Err(format!("{detail}; {}", report.failures.join("; ")))
    } else if report.checked < 190 {
        Err(format!("{detail}; fewer than 95% non-degenerate"))
    } else {
        Ok(detail)
    };
    timed(Duration::from_secs(30), outcome, start)
}

fn chains() -> Outcome {
    let start = Instant::now();
    let report = chain_connectivity(3..=15);
    let outcome = if report.passed() {
        Ok(format!("{} graphs", report.checked))
    } else {
        Err(report.failures.join("; "))
    };
    timed(Duration::from_secs(1), outcome, start)
}

fn check_safety(r: &SimulationResult, config: &ScenarioConfig) -> Result<(f64, f64), String> {
    let obstacles = config.build_obstacles().map_err(|e| e.to_string())?;
    let mut min_sep = f64::INFINITY;
    let mut worst_speed = 0.0f64;
    for w in r.trajectory.windows(2) {
        let (before, after) = (&w[0], &w[1]);
        for (a, b) in before.agents.iter().zip(&after.agents) {
            let (p, q) = (a.pose.position, b.pose.position);
            for o in &obstacles {
                if segment_polygon_distance(p, q, &o.vertices) <= 0.0 {
                    return Err(format!(
                        "agent {} enters obstacle {} at t={:.1}",
                        a.id, o.id, after.time
                    ));
                }
            }
            let expected = a.speed * config.dt;
            worst_speed = worst_speed.max((p.distance(q) - expected).abs() / expected);
        }
        for (i, a) in after.agents.iter().enumerate() {
            for b in &after.agents[i + 1..] {
                min_sep = min_sep.min(a.pose.position.distance(b.pose.position));
            }
        }
    }
    if min_sep <= 0.5 * config.queue_gap {
        return Err(format!("agents came within {min_sep:.3} m"));
    }
    if worst_speed > 1e-9 {
        return Err(format!("step length off by {worst_speed:e} relative"));
    }
    Ok((min_sep, worst_speed))
}

fn safety() -> Outcome {
    let start = Instant::now();
    let outcome = (|| {
        let mut parts = Vec::new();
        for mode in [SimMode::Dfrpsr, SimMode::BaselineSenseAvoid] {
            let config = ScenarioConfig::reference(mode);
            let r = reference(mode)?;
            let (sep, speed) =
                check_safety(&r, &config).map_err(|e| format!("{}: {e}", mode.as_str()))?;
            parts.push(format!(
                "{} min separation {sep:.2} m, step error {speed:.1e}",
                mode.as_str()
            ));
        }
        Ok(parts.join("; "))
    })();
    timed(Duration::from_secs(10), outcome, start)
}

fn tps_reduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let params = TpsParams { lambda: 0.0 };
    let mut worst = 0.0f64;
    for k in 0..100 {
        let n = 2 + k % 12;
        let xs: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)))
            .collect();
        let vs: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)))
            .collect();
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let mut expected = 0.0;
        for i in 0..n {
            let (dx, dy) = (xs[i].0 - vs[perm[i]].0, xs[i].1 - vs[perm[i]].1);
            expected += dx * dx + dy * dy;
        }
        let shape = |pts: &[(f64, f64)]| {
            ShapePointSet::new(pts.iter().map(|&(x, y)| Vec2::new(x, y)).collect())
        };
        let (x, v) = (shape(&xs), shape(&vs));
        let assignment = Assignment {
            slot_of: perm,
            cost: 0.0,
        };
        let got = tps_energy(&x, &v, &assignment, &params).map_err(|e| e.to_string())?;
        worst = worst.max((got - expected).abs() / expected);
        let same =
            tps_energy(&x, &x, &Assignment::identity(n), &params).map_err(|e| e.to_string())?;
        if same != 0.0 {
            return Err(format!("set {k}: identical shapes give {same}"));
        }
    }
    if worst <= 1e-12 {
        Ok(format!("100 sets, worst relative error {worst:.1e}"))
    } else {
        Err(format!("relative error {worst:e}"))
    }
}

fn gap_oracle() -> Outcome {
    let start = Instant::now();
    let report = gap_width_sampling(77, 50, 10_000);
    let outcome = if report.passed() {
        Ok(format!("{} polygon pairs", report.checked))
    } else {
        Err(report.failures.join("; "))
    };
    timed(Duration::from_secs(30), outcome, start)
}

fn determinism() -> Outcome {
    let dirs = [tempfile::tempdir(), tempfile::tempdir()];
    let mut written = Vec::new();
    for dir in &dirs {
        let dir = dir.as_ref().map_err(|e| e.to_string())?;
        let r = reference(SimMode::Dfrpsr)?;
        write_outputs(&r, dir.path()).map_err(|e| e.to_string())?;
        written.push(dir.path().to_path_buf());
    }
    let mut bytes = 0;
    for name in [TRAJECTORIES_CSV, DISTANCES_CSV, EVENTS_CSV, SUMMARY_JSON] {
        let read = |d: &Path| std::fs::read(d.join(name)).map_err(|e| e.to_string());
        let (a, b) = (read(&written[0])?, read(&written[1])?);
        if a != b {
            return Err(format!("{name} differs"));
        }
        bytes += a.len();
    }
    Ok(format!("4 files, {bytes} bytes identical"))
}

fn case_table() -> Outcome {
    let gap = |width: f64| GapInfo {
        width,
        midpoint: Vec2::new(10.0, 0.0),
        bearing: 0.0,
        obstacle_ids: (0, 1),
        segment: (Vec2::new(10.0, -width / 2.0), Vec2::new(10.0, width / 2.0)),
    };
    let cases = [
        (
            classify(1, None, 5.0).ok(),
            Some(AvoidanceCase::SingleObstacle),
        ),
        (
            classify(2, Some(&gap(3.0)), 5.0).ok(),
            Some(AvoidanceCase::TreatAsSingle),
        ),
        (
            classify(2, Some(&gap(5.0)), 5.0).ok(),
            Some(AvoidanceCase::PassThrough),
        ),
        (
            classify(3, Some(&gap(9.0)), 5.0).ok(),
            Some(AvoidanceCase::PassThrough),
        ),
        (classify(0, None, 5.0).ok(), None),
    ];
    for (k, (got, want)) in cases.iter().enumerate() {
        if got != want {
            return Err(format!("classify case {k}: {got:?}, expected {want:?}"));
        }
    }
    let angles = [
        (-0.2, MergeDirection::LeftIntoRight),
        (0.2, MergeDirection::RightIntoLeft),
        (0.0, MergeDirection::LeftIntoRight),
        (-0.0, MergeDirection::LeftIntoRight),
    ];
    for (angle, want) in angles {
        if merge_direction(angle) != want {
            return Err(format!(
                "merge_direction({angle}) = {:?}",
                merge_direction(angle)
            ));
        }
    }
    Ok("5 classify rows, 4 merge rows".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("reformation-time ordering", reformation_ordering),
        ("event structure", event_structure),
        ("annealer vs exact", annealer_equivalence),
        ("chain well-formedness", chains),
        ("safety and speed", safety),
        ("energy reduction at zero bending weight", tps_reduction),
        ("gap-width oracle", gap_oracle),
        ("determinism", determinism),
        ("case tables", case_table),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {} {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", k + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
