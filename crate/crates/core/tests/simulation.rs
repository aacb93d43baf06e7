use std::collections::{BTreeMap, BTreeSet};

use swarm_reshape::engine::{EventKind, SimulationResult};
use swarm_reshape::model::Mode;
use swarm_reshape::output::{
    distances_csv, events_csv, summary_json, trajectories_csv, write_outputs,
};
use swarm_reshape::reshape::{temp_leader_for, MergeDirection};
use swarm_reshape::{load_scenario, run, ScenarioConfig, SimMode, Vec2};

fn reference(mode: SimMode) -> SimulationResult {
    run(&ScenarioConfig::reference(mode)).unwrap()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn single_agent_two_ticks() {
    let config = ScenarioConfig {
        n_agents: 1,
        max_time: 0.1,
        ..ScenarioConfig::default()
    };
    let r = run(&config).unwrap();
    let csv = trajectories_csv(&r);
    assert_eq!(csv.lines().next(), Some("tick,time,agent_id,x,y,heading"));
    assert_eq!(data_rows(&csv).len(), 2);
    assert!(!r.completed);
    assert!(r.distances.is_empty());
}

#[test]
fn summary_agrees_with_the_tables() {
    let r = reference(SimMode::Dfrpsr);
    let text = summary_json(&r);
    let summary: serde_json::Value = serde_json::from_str(&text).unwrap();
    let restored = data_rows(&events_csv(&r))
        .into_iter()
        .find(|row| row[1] == "FormationRestored")
        .unwrap();
    assert_eq!(text.matches("\"reformation_time\"").count(), 1);
    assert!(text.contains(&format!("\"reformation_time\": {},", restored[0])));

    // re-aggregate the minimum of every pair from the CSV text
    let mut mins: BTreeMap<(u64, u64), f64> = BTreeMap::new();
    for row in data_rows(&distances_csv(&r)) {
        let key = (row[1].parse().unwrap(), row[2].parse().unwrap());
        let d: f64 = row[3].parse().unwrap();
        let m = mins.entry(key).or_insert(f64::INFINITY);
        *m = m.min(d);
    }
    let pairs = summary["pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), mins.len());
    for p in pairs {
        let key = (
            p["follower_id"].as_u64().unwrap(),
            p["leader_id"].as_u64().unwrap(),
        );
        assert!(
            (p["min"].as_f64().unwrap() - mins[&key]).abs() < 1e-9,
            "{key:?}"
        );
        let (lo, q1, med, q3, hi) = (
            p["min"].as_f64().unwrap(),
            p["p25"].as_f64().unwrap(),
            p["median"].as_f64().unwrap(),
            p["p75"].as_f64().unwrap(),
            p["max"].as_f64().unwrap(),
        );
        assert!(lo <= q1 && q1 <= med && med <= q3 && q3 <= hi);
    }
}

#[test]
fn leader_pairs_switch_only_at_reshape_and_turn_back() {
    let r = reference(SimMode::Dfrpsr);
    let mut by_time: BTreeMap<u64, BTreeSet<(u32, u32)>> = BTreeMap::new();
    for d in &r.distances {
        let tick = (d.time / r.dt).round() as u64;
        by_time
            .entry(tick)
            .or_default()
            .insert((d.follower_id, d.leader_id));
    }
    let switches: Vec<f64> = by_time
        .iter()
        .zip(by_time.iter().skip(1))
        .filter(|(a, b)| a.1 != b.1)
        .map(|(_, b)| *b.0 as f64 * r.dt)
        .collect();
    let expected = [
        r.event_time(EventKind::ReshapeStart).unwrap(),
        r.event_time(EventKind::TurnBackStart).unwrap(),
    ];
    assert_eq!(switches.len(), 2);
    for (s, e) in switches.iter().zip(expected) {
        assert!((s - e).abs() < 1e-9, "switch at {s}, event at {e}");
    }
}

#[test]
fn modes_advance_without_going_back() {
    let r = reference(SimMode::Dfrpsr);
    let rank = |m: Mode| match m {
        Mode::Formation => 0,
        Mode::QueueTransition => 1,
        Mode::Queue => 2,
        Mode::TurnBack => 3,
    };
    for id in 2..=7usize {
        let mut seq: Vec<Mode> = r.trajectory.iter().map(|f| f.agents[id - 1].mode).collect();
        seq.dedup();
        assert_eq!(
            seq,
            vec![
                Mode::Formation,
                Mode::QueueTransition,
                Mode::Queue,
                Mode::TurnBack,
                Mode::Formation
            ],
            "agent {id}"
        );
        assert!(seq[..4].windows(2).all(|w| rank(w[0]) < rank(w[1])));
    }
}

#[test]
fn reshape_assigns_the_left_into_right_chain() {
    let r = reference(SimMode::Dfrpsr);
    let start = r.event_time(EventKind::ReshapeStart).unwrap();
    let frame = r
        .trajectory
        .iter()
        .find(|f| (f.time - start).abs() < 1e-9)
        .unwrap();
    for a in &frame.agents[1..] {
        assert_eq!(
            a.temp_leader_id,
            Some(temp_leader_for(a.id, MergeDirection::LeftIntoRight, 7).unwrap())
        );
        assert_eq!(a.mode, Mode::QueueTransition);
    }
    let before = &r.trajectory[frame.tick as usize - 1];
    assert!(before.agents.iter().all(|a| a.temp_leader_id.is_none()));
}

#[test]
fn baseline_never_queues() {
    let r = reference(SimMode::BaselineSenseAvoid);
    assert!(r.completed);
    assert_eq!(r.event_count(EventKind::QueueFormed), 0);
    assert_eq!(r.event_count(EventKind::TurnBackStart), 0);
    assert_eq!(r.event_count(EventKind::PassageComplete), 1);
    assert!(r
        .trajectory
        .iter()
        .flat_map(|f| &f.agents)
        .all(|a| a.temp_leader_id.is_none()));
}

#[test]
fn a_wall_without_a_gap_is_flown_around() {
    let mut config = ScenarioConfig::reference(SimMode::Dfrpsr);
    config.obstacles.truncate(1);
    config.obstacles[0].vertices = vec![
        Vec2::new(115.0, -12.0),
        Vec2::new(125.0, -12.0),
        Vec2::new(125.0, 12.0),
        Vec2::new(115.0, 12.0),
    ];
    let obstacles = config.build_obstacles().unwrap();
    let r = run(&config).unwrap();
    assert!(r.event_time(EventKind::DestinationReached).is_some());
    assert_eq!(r.event_count(EventKind::ReshapeStart), 0);
    for f in &r.trajectory {
        for a in &f.agents {
            assert!(obstacles[0].distance_to(a.pose.position) > 0.0);
        }
    }
}

#[test]
fn shipped_scenario_file_loads() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/reference.toml");
    assert_eq!(
        load_scenario(path).unwrap(),
        ScenarioConfig::reference(SimMode::Dfrpsr)
    );
}

#[test]
fn written_files_match_the_renderers() {
    let r = reference(SimMode::Dfrpsr);
    let dir = tempfile::tempdir().unwrap();
    let paths = write_outputs(&r, &dir.path().join("nested")).unwrap();
    assert_eq!(paths.len(), 4);
    let read = |name: &str| std::fs::read_to_string(dir.path().join("nested").join(name)).unwrap();
    assert_eq!(read("events.csv"), events_csv(&r));
    assert_eq!(read("summary.json"), summary_json(&r));
    // no temporary files left behind
    assert_eq!(
        std::fs::read_dir(dir.path().join("nested"))
            .unwrap()
            .count(),
        4
    );
}
