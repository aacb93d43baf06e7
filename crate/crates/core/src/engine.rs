//! The global loop: sensing, reshaping decisions, turn-back and stepping.
//!
//! Every tick decides all waypoints from the current world, then commits
//! all agents at once. Decisions taken at time `t` (new temporary leaders,
//! mode switches) are visible in the state at `t + dt`, and the matching
//! events carry that time. Conditions observed on a committed state (queue
//! formed, passage complete, formation restored, arrival) are stamped with
//! the time of that state.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::config::{ScenarioConfig, SimMode};
use crate::error::Result;
use crate::formation::{current_shape, slot_positions, FormationSpec, ShapePointSet};
use crate::geometry::{Pose, Vec2};
use crate::model::{step_toward, track_moving_point, AgentState, Mode, Steer, WorldState};
use crate::registration::{anneal_assignment, shapes_match, Assignment};
use crate::reshape::{
    avoid_single, classify, emerged_from, leader_passage_waypoint, merge_direction,
    passage_complete, path_threat, queue_waypoint, temp_leader_for, AvoidanceCase, MergeDirection,
};
use crate::sensing::{compute_gap, detect_obstacles, Detection, GapInfo};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum EventKind {
    ObstacleDetected,
    ReshapeStart,
    QueueFormed,
    PassageComplete,
    TurnBackStart,
    FormationRestored,
    DestinationReached,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::ObstacleDetected => "ObstacleDetected",
            EventKind::ReshapeStart => "ReshapeStart",
            EventKind::QueueFormed => "QueueFormed",
            EventKind::PassageComplete => "PassageComplete",
            EventKind::TurnBackStart => "TurnBackStart",
            EventKind::FormationRestored => "FormationRestored",
            EventKind::DestinationReached => "DestinationReached",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    pub agent_id: u32,
}

/// Distance between a follower and its effective leader at one instant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceRecord {
    pub time: f64,
    pub follower_id: u32,
    pub leader_id: u32,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub tick: u64,
    pub time: f64,
    /// Ordered by id.
    pub agents: Vec<AgentState>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub mode: SimMode,
    pub dt: f64,
    /// Initial state plus one frame per tick.
    pub trajectory: Vec<Frame>,
    pub events: Vec<Event>,
    pub distances: Vec<DistanceRecord>,
    /// False when `max_time` ran out first.
    pub completed: bool,
    /// Time of the last frame.
    pub end_time: f64,
}

impl SimulationResult {
    pub fn event_time(&self, kind: EventKind) -> Option<f64> {
        self.events.iter().find(|e| e.kind == kind).map(|e| e.time)
    }

    pub fn event_count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    pub fn reformation_time(&self) -> Option<f64> {
        self.event_time(EventKind::FormationRestored)
    }

    /// Time the leader reached the destination.
    pub fn mission_time(&self) -> Option<f64> {
        self.event_time(EventKind::DestinationReached)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Phase {
    /// Flying the V toward the destination.
    Cruise,
    /// Something is in range but no passable gap: every agent avoids
    /// locally while holding its slot.
    Avoid,
    /// Queueing through a gap.
    Reshape { gap: GapInfo },
    /// Flying to registered slots; `slot_of` covers every agent.
    TurnBack { assignment: Assignment },
}

/// What one agent wants to do this tick, before the safety filter.
#[derive(Debug, Clone, Copy)]
struct Intent {
    steer: Steer,
    /// Whether the step must keep `min_separation` from other agents.
    yields: bool,
    /// Avoidance side committed to this tick: obstacle id and `true` for left.
    side: Option<(u32, bool)>,
}

/// A running simulation. [`run`] drives it to completion.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: ScenarioConfig,
    spec: FormationSpec,
    pub world: WorldState,
    phase: Phase,
    /// Formation disturbed and reformation pending.
    psr: bool,
    /// Obstacles already dealt with; they never trigger a new episode.
    handled: BTreeSet<u32>,
    /// Per-agent "emerged from the gap" flags of the current passage.
    passed: Vec<bool>,
    turn_back_due: bool,
    /// Slot of each agent in the V; updated by turn-back registration.
    slot_map: Vec<usize>,
    /// Baseline: obstacles the leader has seen and the direction of travel
    /// when the first one appeared.
    seen: BTreeSet<u32>,
    travel_dir: Option<Vec2>,
    passage_done: bool,
    events: Vec<Event>,
    arrived: bool,
    /// Per agent: the obstacle being avoided and the side chosen on first
    /// contact. Keeping the side stops agents dithering along a wall face.
    avoid_side: Vec<Option<(u32, bool)>>,
}

impl Simulation {
    /// Agents start on their slots around the configured leader pose.
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let spec = config.formation_spec();
        let start = config.start_pose();
        let slots = slot_positions(&start, &spec);
        let agents = slots
            .points
            .iter()
            .enumerate()
            .map(|(k, &p)| {
                let speed = if k == 0 {
                    config.agent_speed
                } else {
                    config.follower_speed()
                };
                AgentState::new(k as u32 + 1, Pose::new(p, start.heading), speed)
            })
            .collect::<Result<Vec<_>>>()?;
        let world = WorldState {
            tick: 0,
            time: 0.0,
            agents,
            obstacles: config.build_obstacles()?,
            destination: config.destination,
        };
        Ok(Simulation {
            config: config.clone(),
            spec,
            world,
            phase: Phase::Cruise,
            psr: false,
            handled: BTreeSet::new(),
            passed: vec![false; config.n_agents],
            turn_back_due: false,
            slot_map: (0..config.n_agents).collect(),
            seen: BTreeSet::new(),
            travel_dir: None,
            passage_done: false,
            events: Vec::new(),
            arrived: false,
            avoid_side: vec![None; config.n_agents],
        })
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Reformation pending.
    pub fn psr(&self) -> bool {
        self.psr
    }

    /// Leader arrived and nothing left to restore.
    pub fn is_finished(&self) -> bool {
        self.arrived && !self.psr
    }

    fn emit(&mut self, time: f64, kind: EventKind, agent_id: u32) {
        self.events.push(Event {
            time,
            kind,
            agent_id,
        });
    }

    fn emitted(&self, kind: EventKind) -> bool {
        self.events.iter().any(|e| e.kind == kind)
    }

    fn time_of(&self, tick: u64) -> f64 {
        tick as f64 * self.config.dt
    }

    /// The destination, or once reached a point straight ahead: agents
    /// never stop, so the leader holds its course while the rest reform.
    fn leader_goal(&self) -> Vec2 {
        if self.arrived {
            let leader = self.world.leader();
            leader
                .course_pose()
                .advanced(self.config.lookahead)
                .position
        } else {
            self.world.destination
        }
    }

    /// Target shape for the leader advanced one step along its heading.
    fn predicted_slots(&self) -> (ShapePointSet, Vec2) {
        let leader = self.world.leader();
        let pose = leader.pose.advanced(leader.speed * self.config.dt);
        (slot_positions(&pose, &self.spec), leader.velocity())
    }

    /// Advances the world by one tick.
    pub fn tick(&mut self) -> Result<()> {
        let t_next = self.time_of(self.world.tick + 1);
        let intents = match self.config.mode {
            SimMode::Dfrpsr => self.decide_dfrpsr(t_next)?,
            SimMode::BaselineSenseAvoid => self.decide_baseline(t_next),
        };
        let mut next = Vec::with_capacity(intents.len());
        for (agent, intent) in self.world.agents.iter().zip(&intents) {
            next.push(self.safe_step(agent, intent)?);
        }
        self.world.agents = next;
        self.avoid_side = intents.iter().map(|i| i.side).collect();
        self.world.tick += 1;
        self.world.time = t_next;
        match self.config.mode {
            SimMode::Dfrpsr => self.observe_dfrpsr(t_next),
            SimMode::BaselineSenseAvoid => self.observe_baseline(t_next),
        }
        let leader = self.world.leader().pose.position;
        if !self.arrived && leader.distance(self.world.destination) <= self.config.arrival_radius {
            self.arrived = true;
            self.emit(t_next, EventKind::DestinationReached, 1);
        }
        Ok(())
    }

    fn decide_dfrpsr(&mut self, t_next: f64) -> Result<Vec<Intent>> {
        let t = self.world.time;
        let range = self.config.detection_range;
        let (_, leader_dets) = detect_obstacles(self.world.leader(), &self.world, range);
        let fresh: Vec<Detection> = leader_dets
            .iter()
            .filter(|d| !self.handled.contains(&d.obstacle_id))
            .cloned()
            .collect();

        let reshaping = matches!(self.phase, Phase::Reshape { .. });
        if matches!(self.phase, Phase::Cruise | Phase::Avoid) {
            if fresh.is_empty() {
                self.phase = Phase::Cruise;
            } else {
                if !self.emitted(EventKind::ObstacleDetected) {
                    self.emit(t, EventKind::ObstacleDetected, 1);
                }
                let leader_pose = self.world.leader().pose;
                let gap = compute_gap(&leader_pose, &fresh, &self.world);
                let case = classify(fresh.len(), gap.as_ref(), self.config.safe_dist())?;
                match (case, gap) {
                    (AvoidanceCase::PassThrough, Some(gap)) => {
                        self.start_reshape(gap, &fresh, t_next)?;
                    }
                    _ => self.phase = Phase::Avoid,
                }
            }
        } else if reshaping && self.turn_back_due {
            self.start_turn_back(t_next)?;
        }

        let (slots, slot_velocity) = self.predicted_slots();
        let dt = self.config.dt;
        let mut intents = Vec::with_capacity(self.world.agents.len());
        for agent in &self.world.agents {
            let intent = if agent.id == 1 {
                let goal = match &self.phase {
                    Phase::Reshape { gap } => {
                        leader_passage_waypoint(agent.pose.position, gap, self.world.destination)
                    }
                    _ => self.leader_goal(),
                };
                let steer = Steer {
                    waypoint: goal,
                    course: (goal - agent.pose.position)
                        .normalized()
                        .map_or(agent.course, Vec2::angle),
                };
                let (steer, side) = self.avoid_locally(agent, &leader_dets, steer);
                Intent {
                    steer,
                    yields: false,
                    side,
                }
            } else {
                match agent.mode {
                    Mode::QueueTransition | Mode::Queue => {
                        let lead_id = agent
                            .effective_leader_id()
                            .expect("queued agents have a leader");
                        let lead = self.world.agent(lead_id).expect("leader exists");
                        let ahead = lead.course_pose().advanced(self.config.agent_speed * dt);
                        let target = queue_waypoint(&ahead, self.config.queue_gap);
                        let velocity = Vec2::from_angle(lead.course) * self.config.agent_speed;
                        Intent {
                            steer: track_moving_point(
                                agent.pose.position,
                                agent.speed,
                                dt,
                                target,
                                velocity,
                            ),
                            yields: true,
                            side: None,
                        }
                    }
                    Mode::Formation | Mode::TurnBack => {
                        let slot = match &self.phase {
                            Phase::TurnBack { assignment } => {
                                assignment.slot_of[(agent.id - 1) as usize]
                            }
                            _ => self.slot_map[(agent.id - 1) as usize],
                        };
                        let steer = track_moving_point(
                            agent.pose.position,
                            agent.speed,
                            dt,
                            slots.points[slot],
                            slot_velocity,
                        );
                        let (_, own) = detect_obstacles(agent, &self.world, range);
                        let (steer, side) = self.avoid_locally(agent, &own, steer);
                        Intent {
                            steer,
                            yields: true,
                            side,
                        }
                    }
                }
            };
            intents.push(intent);
        }
        Ok(intents)
    }

    /// Broadcasts temporary leaders; they take effect in the next state.
    fn start_reshape(&mut self, gap: GapInfo, fresh: &[Detection], t_next: f64) -> Result<()> {
        let dir: MergeDirection = merge_direction(gap.bearing);
        let n = self.world.agents.len();
        for agent in self.world.agents.iter_mut().skip(1) {
            agent.temp_leader_id = Some(temp_leader_for(agent.id, dir, n)?);
            agent.mode = Mode::QueueTransition;
        }
        self.handled.extend(fresh.iter().map(|d| d.obstacle_id));
        self.passed = vec![false; n];
        self.passed[0] = passage_complete(
            self.world.leader().pose.position,
            &gap,
            &self.world.obstacles,
            self.config.clearance,
        );
        self.psr = true;
        self.phase = Phase::Reshape { gap };
        self.emit(t_next, EventKind::ReshapeStart, 1);
        Ok(())
    }

    /// Registers the current shape onto the V once; the leader keeps the
    /// apex and the followers are matched among the remaining slots.
    fn start_turn_back(&mut self, t_next: f64) -> Result<()> {
        self.turn_back_due = false;
        let n = self.world.agents.len();
        let target = slot_positions(&self.world.leader().pose, &self.spec);
        let current = current_shape(&self.world);
        let mut slot_of = vec![0usize];
        if n > 1 {
            let followers = ShapePointSet::new(current.points[1..].to_vec());
            let slots = ShapePointSet::new(target.points[1..].to_vec());
            let a = anneal_assignment(&followers, &slots, &self.config.anneal)?;
            slot_of.extend(a.slot_of.iter().map(|j| j + 1));
        }
        let assignment = Assignment::from_shapes(slot_of, &current, &target);
        for agent in self.world.agents.iter_mut().skip(1) {
            agent.temp_leader_id = None;
            agent.mode = Mode::TurnBack;
        }
        self.phase = Phase::TurnBack { assignment };
        self.emit(t_next, EventKind::TurnBackStart, 1);
        Ok(())
    }

    fn observe_dfrpsr(&mut self, t: f64) {
        let tol = self.config.queue_tol;
        let gap_tol = self.config.queue_gap;
        match self.phase.clone() {
            Phase::Reshape { gap } => {
                let mut joined = Vec::new();
                for agent in self.world.agents.iter().skip(1) {
                    if agent.mode == Mode::QueueTransition {
                        let lead = self
                            .world
                            .agent(
                                agent
                                    .effective_leader_id()
                                    .expect("queued agents have a leader"),
                            )
                            .expect("leader exists");
                        let slot = queue_waypoint(&lead.course_pose(), gap_tol);
                        if agent.pose.position.distance(slot) <= tol {
                            joined.push(agent.id);
                        }
                    }
                }
                for id in &joined {
                    self.world.agents[(*id - 1) as usize].mode = Mode::Queue;
                }
                if !self.emitted(EventKind::QueueFormed)
                    && self
                        .world
                        .agents
                        .iter()
                        .skip(1)
                        .all(|a| a.mode == Mode::Queue)
                {
                    let last = joined.last().copied().unwrap_or(1);
                    self.emit(t, EventKind::QueueFormed, last);
                }
                let mut last_out = None;
                for (k, agent) in self.world.agents.iter().enumerate() {
                    if !self.passed[k]
                        && passage_complete(
                            agent.pose.position,
                            &gap,
                            &self.world.obstacles,
                            self.config.clearance,
                        )
                    {
                        self.passed[k] = true;
                        last_out = Some(agent.id);
                    }
                }
                if !self.turn_back_due && self.passed.iter().all(|p| *p) {
                    self.turn_back_due = true;
                    self.emit(t, EventKind::PassageComplete, last_out.unwrap_or(1));
                }
            }
            Phase::TurnBack { assignment } => {
                let target = slot_positions(&self.world.leader().pose, &self.spec);
                if shapes_match(
                    &current_shape(&self.world),
                    &target,
                    &assignment,
                    self.config.turnback_tol,
                ) {
                    for agent in self.world.agents.iter_mut() {
                        agent.mode = Mode::Formation;
                    }
                    self.slot_map = assignment.slot_of.clone();
                    self.psr = false;
                    self.phase = Phase::Cruise;
                    self.emit(t, EventKind::FormationRestored, 1);
                }
            }
            Phase::Cruise | Phase::Avoid => {}
        }
    }

    fn decide_baseline(&mut self, t_next: f64) -> Vec<Intent> {
        let t = self.world.time;
        let range = self.config.detection_range;
        let (_, leader_dets) = detect_obstacles(self.world.leader(), &self.world, range);
        if !leader_dets.is_empty() {
            if !self.emitted(EventKind::ObstacleDetected) {
                self.emit(t, EventKind::ObstacleDetected, 1);
                self.travel_dir = Some(self.world.leader().pose.forward());
            }
            self.seen.extend(leader_dets.iter().map(|d| d.obstacle_id));
        }
        let (slots, slot_velocity) = self.predicted_slots();
        let dt = self.config.dt;
        let mut intents = Vec::with_capacity(self.world.agents.len());
        let mut first_avoider = None;
        for agent in &self.world.agents {
            let steer = if agent.id == 1 {
                let goal = self.leader_goal();
                Steer {
                    waypoint: goal,
                    course: (goal - agent.pose.position)
                        .normalized()
                        .map_or(agent.course, Vec2::angle),
                }
            } else {
                let slot = slots.points[self.slot_map[(agent.id - 1) as usize]];
                track_moving_point(agent.pose.position, agent.speed, dt, slot, slot_velocity)
            };
            let (_, own) = detect_obstacles(agent, &self.world, range);
            let (avoided, side) = self.avoid_locally(agent, &own, steer);
            if side.is_some() && first_avoider.is_none() {
                first_avoider = Some(agent.id);
            }
            intents.push(Intent {
                steer: avoided,
                yields: agent.id != 1,
                side,
            });
        }
        if let Some(id) = first_avoider {
            if !self.psr && !self.passage_done {
                self.psr = true;
                self.emit(t_next, EventKind::ReshapeStart, id);
            }
        }
        intents
    }

    fn observe_baseline(&mut self, t: f64) {
        if !self.psr {
            return;
        }
        if !self.passage_done {
            let dir = self
                .travel_dir
                .unwrap_or_else(|| self.world.leader().pose.forward());
            let clearance = self.config.clearance;
            let all_out = self.world.agents.iter().all(|a| {
                self.seen.iter().all(|id| {
                    self.world
                        .obstacle(*id)
                        .is_none_or(|o| emerged_from(a.pose.position, o, dir, clearance))
                })
            });
            if all_out {
                self.passage_done = true;
                self.emit(t, EventKind::PassageComplete, 1);
            }
            return;
        }
        let target = slot_positions(&self.world.leader().pose, &self.spec);
        let identity =
            Assignment::from_shapes(self.slot_map.clone(), &current_shape(&self.world), &target);
        if shapes_match(
            &current_shape(&self.world),
            &target,
            &identity,
            self.config.turnback_tol,
        ) {
            self.psr = false;
            self.emit(t, EventKind::FormationRestored, 1);
        }
    }

    /// Swaps the steering target for a lateral avoidance waypoint when the
    /// path toward it closes in on a detected obstacle. The side picked on
    /// first contact with an obstacle is kept until the path is clear.
    fn avoid_locally(
        &self,
        agent: &AgentState,
        detections: &[Detection],
        steer: Steer,
    ) -> (Steer, Option<(u32, bool)>) {
        let pos = agent.pose.position;
        let Some(threat) = path_threat(
            pos,
            steer.waypoint,
            self.config.lookahead,
            detections,
            &self.world.obstacles,
            self.config.clearance,
        ) else {
            return (steer, None);
        };
        let heading = (steer.waypoint - pos)
            .normalized()
            .map_or(agent.course, Vec2::angle);
        let along_path = Pose::new(pos, heading);
        let mut waypoint = avoid_single(&along_path, &threat, self.config.clearance);
        let offset = waypoint - threat.closest_point;
        let mut left = along_path.forward().cross(offset) > 0.0;
        if let Some((id, committed)) = self.avoid_side[(agent.id - 1) as usize] {
            if id == threat.obstacle_id && committed != left {
                waypoint = threat.closest_point - offset;
                left = committed;
            }
        }
        let steer = Steer {
            waypoint,
            course: (waypoint - pos)
                .normalized()
                .map_or(agent.course, Vec2::angle),
        };
        (steer, Some((threat.obstacle_id, left)))
    }

    /// Steps toward the intent, turning by the smallest multiple of 5 degrees
    /// that keeps the landing point clear of obstacles and, for yielding
    /// agents, of every other agent.
    fn safe_step(&self, agent: &AgentState, intent: &Intent) -> Result<AgentState> {
        let pos = agent.pose.position;
        let step = agent.speed * self.config.dt;
        let preferred = (intent.steer.waypoint - pos)
            .normalized()
            .map_or(agent.pose.heading, Vec2::angle);
        let margin = self.config.obstacle_margin;
        let min_sep = self.config.min_separation();
        // how far a landing point is from violating any constraint
        let slack = |land: Vec2| -> f64 {
            let mut s = f64::INFINITY;
            for o in &self.world.obstacles {
                s = s.min(o.distance_to(land) - margin);
            }
            if intent.yields {
                for other in &self.world.agents {
                    if other.id == agent.id {
                        continue;
                    }
                    let d = land.distance(other.pose.position);
                    // moving apart is always allowed
                    if d < min_sep && d < pos.distance(other.pose.position) {
                        s = s.min(d - min_sep);
                    }
                }
            }
            s
        };
        let increment = 5f64.to_radians();
        let mut best: Option<(f64, f64)> = None;
        let mut chosen = None;
        'search: for k in 0..=36 {
            for sign in [1.0, -1.0] {
                if k == 0 && sign < 0.0 {
                    continue;
                }
                let heading = preferred + sign * k as f64 * increment;
                let land = pos + Vec2::from_angle(heading) * step;
                let s = slack(land);
                if s > 0.0 {
                    chosen = Some(heading);
                    break 'search;
                }
                if best.is_none_or(|(bs, _)| s > bs) {
                    best = Some((s, heading));
                }
            }
        }
        let heading = chosen.unwrap_or_else(|| best.map_or(preferred, |(_, h)| h));
        let mut next = step_toward(agent, pos + Vec2::from_angle(heading), self.config.dt)?;
        next.course = if heading == preferred {
            crate::geometry::wrap_angle_unchecked(intent.steer.course)
        } else {
            next.pose.heading
        };
        Ok(next)
    }

    fn frame(&self) -> Frame {
        Frame {
            tick: self.world.tick,
            time: self.world.time,
            agents: self.world.agents.clone(),
        }
    }

    fn record_distances(&self, out: &mut Vec<DistanceRecord>) {
        for agent in self.world.agents.iter().skip(1) {
            if let Some(lead) = agent
                .effective_leader_id()
                .and_then(|id| self.world.agent(id))
            {
                out.push(DistanceRecord {
                    time: self.world.time,
                    follower_id: agent.id,
                    leader_id: lead.id,
                    distance: agent.pose.position.distance(lead.pose.position),
                });
            }
        }
    }
}

/// Runs a scenario until the leader has arrived with the formation intact,
/// or until `max_time`.
pub fn run(config: &ScenarioConfig) -> Result<SimulationResult> {
    let mut sim = Simulation::new(config)?;
    let mut trajectory = vec![sim.frame()];
    let mut distances = Vec::new();
    sim.record_distances(&mut distances);
    let max_ticks = (config.max_time / config.dt).round() as u64;
    while !sim.is_finished() && sim.world.tick < max_ticks {
        sim.tick()?;
        trajectory.push(sim.frame());
        sim.record_distances(&mut distances);
    }
    Ok(SimulationResult {
        mode: config.mode,
        dt: config.dt,
        trajectory,
        events: sim.events.clone(),
        distances,
        completed: sim.is_finished(),
        end_time: sim.world.time,
    })
}
