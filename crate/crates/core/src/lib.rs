//! Deterministic 2D drone-swarm simulator.
//!
//! A leader and its followers fly a V toward a destination. When the
//! leader's sensor finds a gap between two obstacles that is wide enough,
//! every follower is handed a temporary leader by ID arithmetic so the V
//! collapses into a single-file queue, the queue threads the gap, and the
//! swarm then re-registers onto the V with an annealed soft assignment.
//! A baseline mode, where every agent dodges obstacles on its own, is
//! provided for comparison.
//!
//! ```
//! use swarm_reshape::{run, ScenarioConfig, SimMode, EventKind};
//!
//! let config = ScenarioConfig::reference(SimMode::Dfrpsr);
//! let result = run(&config).unwrap();
//! assert!(result.completed);
//! assert!(result.event_time(EventKind::FormationRestored).is_some());
//! ```

pub mod config;
pub mod engine;
pub mod error;
pub mod formation;
pub mod geometry;
pub mod model;
pub mod output;
pub mod registration;
pub mod reshape;
pub mod sensing;
pub mod verify;

pub use config::{load_scenario, ScenarioConfig, SimMode};
pub use engine::{run, Event, EventKind, SimulationResult};
pub use error::{Error, Result};
pub use geometry::{Pose, Vec2};
pub use output::{write_comparison, write_outputs};
