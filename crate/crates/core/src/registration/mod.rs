//! Point-set registration for reformation: exact and annealed assignment,
//! thin-plate spline energy and the turn-back step.

pub mod anneal;
pub mod assignment;
pub mod tps;
pub mod turnback;

pub use anneal::{
    anneal_assignment, anneal_assignment_traced, AnnealOutcome, AnnealSchedule, AnnealStep,
    CorrespondenceMatrix,
};
pub use assignment::{
    exact_assignment, exact_assignment_with, squared_distance_matrix, Assignment, ExactMethod,
};
pub use tps::{bending_energy, tps_energy, TpsParams};
pub use turnback::{max_slot_error, shapes_match, turn_back_step};
