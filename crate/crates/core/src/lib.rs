//! Quasi-static simulation and control for a single-motor gripper whose
//! three motions — finger bending, grasping translation, and pull-in — are
//! multiplexed by statics alone, through a lead screw and a friction
//! clutch that switch their own self-motion under load.
//!
//! The crate is organized around that force-ordering idea:
//!
//! - [`model`] — mechanism parameters, state, and the mode vocabulary;
//! - [`statics`] — the force/torque algebra of the screw interface and
//!   the mode-boundary predicates;
//! - [`contact`] — the compliant fingertip/object contact law;
//! - [`machine`] — stick-slip mode resolution and transition events;
//! - [`scenario`] — runnable scenario descriptions and their file format;
//! - [`trace`] — time-series output, events, and serialization;
//! - [`sim`] — the fixed-step quasi-static integrator;
//! - [`control`] — the sense–switch motor controller;
//! - [`tune`] — design-space feasibility sweeps and parameter selection.

pub mod contact;
pub mod control;
pub mod machine;
pub mod model;
pub mod scenario;
pub mod sim;
pub mod statics;
pub mod trace;
pub mod tune;

pub use contact::{pull_in_displacement, slip_angle_for_displacement, tip_force, ObjectModel};
pub use control::{
    default_threshold, pull_in_target_angle, target_motor_torque, ControlError, ControlGoal,
    Controller,
};
pub use machine::{
    classify_motion, release_sequence, resolve_motion, step_transition, EventKind, StuckState,
    TransitionEvent,
};
pub use model::{Direction, GripperState, MechParams, Mode, ParamError};
pub use scenario::{Scenario, ScenarioKind};
pub use sim::{SimError, SimSession};
pub use statics::{
    alpha_kn, alpha_st, amplification, chain_torque_from_motor, clutch_slip_condition,
    grasp_equilibrium_chain_torque, grasp_equilibrium_tip_force, motor_torque_from_chain,
    pull_in_chain_torque, rotation_condition, screw_wrench, translation_breakaway_torque,
    translation_condition, ResidualRanges, ScrewWrench,
};
pub use trace::{StopReason, Trace, TraceRow};
