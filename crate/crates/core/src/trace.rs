//! Run output: the sampled time series, the event log, and their text
//! formats.
//!
//! All numbers are written with Rust's shortest round-trip float
//! formatting, so a trace produced from the same scenario and seed is
//! byte-identical across runs and platforms with IEEE-754 doubles.

use crate::machine::TransitionEvent;
use crate::model::Mode;
use crate::scenario::Scenario;
use std::fmt::Write as _;

/// One sampled instant. `tau_m` is the motor torque and `tau_rc2` the
/// chain torque on sprocket 2; for bench runs the same motor-side
/// convention is kept so every row obeys `tau_m = 2 * tau_rc2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub tau_m: f64,
    pub tau_rc2: f64,
    pub theta_m: f64,
    pub theta_f: f64,
    pub theta_sp2: f64,
    pub d_f: f64,
    pub f_tip: f64,
    pub d_pi: f64,
    pub mode: Mode,
}

/// Why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// The configured duration elapsed.
    DurationEnd,
    /// The motor torque reached the configured cap.
    TorqueCap,
    /// Reverse motion returned the mechanism to the fully open posture.
    FullyOpen,
    /// The supervising controller commanded a stop.
    ControllerStop,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::DurationEnd => "duration_end",
            StopReason::TorqueCap => "torque_cap",
            StopReason::FullyOpen => "fully_open",
            StopReason::ControllerStop => "controller_stop",
        }
    }
}

/// A complete run record.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
    pub events: Vec<TransitionEvent>,
    /// Set when mode selection flapped between bending and grasping
    /// without a stopper engagement in between, or when residual ranges
    /// made the selection ambiguous outright.
    pub chatter: bool,
    /// ∫ tau_m dθ_m over the run, in joules.
    pub motor_work: f64,
    /// Elastic work delivered to the object across both fingertips.
    pub tip_work: f64,
    pub stop: StopReason,
}

pub const TRACE_HEADER: &str = "t,tau_m,tau_rc2,theta_m,theta_f,theta_sp2,d_f,f_tip,d_pi,mode";

pub const EVENTS_HEADER: &str =
    "t,event,mode,theta_m,theta_f,theta_sp2,d_f,f_tip,d_pi,stopper_engaged,tip_friction_lock";

impl Trace {
    /// The time series as CSV, fixed column order, header included.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(TRACE_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.t,
                r.tau_m,
                r.tau_rc2,
                r.theta_m,
                r.theta_f,
                r.theta_sp2,
                r.d_f,
                r.f_tip,
                r.d_pi,
                r.mode
            );
        }
        out
    }

    /// The event log as CSV, one line per transition.
    pub fn events_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(EVENTS_HEADER);
        out.push('\n');
        for e in &self.events {
            let s = &e.state;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                e.time,
                e.kind,
                s.mode,
                s.theta_m,
                s.theta_f,
                s.theta_sp2,
                s.d_f,
                s.f_tip,
                s.d_pi,
                s.stopper_engaged,
                s.tip_friction_lock
            );
        }
        out
    }

    /// Sidecar metadata: the full scenario echo plus run facts, in the
    /// same key-value format as scenario files.
    pub fn meta(&self, scenario: &Scenario, version: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# run metadata");
        let _ = writeln!(out, "version = {version}");
        let _ = writeln!(out, "stop = {}", self.stop.as_str());
        let _ = writeln!(out, "chatter = {}", self.chatter);
        let _ = writeln!(out, "rows = {}", self.rows.len());
        let _ = writeln!(out, "events = {}", self.events.len());
        let _ = writeln!(out, "motor_work = {}", self.motor_work);
        let _ = writeln!(out, "tip_work = {}", self.tip_work);
        let _ = writeln!(out, "# scenario echo");
        out.push_str(&scenario.serialize());
        out
    }

    /// Dedup of the executed mode sequence, chatter markers skipped.
    pub fn mode_sequence(&self) -> Vec<Mode> {
        let mut seq: Vec<Mode> = Vec::new();
        for r in &self.rows {
            if r.mode == Mode::Chatter {
                continue;
            }
            if seq.last() != Some(&r.mode) {
                seq.push(r.mode);
            }
        }
        seq
    }
}
