//! Mode selection and transition bookkeeping.
//!
//! Mode switching is stick-slip logic at two interfaces. Onset of a new
//! motion is gated by the strict static-friction predicates; a motion
//! already under way continues while its kinetic balance is sustained
//! (non-strict), which is why a steady trace row can sit exactly on a
//! predicate boundary without being misread as stuck.

use crate::model::{Direction, GripperState, MechParams, Mode};
use crate::statics::{
    clutch_slip_condition, grasp_equilibrium_chain_torque, pull_in_chain_torque,
    rotation_condition, translation_breakaway_torque, translation_condition, ResidualRanges,
};
use thiserror::Error;

/// Angular slack used when comparing a joint angle against its end stops.
/// Event edges are located to 1e-9 s, so anything tighter than the
/// resulting angle error would misread snapped states.
const STOP_EPS: f64 = 1e-9;

/// Slack for the non-strict continuation balances, in N·m. Steady motion
/// sits exactly on its kinetic balance, so these comparisons must not
/// fail over the last-bit rounding of torque values reconstructed from
/// the same equality.
const BALANCE_TOL: f64 = 1e-12;

/// No motion can be generated from the given loads: the rotation,
/// translation, and clutch-slip comparisons all fail (or tie exactly).
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error(
    "no motion generated at f_tip = {f_tip} N, tau_rc2 = {tau_rc2} N·m: \
     rotation, translation, and clutch-slip comparisons all fail or tie"
)]
pub struct StuckState {
    pub f_tip: f64,
    pub tau_rc2: f64,
}

/// Discrete occurrences worth logging alongside a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    StopperEngaged,
    StopperReleased,
    TipContact,
    ClutchSlipStart,
    ClutchSlipStop,
    TipFrictionLock,
    TipFrictionRelease,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::StopperEngaged => "stopper_engaged",
            EventKind::StopperReleased => "stopper_released",
            EventKind::TipContact => "tip_contact",
            EventKind::ClutchSlipStart => "clutch_slip_start",
            EventKind::ClutchSlipStop => "clutch_slip_stop",
            EventKind::TipFrictionLock => "tip_friction_lock",
            EventKind::TipFrictionRelease => "tip_friction_release",
        }
    }
}

impl std::fmt::Display for EventKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One logged transition: what changed, when, and the full state right
/// after the change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionEvent {
    pub kind: EventKind,
    pub time: f64,
    pub state: GripperState,
}

/// True when nothing obstructs fingertip rotation toward `dir`: the
/// relevant end stop is clear and tip friction is not pinning the joint.
pub fn fingertip_free(s: &GripperState, dir: Direction, p: &MechParams) -> bool {
    if s.tip_friction_lock {
        return false;
    }
    match dir {
        Direction::Forward => s.theta_f < p.theta_f_stop - STOP_EPS,
        Direction::Reverse => s.theta_f > STOP_EPS,
    }
}

/// Classifies which mode a given load state sustains.
///
/// The current mode stored in `s` supplies stick-slip context: continuing
/// the same motion requires only its (non-strict) kinetic balance, while
/// switching to a new motion requires the strict onset predicates. With no
/// valid continuation and no strict onset, the mechanism is stuck — that
/// is reported, never silently mapped to an arbitrary mode.
pub fn classify_motion(
    s: &GripperState,
    tau_rc2: f64,
    dir: Direction,
    p: &MechParams,
) -> Result<Mode, StuckState> {
    let slipping = clutch_slip_condition(tau_rc2, p);

    // Continuation of the motion already under way.
    match s.mode {
        Mode::FingerBending(d) if d == dir => {
            let sustained = (crate::statics::alpha_st(p) * p.r_dr * (s.f_tip + p.delta_f)).abs()
                >= (tau_rc2 + p.delta_tau).abs() - BALANCE_TOL;
            if fingertip_free(s, dir, p) && sustained && !slipping {
                return Ok(Mode::FingerBending(dir));
            }
        }
        Mode::Grasping(d) if d == dir => {
            let sustained = (tau_rc2 + p.delta_tau).abs()
                >= crate::statics::alpha_kn(p) * p.r_dr * (s.f_tip + p.delta_f).abs() - BALANCE_TOL;
            if sustained && !slipping {
                return Ok(Mode::Grasping(dir));
            }
        }
        Mode::PullIn(d) if d == dir => {
            if tau_rc2 >= pull_in_chain_torque(p) - BALANCE_TOL {
                return Ok(Mode::PullIn(dir));
            }
        }
        _ => {}
    }

    // Onset of a new motion, strict predicates. Clutch slip diverts the
    // drive into the belt regardless of what the screw side would do.
    if slipping {
        return Ok(Mode::PullIn(dir));
    }
    if fingertip_free(s, dir, p) && rotation_condition(s.f_tip, tau_rc2, p) {
        // A clutch with no static capacity cannot drag the fingertip unit;
        // sprocket-2 rotation is then pure slip and the belt runs.
        if p.preload_static_max() + p.tau_g1 > 0.0 {
            return Ok(Mode::FingerBending(dir));
        }
        return Ok(Mode::PullIn(dir));
    }
    if translation_condition(s.f_tip, tau_rc2, p) {
        return Ok(Mode::Grasping(dir));
    }
    Err(StuckState {
        f_tip: s.f_tip,
        tau_rc2,
    })
}

/// Classification that also consults residual scatter ranges: if the
/// rotation predicate flips somewhere inside the ranges while the
/// fingertip is free to bend, the outcome is reported as [`Mode::Chatter`]
/// instead of a definite mode.
pub fn classify_with_ranges(
    s: &GripperState,
    tau_rc2: f64,
    dir: Direction,
    p: &MechParams,
    ranges: Option<&ResidualRanges>,
) -> Result<Mode, StuckState> {
    if let Some(r) = ranges {
        if fingertip_free(s, dir, p) && r.rotation_ambiguous(s.f_tip, tau_rc2, p) {
            return Ok(Mode::Chatter);
        }
    }
    classify_motion(s, tau_rc2, dir, p)
}

/// Decides the active mode *and* the chain torque the drive must carry,
/// given only the kinematic state. This is the quasi-static resolution the
/// simulator uses each step: the chain torque rises until the cheapest
/// available motion yields, so the decision reduces to ordering the
/// breakaway thresholds.
pub fn resolve_motion(
    s: &GripperState,
    dir: Direction,
    p: &MechParams,
) -> Result<(Mode, f64), StuckState> {
    let ceiling = p.preload_static_max() + p.tau_g1;
    let tau_pull = pull_in_chain_torque(p);

    // A sliding clutch keeps sliding at its kinetic torque while the
    // drive keeps moving the same way; it cannot re-stick mid-motion.
    if let Mode::PullIn(d) = s.mode {
        if d == dir {
            return Ok((Mode::PullIn(dir), tau_pull));
        }
    }

    // Free bending carries no chain torque, so it wins whenever the
    // residual load can turn sprocket 1 — even over an ongoing
    // translation, which is how extension resumes once opening has
    // relieved the tip. A clutch with no static capacity cannot drag the
    // fingertip, though: sprocket-2 rotation is then pure slip and the
    // belt runs instead.
    if fingertip_free(s, dir, p) && rotation_condition(s.f_tip, 0.0, p) {
        if ceiling > 0.0 {
            return Ok((Mode::FingerBending(dir), 0.0));
        }
        return Ok((Mode::PullIn(dir), tau_pull));
    }

    // Steady translation carries its kinetic demand until that demand
    // reaches the clutch ceiling, at which point slip takes over.
    if let Mode::Grasping(d) = s.mode {
        if d == dir {
            let tau = grasp_equilibrium_chain_torque(s.f_tip, p);
            if tau < ceiling {
                return Ok((Mode::Grasping(dir), tau));
            }
            return Ok((Mode::PullIn(dir), tau_pull));
        }
    }

    // Bending unavailable: the chain torque ramps up and the lower
    // threshold gives way first — translation breakaway or clutch slip.
    let breakaway = translation_breakaway_torque(s.f_tip, p);
    if breakaway < ceiling {
        return Ok((Mode::Grasping(dir), grasp_equilibrium_chain_torque(s.f_tip, p)));
    }
    if ceiling < breakaway {
        return Ok((Mode::PullIn(dir), tau_pull));
    }
    Err(StuckState {
        f_tip: s.f_tip,
        tau_rc2: breakaway,
    })
}

/// Applies a newly selected mode to the state, refreshes the stopper and
/// tip-friction flags from the kinematics, and reports the single most
/// significant change as an event. The caller integrates kinematics before
/// calling this, and edge bisection keeps distinct changes in distinct
/// calls.
pub fn step_transition(
    s: &GripperState,
    m: Mode,
    time: f64,
    p: &MechParams,
) -> (GripperState, Option<TransitionEvent>) {
    let mut next = *s;
    let prev = *s;
    next.mode = m;

    // Direction reversal under load pins the fingertip by tip friction.
    let reversed = match (prev.mode.direction(), m.direction()) {
        (Some(a), Some(b)) => a != b,
        _ => false,
    };
    if reversed && next.f_tip > 0.0 {
        next.tip_friction_lock = true;
    }
    if next.f_tip <= 0.0 {
        next.tip_friction_lock = false;
    }

    // Stopper contact from geometry; the resting side depends on which way
    // the joint was last driven.
    let on_forward_stop = next.theta_f >= p.theta_f_stop - STOP_EPS;
    let on_reverse_stop =
        next.theta_f <= STOP_EPS && m.direction() == Some(Direction::Reverse);
    next.stopper_engaged = on_forward_stop || on_reverse_stop;

    let kind = if next.tip_friction_lock && !prev.tip_friction_lock {
        Some(EventKind::TipFrictionLock)
    } else if !next.tip_friction_lock && prev.tip_friction_lock {
        Some(EventKind::TipFrictionRelease)
    } else if next.stopper_engaged && !prev.stopper_engaged {
        Some(EventKind::StopperEngaged)
    } else if !next.stopper_engaged && prev.stopper_engaged {
        Some(EventKind::StopperReleased)
    } else if matches!(m, Mode::PullIn(_)) && !matches!(prev.mode, Mode::PullIn(_)) {
        Some(EventKind::ClutchSlipStart)
    } else if !matches!(m, Mode::PullIn(_)) && matches!(prev.mode, Mode::PullIn(_)) {
        Some(EventKind::ClutchSlipStop)
    } else {
        None
    };

    let event = kind.map(|kind| TransitionEvent {
        kind,
        time,
        state: next,
    });
    (next, event)
}

/// Plans the ordered mode sequence that releases an object from the given
/// posture by reversing the motor: relieve the tip load by opening, extend
/// the fingers once unloaded, then open fully. Consecutive duplicates are
/// merged.
pub fn release_sequence(s: &GripperState, p: &MechParams) -> Vec<Mode> {
    debug_assert!(crate::model::validate_params(p).is_ok());
    let mut seq = Vec::new();
    if s.f_tip > 0.0 {
        seq.push(Mode::Grasping(Direction::Reverse));
    }
    if s.theta_f > STOP_EPS {
        seq.push(Mode::FingerBending(Direction::Reverse));
    }
    if s.d_f > 0.0 {
        seq.push(Mode::Grasping(Direction::Reverse));
    }
    seq.dedup();
    seq
}
