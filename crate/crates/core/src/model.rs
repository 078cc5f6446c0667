//! Mechanism parameters and kinematic state for the single-motor gripper.
//!
//! The gripper drives two fingers from one motor through a lead screw
//! (sprocket 1 rides the threaded drive shaft) and a friction clutch
//! (sprocket 2 couples to the fingertip unit through a preloaded contact).
//! Which of the three modes is active — finger bending, grasping, pull-in —
//! is decided entirely by the statics, not by extra actuators.

use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

/// Fraction of the static clutch preload retained once the clutch is
/// sliding. Used to derive `tau_pre_kn` when a scenario only specifies
/// the tightening torque.
pub const KINETIC_PRELOAD_RATIO: f64 = 0.9;

/// Mechanism parameters. Angles in radians, lengths in meters, forces in
/// newtons, torques in newton-meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechParams {
    /// Lead angle of the drive-shaft thread.
    pub lambda: f64,
    /// Pitch radius shared by the thread contact and both sprockets.
    pub r_dr: f64,
    /// Static friction coefficient at the thread contact.
    pub mu_st: f64,
    /// Kinetic friction coefficient at the thread contact.
    pub mu_kn: f64,
    /// Residual axial force on sprocket 1 from non-thread contacts.
    pub delta_f: f64,
    /// Residual torque on sprocket 1 from non-thread contacts.
    pub delta_tau: f64,
    /// Screw-tightening torque that sets the clutch preload.
    pub t_scw: f64,
    /// Preload model coefficient: max static clutch torque = `c_pre * t_scw`.
    pub c_pre: f64,
    /// Clutch friction torque while sliding (kinetic preload torque).
    pub tau_pre_kn: f64,
    /// Torque consumed driving the belt-conveyor gear train.
    pub tau_g1: f64,
    /// Belt transmission ratio from clutch slip to roller rotation.
    pub epsilon: f64,
    /// Belt roller radius.
    pub r_roller: f64,
    /// Stopper angle limiting finger bending (mechanical end stop).
    pub theta_f_stop: f64,
}

impl Default for MechParams {
    /// Nominal build: 30 deg lead angle, 5 mm pitch radius, equal friction
    /// coefficients of 0.3, 0.46 N·m tightening torque.
    fn default() -> Self {
        let t_scw = 0.46;
        let c_pre = 0.4;
        MechParams {
            lambda: 30.0_f64.to_radians(),
            r_dr: 0.005,
            mu_st: 0.3,
            mu_kn: 0.3,
            delta_f: 0.5,
            delta_tau: 0.001,
            t_scw,
            c_pre,
            tau_pre_kn: KINETIC_PRELOAD_RATIO * c_pre * t_scw,
            tau_g1: 0.02,
            epsilon: 1.0,
            r_roller: 0.005,
            theta_f_stop: FRAC_PI_2,
        }
    }
}

/// Parameter validation failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    /// Lead angle at or beyond the pole of the force amplification ratio,
    /// `atan(1/mu)`: the screw self-locks and the statics degenerate.
    #[error("lead angle {lambda:.6} rad at or beyond amplification pole {limit:.6} rad")]
    SingularLeadAngle { lambda: f64, limit: f64 },
    /// A length, angle, or ratio that must be strictly positive is not.
    #[error("parameter `{name}` must be strictly positive, got {value}")]
    NonPositiveDimension { name: &'static str, value: f64 },
    /// A coefficient or residual that must be nonnegative is not.
    #[error("parameter `{name}` must be nonnegative, got {value}")]
    NegativeParameter { name: &'static str, value: f64 },
    /// Kinetic friction must not exceed static friction at the thread.
    #[error("kinetic friction {mu_kn} exceeds static friction {mu_st}")]
    FrictionOrdering { mu_st: f64, mu_kn: f64 },
    /// Sliding clutch torque must not exceed the static preload ceiling.
    #[error("kinetic preload torque {tau_pre_kn} exceeds static ceiling {ceiling}")]
    PreloadOrdering { tau_pre_kn: f64, ceiling: f64 },
}

impl MechParams {
    /// Returns a copy with the tightening torque replaced and the sliding
    /// clutch torque re-derived via [`KINETIC_PRELOAD_RATIO`].
    pub fn with_tightening_torque(mut self, t_scw: f64) -> Self {
        self.t_scw = t_scw;
        self.tau_pre_kn = KINETIC_PRELOAD_RATIO * self.c_pre * t_scw;
        self
    }

    /// Returns a copy with a different lead angle.
    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    /// Maximum torque the clutch transmits before slipping,
    /// `c_pre * t_scw`. Monotone in the tightening torque.
    pub fn preload_static_max(&self) -> f64 {
        self.c_pre * self.t_scw
    }

    /// Validates every parameter range; returns the parameters unchanged on
    /// success so call sites can chain. Idempotent.
    pub fn validated(self) -> Result<Self, ParamError> {
        validate_params(&self)?;
        Ok(self)
    }
}

/// Checks all parameter invariants: positive dimensions, nonnegative
/// residuals and coefficients, friction ordering, preload ordering, and the
/// lead angle staying below the amplification pole for both coefficients.
pub fn validate_params(p: &MechParams) -> Result<(), ParamError> {
    let positive = [
        ("lambda", p.lambda),
        ("r_dr", p.r_dr),
        ("epsilon", p.epsilon),
        ("r_roller", p.r_roller),
        ("theta_f_stop", p.theta_f_stop),
    ];
    for (name, value) in positive {
        if !(value > 0.0) {
            return Err(ParamError::NonPositiveDimension { name, value });
        }
    }
    let nonnegative = [
        ("mu_st", p.mu_st),
        ("mu_kn", p.mu_kn),
        ("delta_f", p.delta_f),
        ("delta_tau", p.delta_tau),
        ("t_scw", p.t_scw),
        ("c_pre", p.c_pre),
        ("tau_pre_kn", p.tau_pre_kn),
        ("tau_g1", p.tau_g1),
    ];
    for (name, value) in nonnegative {
        if !(value >= 0.0) {
            return Err(ParamError::NegativeParameter { name, value });
        }
    }
    if p.mu_kn > p.mu_st {
        return Err(ParamError::FrictionOrdering {
            mu_st: p.mu_st,
            mu_kn: p.mu_kn,
        });
    }
    // The pole sits at atan(1/mu); mu_st >= mu_kn gives the tighter bound.
    let limit = (1.0 / p.mu_st.max(p.mu_kn).max(f64::MIN_POSITIVE)).atan();
    if p.lambda >= limit {
        return Err(ParamError::SingularLeadAngle {
            lambda: p.lambda,
            limit,
        });
    }
    let ceiling = p.preload_static_max();
    if p.tau_pre_kn > ceiling {
        return Err(ParamError::PreloadOrdering {
            tau_pre_kn: p.tau_pre_kn,
            ceiling,
        });
    }
    Ok(())
}

/// Commanded motor direction. Forward bends, closes, and pulls in;
/// reverse opens and extends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Reverse,
}

impl Direction {
    /// +1.0 for forward, -1.0 for reverse.
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Reverse => -1.0,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Direction::Forward => Direction::Reverse,
            Direction::Reverse => Direction::Forward,
        }
    }
}

/// Active mechanism mode. `Chatter` marks steps where the residual-force
/// noise ranges straddle the rotation boundary, so rotation and translation
/// intermix unpredictably.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Fingertip unit rotates with sprocket 2 (flexion forward, extension
    /// in reverse).
    FingerBending(Direction),
    /// Sprocket 1 translates along the drive shaft (closing forward,
    /// opening in reverse).
    Grasping(Direction),
    /// Clutch slips and the belt conveyor runs.
    PullIn(Direction),
    Chatter,
}

impl Mode {
    pub fn direction(self) -> Option<Direction> {
        match self {
            Mode::FingerBending(d) | Mode::Grasping(d) | Mode::PullIn(d) => Some(d),
            Mode::Chatter => None,
        }
    }

    /// Stable identifier used in trace files.
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::FingerBending(Direction::Forward) => "finger_bending",
            Mode::FingerBending(Direction::Reverse) => "finger_extending",
            Mode::Grasping(Direction::Forward) => "grasping_close",
            Mode::Grasping(Direction::Reverse) => "grasping_open",
            Mode::PullIn(Direction::Forward) => "pull_in",
            Mode::PullIn(Direction::Reverse) => "pull_in_reverse",
            Mode::Chatter => "chatter",
        }
    }

    pub fn from_str_id(s: &str) -> Option<Self> {
        Some(match s {
            "finger_bending" => Mode::FingerBending(Direction::Forward),
            "finger_extending" => Mode::FingerBending(Direction::Reverse),
            "grasping_close" => Mode::Grasping(Direction::Forward),
            "grasping_open" => Mode::Grasping(Direction::Reverse),
            "pull_in" => Mode::PullIn(Direction::Forward),
            "pull_in_reverse" => Mode::PullIn(Direction::Reverse),
            "chatter" => Mode::Chatter,
            _ => return None,
        })
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Kinematic snapshot of one finger. Angles are cumulative; `d_f` is the
/// per-finger translation toward the object and never goes negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GripperState {
    pub mode: Mode,
    /// Motor angle.
    pub theta_m: f64,
    /// Finger joint angle, kept within `[0, theta_f_stop]`.
    pub theta_f: f64,
    /// Sprocket-2 angle.
    pub theta_sp2: f64,
    /// Finger translation toward the object.
    pub d_f: f64,
    /// Normal force at the fingertip.
    pub f_tip: f64,
    /// Belt pull-in displacement of the grasped object.
    pub d_pi: f64,
    /// Accumulated clutch slip `theta_sp2 - theta_f`; zero until the
    /// clutch first slips, and the belt displacement source.
    pub theta_m_pi: f64,
    /// True while the finger body rests on a bending end stop.
    pub stopper_engaged: bool,
    /// True while tip friction pins the fingertip after a loaded reversal.
    pub tip_friction_lock: bool,
}

impl GripperState {
    /// Fully open, extended, unloaded posture.
    pub fn at_rest() -> Self {
        GripperState {
            mode: Mode::FingerBending(Direction::Forward),
            theta_m: 0.0,
            theta_f: 0.0,
            theta_sp2: 0.0,
            d_f: 0.0,
            f_tip: 0.0,
            d_pi: 0.0,
            theta_m_pi: 0.0,
            stopper_engaged: false,
            tip_friction_lock: false,
        }
    }
}
