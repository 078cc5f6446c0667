//! Closed-loop grasping control from motor signals alone.
//!
//! The controller never senses the fingers or the object: it watches only
//! the motor angle and motor torque, because the mode boundaries are set
//! by statics. Bending completion is an angle threshold, grasp force is a
//! torque target, and the grasp→pull-in switch is detected by the torque
//! climbing toward the clutch's static capacity. Pull-in distance is then
//! the motor angle accumulated since that detection.

use crate::model::{Direction, MechParams, Mode};
use crate::scenario::{GoalSpec, Scenario};
use crate::sim::{SimError, SimSession};
use crate::statics::alpha_kn;
use crate::trace::{StopReason, Trace};
use thiserror::Error;

/// Fraction of the peak (slip-instant) motor torque used as the default
/// grasp→pull-in detection threshold. Below 1 so the threshold is crossed
/// on the torque ramp just before slip; close to 1 so the early-latch
/// error in the pull-in distance stays small.
pub const THRESHOLD_FACTOR: f64 = 0.95;

/// Motor torque that holds a given tip force in steady grasping, residual
/// scatter ignored.
pub fn target_motor_torque(f_tip: f64, p: &MechParams) -> f64 {
    2.0 * p.r_dr * alpha_kn(p) * f_tip
}

/// Motor angle of clutch slip that reels the belt by `d_pi`.
pub fn pull_in_target_angle(d_pi: f64, p: &MechParams) -> f64 {
    d_pi / (p.epsilon * p.r_roller)
}

/// Default grasp→pull-in detection threshold for a mechanism: a fixed
/// fraction of the motor torque at the clutch-slip instant.
pub fn default_threshold(p: &MechParams) -> f64 {
    THRESHOLD_FACTOR * 2.0 * (p.preload_static_max() + p.tau_g1)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    /// Holding the requested force needs at least the threshold torque, so
    /// the force goal cannot be reached without tripping slip detection.
    #[error(
        "grasp-force goal needs motor torque {tau_m_target} N·m, at or beyond \
         the switching threshold {threshold} N·m"
    )]
    ThresholdExceeded { tau_m_target: f64, threshold: f64 },
    /// The detection threshold exceeds the peak motor torque that clutch
    /// slip can ever produce, so pull-in would never be detected.
    #[error(
        "pull-in goal undetectable: threshold {threshold} N·m exceeds the \
         peak slip torque {peak} N·m"
    )]
    ThresholdUnreachable { threshold: f64, peak: f64 },
    /// The observed motor angle moved backwards against a forward command.
    #[error("motor angle regressed at tick {tick}: {theta_m} after {prev}")]
    PhaseRegression { tick: u64, theta_m: f64, prev: f64 },
    /// The run ended before this goal was met.
    #[error("goal `{0}` not reached before the run ended")]
    GoalNotReached(&'static str),
    #[error("goal out of range: {0}")]
    InvalidGoal(String),
}

/// What a closed-loop run is asked to achieve. Zero disables a component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlGoal {
    pub theta_f_target: f64,
    pub f_tip_target: f64,
    pub d_pi_target: f64,
    /// Motor torque at which the controller declares grasp→pull-in.
    pub tau_m_threshold: f64,
}

impl ControlGoal {
    /// Builds a goal from scenario keys, defaulting the threshold from the
    /// mechanism.
    pub fn from_spec(g: &GoalSpec, p: &MechParams) -> ControlGoal {
        ControlGoal {
            theta_f_target: g.theta_f,
            f_tip_target: g.f_tip,
            d_pi_target: g.d_pi,
            tau_m_threshold: g.tau_m_threshold.unwrap_or_else(|| default_threshold(p)),
        }
    }

    pub fn validate(&self, p: &MechParams) -> Result<(), ControlError> {
        if !(0.0..=p.theta_f_stop + 1e-12).contains(&self.theta_f_target) {
            return Err(ControlError::InvalidGoal(format!(
                "theta_f_target {} outside [0, {}]",
                self.theta_f_target, p.theta_f_stop
            )));
        }
        if self.f_tip_target < 0.0 || self.d_pi_target < 0.0 {
            return Err(ControlError::InvalidGoal(
                "force and pull-in goals must be non-negative".into(),
            ));
        }
        if !(self.tau_m_threshold > 0.0) {
            return Err(ControlError::InvalidGoal(format!(
                "tau_m_threshold must be positive, got {}",
                self.tau_m_threshold
            )));
        }
        let has_contact_goal = self.f_tip_target > 0.0 || self.d_pi_target > 0.0;
        if has_contact_goal && self.theta_f_target < p.theta_f_stop - 1e-9 {
            return Err(ControlError::InvalidGoal(
                "contact goals need full bending to the stop first".into(),
            ));
        }
        if self.f_tip_target > 0.0 {
            let tau_m_target = target_motor_torque(self.f_tip_target, p);
            if tau_m_target >= self.tau_m_threshold {
                return Err(ControlError::ThresholdExceeded {
                    tau_m_target,
                    threshold: self.tau_m_threshold,
                });
            }
        }
        if self.d_pi_target > 0.0 {
            let peak = 2.0 * (p.preload_static_max() + p.tau_g1);
            if self.tau_m_threshold > peak {
                return Err(ControlError::ThresholdUnreachable {
                    threshold: self.tau_m_threshold,
                    peak,
                });
            }
        }
        Ok(())
    }
}

/// Controller phases, in the order a full grasp-and-retrieve visits them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Bending,
    Grasping,
    PullInDetect,
    PullIn,
    Done,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Bending => "bending",
            Phase::Grasping => "grasping",
            Phase::PullInDetect => "pull_in_detect",
            Phase::PullIn => "pull_in",
            Phase::Done => "done",
        }
    }

    /// The simulation mode this phase should be driving, if any. Detection
    /// still happens during grasping, hence the shared mapping.
    pub fn expected_mode(self) -> Option<Mode> {
        match self {
            Phase::Bending => Some(Mode::FingerBending(Direction::Forward)),
            Phase::Grasping | Phase::PullInDetect => Some(Mode::Grasping(Direction::Forward)),
            Phase::PullIn => Some(Mode::PullIn(Direction::Forward)),
            Phase::Done => None,
        }
    }
}

/// One motor-side sample: everything the controller is allowed to see.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub tick: u64,
    pub theta_m: f64,
    pub tau_m: f64,
}

/// One motor command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Command {
    pub tick: u64,
    pub velocity: f64,
    pub stop: bool,
}

/// Malformed observation/command record line.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed record: {0}")]
pub struct RecordParseError(pub String);

impl Observation {
    pub fn to_line(&self) -> String {
        format!("obs v1 {} {} {}", self.tick, self.theta_m, self.tau_m)
    }

    pub fn parse_line(line: &str) -> Result<Observation, RecordParseError> {
        let mut it = line.split_ascii_whitespace();
        match (it.next(), it.next()) {
            (Some("obs"), Some("v1")) => {}
            _ => return Err(RecordParseError(format!("expected `obs v1 ...`, got `{line}`"))),
        }
        let tick = parse_field(&mut it, line)?;
        let theta_m = parse_field(&mut it, line)?;
        let tau_m = parse_field(&mut it, line)?;
        Ok(Observation { tick, theta_m, tau_m })
    }
}

impl Command {
    pub fn to_line(&self) -> String {
        format!("cmd v1 {} {} {}", self.tick, self.velocity, self.stop)
    }

    pub fn parse_line(line: &str) -> Result<Command, RecordParseError> {
        let mut it = line.split_ascii_whitespace();
        match (it.next(), it.next()) {
            (Some("cmd"), Some("v1")) => {}
            _ => return Err(RecordParseError(format!("expected `cmd v1 ...`, got `{line}`"))),
        }
        let tick = parse_field(&mut it, line)?;
        let velocity = parse_field(&mut it, line)?;
        let stop = parse_field(&mut it, line)?;
        Ok(Command { tick, velocity, stop })
    }
}

fn parse_field<'a, T: std::str::FromStr>(
    it: &mut impl Iterator<Item = &'a str>,
    line: &str,
) -> Result<T, RecordParseError> {
    it.next()
        .ok_or_else(|| RecordParseError(format!("truncated record `{line}`")))?
        .parse::<T>()
        .map_err(|_| RecordParseError(format!("bad field in `{line}`")))
}

/// The sense–switch controller. Feed it one [`Observation`] per tick; it
/// answers with a constant-velocity [`Command`] until its goals are met.
pub struct Controller {
    goal: ControlGoal,
    p: MechParams,
    speed: f64,
    phase: Phase,
    phases: Vec<Phase>,
    prev_theta: f64,
    theta_switch: Option<f64>,
    grasp_achieved_tick: Option<u64>,
    bend_exit_tick: Option<u64>,
}

impl Controller {
    pub fn new(goal: ControlGoal, p: MechParams, speed: f64) -> Result<Controller, ControlError> {
        goal.validate(&p)?;
        if !(speed > 0.0) {
            return Err(ControlError::InvalidGoal(format!(
                "controller speed must be positive, got {speed}"
            )));
        }
        Ok(Controller {
            goal,
            p,
            speed,
            phase: Phase::Bending,
            phases: vec![Phase::Bending],
            prev_theta: f64::NEG_INFINITY,
            theta_switch: None,
            grasp_achieved_tick: None,
            bend_exit_tick: None,
        })
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    /// Every phase entered so far, in order.
    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    /// Motor angle latched when the threshold detected the grasp→pull-in
    /// switch.
    pub fn switch_angle(&self) -> Option<f64> {
        self.theta_switch
    }

    /// Tick at which the grasp-force torque target was first met.
    pub fn grasp_achieved_tick(&self) -> Option<u64> {
        self.grasp_achieved_tick
    }

    /// Tick at which the bending phase completed.
    pub fn bend_exit_tick(&self) -> Option<u64> {
        self.bend_exit_tick
    }

    fn enter(&mut self, phase: Phase) {
        self.phase = phase;
        self.phases.push(phase);
    }

    pub fn step(&mut self, obs: &Observation) -> Result<Command, ControlError> {
        if obs.theta_m < self.prev_theta - 1e-9 {
            return Err(ControlError::PhaseRegression {
                tick: obs.tick,
                theta_m: obs.theta_m,
                prev: self.prev_theta,
            });
        }
        self.prev_theta = obs.theta_m;
        let has_contact_goal = self.goal.f_tip_target > 0.0 || self.goal.d_pi_target > 0.0;

        // A tick may complete several phases at once (e.g. the threshold
        // is already exceeded when detection starts), so cascade.
        loop {
            match self.phase {
                Phase::Bending => {
                    if obs.theta_m >= self.goal.theta_f_target {
                        self.bend_exit_tick = Some(obs.tick);
                        if has_contact_goal {
                            self.enter(Phase::Grasping);
                        } else {
                            self.enter(Phase::Done);
                        }
                        continue;
                    }
                }
                Phase::Grasping => {
                    let force_met = if self.goal.f_tip_target > 0.0 {
                        if self.grasp_achieved_tick.is_none()
                            && obs.tau_m >= target_motor_torque(self.goal.f_tip_target, &self.p)
                        {
                            self.grasp_achieved_tick = Some(obs.tick);
                        }
                        self.grasp_achieved_tick.is_some()
                    } else {
                        true
                    };
                    if force_met {
                        if self.goal.d_pi_target > 0.0 {
                            self.enter(Phase::PullInDetect);
                        } else {
                            self.enter(Phase::Done);
                        }
                        continue;
                    }
                }
                Phase::PullInDetect => {
                    if obs.tau_m >= self.goal.tau_m_threshold {
                        self.theta_switch = Some(obs.theta_m);
                        self.enter(Phase::PullIn);
                        continue;
                    }
                }
                Phase::PullIn => {
                    let since = obs.theta_m - self.theta_switch.expect("latched on entry");
                    if since >= pull_in_target_angle(self.goal.d_pi_target, &self.p) {
                        self.enter(Phase::Done);
                        continue;
                    }
                }
                Phase::Done => {}
            }
            break;
        }

        Ok(Command {
            tick: obs.tick,
            velocity: if self.phase == Phase::Done { 0.0 } else { self.speed },
            stop: self.phase == Phase::Done,
        })
    }
}

/// Targets versus what the run actually delivered.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoalSummary {
    pub theta_f_target: f64,
    pub theta_f_achieved: f64,
    pub f_tip_target: f64,
    pub f_tip_achieved: f64,
    pub d_pi_target: f64,
    pub d_pi_achieved: f64,
}

impl GoalSummary {
    /// Human-readable key-value report.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: f64| out.push_str(&format!("{k} = {v}\n"));
        kv("theta_f_target", self.theta_f_target);
        kv("theta_f_achieved", self.theta_f_achieved);
        kv("f_tip_target", self.f_tip_target);
        kv("f_tip_achieved", self.f_tip_achieved);
        kv("d_pi_target", self.d_pi_target);
        kv("d_pi_achieved", self.d_pi_achieved);
        out
    }
}

/// A finished closed-loop run.
pub struct ClosedLoopRun {
    pub trace: Trace,
    pub log: Vec<(Observation, Command)>,
    pub phases: Vec<Phase>,
    pub summary: GoalSummary,
}

#[derive(Debug, Error)]
pub enum ClosedLoopError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Control(#[from] ControlError),
}

/// Runs the controller against the simulator, one observation and one
/// command per grid tick. The scenario's `goal_*` keys define the targets
/// and its duration acts as a safety limit.
pub fn run_closed_loop(scenario: &Scenario) -> Result<ClosedLoopRun, ClosedLoopError> {
    let goal_spec = scenario.goal.ok_or_else(|| {
        ControlError::InvalidGoal("scenario defines no goal_* keys".into())
    })?;
    let mut session = SimSession::new(scenario)?;
    let p = *session.params();
    let goal = ControlGoal::from_spec(&goal_spec, &p);
    let mut ctrl = Controller::new(goal, p, scenario.motor_speed.abs())?;

    let mut log = Vec::new();
    let mut theta_f_achieved = session.state().theta_f;
    let mut f_tip_achieved = session.state().f_tip;
    let mut tick: u64 = 0;
    loop {
        let obs = Observation {
            tick,
            theta_m: session.state().theta_m,
            tau_m: session.motor_torque(),
        };
        let before = ctrl.phase();
        let cmd = ctrl.step(&obs)?;
        if before == Phase::Bending && ctrl.phase() != Phase::Bending {
            theta_f_achieved = session.state().theta_f;
        }
        if ctrl.grasp_achieved_tick() == Some(tick) {
            f_tip_achieved = session.state().f_tip;
        }
        log.push((obs, cmd));
        if cmd.stop {
            session.stop(StopReason::ControllerStop);
            break;
        }
        if session.time() >= scenario.duration - 1e-12 {
            session.stop(StopReason::DurationEnd);
            break;
        }
        session.advance(cmd.velocity)?;
        if session.stopped().is_some() {
            break;
        }
        tick += 1;
    }

    if ctrl.phase() != Phase::Done {
        return Err(ControlError::GoalNotReached(match ctrl.phase() {
            Phase::Bending => "theta_f_target",
            Phase::Grasping => "f_tip_target",
            Phase::PullInDetect | Phase::PullIn => "d_pi_target",
            Phase::Done => unreachable!(),
        })
        .into());
    }

    let summary = GoalSummary {
        theta_f_target: goal.theta_f_target,
        theta_f_achieved,
        f_tip_target: goal.f_tip_target,
        f_tip_achieved,
        d_pi_target: goal.d_pi_target,
        d_pi_achieved: session.state().d_pi,
    };
    let phases = ctrl.phases().to_vec();
    Ok(ClosedLoopRun {
        trace: session.into_trace(),
        log,
        phases,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p() -> MechParams {
        MechParams::default()
    }

    #[test]
    fn torque_targets_for_reference_forces() {
        assert_relative_eq!(
            target_motor_torque(28.0, &p()),
            0.2971209300584265,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            target_motor_torque(9.0, &p()),
            0.09550315609020853,
            max_relative = 1e-12
        );
    }

    #[test]
    fn default_threshold_sits_below_the_peak() {
        let params = p();
        let th = default_threshold(&params);
        assert_relative_eq!(th, 0.95 * 2.0 * (0.4 * 0.46 + 0.02), max_relative = 1e-12);
        let peak = 2.0 * (params.preload_static_max() + params.tau_g1);
        assert!(th < peak);
    }

    #[test]
    fn pull_in_angle_inverse() {
        let params = p();
        assert_relative_eq!(pull_in_target_angle(0.05, &params), 10.0, max_relative = 1e-12);
    }

    #[test]
    fn force_goal_beyond_threshold_is_rejected() {
        let params = p();
        let goal = ControlGoal {
            theta_f_target: params.theta_f_stop,
            f_tip_target: 45.0, // needs ~0.477 N·m, threshold is 0.3876
            d_pi_target: 0.0,
            tau_m_threshold: default_threshold(&params),
        };
        match goal.validate(&params) {
            Err(ControlError::ThresholdExceeded { tau_m_target, threshold }) => {
                assert!(tau_m_target > threshold);
            }
            other => panic!("expected ThresholdExceeded, got {other:?}"),
        }
    }

    #[test]
    fn undetectable_threshold_is_rejected() {
        let params = p();
        let goal = ControlGoal {
            theta_f_target: params.theta_f_stop,
            f_tip_target: 0.0,
            d_pi_target: 0.05,
            tau_m_threshold: 0.5, // peak slip torque is 0.408
        };
        assert!(matches!(
            goal.validate(&params),
            Err(ControlError::ThresholdUnreachable { .. })
        ));
    }

    #[test]
    fn partial_bend_with_contact_goals_is_rejected() {
        let params = p();
        let goal = ControlGoal {
            theta_f_target: 0.5,
            f_tip_target: 10.0,
            d_pi_target: 0.0,
            tau_m_threshold: default_threshold(&params),
        };
        assert!(matches!(goal.validate(&params), Err(ControlError::InvalidGoal(_))));
    }

    #[test]
    fn record_lines_round_trip() {
        let obs = Observation {
            tick: 42,
            theta_m: 1.5,
            tau_m: 0.25,
        };
        assert_eq!(Observation::parse_line(&obs.to_line()).unwrap(), obs);
        let cmd = Command {
            tick: 42,
            velocity: 0.2443,
            stop: false,
        };
        assert_eq!(Command::parse_line(&cmd.to_line()).unwrap(), cmd);
        assert!(Observation::parse_line("obs v2 0 0 0").is_err());
        assert!(Command::parse_line("cmd v1 1 0.2").is_err());
    }

    #[test]
    fn regressing_angle_faults() {
        let params = p();
        let goal = ControlGoal {
            theta_f_target: params.theta_f_stop,
            f_tip_target: 0.0,
            d_pi_target: 0.0,
            tau_m_threshold: default_threshold(&params),
        };
        let mut ctrl = Controller::new(goal, params, 0.24).unwrap();
        ctrl.step(&Observation { tick: 0, theta_m: 1.0, tau_m: 0.0 }).unwrap();
        let err = ctrl
            .step(&Observation { tick: 1, theta_m: 0.5, tau_m: 0.0 })
            .unwrap_err();
        assert!(matches!(err, ControlError::PhaseRegression { tick: 1, .. }));
    }

    #[test]
    fn bend_only_goal_finishes_at_angle() {
        let params = p();
        let goal = ControlGoal {
            theta_f_target: 1.0,
            f_tip_target: 0.0,
            d_pi_target: 0.0,
            tau_m_threshold: default_threshold(&params),
        };
        let mut ctrl = Controller::new(goal, params, 0.24).unwrap();
        let c = ctrl.step(&Observation { tick: 0, theta_m: 0.9, tau_m: 0.0 }).unwrap();
        assert!(!c.stop);
        let c = ctrl.step(&Observation { tick: 1, theta_m: 1.0, tau_m: 0.0 }).unwrap();
        assert!(c.stop);
        assert_eq!(ctrl.phases(), &[Phase::Bending, Phase::Done]);
    }
}
