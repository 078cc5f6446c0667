//! Fixed-step quasi-static integration of a scenario.
//!
//! Each step resolves which mode the statics sustain, then integrates the
//! piecewise-linear kinematics of that mode. Regime boundaries inside a
//! step — stopper contact, first object contact, clutch slip, load
//! release, the torque cap — are located by within-step bisection to
//! 1e-9 s and the boundary quantity is then snapped to its exact value,
//! so event times and post-event states do not depend on the step size.

use crate::contact::tip_force;
use crate::machine::{
    fingertip_free, resolve_motion, step_transition, EventKind, StuckState, TransitionEvent,
};
use crate::model::{Direction, GripperState, MechParams, Mode};
use crate::scenario::{Scenario, ScenarioKind};
use crate::statics::{grasp_equilibrium_chain_torque, pull_in_chain_torque};
use crate::trace::{StopReason, Trace, TraceRow};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Time resolution of event localization, in seconds.
const EDGE_TIME_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SimError {
    /// The statics sustain no motion from the current state: every mode's
    /// onset comparison fails (or ties exactly) at this instant.
    #[error("infeasible scenario at t = {t} s: {cause}")]
    InfeasibleScenario {
        t: f64,
        #[source]
        cause: StuckState,
    },
    /// Event localization failed to converge; indicates a degenerate
    /// scenario rather than a physical outcome.
    #[error("event localization failed near t = {t} s")]
    NonconvergentStep { t: f64 },
    /// The run configuration itself is unusable (step size, duration,
    /// speed, caps, initial posture).
    #[error("invalid run configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Param(#[from] crate::model::ParamError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Edge {
    BendStop,
    Contact,
    ClutchSlip,
    Unload,
    FullyOpen,
    TorqueCap,
}

/// A stepping simulation of the full gripper. Drive it with [`advance`]
/// (one grid step per call, signed velocity in rad/s) or use
/// [`SimSession::run`] for a whole scenario.
///
/// [`advance`]: SimSession::advance
pub struct SimSession {
    p: MechParams,
    object: crate::contact::ObjectModel,
    torque_cap: f64,
    dt: f64,
    noise: Option<crate::statics::ResidualRanges>,
    rng: ChaCha8Rng,
    state: GripperState,
    tau_rc2: f64,
    t_index: u64,
    last_dir: Option<Direction>,
    rows: Vec<TraceRow>,
    events: Vec<TransitionEvent>,
    chatter: bool,
    /// Last executed coarse motion (bend / translate) since the previous
    /// logged event; an eventless change here is chatter.
    flap_basis: Option<u8>,
    motor_work: f64,
    tip_work: f64,
    stopped: Option<StopReason>,
}

impl SimSession {
    pub fn new(scenario: &Scenario) -> Result<Self, SimError> {
        if scenario.kind != ScenarioKind::Gripper {
            return Err(SimError::Config(
                "a stepping session drives the full gripper; bench scenarios use run()".into(),
            ));
        }
        let p = scenario.params.validated()?;
        let object = scenario.object.validated()?;
        if let Some(n) = &scenario.noise {
            n.validated()?;
        }
        if !(scenario.dt > 0.0) || !scenario.dt.is_finite() {
            return Err(SimError::Config(format!("dt must be positive, got {}", scenario.dt)));
        }
        if !(scenario.duration >= 0.0) || !scenario.duration.is_finite() {
            return Err(SimError::Config(format!(
                "duration must be non-negative, got {}",
                scenario.duration
            )));
        }
        if !(scenario.torque_cap > 0.0) {
            return Err(SimError::Config(format!(
                "torque_cap must be positive, got {}",
                scenario.torque_cap
            )));
        }
        if scenario.motor_speed == 0.0 || !scenario.motor_speed.is_finite() {
            return Err(SimError::Config("motor_speed must be non-zero".into()));
        }
        if !(0.0..=p.theta_f_stop).contains(&scenario.initial_theta_f) {
            return Err(SimError::Config(format!(
                "initial_theta_f {} outside [0, {}]",
                scenario.initial_theta_f, p.theta_f_stop
            )));
        }
        if scenario.initial_d_f < 0.0 {
            return Err(SimError::Config("initial_d_f must be non-negative".into()));
        }

        let dir = if scenario.motor_speed >= 0.0 {
            Direction::Forward
        } else {
            Direction::Reverse
        };
        let mut state = GripperState::at_rest();
        state.mode = Mode::FingerBending(dir);
        state.theta_f = scenario.initial_theta_f;
        state.theta_sp2 = scenario.initial_theta_f;
        state.d_f = scenario.initial_d_f;
        state.f_tip = tip_force(state.d_f, &scenario.object);
        state.stopper_engaged = state.theta_f >= p.theta_f_stop;
        // A reverse start against a loaded tip is a reversal of whatever
        // closed the grip: tip friction pins the joint from the outset.
        if dir == Direction::Reverse && state.f_tip > 0.0 {
            state.tip_friction_lock = true;
        }

        let mut session = SimSession {
            p,
            object,
            torque_cap: scenario.torque_cap,
            dt: scenario.dt,
            noise: scenario.noise,
            rng: ChaCha8Rng::seed_from_u64(scenario.seed),
            state,
            tau_rc2: 0.0,
            t_index: 0,
            last_dir: Some(dir),
            rows: Vec::new(),
            events: Vec::new(),
            chatter: false,
            flap_basis: None,
            motor_work: 0.0,
            tip_work: 0.0,
            stopped: None,
        };

        if session.state.tip_friction_lock {
            session.push_event(EventKind::TipFrictionLock, 0.0);
        }

        // The initial row proves the scenario can move at all.
        let (mode, tau) = resolve_motion(&session.state, dir, &session.p)
            .map_err(|cause| SimError::InfeasibleScenario { t: 0.0, cause })?;
        session.apply_mode(mode, 0.0);
        let ambiguous = session.ambiguous(dir);
        session.record_row(0.0, if ambiguous { Mode::Chatter } else { mode }, tau);
        if ambiguous {
            session.chatter = true;
        }
        Ok(session)
    }

    /// Runs a whole scenario (either rig) to completion.
    pub fn run(scenario: &Scenario) -> Result<Trace, SimError> {
        if scenario.kind == ScenarioKind::SmsBBench {
            return run_bench(scenario);
        }
        let mut s = SimSession::new(scenario)?;
        while s.stopped.is_none() {
            if s.time() >= scenario.duration - 1e-12 {
                s.stop(StopReason::DurationEnd);
                break;
            }
            let v = match scenario.reverse_at {
                Some(r) if s.time() >= r - 1e-12 => -scenario.motor_speed,
                _ => scenario.motor_speed,
            };
            s.advance(v)?;
        }
        Ok(s.into_trace())
    }

    pub fn state(&self) -> &GripperState {
        &self.state
    }

    pub fn params(&self) -> &MechParams {
        &self.p
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn time(&self) -> f64 {
        self.t_index as f64 * self.dt
    }

    /// Chain torque on sprocket 2 at the last recorded sample.
    pub fn chain_torque(&self) -> f64 {
        self.tau_rc2
    }

    /// Motor torque at the last recorded sample.
    pub fn motor_torque(&self) -> f64 {
        crate::statics::motor_torque_from_chain(self.tau_rc2)
    }

    pub fn stopped(&self) -> Option<StopReason> {
        self.stopped
    }

    /// Marks the run as ended by an external supervisor.
    pub fn stop(&mut self, reason: StopReason) {
        if self.stopped.is_none() {
            self.stopped = Some(reason);
        }
    }

    pub fn into_trace(self) -> Trace {
        Trace {
            rows: self.rows,
            events: self.events,
            chatter: self.chatter,
            motor_work: self.motor_work,
            tip_work: self.tip_work,
            stop: self.stopped.unwrap_or(StopReason::DurationEnd),
        }
    }

    /// Advances one grid step at the given signed motor velocity (rad/s).
    /// No-op once stopped.
    pub fn advance(&mut self, velocity: f64) -> Result<(), SimError> {
        if self.stopped.is_some() {
            return Ok(());
        }
        let dir = if velocity >= 0.0 {
            Direction::Forward
        } else {
            Direction::Reverse
        };
        let speed = velocity.abs();
        let t0 = self.time();
        let t1 = (self.t_index + 1) as f64 * self.dt;

        let p_step = match &self.noise {
            Some(r) => {
                let (delta_f, delta_tau) = r.sample(&mut self.rng);
                MechParams {
                    delta_f,
                    delta_tau,
                    ..self.p
                }
            }
            None => self.p,
        };
        let ambiguous = self.ambiguous(dir);
        if ambiguous {
            self.chatter = true;
        }

        if speed == 0.0 {
            // Hold: time passes, nothing moves, torque stays where it was.
            self.t_index += 1;
            let (mode, tau) = (self.state.mode, self.tau_rc2);
            self.record_row(t1, mode, tau);
            return Ok(());
        }

        if let Some(prev) = self.last_dir {
            if prev != dir && self.state.f_tip > 0.0 && !self.state.tip_friction_lock {
                self.state.tip_friction_lock = true;
                self.push_event(EventKind::TipFrictionLock, t0);
            }
        }
        self.last_dir = Some(dir);

        let mut t_cur = t0;
        for _guard in 0..32 {
            let (mode, tau) = resolve_motion(&self.state, dir, &p_step)
                .map_err(|cause| SimError::InfeasibleScenario { t: t_cur, cause })?;

            // Already at the torque cap before moving: ramping regimes
            // cross the cap via a bisected edge instead, so this fires
            // only when a step begins at or beyond it.
            if 2.0 * tau >= self.torque_cap {
                self.apply_mode(mode, t_cur);
                self.record_edge_row(t_cur, mode, tau);
                self.stopped = Some(StopReason::TorqueCap);
                return Ok(());
            }
            // Reverse translation with nothing left to open cannot move.
            if mode == Mode::Grasping(Direction::Reverse) && self.state.d_f <= 0.0 {
                self.apply_mode(mode, t_cur);
                self.record_edge_row(t_cur, mode, tau);
                self.stopped = Some(StopReason::FullyOpen);
                return Ok(());
            }
            self.apply_mode(mode, t_cur);

            let dt_avail = t1 - t_cur;
            let edge = self.earliest_edge(mode, &p_step, speed, dt_avail);
            match edge {
                None => {
                    self.propagate(mode, &p_step, speed, dt_avail);
                    self.t_index += 1;
                    let tau = self.mode_torque(self.state.mode, &p_step);
                    let row_mode = if ambiguous { Mode::Chatter } else { self.state.mode };
                    self.record_row(t1, row_mode, tau);
                    return Ok(());
                }
                Some((delta, which)) => {
                    self.propagate(mode, &p_step, speed, delta);
                    t_cur += delta;
                    match which {
                        Edge::BendStop => {
                            self.state.theta_f = match mode.direction() {
                                Some(Direction::Forward) => self.p.theta_f_stop,
                                _ => 0.0,
                            };
                            self.refresh_derived();
                            self.apply_mode(mode, t_cur);
                        }
                        Edge::Contact => {
                            self.state.d_f = self.object.gap0;
                            self.refresh_derived();
                            self.push_event(EventKind::TipContact, t_cur);
                        }
                        Edge::ClutchSlip => {
                            let ceiling = self.p.preload_static_max() + self.p.tau_g1;
                            let peak_force = crate::statics::grasp_equilibrium_tip_force(
                                2.0 * ceiling,
                                &p_step,
                            );
                            self.state.d_f = self.object.travel_for_force(peak_force);
                            self.refresh_derived();
                            let dir = mode.direction().unwrap_or(Direction::Forward);
                            self.apply_mode(Mode::PullIn(dir), t_cur);
                            // The switching instant itself carries the full
                            // static capacity: one inserted row holds the peak.
                            self.record_row(t_cur, Mode::PullIn(dir), ceiling);
                        }
                        Edge::Unload => {
                            self.state.d_f = self.object.gap0;
                            self.refresh_derived();
                            self.apply_mode(mode, t_cur);
                        }
                        Edge::FullyOpen => {
                            self.state.d_f = 0.0;
                            self.refresh_derived();
                            self.apply_mode(mode, t_cur);
                            self.record_row(t_cur, self.state.mode, 0.0);
                            self.stopped = Some(StopReason::FullyOpen);
                            return Ok(());
                        }
                        Edge::TorqueCap => {
                            let half_cap = self.torque_cap / 2.0;
                            let f_cap =
                                crate::statics::grasp_equilibrium_tip_force(self.torque_cap, &p_step);
                            self.state.d_f = self.object.travel_for_force(f_cap);
                            self.refresh_derived();
                            self.record_row(t_cur, self.state.mode, half_cap);
                            self.stopped = Some(StopReason::TorqueCap);
                            return Ok(());
                        }
                    }
                }
            }
        }
        Err(SimError::NonconvergentStep { t: t_cur })
    }

    fn ambiguous(&mut self, dir: Direction) -> bool {
        match &self.noise {
            Some(r) => {
                fingertip_free(&self.state, dir, &self.p)
                    && r.rotation_ambiguous(self.state.f_tip, 0.0, &self.p)
            }
            None => false,
        }
    }

    /// Chain torque the given mode carries at the current state.
    fn mode_torque(&self, mode: Mode, p: &MechParams) -> f64 {
        match mode {
            Mode::FingerBending(_) | Mode::Chatter => 0.0,
            Mode::Grasping(_) => grasp_equilibrium_chain_torque(self.state.f_tip, p),
            Mode::PullIn(_) => pull_in_chain_torque(p),
        }
    }

    fn refresh_derived(&mut self) {
        self.state.f_tip = tip_force(self.state.d_f, &self.object);
        self.state.theta_m_pi = self.state.theta_sp2 - self.state.theta_f;
        self.state.d_pi = self.p.epsilon * self.p.r_roller * self.state.theta_m_pi;
    }

    fn apply_mode(&mut self, m: Mode, t: f64) {
        let (next, ev) = step_transition(&self.state, m, t, &self.p);
        self.state = next;
        let kind = match m {
            Mode::FingerBending(_) => Some(0u8),
            Mode::Grasping(_) => Some(1u8),
            _ => None,
        };
        if let Some(k) = kind {
            if let Some(prev) = self.flap_basis {
                if prev != k {
                    self.chatter = true;
                }
            }
            self.flap_basis = Some(k);
        }
        // An event legitimizes whatever change accompanies it, so flap
        // detection restarts from scratch after one.
        if let Some(e) = ev {
            self.events.push(e);
            self.flap_basis = None;
        }
    }

    fn push_event(&mut self, kind: EventKind, time: f64) {
        self.events.push(TransitionEvent {
            kind,
            time,
            state: self.state,
        });
        self.flap_basis = None;
    }

    /// Records a row at an edge time, unless a row at that instant
    /// already exists (a stop right at t = 0 would otherwise duplicate
    /// the initial row).
    fn record_edge_row(&mut self, t: f64, mode: Mode, tau_rc2: f64) {
        if self.rows.last().map_or(true, |r| r.t < t) {
            self.record_row(t, mode, tau_rc2);
        }
    }

    fn record_row(&mut self, t: f64, mode: Mode, tau_rc2: f64) {
        self.tau_rc2 = tau_rc2;
        let s = &self.state;
        self.rows.push(TraceRow {
            t,
            tau_m: 2.0 * tau_rc2,
            tau_rc2,
            theta_m: s.theta_m,
            theta_f: s.theta_f,
            theta_sp2: s.theta_sp2,
            d_f: s.d_f,
            f_tip: s.f_tip,
            d_pi: s.d_pi,
            mode,
        });
    }

    /// Integrates the current mode for `dt` seconds of motion at `speed`.
    /// Exact for the piecewise-linear kinematics; also accumulates the
    /// energy ledgers.
    fn propagate(&mut self, mode: Mode, p: &MechParams, speed: f64, dt: f64) {
        if dt <= 0.0 {
            return;
        }
        let sgn = mode.direction().map_or(1.0, Direction::sign);
        let dth = speed * dt;
        let tau0 = self.mode_torque(mode, p);
        let d0 = self.state.d_f;
        self.state.theta_m += sgn * dth;
        match mode {
            Mode::FingerBending(_) => {
                self.state.theta_f += sgn * dth;
                self.state.theta_sp2 += sgn * dth;
            }
            Mode::Grasping(_) => {
                self.state.d_f += sgn * p.r_dr * p.lambda.tan() * dth;
            }
            Mode::PullIn(_) => {
                self.state.theta_sp2 += sgn * dth;
            }
            Mode::Chatter => {}
        }
        self.refresh_derived();
        let tau1 = self.mode_torque(mode, p);
        // tau_m = 2*tau_rc2 and tau varies linearly within a segment, so
        // the trapezoid is exact: avg(tau_m) * |dtheta| = (tau0+tau1)*dth.
        self.motor_work += (tau0 + tau1) * dth;
        if matches!(mode, Mode::Grasping(_)) {
            let g = self.object.gap0;
            let k = self.object.k_obj;
            let c0 = (d0 - g).max(0.0);
            let c1 = (self.state.d_f - g).max(0.0);
            // both fingertips compress the contact: 2 * k/2 * (c1² − c0²)
            self.tip_work += k * (c1 * c1 - c0 * c0);
        }
    }

    /// Finds the earliest regime boundary within `dt_avail`, if any.
    fn earliest_edge(
        &self,
        mode: Mode,
        p: &MechParams,
        speed: f64,
        dt_avail: f64,
    ) -> Option<(f64, Edge)> {
        let mut best: Option<(f64, Edge)> = None;
        let mut consider = |g: &dyn Fn(f64) -> f64, edge: Edge| {
            if let Some(delta) = bisect_crossing(g, dt_avail) {
                if best.map_or(true, |(b, _)| delta < b) {
                    best = Some((delta, edge));
                }
            }
        };
        let s = &self.state;
        match mode {
            Mode::FingerBending(d) => {
                let theta0 = s.theta_f;
                let stop = self.p.theta_f_stop;
                match d {
                    Direction::Forward => consider(&|x| theta0 + speed * x - stop, Edge::BendStop),
                    Direction::Reverse => consider(&|x| -(theta0 - speed * x), Edge::BendStop),
                }
            }
            Mode::Grasping(Direction::Forward) => {
                let v = p.r_dr * p.lambda.tan() * speed;
                let d_start = s.d_f;
                let gap = self.object.gap0;
                let obj = self.object;
                if d_start < gap {
                    consider(&|x| d_start + v * x - gap, Edge::Contact);
                }
                let ceiling = self.p.preload_static_max() + self.p.tau_g1;
                let demand = move |x: f64| {
                    grasp_equilibrium_chain_torque(tip_force(d_start + v * x, &obj), p)
                };
                consider(&|x| demand(x) - ceiling, Edge::ClutchSlip);
                let cap = self.torque_cap;
                consider(&|x| 2.0 * demand(x) - cap, Edge::TorqueCap);
            }
            Mode::Grasping(Direction::Reverse) => {
                let v = p.r_dr * p.lambda.tan() * speed;
                let d_start = s.d_f;
                let gap = self.object.gap0;
                if d_start > gap {
                    consider(&|x| gap - (d_start - v * x), Edge::Unload);
                }
                consider(&|x| -(d_start - v * x), Edge::FullyOpen);
            }
            Mode::PullIn(_) | Mode::Chatter => {}
        }
        best
    }
}

/// Locates the first zero crossing of `g` on `(0, hi]`, where `g(0) < 0`
/// means "edge not yet reached". Bisection to [`EDGE_TIME_TOL`]; callers
/// snap the state quantity exactly afterwards, so the residual time error
/// never accumulates.
fn bisect_crossing(g: &dyn Fn(f64) -> f64, hi: f64) -> Option<f64> {
    if hi <= 0.0 || g(0.0) >= -1e-15 || g(hi) < 0.0 {
        return None;
    }
    let (mut lo, mut hi) = (0.0, hi);
    for _ in 0..200 {
        if hi - lo <= EDGE_TIME_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// The clutch characterization rig: the motor turns sprocket 2 directly
/// against the fingertip unit, screw and belt removed. While the clutch
/// sticks, the fingertip bends freely at (near) zero torque; when the
/// bending stopper engages, the chain torque spikes to the full static
/// capacity and then settles at the kinetic slip level. The motor-side
/// torque convention of the full gripper is kept, so `tau_m = 2*tau_rc2`
/// holds in these traces too.
fn run_bench(scenario: &Scenario) -> Result<Trace, SimError> {
    let p = scenario.params.validated()?;
    if !(scenario.dt > 0.0) || !scenario.dt.is_finite() {
        return Err(SimError::Config(format!("dt must be positive, got {}", scenario.dt)));
    }
    if scenario.motor_speed == 0.0 || !scenario.motor_speed.is_finite() {
        return Err(SimError::Config("motor_speed must be non-zero".into()));
    }
    if !(0.0..=p.theta_f_stop).contains(&scenario.initial_theta_f) {
        return Err(SimError::Config(format!(
            "initial_theta_f {} outside [0, {}]",
            scenario.initial_theta_f, p.theta_f_stop
        )));
    }
    let dir = if scenario.motor_speed >= 0.0 {
        Direction::Forward
    } else {
        Direction::Reverse
    };
    let sgn = dir.sign();
    let speed = scenario.motor_speed.abs();
    let ceiling = p.preload_static_max() + p.tau_g1;
    let tau_slip = pull_in_chain_torque(&p);

    let mut state = GripperState::at_rest();
    state.theta_f = scenario.initial_theta_f;
    state.theta_sp2 = scenario.initial_theta_f;
    let room = |theta: f64| match dir {
        Direction::Forward => p.theta_f_stop - theta,
        Direction::Reverse => theta,
    };
    let mut stick = ceiling > 0.0 && room(state.theta_f) > 0.0;
    state.mode = if stick {
        Mode::FingerBending(dir)
    } else {
        Mode::PullIn(dir)
    };
    state.stopper_engaged = room(state.theta_f) <= 0.0;

    let mut rows: Vec<TraceRow> = Vec::new();
    let mut events: Vec<TransitionEvent> = Vec::new();
    let mut motor_work = 0.0;
    let derived = |state: &mut GripperState, p: &MechParams| {
        state.theta_m = state.theta_sp2;
        state.theta_m_pi = state.theta_sp2 - state.theta_f;
        state.d_pi = p.epsilon * p.r_roller * state.theta_m_pi;
    };
    derived(&mut state, &p);
    let record = |rows: &mut Vec<TraceRow>, state: &GripperState, t: f64, tau: f64| {
        rows.push(TraceRow {
            t,
            tau_m: 2.0 * tau,
            tau_rc2: tau,
            theta_m: state.theta_m,
            theta_f: state.theta_f,
            theta_sp2: state.theta_sp2,
            d_f: state.d_f,
            f_tip: state.f_tip,
            d_pi: state.d_pi,
            mode: state.mode,
        });
    };
    record(&mut rows, &state, 0.0, if stick { 0.0 } else { tau_slip });

    let mut idx: u64 = 0;
    loop {
        let t0 = idx as f64 * scenario.dt;
        if t0 >= scenario.duration - 1e-12 {
            break;
        }
        let t1 = (idx + 1) as f64 * scenario.dt;
        let dth = speed * (t1 - t0);
        if stick {
            let avail = room(state.theta_f);
            if dth < avail {
                state.theta_f += sgn * dth;
                state.theta_sp2 += sgn * dth;
            } else {
                // stopper engages inside this step: bend exactly to the
                // stop, spike to full static capacity, then slip
                let t_edge = t0 + avail / speed;
                state.theta_f = match dir {
                    Direction::Forward => p.theta_f_stop,
                    Direction::Reverse => 0.0,
                };
                state.theta_sp2 += sgn * avail;
                state.stopper_engaged = true;
                state.mode = Mode::PullIn(dir);
                derived(&mut state, &p);
                events.push(TransitionEvent {
                    kind: EventKind::StopperEngaged,
                    time: t_edge,
                    state,
                });
                events.push(TransitionEvent {
                    kind: EventKind::ClutchSlipStart,
                    time: t_edge,
                    state,
                });
                record(&mut rows, &state, t_edge, ceiling);
                stick = false;
                let rest = dth - avail;
                state.theta_sp2 += sgn * rest;
                motor_work += 2.0 * tau_slip * rest;
            }
        } else {
            state.theta_sp2 += sgn * dth;
            motor_work += 2.0 * tau_slip * dth;
        }
        derived(&mut state, &p);
        idx += 1;
        record(&mut rows, &state, t1, if stick { 0.0 } else { tau_slip });
    }

    Ok(Trace {
        rows,
        events,
        chatter: false,
        motor_work,
        tip_work: 0.0,
        stop: StopReason::DurationEnd,
    })
}
