//! Runnable scenario descriptions and their on-disk format.
//!
//! A scenario file is flat `key = value` text: one assignment per line,
//! `#` starts a comment, keys match the struct field names. Angles and
//! speeds may be given in degrees through `*_deg` key variants. Unknown
//! and duplicate keys are hard errors so typos cannot silently fall back
//! to defaults.

use crate::contact::ObjectModel;
use crate::model::{MechParams, KINETIC_PRELOAD_RATIO};
use crate::statics::ResidualRanges;
use thiserror::Error;

/// Which rig a scenario drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    /// The full gripper: bending, grasping, and pull-in in one chain.
    Gripper,
    /// The clutch characterization bench: the motor turns sprocket 2
    /// directly against the fingertip unit, with screw and belt removed.
    SmsBBench,
}

impl ScenarioKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::Gripper => "gripper",
            ScenarioKind::SmsBBench => "sms_b_bench",
        }
    }
}

/// Closed-loop goal values carried by a scenario file. Zero means "not
/// requested" for each component; the threshold defaults from the
/// mechanism parameters when absent.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GoalSpec {
    pub theta_f: f64,
    pub f_tip: f64,
    pub d_pi: f64,
    pub tau_m_threshold: Option<f64>,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub params: MechParams,
    pub object: ObjectModel,
    /// Signed motor speed in rad/s; negative runs the release direction.
    pub motor_speed: f64,
    /// Motor torque limit in N·m; reaching it stops the run.
    pub torque_cap: f64,
    pub duration: f64,
    pub dt: f64,
    pub seed: u64,
    /// Residual scatter ranges; `None` runs with the fixed nominal
    /// residuals in `params`.
    pub noise: Option<ResidualRanges>,
    /// If set, the commanded speed flips sign at this time.
    pub reverse_at: Option<f64>,
    pub initial_theta_f: f64,
    pub initial_d_f: f64,
    pub goal: Option<GoalSpec>,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            kind: ScenarioKind::Gripper,
            params: MechParams::default(),
            object: ObjectModel::default(),
            motor_speed: 14.0_f64.to_radians(),
            torque_cap: 0.8,
            duration: 40.0,
            dt: 0.002,
            seed: 0,
            noise: None,
            reverse_at: None,
            initial_theta_f: 0.0,
            initial_d_f: 0.0,
            goal: None,
        }
    }
}

/// Structural error in a scenario file, located by line and column
/// (both 1-based).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {col}: {msg}")]
pub struct ScenarioParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

fn err(line: usize, col: usize, msg: impl Into<String>) -> ScenarioParseError {
    ScenarioParseError {
        line,
        col,
        msg: msg.into(),
    }
}

struct RawValue<'a> {
    text: &'a str,
    line: usize,
    col: usize,
}

impl RawValue<'_> {
    fn f64(&self) -> Result<f64, ScenarioParseError> {
        self.text
            .parse::<f64>()
            .map_err(|_| err(self.line, self.col, format!("expected a number, got `{}`", self.text)))
    }

    fn u64(&self) -> Result<u64, ScenarioParseError> {
        self.text
            .parse::<u64>()
            .map_err(|_| {
                err(
                    self.line,
                    self.col,
                    format!("expected a non-negative integer, got `{}`", self.text),
                )
            })
    }

    fn bool(&self) -> Result<bool, ScenarioParseError> {
        match self.text {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(err(
                self.line,
                self.col,
                format!("expected true or false, got `{other}`"),
            )),
        }
    }
}

impl Scenario {
    /// Parses the flat key-value format. Structural problems (syntax,
    /// unknown or duplicate keys, malformed values, incomplete noise
    /// ranges) are reported with their line and column; physical
    /// consistency is checked later when a run starts.
    pub fn parse(text: &str) -> Result<Scenario, ScenarioParseError> {
        let mut sc = Scenario::default();
        let mut seen: Vec<String> = Vec::new();
        let mut tau_pre_explicit = false;
        let mut deterministic = false;
        let mut noise: [Option<f64>; 4] = [None; 4];
        let mut noise_line = 0usize;

        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let content = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            };
            if content.trim().is_empty() {
                continue;
            }
            let eq = match content.find('=') {
                Some(pos) => pos,
                None => {
                    let col = content.len() - content.trim_start().len() + 1;
                    return Err(err(line_no, col, "expected `key = value`"));
                }
            };
            let key = content[..eq].trim();
            let key_col = content.find(key).unwrap_or(0) + 1;
            if key.is_empty() {
                return Err(err(line_no, 1, "missing key before `=`"));
            }
            let value_text = content[eq + 1..].trim();
            let value_col = eq + 1 + content[eq + 1..].find(value_text).unwrap_or(0) + 1;
            if value_text.is_empty() {
                return Err(err(line_no, value_col, format!("missing value for `{key}`")));
            }
            if seen.iter().any(|k| k == key) {
                return Err(err(line_no, key_col, format!("duplicate key `{key}`")));
            }
            seen.push(key.to_string());
            let v = RawValue {
                text: value_text,
                line: line_no,
                col: value_col,
            };

            match key {
                "kind" => {
                    sc.kind = match v.text {
                        "gripper" => ScenarioKind::Gripper,
                        "sms_b_bench" => ScenarioKind::SmsBBench,
                        other => {
                            return Err(err(
                                line_no,
                                value_col,
                                format!("unknown kind `{other}` (gripper | sms_b_bench)"),
                            ))
                        }
                    }
                }
                "lambda" => sc.params.lambda = v.f64()?,
                "lambda_deg" => sc.params.lambda = v.f64()?.to_radians(),
                "r_dr" => sc.params.r_dr = v.f64()?,
                "mu_st" => sc.params.mu_st = v.f64()?,
                "mu_kn" => sc.params.mu_kn = v.f64()?,
                "delta_f" => sc.params.delta_f = v.f64()?,
                "delta_tau" => sc.params.delta_tau = v.f64()?,
                "t_scw" => sc.params.t_scw = v.f64()?,
                "c_pre" => sc.params.c_pre = v.f64()?,
                "tau_pre_kn" => {
                    sc.params.tau_pre_kn = v.f64()?;
                    tau_pre_explicit = true;
                }
                "tau_g1" => sc.params.tau_g1 = v.f64()?,
                "epsilon" => sc.params.epsilon = v.f64()?,
                "r_roller" => sc.params.r_roller = v.f64()?,
                "theta_f_stop" => sc.params.theta_f_stop = v.f64()?,
                "theta_f_stop_deg" => sc.params.theta_f_stop = v.f64()?.to_radians(),
                "gap0" => sc.object.gap0 = v.f64()?,
                "k_obj" => sc.object.k_obj = v.f64()?,
                "fixed" => sc.object.fixed = v.bool()?,
                "motor_speed" => sc.motor_speed = v.f64()?,
                "motor_speed_deg" => sc.motor_speed = v.f64()?.to_radians(),
                "torque_cap" => sc.torque_cap = v.f64()?,
                "duration" => sc.duration = v.f64()?,
                "dt" => sc.dt = v.f64()?,
                "seed" => sc.seed = v.u64()?,
                "deterministic" => deterministic = v.bool()?,
                "noise_delta_f_min" => {
                    noise[0] = Some(v.f64()?);
                    noise_line = line_no;
                }
                "noise_delta_f_max" => {
                    noise[1] = Some(v.f64()?);
                    noise_line = line_no;
                }
                "noise_delta_tau_min" => {
                    noise[2] = Some(v.f64()?);
                    noise_line = line_no;
                }
                "noise_delta_tau_max" => {
                    noise[3] = Some(v.f64()?);
                    noise_line = line_no;
                }
                "reverse_at" => sc.reverse_at = Some(v.f64()?),
                "initial_theta_f" => sc.initial_theta_f = v.f64()?,
                "initial_theta_f_deg" => sc.initial_theta_f = v.f64()?.to_radians(),
                "initial_d_f" => sc.initial_d_f = v.f64()?,
                "goal_theta_f" => sc.goal_mut().theta_f = v.f64()?,
                "goal_theta_f_deg" => sc.goal_mut().theta_f = v.f64()?.to_radians(),
                "goal_f_tip" => sc.goal_mut().f_tip = v.f64()?,
                "goal_d_pi" => sc.goal_mut().d_pi = v.f64()?,
                "tau_m_threshold" => sc.goal_mut().tau_m_threshold = Some(v.f64()?),
                other => {
                    return Err(err(line_no, key_col, format!("unknown key `{other}`")));
                }
            }
        }

        if noise.iter().any(Option::is_some) {
            if noise.iter().any(Option::is_none) {
                return Err(err(
                    noise_line,
                    1,
                    "incomplete noise ranges: need noise_delta_f_min/max and noise_delta_tau_min/max",
                ));
            }
            sc.noise = Some(ResidualRanges {
                delta_f: (noise[0].unwrap(), noise[1].unwrap()),
                delta_tau: (noise[2].unwrap(), noise[3].unwrap()),
            });
        }
        if deterministic {
            sc.noise = None;
        }
        if !tau_pre_explicit {
            sc.params.tau_pre_kn = KINETIC_PRELOAD_RATIO * sc.params.c_pre * sc.params.t_scw;
        }
        Ok(sc)
    }

    fn goal_mut(&mut self) -> &mut GoalSpec {
        self.goal.get_or_insert_with(GoalSpec::default)
    }

    /// Full echo of the scenario in its own file format. Floats print in
    /// Rust's shortest round-trip form, so `parse(serialize(s)) == s`
    /// bit for bit.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        kv("kind", self.kind.as_str().to_string());
        let p = &self.params;
        kv("lambda", p.lambda.to_string());
        kv("r_dr", p.r_dr.to_string());
        kv("mu_st", p.mu_st.to_string());
        kv("mu_kn", p.mu_kn.to_string());
        kv("delta_f", p.delta_f.to_string());
        kv("delta_tau", p.delta_tau.to_string());
        kv("t_scw", p.t_scw.to_string());
        kv("c_pre", p.c_pre.to_string());
        kv("tau_pre_kn", p.tau_pre_kn.to_string());
        kv("tau_g1", p.tau_g1.to_string());
        kv("epsilon", p.epsilon.to_string());
        kv("r_roller", p.r_roller.to_string());
        kv("theta_f_stop", p.theta_f_stop.to_string());
        kv("gap0", self.object.gap0.to_string());
        kv("k_obj", self.object.k_obj.to_string());
        kv("fixed", self.object.fixed.to_string());
        kv("motor_speed", self.motor_speed.to_string());
        kv("torque_cap", self.torque_cap.to_string());
        kv("duration", self.duration.to_string());
        kv("dt", self.dt.to_string());
        kv("seed", self.seed.to_string());
        if let Some(n) = &self.noise {
            kv("noise_delta_f_min", n.delta_f.0.to_string());
            kv("noise_delta_f_max", n.delta_f.1.to_string());
            kv("noise_delta_tau_min", n.delta_tau.0.to_string());
            kv("noise_delta_tau_max", n.delta_tau.1.to_string());
        }
        if let Some(r) = self.reverse_at {
            kv("reverse_at", r.to_string());
        }
        kv("initial_theta_f", self.initial_theta_f.to_string());
        kv("initial_d_f", self.initial_d_f.to_string());
        if let Some(g) = &self.goal {
            kv("goal_theta_f", g.theta_f.to_string());
            kv("goal_f_tip", g.f_tip.to_string());
            kv("goal_d_pi", g.d_pi.to_string());
            if let Some(th) = g.tau_m_threshold {
                kv("tau_m_threshold", th.to_string());
            }
        }
        out
    }
}
