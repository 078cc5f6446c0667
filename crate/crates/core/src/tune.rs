//! Design-space exploration: which lead angles and clutch tightening
//! torques make the three motions happen in the intended order, and which
//! feasible point grips hardest.
//!
//! The intended order is: bending first (the load-side residuals alone
//! must turn sprocket 1), grasping only after the stopper engages (the
//! zero-load translation breakaway must sit below the clutch's static
//! ceiling), and pull-in last but reachable (slip must occur below the
//! motor's torque cap). A point violating any of these changes the mode
//! order outright — an untightened clutch, for instance, slips before the
//! fingers ever bend.

use crate::model::{MechParams, ParamError};
use crate::statics::{
    alpha_st, grasp_equilibrium_tip_force, translation_breakaway_torque,
};
use std::fmt::Write as _;
use thiserror::Error;

/// Grid of candidate design points.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub lambdas: Vec<f64>,
    pub t_scws: Vec<f64>,
}

impl GridSpec {
    /// Inclusive linear grids over both axes. A single step collapses an
    /// axis to its lower bound.
    pub fn from_ranges(
        lambda: (f64, f64),
        lambda_steps: usize,
        t_scw: (f64, f64),
        t_scw_steps: usize,
    ) -> GridSpec {
        GridSpec {
            lambdas: linspace(lambda.0, lambda.1, lambda_steps),
            t_scws: linspace(t_scw.0, t_scw.1, t_scw_steps),
        }
    }

    pub fn len(&self) -> usize {
        self.lambdas.len() * self.t_scws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![lo],
        n => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Feasibility verdict for one design point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityRow {
    pub lambda: f64,
    pub t_scw: f64,
    /// The residual load alone turns sprocket 1 before any torque builds,
    /// and the clutch has capacity to drag the fingertip along.
    pub bend_first: bool,
    /// Zero-load translation breaks away below the clutch ceiling, so the
    /// screws advance once the stopper engages instead of slipping.
    pub grasp_after_bend: bool,
    /// Clutch slip occurs below the motor torque cap, so pull-in is
    /// reachable at all.
    pub pull_in_reachable: bool,
    /// All three of the above: the modes happen in the intended order.
    pub ordering_ok: bool,
    /// Normalized margin of the bending-residual comparison:
    /// `driving/opposing − 1`. Zero is exactly marginal; small values ride
    /// the boundary and chatter under residual scatter.
    pub chatter_margin: f64,
    /// Steady grasp force when the motor is at its torque cap.
    pub f_tip_at_cap: f64,
    /// Finger approach per motor radian, m/rad.
    pub closing_speed: f64,
}

/// Evaluates one `(lambda, t_scw)` candidate against a base mechanism.
/// The kinetic clutch preload is re-derived from the tightening torque, as
/// it would be on the real part.
pub fn evaluate_point(
    lambda: f64,
    t_scw: f64,
    base: &MechParams,
    torque_cap: f64,
) -> Result<FeasibilityRow, ParamError> {
    let p = base.with_lambda(lambda).with_tightening_torque(t_scw).validated()?;
    let ceiling = p.preload_static_max() + p.tau_g1;
    let driving = alpha_st(&p) * p.r_dr * p.delta_f;
    let bend_first = driving > p.delta_tau && p.preload_static_max() > 0.0;
    let grasp_after_bend = translation_breakaway_torque(0.0, &p) < ceiling;
    let pull_in_reachable = 2.0 * ceiling < torque_cap;
    Ok(FeasibilityRow {
        lambda,
        t_scw,
        bend_first,
        grasp_after_bend,
        pull_in_reachable,
        ordering_ok: bend_first && grasp_after_bend && pull_in_reachable,
        chatter_margin: if p.delta_tau > 0.0 {
            driving / p.delta_tau - 1.0
        } else {
            f64::INFINITY
        },
        f_tip_at_cap: grasp_equilibrium_tip_force(torque_cap, &p),
        closing_speed: p.r_dr * lambda.tan(),
    })
}

/// A swept grid. Points whose parameters fail validation (for instance a
/// lead angle at the self-locking pole) are not buildable designs and are
/// omitted; `evaluated` counts the whole grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub torque_cap: f64,
    pub evaluated: usize,
    pub rows: Vec<FeasibilityRow>,
}

pub const FEASIBILITY_HEADER: &str = "lambda_deg,t_scw,bend_first,grasp_after_bend,pull_in_reachable,ordering_ok,chatter_margin,f_tip_at_cap,closing_speed";

impl FeasibilityReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(FEASIBILITY_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.lambda.to_degrees(),
                r.t_scw,
                r.bend_first,
                r.grasp_after_bend,
                r.pull_in_reachable,
                r.ordering_ok,
                r.chatter_margin,
                r.f_tip_at_cap,
                r.closing_speed
            );
        }
        out
    }
}

/// Sweeps the grid against a base mechanism.
pub fn sweep(grid: &GridSpec, base: &MechParams, torque_cap: f64) -> FeasibilityReport {
    let mut rows = Vec::with_capacity(grid.len());
    for &lambda in &grid.lambdas {
        for &t_scw in &grid.t_scws {
            if let Ok(row) = evaluate_point(lambda, t_scw, base, torque_cap) {
                rows.push(row);
            }
        }
    }
    FeasibilityReport {
        torque_cap,
        evaluated: grid.len(),
        rows,
    }
}

/// Selection constraints beyond the ordering flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeConfig {
    pub torque_cap: f64,
    /// Minimum acceptable approach speed, m per motor radian.
    pub speed_floor: f64,
    /// Required ratio of the driving to the opposing bending residual;
    /// 2.0 demands twice the opposition before the point is trusted not
    /// to chatter.
    pub chatter_safety: f64,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig {
            torque_cap: 0.8,
            speed_floor: 0.0,
            chatter_safety: 2.0,
        }
    }
}

#[derive(Debug, Error)]
pub enum TuneError {
    #[error("no feasible design point among {evaluated} evaluated")]
    Infeasible { evaluated: usize },
}

/// Picks the feasible point with the highest grasp force at the torque
/// cap. Ties prefer the larger lead angle (faster approach), then the
/// larger tightening torque (more slip headroom).
pub fn optimize(
    grid: &GridSpec,
    base: &MechParams,
    cfg: &OptimizeConfig,
) -> Result<FeasibilityRow, TuneError> {
    let report = sweep(grid, base, cfg.torque_cap);
    let best = report
        .rows
        .iter()
        .filter(|r| {
            r.ordering_ok
                && r.chatter_margin >= cfg.chatter_safety - 1.0
                && r.closing_speed >= cfg.speed_floor
        })
        .max_by(|a, b| {
            (a.f_tip_at_cap, a.lambda, a.t_scw)
                .partial_cmp(&(b.f_tip_at_cap, b.lambda, b.t_scw))
                .expect("feasible rows are finite")
        })
        .copied();
    best.ok_or(TuneError::Infeasible {
        evaluated: report.evaluated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn base() -> MechParams {
        MechParams::default()
    }

    fn deg(d: f64) -> f64 {
        d.to_radians()
    }

    #[test]
    fn nominal_point_orders_correctly() {
        let r = evaluate_point(deg(30.0), 0.46, &base(), 0.8).unwrap();
        assert!(r.bend_first && r.grasp_after_bend && r.pull_in_reachable && r.ordering_ok);
        assert_relative_eq!(r.chatter_margin, 1.6529, max_relative = 1e-3);
        assert_relative_eq!(r.f_tip_at_cap, 75.08, max_relative = 1e-3);
        assert_relative_eq!(r.closing_speed, 0.0028867513459481286, max_relative = 1e-12);
    }

    #[test]
    fn untightened_clutch_breaks_the_order() {
        let r = evaluate_point(deg(30.0), 0.0, &base(), 0.8).unwrap();
        assert!(!r.bend_first);
        assert!(!r.ordering_ok);
    }

    #[test]
    fn tightening_is_monotone_while_reachable() {
        // once a tightening torque works, more tightening keeps the order
        // until slip stops being reachable below the cap
        let mut prev_ok = false;
        for i in 0..40 {
            let t = 0.05 + 0.02 * i as f64;
            let r = evaluate_point(deg(30.0), t, &base(), 0.8).unwrap();
            if prev_ok && r.pull_in_reachable {
                assert!(r.ordering_ok, "order broke at t_scw = {t}");
            }
            prev_ok = r.ordering_ok;
        }
    }

    #[test]
    fn pull_in_unreachable_above_the_cap() {
        // ceiling 0.4*2.2 + 0.02 = 0.9, doubled is 1.8 > 0.8
        let r = evaluate_point(deg(30.0), 2.2, &base(), 0.8).unwrap();
        assert!(!r.pull_in_reachable);
        assert!(!r.ordering_ok);
    }

    #[test]
    fn shallow_lead_angle_fails_the_chatter_floor() {
        let grid = GridSpec {
            lambdas: vec![deg(20.0), deg(30.0), deg(60.0)],
            t_scws: vec![0.46],
        };
        let cfg = OptimizeConfig::default();
        let best = optimize(&grid, &base(), &cfg).unwrap();
        // 20° rides the bending boundary (margin 0.86 < 1.0) and 30° grips
        // harder than 60°
        assert_relative_eq!(best.lambda, deg(30.0), max_relative = 1e-12);
        let r20 = evaluate_point(deg(20.0), 0.46, &base(), 0.8).unwrap();
        assert!(r20.chatter_margin < cfg.chatter_safety - 1.0);
        assert!(r20.ordering_ok, "20° is orderable, just chatter-prone");
    }

    #[test]
    fn speed_floor_flips_the_choice() {
        let grid = GridSpec {
            lambdas: vec![deg(30.0), deg(60.0)],
            t_scws: vec![0.46],
        };
        let cfg = OptimizeConfig {
            speed_floor: 0.004, // 30° closes at 0.0029 m/rad, 60° at 0.0087
            ..OptimizeConfig::default()
        };
        let best = optimize(&grid, &base(), &cfg).unwrap();
        assert_relative_eq!(best.lambda, deg(60.0), max_relative = 1e-12);
    }

    #[test]
    fn impossible_safety_reports_infeasible() {
        let grid = GridSpec::from_ranges((deg(10.0), deg(70.0)), 7, (0.1, 1.0), 10);
        let cfg = OptimizeConfig {
            chatter_safety: f64::INFINITY,
            ..OptimizeConfig::default()
        };
        match optimize(&grid, &base(), &cfg) {
            Err(TuneError::Infeasible { evaluated }) => assert_eq!(evaluated, 70),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn force_ties_prefer_stiffer_clutch() {
        // grasp force at the cap does not depend on t_scw, so the tie rule
        // decides: the larger tightening torque wins
        let grid = GridSpec {
            lambdas: vec![deg(30.0)],
            t_scws: vec![0.3, 0.46],
        };
        let best = optimize(&grid, &base(), &OptimizeConfig::default()).unwrap();
        assert_eq!(best.t_scw, 0.46);
    }

    #[test]
    fn singular_points_are_skipped_not_fatal() {
        // 75° is past the self-locking pole for mu = 0.3
        let grid = GridSpec {
            lambdas: vec![deg(30.0), deg(75.0)],
            t_scws: vec![0.46],
        };
        let report = sweep(&grid, &base(), 0.8);
        assert_eq!(report.evaluated, 2);
        assert_eq!(report.rows.len(), 1);
    }

    #[test]
    fn csv_lists_one_line_per_valid_point() {
        let grid = GridSpec {
            lambdas: vec![deg(30.0)],
            t_scws: vec![0.46],
        };
        let csv = sweep(&grid, &base(), 0.8).to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(FEASIBILITY_HEADER));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_relative_eq!(row[0].parse::<f64>().unwrap(), 30.0, max_relative = 1e-12);
        assert_eq!(&row[1..6], &["0.46", "true", "true", "true", "true"]);
    }
}
