//! Quasi-static force and torque balances at the two self-switching
//! interfaces: the lead-screw contact on the drive shaft and the friction
//! clutch between sprocket 2 and the fingertip unit.
//!
//! The thread contact resolves a normal force `f_n` and friction force
//! `f_fri` into an axial thrust and a shaft torque:
//!
//! ```text
//! f_sm   = f_n cos(lambda) - f_fri sin(lambda)
//! tau_sm = r_dr (f_fri cos(lambda) + f_n sin(lambda))
//! ```
//!
//! With friction saturated at `mu * f_n` the two components are linked by
//! the force amplification ratio
//!
//! ```text
//! alpha(lambda, mu) = (mu cos(lambda) + sin(lambda)) / (cos(lambda) - mu sin(lambda))
//! ```
//!
//! so `tau_sm = alpha * r_dr * f_sm`. All mode-switching predicates reduce
//! to comparing the external load pair `(f_tip, tau_rc2)` through `alpha`.
//! The predicates are strict inequalities: a zero-margin comparison means
//! no motion is generated.

use crate::model::{MechParams, ParamError};
use rand::Rng;

/// Force amplification ratio of the thread contact with friction saturated
/// at coefficient `mu`. Diverges at the pole `lambda = atan(1/mu)`; inputs
/// at or beyond the pole are an error.
pub fn amplification(lambda: f64, mu: f64) -> Result<f64, ParamError> {
    let limit = if mu > 0.0 {
        (1.0 / mu).atan()
    } else {
        std::f64::consts::FRAC_PI_2
    };
    if lambda >= limit {
        return Err(ParamError::SingularLeadAngle { lambda, limit });
    }
    Ok((mu * lambda.cos() + lambda.sin()) / (lambda.cos() - mu * lambda.sin()))
}

/// Amplification with the static thread friction coefficient.
/// Parameter validation guarantees the pole is not reached.
pub fn alpha_st(p: &MechParams) -> f64 {
    debug_assert!(p.lambda < (1.0 / p.mu_st.max(f64::MIN_POSITIVE)).atan());
    (p.mu_st * p.lambda.cos() + p.lambda.sin()) / (p.lambda.cos() - p.mu_st * p.lambda.sin())
}

/// Amplification with the kinetic thread friction coefficient.
pub fn alpha_kn(p: &MechParams) -> f64 {
    debug_assert!(p.lambda < (1.0 / p.mu_kn.max(f64::MIN_POSITIVE)).atan());
    (p.mu_kn * p.lambda.cos() + p.lambda.sin()) / (p.lambda.cos() - p.mu_kn * p.lambda.sin())
}

/// Axial thrust and shaft torque produced by one thread contact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScrewWrench {
    /// Axial component pushing sprocket 1 along the shaft.
    pub f_sm: f64,
    /// Torque component about the shaft axis.
    pub tau_sm: f64,
}

/// Resolves thread contact forces into the screw wrench. Linear in both
/// inputs.
pub fn screw_wrench(f_n: f64, f_fri: f64, p: &MechParams) -> ScrewWrench {
    let (s, c) = p.lambda.sin_cos();
    ScrewWrench {
        f_sm: f_n * c - f_fri * s,
        tau_sm: p.r_dr * (f_fri * c + f_n * s),
    }
}

/// Chain torque on each sprocket 1: the motor torque splits evenly between
/// the two symmetric fingers.
pub fn chain_torque_from_motor(tau_m: f64) -> f64 {
    tau_m / 2.0
}

/// Motor torque implied by one finger's chain torque (inverse of the even
/// two-finger split).
pub fn motor_torque_from_chain(tau_rc2: f64) -> f64 {
    2.0 * tau_rc2
}

/// True when sprocket 1 rotates with the drive shaft instead of
/// translating: the torque transmitted through the saturated thread
/// contact exceeds the resisting chain torque.
///
/// `|alpha_st * r_dr * (f_tip + delta_f)| > |tau_rc2 + delta_tau|`
pub fn rotation_condition(f_tip: f64, tau_rc2: f64, p: &MechParams) -> bool {
    (alpha_st(p) * p.r_dr * (f_tip + p.delta_f)).abs() > (tau_rc2 + p.delta_tau).abs()
}

/// True when sprocket 1 translates along the shaft: the axial thrust
/// developed against the chain-held sprocket exceeds the resisting tip
/// load.
///
/// `|(tau_rc2 + delta_tau) / (r_dr * alpha_st)| > |f_tip + delta_f|`
pub fn translation_condition(f_tip: f64, tau_rc2: f64, p: &MechParams) -> bool {
    ((tau_rc2 + p.delta_tau) / (p.r_dr * alpha_st(p))).abs() > (f_tip + p.delta_f).abs()
}

/// True when the chain torque exceeds what the clutch can hold, so
/// sprocket 2 slips relative to the fingertip unit and the belt runs.
///
/// `tau_rc2 > c_pre * t_scw + tau_g1`
pub fn clutch_slip_condition(tau_rc2: f64, p: &MechParams) -> bool {
    tau_rc2 > p.preload_static_max() + p.tau_g1
}

/// True when a bare fingertip load can back-rotate the finger once the
/// chain is slack (the release-phase bending check, chain torque absent).
///
/// `|alpha_st * r_dr * (f_tip + delta_f)| > |delta_tau|`
pub fn reverse_bend_condition(f_tip: f64, p: &MechParams) -> bool {
    (alpha_st(p) * p.r_dr * (f_tip + p.delta_f)).abs() > p.delta_tau.abs()
}

/// Steady-grasp tip force sustained by a given motor torque, from the
/// kinetic translation balance solved for `f_tip`, clamped at zero:
///
/// `f_tip = (tau_m / 2 + delta_tau) / (r_dr * alpha_kn) - delta_f`
pub fn grasp_equilibrium_tip_force(tau_m: f64, p: &MechParams) -> f64 {
    let f = (chain_torque_from_motor(tau_m) + p.delta_tau) / (p.r_dr * alpha_kn(p)) - p.delta_f;
    f.max(0.0)
}

/// Chain torque demanded to sustain steady translation against a given tip
/// force (the kinetic balance solved for `tau_rc2`), clamped at zero.
pub fn grasp_equilibrium_chain_torque(f_tip: f64, p: &MechParams) -> f64 {
    (alpha_kn(p) * p.r_dr * (f_tip + p.delta_f) - p.delta_tau).max(0.0)
}

/// Chain torque at which translation just breaks away against a given tip
/// force (static friction at the thread), clamped at zero. Grasping is
/// reachable only while this stays below the clutch ceiling.
pub fn translation_breakaway_torque(f_tip: f64, p: &MechParams) -> f64 {
    (alpha_st(p) * p.r_dr * (f_tip + p.delta_f) - p.delta_tau).max(0.0)
}

/// Chain torque carried while the clutch slides and the belt conveys:
/// `tau_pre_kn + tau_g1`. Never exceeds the static ceiling plus gear load.
pub fn pull_in_chain_torque(p: &MechParams) -> f64 {
    p.tau_pre_kn + p.tau_g1
}

/// Torque balance on sprocket 2 while the fingertip unit rests on the
/// stopper: the chain torque is reacted by the clutch contact plus the
/// belt gear, and passes through to the stopper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorqueBalanceB {
    pub tau_rc2: f64,
    pub tau_pre: f64,
    pub tau_g1: f64,
    pub tau_stopper: f64,
}

impl TorqueBalanceB {
    /// Builds the balance from the two reaction components; the chain and
    /// stopper torques follow from equilibrium.
    pub fn from_reactions(tau_pre: f64, tau_g1: f64) -> Self {
        let total = tau_pre + tau_g1;
        TorqueBalanceB {
            tau_rc2: total,
            tau_pre,
            tau_g1,
            tau_stopper: total,
        }
    }

    /// Equilibrium residual; zero for any balance built from reactions.
    pub fn residual(&self) -> f64 {
        (self.tau_rc2 - self.tau_stopper).abs()
            + (self.tau_stopper - (self.tau_pre + self.tau_g1)).abs()
    }
}

/// Uniform sampling ranges for the residual force and torque, used to model
/// assembly-dependent scatter that causes mode chatter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualRanges {
    pub delta_f: (f64, f64),
    pub delta_tau: (f64, f64),
}

impl ResidualRanges {
    /// Draws one `(delta_f, delta_tau)` pair. The generator handle is
    /// explicit so runs are reproducible from a seed.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> (f64, f64) {
        let df = rng.gen_range(self.delta_f.0..=self.delta_f.1);
        let dt = rng.gen_range(self.delta_tau.0..=self.delta_tau.1);
        (df, dt)
    }

    /// True when the rotation predicate flips somewhere inside the ranges:
    /// its margin is monotone in both residuals, so checking the two
    /// extreme corners suffices.
    pub fn rotation_ambiguous(&self, f_tip: f64, tau_rc2: f64, p: &MechParams) -> bool {
        let hi = MechParams {
            delta_f: self.delta_f.1,
            delta_tau: self.delta_tau.0,
            ..*p
        };
        let lo = MechParams {
            delta_f: self.delta_f.0,
            delta_tau: self.delta_tau.1,
            ..*p
        };
        rotation_condition(f_tip, tau_rc2, &hi) != rotation_condition(f_tip, tau_rc2, &lo)
    }

    pub fn validated(self) -> Result<Self, ParamError> {
        for (name, (lo, hi)) in [("noise_delta_f", self.delta_f), ("noise_delta_tau", self.delta_tau)] {
            if !(lo >= 0.0) {
                return Err(ParamError::NegativeParameter { name, value: lo });
            }
            if hi < lo {
                return Err(ParamError::NegativeParameter {
                    name,
                    value: hi - lo,
                });
            }
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Frozen reference values, computed once with independent 64-bit
    // arithmetic and pinned here.
    const ALPHA_30_03: f64 = 1.0611461787800947;
    const ALPHA_60_03: f64 = 4.230048466095993;

    fn p() -> MechParams {
        MechParams::default()
    }

    #[test]
    fn amplification_reference_values() {
        assert_relative_eq!(
            amplification(30.0_f64.to_radians(), 0.3).unwrap(),
            ALPHA_30_03,
            max_relative = 1e-12
        );
        // frictionless case degenerates to tan(lambda)
        assert_relative_eq!(
            amplification(30.0_f64.to_radians(), 0.0).unwrap(),
            30.0_f64.to_radians().tan(),
            max_relative = 1e-12
        );
        // zero lead angle leaves only the friction term
        assert_relative_eq!(amplification(0.0, 0.3).unwrap(), 0.3, max_relative = 1e-12);
        assert_relative_eq!(
            amplification(60.0_f64.to_radians(), 0.3).unwrap(),
            ALPHA_60_03,
            max_relative = 1e-12
        );
    }

    #[test]
    fn amplification_monotone_and_divergent_near_pole() {
        // strictly increasing in lambda for fixed mu
        let mut last = 0.0;
        for deg in 1..73 {
            let a = amplification((deg as f64).to_radians(), 0.3).unwrap();
            assert!(a > last, "not monotone at {deg} deg");
            last = a;
        }
        // strictly increasing in mu for fixed lambda
        let mut last = 0.0;
        for mu10 in 0..10 {
            let a = amplification(30.0_f64.to_radians(), mu10 as f64 / 10.0).unwrap();
            assert!(a > last || mu10 == 0);
            last = a;
        }
        // grows without bound approaching atan(1/0.3) ~ 73.3 deg
        assert!(amplification(73.29_f64.to_radians(), 0.3).unwrap() > 1e2);
        assert!(amplification(73.3007_f64.to_radians(), 0.3).unwrap() > 1e4);
        assert!(amplification(73.31_f64.to_radians(), 0.3).is_err());
    }

    #[test]
    fn screw_wrench_reference_point() {
        let w = screw_wrench(10.0, 3.0, &p());
        assert_relative_eq!(w.f_sm, 7.160254037844387, max_relative = 1e-12);
        assert_relative_eq!(w.tau_sm, 0.037990381056766574, max_relative = 1e-12);
    }

    #[test]
    fn screw_wrench_is_linear() {
        let params = p();
        let a = screw_wrench(2.0, 1.0, &params);
        let b = screw_wrench(5.0, -2.0, &params);
        let sum = screw_wrench(7.0, -1.0, &params);
        assert_relative_eq!(a.f_sm + b.f_sm, sum.f_sm, max_relative = 1e-12);
        assert_relative_eq!(a.tau_sm + b.tau_sm, sum.tau_sm, max_relative = 1e-12);
        let scaled = screw_wrench(6.0, 3.0, &params);
        assert_relative_eq!(3.0 * a.f_sm, scaled.f_sm, max_relative = 1e-12);
        assert_relative_eq!(3.0 * a.tau_sm, scaled.tau_sm, max_relative = 1e-12);
    }

    #[test]
    fn saturated_wrench_matches_amplification() {
        // with f_fri = mu * f_n the torque/thrust ratio equals alpha * r_dr
        let params = p();
        let f_n = 12.5;
        let w = screw_wrench(f_n, params.mu_st * f_n, &params);
        assert_relative_eq!(
            w.tau_sm / w.f_sm,
            alpha_st(&params) * params.r_dr,
            max_relative = 1e-12
        );
    }

    #[test]
    fn chain_torque_split() {
        assert_relative_eq!(chain_torque_from_motor(0.8), 0.4);
        assert_relative_eq!(chain_torque_from_motor(0.3), 0.15);
        assert_relative_eq!(motor_torque_from_chain(0.15), 0.3);
    }

    #[test]
    fn rotation_condition_cases() {
        let params = p();
        // unloaded, slack chain: residual force wins and the shaft drags
        // sprocket 1 around (0.002653 > 0.001)
        assert!(rotation_condition(0.0, 0.0, &params));
        // a held chain stops rotation
        assert!(!rotation_condition(0.0, 0.4, &params));
    }

    #[test]
    fn translation_condition_cases() {
        let params = p();
        // 0.401 / (r * alpha) = 75.58 N of thrust vs 0.5 N residual load
        assert!(translation_condition(0.0, 0.4, &params));
        // slack chain develops only 0.188 N, below the 0.5 N residual
        assert!(!translation_condition(0.0, 0.0, &params));
    }

    #[test]
    fn conditions_degenerate_at_zero_margin() {
        let zero = MechParams {
            delta_f: 0.0,
            delta_tau: 0.0,
            ..p()
        };
        assert!(!rotation_condition(0.0, 0.0, &zero));
        assert!(!translation_condition(0.0, 0.0, &zero));
    }

    #[test]
    fn rotation_translation_mutually_exclusive_without_residuals() {
        let zero = MechParams {
            delta_f: 0.0,
            delta_tau: 0.0,
            ..p()
        };
        for i in 0..50 {
            for j in 0..50 {
                let f = i as f64 * 2.0;
                let t = j as f64 * 0.01;
                let r = rotation_condition(f, t, &zero);
                let tr = translation_condition(f, t, &zero);
                assert!(!(r && tr), "both true at f={f} tau={t}");
            }
        }
    }

    #[test]
    fn clutch_slip_cases() {
        let params = p();
        // ceiling = 0.4 * 0.46 + 0.02 = 0.204
        assert!(!clutch_slip_condition(0.204, &params));
        assert!(clutch_slip_condition(0.2041, &params));
        // untightened screw with a free belt slips at any positive torque
        let loose = MechParams {
            tau_g1: 0.0,
            ..params.with_tightening_torque(0.0)
        };
        assert!(clutch_slip_condition(0.01, &loose));
        assert!(!clutch_slip_condition(0.0, &loose)); // strict inequality
        // 0.75 N*m tightening holds 0.30 N*m of chain torque
        let tight = params.with_tightening_torque(0.75);
        assert!(!clutch_slip_condition(0.30, &tight));
    }

    #[test]
    fn grasp_equilibrium_reference_points() {
        let zero = MechParams {
            delta_f: 0.0,
            delta_tau: 0.0,
            ..p()
        };
        // 0.2971 N*m of motor torque holds ~28 N at the tips
        assert_relative_eq!(
            grasp_equilibrium_tip_force(0.2971, &zero),
            27.998027598944887,
            max_relative = 1e-12
        );
        // at the 0.8 N*m cap: 75.4 N at 30 deg, 18.9 N at 60 deg
        assert_relative_eq!(
            grasp_equilibrium_tip_force(0.8, &zero),
            75.39017865754262,
            max_relative = 1e-12
        );
        let steep = MechParams {
            lambda: 60.0_f64.to_radians(),
            ..zero
        };
        assert_relative_eq!(
            grasp_equilibrium_tip_force(0.8, &steep),
            18.912312859108635,
            max_relative = 1e-12
        );
        // negative demand clamps to zero
        assert_eq!(grasp_equilibrium_tip_force(0.0, &p()), 0.0);
    }

    #[test]
    fn grasp_equilibrium_round_trip() {
        let params = p();
        for f in [0.0, 1.0, 9.0, 28.0, 75.0] {
            let tau = motor_torque_from_chain(grasp_equilibrium_chain_torque(f, &params));
            assert_relative_eq!(
                grasp_equilibrium_tip_force(tau, &params),
                f,
                max_relative = 1e-12,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn breakaway_bounds_equilibrium() {
        // static breakaway never sits below the kinetic demand
        let mut params = p();
        params.mu_st = 0.35;
        for f in [0.0, 5.0, 40.0] {
            assert!(
                translation_breakaway_torque(f, &params)
                    >= grasp_equilibrium_chain_torque(f, &params)
            );
        }
    }

    #[test]
    fn pull_in_torque_below_static_ceiling() {
        let params = p();
        assert_relative_eq!(pull_in_chain_torque(&params), 0.1856, max_relative = 1e-12);
        assert!(pull_in_chain_torque(&params) <= params.preload_static_max() + params.tau_g1);
    }

    #[test]
    fn reverse_bend_reference() {
        // a 10 N tip load easily back-drives the extended finger
        assert!(reverse_bend_condition(10.0, &p()));
        let zero = MechParams {
            delta_f: 0.0,
            delta_tau: 0.0,
            ..p()
        };
        assert!(!reverse_bend_condition(0.0, &zero));
    }

    #[test]
    fn torque_balance_b_consistent() {
        let b = TorqueBalanceB::from_reactions(0.184, 0.02);
        assert_relative_eq!(b.tau_rc2, 0.204);
        assert_relative_eq!(b.tau_stopper, 0.204);
        assert_eq!(b.residual(), 0.0);
    }

    #[test]
    fn residual_ranges_ambiguity() {
        let params = MechParams {
            lambda: 20.0_f64.to_radians(),
            ..p()
        };
        // ranges spanning the rotation boundary at 20 deg
        let ranges = ResidualRanges {
            delta_f: (0.2, 0.8),
            delta_tau: (0.0005, 0.003),
        }
        .validated()
        .unwrap();
        assert!(ranges.rotation_ambiguous(0.0, 0.0, &params));
        // a tight range away from the boundary is unambiguous
        let tight = ResidualRanges {
            delta_f: (0.5, 0.5),
            delta_tau: (0.001, 0.001),
        };
        assert!(!tight.rotation_ambiguous(0.0, 0.0, &params));
        // heavy tip load swamps the residual scatter
        assert!(!ranges.rotation_ambiguous(40.0, 0.1, &params));
    }

    #[test]
    fn residual_sampling_stays_in_range_and_reproduces() {
        use rand::SeedableRng;
        let ranges = ResidualRanges {
            delta_f: (0.2, 0.8),
            delta_tau: (0.0005, 0.003),
        };
        let mut a = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut b = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let (df, dt) = ranges.sample(&mut a);
            assert!((0.2..=0.8).contains(&df));
            assert!((0.0005..=0.003).contains(&dt));
            assert_eq!((df, dt), ranges.sample(&mut b));
        }
    }
}
