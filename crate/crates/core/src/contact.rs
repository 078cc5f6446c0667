//! Fingertip-object contact and belt pull-in kinematics.

use crate::model::{MechParams, ParamError};

/// Linear-spring object model: the fingertips meet the object after
/// closing a free gap and then compress it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectModel {
    /// Free travel per finger before contact.
    pub gap0: f64,
    /// Contact stiffness per finger.
    pub k_obj: f64,
    /// True when the object is externally held (fixed-object pull tests);
    /// informational for scenario bookkeeping.
    pub fixed: bool,
}

impl Default for ObjectModel {
    /// 10 mm gap, 20 kN/m stiffness, free object.
    fn default() -> Self {
        ObjectModel {
            gap0: 0.010,
            k_obj: 20_000.0,
            fixed: false,
        }
    }
}

impl ObjectModel {
    pub fn validated(self) -> Result<Self, ParamError> {
        if !(self.gap0 >= 0.0) {
            return Err(ParamError::NegativeParameter {
                name: "gap0",
                value: self.gap0,
            });
        }
        if !(self.k_obj > 0.0) {
            return Err(ParamError::NonPositiveDimension {
                name: "k_obj",
                value: self.k_obj,
            });
        }
        Ok(self)
    }

    /// Finger travel at which a given tip force is reached (inverse of
    /// [`tip_force`] on the loaded branch).
    pub fn travel_for_force(&self, f_tip: f64) -> f64 {
        self.gap0 + f_tip / self.k_obj
    }
}

/// Normal tip force at finger travel `d_f`: zero until the gap closes,
/// then linear in the overlap. Continuous and nondecreasing.
pub fn tip_force(d_f: f64, obj: &ObjectModel) -> f64 {
    obj.k_obj * (d_f - obj.gap0).max(0.0)
}

/// Object displacement produced by the belt conveyor for a given
/// accumulated clutch slip angle: `d_pi = epsilon * r_roller * theta_m_pi`.
pub fn pull_in_displacement(theta_m_pi: f64, p: &MechParams) -> f64 {
    p.epsilon * p.r_roller * theta_m_pi
}

/// Slip angle required for a given pull-in displacement (exact inverse of
/// [`pull_in_displacement`]).
pub fn slip_angle_for_displacement(d_pi: f64, p: &MechParams) -> f64 {
    d_pi / (p.epsilon * p.r_roller)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn tip_force_piecewise() {
        let obj = ObjectModel::default();
        assert_eq!(tip_force(0.0, &obj), 0.0);
        assert_eq!(tip_force(0.010, &obj), 0.0); // just touching
        assert_relative_eq!(tip_force(0.012, &obj), 40.0); // 2 mm overlap
        assert_relative_eq!(obj.travel_for_force(40.0), 0.012);
    }

    #[test]
    fn tip_force_continuous_and_nondecreasing() {
        let obj = ObjectModel::default();
        let mut last = -1.0;
        for i in 0..200 {
            let d = i as f64 * 1e-4;
            let f = tip_force(d, &obj);
            assert!(f >= last);
            last = f;
        }
        // continuity across the contact point
        let eps = 1e-9;
        assert!(tip_force(obj.gap0 + eps, &obj) < 1e-4);
    }

    #[test]
    fn pull_in_round_trip() {
        let p = crate::model::MechParams::default();
        // unity ratio, 5 mm roller: 10 rad of slip moves the belt 50 mm
        assert_relative_eq!(pull_in_displacement(10.0, &p), 0.050);
        for d in [0.0, 0.004, 0.040, 0.050] {
            assert_relative_eq!(
                pull_in_displacement(slip_angle_for_displacement(d, &p), &p),
                d,
                max_relative = 1e-15,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn object_validation() {
        assert!(ObjectModel::default().validated().is_ok());
        assert!(ObjectModel {
            k_obj: 0.0,
            ..ObjectModel::default()
        }
        .validated()
        .is_err());
        assert!(ObjectModel {
            gap0: -0.01,
            ..ObjectModel::default()
        }
        .validated()
        .is_err());
    }
}
