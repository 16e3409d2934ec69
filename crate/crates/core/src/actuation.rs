//! Control allocation (the mixer and its inverse) and DC-motor rotor dynamics.

use crate::dynamics::RotorResidual;
use crate::model::{ControlVector, QuadParams};
use serde::{Deserialize, Serialize};

/// How rotor speeds follow the commanded control vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ActuationMode {
    /// Rotor speeds jump instantly to the allocated values.
    #[default]
    Ideal,
    /// Rotor speeds lag behind through the DC-motor ODE.
    Motor,
}

/// Rotor angular speeds [rad/s], all non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotorSpeeds {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
}

impl RotorSpeeds {
    pub fn as_array(&self) -> [f64; 4] {
        [self.w1, self.w2, self.w3, self.w4]
    }
}

/// Result of inverting the mixer. `clamped` records that at least one squared
/// speed came out negative and was clamped to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Allocation {
    pub speeds: RotorSpeeds,
    pub clamped: bool,
}

/// Rotor speeds evolving under the motor ODE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorState(pub [f64; 4]);

/// Signed rotor residual w1 - w2 + w3 - w4.
pub fn rotor_residual(w: &RotorSpeeds) -> RotorResidual {
    RotorResidual(w.w1 - w.w2 + w.w3 - w.w4)
}

/// Mixer: U = M (w1^2, w2^2, w3^2, w4^2)^T with rows
/// (KF KF KF KF; -KF d, 0, KF d, 0; 0, KF d, 0, -KF d; KM -KM KM -KM).
pub fn mix(w: &RotorSpeeds, p: &QuadParams) -> ControlVector {
    let sq = [w.w1 * w.w1, w.w2 * w.w2, w.w3 * w.w3, w.w4 * w.w4];
    ControlVector {
        u1: p.kf * (sq[0] + sq[1] + sq[2] + sq[3]),
        u2: p.kf * p.d * (sq[2] - sq[0]),
        u3: p.kf * p.d * (sq[1] - sq[3]),
        u4: p.km * (sq[0] - sq[1] + sq[2] - sq[3]),
    }
}

/// Inverse of [`mix`]. The mixer matrix is full rank for any positive KF, KM,
/// d, so the squared speeds are solved in closed form; negative squared speeds
/// are clamped to zero and reported through the `clamped` flag rather than
/// treated as an error, because aggressive transients routinely demand
/// momentary negative per-rotor thrust.
pub fn allocate(u: &ControlVector, p: &QuadParams) -> Allocation {
    let s = u.u1 / p.kf;
    let a = u.u2 / (p.kf * p.d);
    let b = u.u3 / (p.kf * p.d);
    let c = u.u4 / p.km;

    let odd = 0.5 * (s + c); // w1^2 + w3^2
    let even = 0.5 * (s - c); // w2^2 + w4^2
    let sq = [
        0.5 * (odd - a),
        0.5 * (even + b),
        0.5 * (odd + a),
        0.5 * (even - b),
    ];

    let clamped = sq.iter().any(|&v| v < 0.0);
    let r = |v: f64| v.max(0.0).sqrt();
    Allocation {
        speeds: RotorSpeeds {
            w1: r(sq[0]),
            w2: r(sq[1]),
            w3: r(sq[2]),
            w4: r(sq[3]),
        },
        clamped,
    }
}

/// Per-rotor speed derivative: w_dot = b V - beta0 - beta1 w - beta2 w^2.
pub fn motor_step_derivative(ms: &MotorState, voltages: &[f64; 4], p: &QuadParams) -> [f64; 4] {
    let mut out = [0.0; 4];
    for i in 0..4 {
        let w = ms.0[i];
        out[i] = p.b_motor * voltages[i] - p.beta0 - p.beta1 * w - p.beta2 * w * w;
    }
    out
}

/// Feedforward voltage holding the motor at `w_target`: the algebraic inverse
/// of the motor ODE at zero acceleration.
pub fn steady_voltage_for(w_target: f64, p: &QuadParams) -> f64 {
    (p.beta0 + p.beta1 * w_target + p.beta2 * w_target * w_target) / p.b_motor
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn mix_equal_speeds_gives_pure_thrust() {
        let p = presets::params();
        let w = RotorSpeeds {
            w1: 200.0,
            w2: 200.0,
            w3: 200.0,
            w4: 200.0,
        };
        let u = mix(&w, &p);
        assert_relative_eq!(u.u1, 4.0 * p.kf * 200.0 * 200.0, epsilon = 1e-12);
        assert_eq!(u.u2, 0.0);
        assert_eq!(u.u3, 0.0);
        assert_eq!(u.u4, 0.0);
    }

    #[test]
    fn mix_zero_is_zero() {
        let p = presets::params();
        let w = RotorSpeeds {
            w1: 0.0,
            w2: 0.0,
            w3: 0.0,
            w4: 0.0,
        };
        assert_eq!(mix(&w, &p), ControlVector::ZERO);
    }

    #[test]
    fn allocate_pure_thrust_gives_equal_speeds() {
        let p = presets::params();
        let wbar = 180.0;
        let u = ControlVector {
            u1: 4.0 * p.kf * wbar * wbar,
            u2: 0.0,
            u3: 0.0,
            u4: 0.0,
        };
        let alloc = allocate(&u, &p);
        assert!(!alloc.clamped);
        for w in alloc.speeds.as_array() {
            assert_relative_eq!(w, wbar, max_relative = 1e-12);
        }
        let zero = allocate(&ControlVector::ZERO, &p);
        assert_eq!(zero.speeds.as_array(), [0.0; 4]);
    }

    #[test]
    fn allocate_reports_infeasible_demand() {
        let p = presets::params();
        let u = ControlVector {
            u1: 0.1,
            u2: 1.0,
            u3: 0.0,
            u4: 0.0,
        };
        let alloc = allocate(&u, &p);
        assert!(alloc.clamped);
        assert!(alloc.speeds.as_array().iter().all(|&w| w >= 0.0));
    }

    #[test]
    fn motor_steady_speed_at_ten_volts() {
        // Independent oracle: bisect the steady-state condition
        // b V - beta0 - beta1 w - beta2 w^2 = 0 on [0, 1000].
        let p = presets::params();
        let v = 10.0;
        let f = |w: f64| p.b_motor * v - p.beta0 - p.beta1 * w - p.beta2 * w * w;
        let (mut lo, mut hi) = (0.0f64, 1000.0f64);
        assert!(f(lo) > 0.0 && f(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let w_star = 0.5 * (lo + hi);
        assert_relative_eq!(w_star, 276.783, max_relative = 1e-4);

        let dw = motor_step_derivative(&MotorState([w_star; 4]), &[v; 4], &p);
        assert!(dw[0].abs() < 1e-9);
        assert_relative_eq!(steady_voltage_for(w_star, &p), v, max_relative = 1e-12);
    }

    #[test]
    fn stall_voltage_balances_at_rest() {
        let p = presets::params();
        let v0 = steady_voltage_for(0.0, &p);
        assert_relative_eq!(v0, 189.63 / 280.19, epsilon = 1e-15);
        assert_relative_eq!(v0, 0.6768, max_relative = 1e-4);
        let dw = motor_step_derivative(&MotorState([0.0; 4]), &[v0; 4], &p);
        assert!(dw[0].abs() < 1e-12);
    }

    #[test]
    fn friction_dominates_with_no_drive() {
        let p = presets::params();
        let dw = motor_step_derivative(&MotorState([350.0; 4]), &[0.0; 4], &p);
        assert!(dw.iter().all(|&v| v < 0.0));
    }

    proptest! {
        #[test]
        fn mix_allocate_round_trip(
            w1 in 0.0f64..400.0, w2 in 0.0f64..400.0,
            w3 in 0.0f64..400.0, w4 in 0.0f64..400.0,
        ) {
            let p = presets::params();
            let w = RotorSpeeds { w1, w2, w3, w4 };
            let u = mix(&w, &p);
            let alloc = allocate(&u, &p);
            prop_assert!(!alloc.clamped);
            let back = alloc.speeds.as_array();
            let orig = w.as_array();
            for i in 0..4 {
                prop_assert!((back[i] - orig[i]).abs() <= 1e-9 * orig[i].max(1.0));
            }
            let u2 = mix(&alloc.speeds, &p);
            prop_assert!((u2.u1 - u.u1).abs() <= 1e-9 * u.u1.abs().max(1e-6));
        }

        #[test]
        fn motor_is_dissipative(w in 1e-3f64..1000.0) {
            let p = presets::params();
            let dw = motor_step_derivative(&MotorState([w; 4]), &[0.0; 4], &p);
            prop_assert!(dw[0] < 0.0);
        }

        #[test]
        fn steady_voltage_round_trip(w in 0.0f64..600.0) {
            let p = presets::params();
            let v = steady_voltage_for(w, &p);
            let dw = motor_step_derivative(&MotorState([w; 4]), &[v; 4], &p);
            prop_assert!(dw[0].abs() < 1e-10);
        }
    }
}
