//! Vehicle parameters, the 12-component state vector, derived lumped
//! constants and attitude kinematics.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Below this value of |cos(theta)| the Euler-rate map is treated as singular.
pub const GIMBAL_LOCK_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("gimbal lock: |cos(theta)| = {0:.3e} below tolerance")]
    GimbalLock(f64),
}

/// Physical constants of the vehicle and its rotors.
///
/// Field names are the canonical snake-case keys of the JSON config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadParams {
    /// Mass [kg].
    pub m: f64,
    /// Arm length [m].
    pub d: f64,
    /// Gravity [m/s^2].
    pub g: f64,
    /// Roll inertia [kg m^2].
    pub ix: f64,
    /// Pitch inertia [kg m^2].
    pub iy: f64,
    /// Yaw inertia [kg m^2].
    pub iz: f64,
    /// Rotor inertia [N m / rad/s^2].
    pub jr: f64,
    /// Aerodynamic friction coefficients [N / rad/s].
    pub kfax: f64,
    pub kfay: f64,
    pub kfaz: f64,
    /// Translational drag coefficients [N / m/s].
    pub kftx: f64,
    pub kfty: f64,
    pub kftz: f64,
    /// Thrust (lift) coefficient [N s^2].
    pub kf: f64,
    /// Drag-torque coefficient [N m s^2].
    pub km: f64,
    /// Motor model coefficients: omega_dot = b V - beta0 - beta1 omega - beta2 omega^2.
    pub beta0: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub b_motor: f64,
}

impl QuadParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let all = [
            self.m,
            self.d,
            self.g,
            self.ix,
            self.iy,
            self.iz,
            self.jr,
            self.kfax,
            self.kfay,
            self.kfaz,
            self.kftx,
            self.kfty,
            self.kftz,
            self.kf,
            self.km,
            self.beta0,
            self.beta1,
            self.beta2,
            self.b_motor,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::InvalidParameter("non-finite value"));
        }
        if self.m <= 0.0 {
            return Err(ModelError::InvalidParameter("m must be > 0"));
        }
        if self.d <= 0.0 {
            return Err(ModelError::InvalidParameter("d must be > 0"));
        }
        if self.ix <= 0.0 || self.iy <= 0.0 || self.iz <= 0.0 {
            return Err(ModelError::InvalidParameter("inertias must be > 0"));
        }
        if self.jr < 0.0 {
            return Err(ModelError::InvalidParameter("jr must be >= 0"));
        }
        if [
            self.kfax, self.kfay, self.kfaz, self.kftx, self.kfty, self.kftz,
        ]
        .iter()
        .any(|&v| v < 0.0)
        {
            return Err(ModelError::InvalidParameter(
                "drag/friction coefficients must be >= 0",
            ));
        }
        if self.kf <= 0.0 || self.km <= 0.0 {
            return Err(ModelError::InvalidParameter("kf and km must be > 0"));
        }
        Ok(())
    }
}

/// The state vector in the frozen order
/// (phi, phi_dot, theta, theta_dot, psi, psi_dot, x, x_dot, y, y_dot, z, z_dot).
///
/// Serializes as a plain 12-element array in exactly this order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct State12(pub [f64; 12]);

impl State12 {
    pub const ZERO: State12 = State12([0.0; 12]);

    pub fn phi(&self) -> f64 {
        self.0[0]
    }
    pub fn phi_dot(&self) -> f64 {
        self.0[1]
    }
    pub fn theta(&self) -> f64 {
        self.0[2]
    }
    pub fn theta_dot(&self) -> f64 {
        self.0[3]
    }
    pub fn psi(&self) -> f64 {
        self.0[4]
    }
    pub fn psi_dot(&self) -> f64 {
        self.0[5]
    }
    pub fn x(&self) -> f64 {
        self.0[6]
    }
    pub fn x_dot(&self) -> f64 {
        self.0[7]
    }
    pub fn y(&self) -> f64 {
        self.0[8]
    }
    pub fn y_dot(&self) -> f64 {
        self.0[9]
    }
    pub fn z(&self) -> f64 {
        self.0[10]
    }
    pub fn z_dot(&self) -> f64 {
        self.0[11]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// self + a * other, componentwise.
    pub fn axpy(&self, a: f64, other: &State12) -> State12 {
        let mut out = self.0;
        for (v, o) in out.iter_mut().zip(other.0) {
            *v += a * o;
        }
        State12(out)
    }
}

/// Lumped constants of the state-space form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
    pub a6: f64,
    pub a7: f64,
    pub a8: f64,
    pub a9: f64,
    pub a10: f64,
    pub a11: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
}

/// Computes the lumped constants from the physical parameters.
///
/// a8 is built from the yaw aerodynamic friction coefficient so that the yaw
/// rate equation carries the same friction term as the roll and pitch ones.
pub fn derive_constants(p: &QuadParams) -> Result<DerivedConstants, ModelError> {
    p.validate()?;
    Ok(DerivedConstants {
        a1: (p.iy - p.iz) / p.ix,
        a2: -p.kfax / p.ix,
        a3: -p.jr / p.ix,
        a4: (p.iz - p.ix) / p.iy,
        a5: -p.kfay / p.iy,
        a6: p.jr / p.iy,
        a7: (p.ix - p.iy) / p.iz,
        a8: -p.kfaz / p.iz,
        a9: -p.kftx / p.m,
        a10: -p.kfty / p.m,
        a11: -p.kftz / p.m,
        b1: p.d / p.ix,
        b2: p.d / p.iy,
        b3: 1.0 / p.iz,
    })
}

/// Thrust and the three body torque channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlVector {
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
    pub u4: f64,
}

impl ControlVector {
    pub const ZERO: ControlVector = ControlVector {
        u1: 0.0,
        u2: 0.0,
        u3: 0.0,
        u4: 0.0,
    };

    pub fn is_finite(&self) -> bool {
        self.u1.is_finite() && self.u2.is_finite() && self.u3.is_finite() && self.u4.is_finite()
    }
}

/// Body-to-inertial rotation for ZYX Euler angles (roll phi, pitch theta, yaw psi).
pub fn rotation_matrix(phi: f64, theta: f64, psi: f64) -> Matrix3<f64> {
    let (sp, cp) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    let (ss, cs) = psi.sin_cos();
    Matrix3::new(
        ct * cs,
        sp * st * cs - cp * ss,
        cp * st * cs + sp * ss,
        ct * ss,
        sp * st * ss + cp * cs,
        cp * st * ss - sp * cs,
        -st,
        sp * ct,
        cp * ct,
    )
}

/// Skew-symmetric cross-product matrix: skew(w) * v == w x v.
pub fn skew(omega: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(
        0.0, -omega.z, omega.y, omega.z, 0.0, -omega.x, -omega.y, omega.x, 0.0,
    )
}

/// Body-rate to Euler-rate matrix (the tan/sec form). Singular at theta = +-pi/2.
pub fn euler_rate_map(phi: f64, theta: f64) -> Result<Matrix3<f64>, ModelError> {
    let (sp, cp) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    if ct.abs() <= GIMBAL_LOCK_TOL {
        return Err(ModelError::GimbalLock(ct.abs()));
    }
    let tt = st / ct;
    Ok(Matrix3::new(
        1.0,
        sp * tt,
        cp * tt,
        0.0,
        cp,
        -sp,
        0.0,
        sp / ct,
        cp / ct,
    ))
}

/// Euler-rate to body-rate matrix, the algebraic inverse of [`euler_rate_map`].
pub fn body_rate_map(phi: f64, theta: f64) -> Matrix3<f64> {
    let (sp, cp) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    Matrix3::new(1.0, 0.0, -st, 0.0, cp, ct * sp, 0.0, -sp, ct * cp)
}
