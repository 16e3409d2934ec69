//! Full nonlinear state derivative, in two independently coded forms.
//!
//! [`state_derivative`] is the lumped-constant state-space form used by the
//! simulator. [`torque_form_derivative`] rebuilds the same accelerations from
//! the raw torque/force balance and serves as a cross-validation oracle: the
//! two must agree to machine precision for every input.

use crate::model::{rotation_matrix, ControlVector, DerivedConstants, QuadParams, State12};
use nalgebra::Vector3;

/// Signed rotor-speed residual w1 - w2 + w3 - w4 [rad/s], the source of the
/// gyroscopic coupling torque.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RotorResidual(pub f64);

/// State derivative in the lumped-constant form.
///
/// The virtual controls Ux, Uy are evaluated from the current attitude states,
/// which makes this the simulation-truth form; the controller-side virtual
/// controls live in [`crate::control`].
pub fn state_derivative(
    s: &State12,
    u: &ControlVector,
    omega_r: RotorResidual,
    c: &DerivedConstants,
    p: &QuadParams,
) -> State12 {
    let [x1, x2, x3, x4, x5, x6, _x7, x8, _x9, x10, _x11, x12] = s.0;
    let om = omega_r.0;

    let ux = x1.cos() * x3.sin() * x5.cos() + x1.sin() * x5.sin();
    let uy = x1.cos() * x3.sin() * x5.sin() - x1.sin() * x5.cos();

    State12([
        x2,
        c.a1 * x4 * x6 + c.a2 * x2 * x2 + c.a3 * om * x4 + c.b1 * u.u2,
        x4,
        c.a4 * x2 * x6 + c.a5 * x4 * x4 + c.a6 * om * x2 + c.b2 * u.u3,
        x6,
        c.a7 * x2 * x4 + c.a8 * x6 * x6 + c.b3 * u.u4,
        x8,
        c.a9 * x8 + ux * u.u1 / p.m,
        x10,
        c.a10 * x10 + uy * u.u1 / p.m,
        x12,
        c.a11 * x12 + u.u1 * (x1.cos() * x3.cos()) / p.m - p.g,
    ])
}

/// State derivative rebuilt from the torque/force balance, without the lumped
/// constants. Independent oracle for [`state_derivative`].
pub fn torque_form_derivative(
    s: &State12,
    u: &ControlVector,
    omega_r: RotorResidual,
    p: &QuadParams,
) -> State12 {
    let [x1, x2, x3, x4, x5, x6, _x7, x8, _x9, x10, _x11, x12] = s.0;
    let om = omega_r.0;

    // Thrust enters the inertial frame through the third rotation column.
    let r = rotation_matrix(x1, x3, x5);
    let thrust = r * Vector3::new(0.0, 0.0, u.u1);

    // Gyroscopic torque (Jr theta_dot Omega, -Jr phi_dot Omega, 0) is
    // subtracted from the applied torques.
    let phi_ddot =
        (x4 * x6 * (p.iy - p.iz) - p.kfax * x2 * x2 - p.jr * om * x4 + p.d * u.u2) / p.ix;
    let theta_ddot =
        (x2 * x6 * (p.iz - p.ix) - p.kfay * x4 * x4 + p.jr * om * x2 + p.d * u.u3) / p.iy;
    let psi_ddot = (x2 * x4 * (p.ix - p.iy) - p.kfaz * x6 * x6 + u.u4) / p.iz;

    State12([
        x2,
        phi_ddot,
        x4,
        theta_ddot,
        x6,
        psi_ddot,
        x8,
        (thrust.x - p.kftx * x8) / p.m,
        x10,
        (thrust.y - p.kfty * x10) / p.m,
        x12,
        (thrust.z - p.kftz * x12) / p.m - p.g,
    ])
}
