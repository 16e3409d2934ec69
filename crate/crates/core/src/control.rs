//! Backstepping error recursion, sliding surfaces, the six sliding-mode
//! control laws, and extraction of desired roll/pitch from the virtual
//! controls.
//!
//! Loop order everywhere is (phi, theta, psi, x, y, z). The attitude and
//! altitude laws cancel the model terms exactly, so in ideal actuation each
//! surface obeys S_dot = -q * switch(S) - k * S up to integration error.

use crate::dynamics::RotorResidual;
use crate::model::{ControlVector, DerivedConstants, QuadParams, State12};
use crate::trajectory::{ChannelRef, ReferencePoint};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Below this |cos(phi) cos(theta)| the thrust law is singular.
pub const THRUST_SINGULARITY_TOL: f64 = 1e-3;
/// Below this |U1| the virtual-control laws are singular.
pub const VIRTUAL_SINGULARITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("thrust singularity: |cos(phi) cos(theta)| = {0:.3e}")]
    ThrustSingularity(f64),
    #[error("virtual control singularity: |U1| = {0:.3e}")]
    VirtualControlSingularity(f64),
    #[error("invalid gain: {0}")]
    InvalidGain(&'static str),
}

/// Per-loop controller parameters: backstepping gains alpha, linear surface
/// gains k, switching gains q, in the loop order (phi, theta, psi, x, y, z).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainSet {
    pub alpha: [f64; 6],
    pub k: [f64; 6],
    pub q: [f64; 6],
}

impl GainSet {
    /// One value broadcast to all six loops.
    pub fn uniform(alpha: f64, k: f64, q: f64) -> GainSet {
        GainSet {
            alpha: [alpha; 6],
            k: [k; 6],
            q: [q; 6],
        }
    }

    pub fn validate(&self) -> Result<(), ControlError> {
        if self.alpha.iter().any(|&a| a <= 0.0 || !a.is_finite()) {
            return Err(ControlError::InvalidGain("alpha must be > 0"));
        }
        if self.k.iter().any(|&k| k < 0.0 || !k.is_finite()) {
            return Err(ControlError::InvalidGain("k must be >= 0"));
        }
        if self.q.iter().any(|&q| q < 0.0 || !q.is_finite()) {
            return Err(ControlError::InvalidGain("q must be >= 0"));
        }
        Ok(())
    }
}

/// Switching term of the reaching law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Switching {
    /// Pure sign, with sign(0) = 0 so the equilibrium stays invariant.
    Sign,
    /// Boundary layer: sign(S) replaced by clamp(S/epsilon) inside |S| < epsilon.
    Saturation { epsilon: f64 },
}

impl Switching {
    pub fn term(&self, s: f64) -> f64 {
        match *self {
            Switching::Sign => {
                if s > 0.0 {
                    1.0
                } else if s < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            Switching::Saturation { epsilon } => (s / epsilon).clamp(-1.0, 1.0),
        }
    }
}

/// The six dynamic sliding surfaces.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SlidingSurfaces {
    pub s_phi: f64,
    pub s_theta: f64,
    pub s_psi: f64,
    pub s_x: f64,
    pub s_y: f64,
    pub s_z: f64,
}

impl SlidingSurfaces {
    pub fn as_array(&self) -> [f64; 6] {
        [
            self.s_phi,
            self.s_theta,
            self.s_psi,
            self.s_x,
            self.s_y,
            self.s_z,
        ]
    }
}

/// Backstepping position errors z_i = x_{i,d} - x_i and the surfaces
/// S = rate - rate_d - alpha * z built on them.
pub fn tracking_errors(
    s: &State12,
    rp: &ReferencePoint,
    g: &GainSet,
) -> ([f64; 6], SlidingSurfaces) {
    let refs = rp.channels();
    let mut z = [0.0; 6];
    let mut surf = [0.0; 6];
    for i in 0..6 {
        let pos = s.0[2 * i];
        let rate = s.0[2 * i + 1];
        z[i] = refs[i].value - pos;
        surf[i] = rate - refs[i].rate - g.alpha[i] * z[i];
    }
    (
        z,
        SlidingSurfaces {
            s_phi: surf[0],
            s_theta: surf[1],
            s_psi: surf[2],
            s_x: surf[3],
            s_y: surf[4],
            s_z: surf[5],
        },
    )
}

/// Output of the six control laws: the physical inputs plus the virtual
/// lateral controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlLaws {
    pub u: ControlVector,
    pub ux: f64,
    pub uy: f64,
}

/// Evaluates all six laws. U1 comes first; the virtual controls divide by it.
/// The backstepping position errors enter through the surfaces, which fold in
/// alpha * z.
///
/// When `position_active` is false the virtual controls are diagnostics only
/// and a vanishing U1 yields ux = uy = 0 instead of an error.
#[allow(clippy::too_many_arguments)]
pub fn control_laws(
    s: &State12,
    rp: &ReferencePoint,
    surf: &SlidingSurfaces,
    omega_r: RotorResidual,
    c: &DerivedConstants,
    p: &QuadParams,
    g: &GainSet,
    switching: Switching,
    position_active: bool,
) -> Result<ControlLaws, ControlError> {
    let [x1, x2, x3, x4, _x5, x6, _x7, x8, _x9, x10, _x11, x12] = s.0;
    let om = omega_r.0;

    let cc = x1.cos() * x3.cos();
    if cc.abs() < THRUST_SINGULARITY_TOL {
        return Err(ControlError::ThrustSingularity(cc.abs()));
    }
    let u1 = p.m / cc
        * (-g.q[5] * switching.term(surf.s_z) - g.k[5] * surf.s_z - c.a11 * x12
            + rp.z.accel
            + g.alpha[5] * (rp.z.rate - x12)
            + p.g);

    let u2 = (-g.q[0] * switching.term(surf.s_phi)
        - g.k[0] * surf.s_phi
        - c.a1 * x4 * x6
        - c.a2 * x2 * x2
        - c.a3 * om * x4
        + rp.phi.accel
        + g.alpha[0] * (rp.phi.rate - x2))
        / c.b1;

    let u3 = (-g.q[1] * switching.term(surf.s_theta)
        - g.k[1] * surf.s_theta
        - c.a4 * x2 * x6
        - c.a5 * x4 * x4
        - c.a6 * om * x2
        + rp.theta.accel
        + g.alpha[1] * (rp.theta.rate - x4))
        / c.b2;

    let u4 = (-g.q[2] * switching.term(surf.s_psi)
        - g.k[2] * surf.s_psi
        - c.a7 * x2 * x4
        - c.a8 * x6 * x6
        + rp.psi.accel
        + g.alpha[2] * (rp.psi.rate - x6))
        / c.b3;

    let (ux, uy) = if u1.abs() < VIRTUAL_SINGULARITY_TOL {
        if position_active {
            return Err(ControlError::VirtualControlSingularity(u1.abs()));
        }
        (0.0, 0.0)
    } else {
        let ux = p.m / u1
            * (-g.q[3] * switching.term(surf.s_x) - g.k[3] * surf.s_x - c.a9 * x8
                + rp.x.accel
                + g.alpha[3] * (rp.x.rate - x8));
        let uy = p.m / u1
            * (-g.q[4] * switching.term(surf.s_y) - g.k[4] * surf.s_y - c.a10 * x10
                + rp.y.accel
                + g.alpha[4] * (rp.y.rate - x10));
        (ux, uy)
    };

    Ok(ControlLaws {
        u: ControlVector { u1, u2, u3, u4 },
        ux,
        uy,
    })
}

/// Inverts the virtual-control identities
/// Ux = cos(phi) sin(theta) cos(psi) + sin(phi) sin(psi),
/// Uy = cos(phi) sin(theta) sin(psi) - sin(phi) cos(psi)
/// for the desired roll and pitch. Arguments outside the reachable set are
/// clamped into [-1, 1] and the clamp is reported.
pub fn attitude_from_virtual(ux: f64, uy: f64, psi: f64) -> (f64, f64, bool) {
    let (sps, cps) = psi.sin_cos();
    let sin_phi = ux * sps - uy * cps;
    let mut clamped = !(-1.0..=1.0).contains(&sin_phi);
    let phi_d = sin_phi.clamp(-1.0, 1.0).asin();

    let sin_theta = (ux * cps + uy * sps) / phi_d.cos().max(1e-12);
    clamped |= !(-1.0..=1.0).contains(&sin_theta);
    let theta_d = sin_theta.clamp(-1.0, 1.0).asin();

    (phi_d, theta_d, clamped)
}

/// Outer-loop control mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ControlMode {
    /// Attitude references come straight from the trajectory (plus the z loop
    /// for thrust).
    #[default]
    Attitude,
    /// Attitude references are derived from the lateral virtual controls.
    Position,
}

/// Controller configuration: gains, loop structure and switching shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Controller {
    pub gains: GainSet,
    pub mode: ControlMode,
    pub switching: Switching,
}

/// Attitude references derived from the virtual controls, frozen over one
/// control period in position mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerRefs {
    pub phi: ChannelRef,
    pub theta: ChannelRef,
    pub clamped: bool,
}

/// Backward-difference memory for the derived attitude reference rates.
/// The derived accelerations are taken as zero.
#[derive(Debug, Clone, Default)]
pub struct InnerRefMemory {
    prev: Option<(f64, f64)>,
}

impl InnerRefMemory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Turns the raw attitude command into reference channels, differencing
    /// against the previous period's command. The first call reports zero rate.
    pub fn advance(&mut self, phi_d: f64, theta_d: f64, dt: f64, clamped: bool) -> InnerRefs {
        let (phi_rate, theta_rate) = match self.prev {
            Some((pp, pt)) => ((phi_d - pp) / dt, (theta_d - pt) / dt),
            None => (0.0, 0.0),
        };
        self.prev = Some((phi_d, theta_d));
        InnerRefs {
            phi: ChannelRef {
                value: phi_d,
                rate: phi_rate,
                accel: 0.0,
            },
            theta: ChannelRef {
                value: theta_d,
                rate: theta_rate,
                accel: 0.0,
            },
            clamped,
        }
    }
}

/// Computes the attitude command for position mode at the current state:
/// z law for U1, lateral laws for the virtual controls, then the arcsin
/// inversion. Returns (phi_d, theta_d, ux, uy, clamped).
pub fn position_attitude_command(
    ctrl: &Controller,
    s: &State12,
    rp: &ReferencePoint,
    c: &DerivedConstants,
    p: &QuadParams,
) -> Result<(f64, f64, f64, f64, bool), ControlError> {
    let (_, surf) = tracking_errors(s, rp, &ctrl.gains);
    let laws = control_laws(
        s,
        rp,
        &surf,
        RotorResidual(0.0),
        c,
        p,
        &ctrl.gains,
        ctrl.switching,
        true,
    )?;
    let (phi_d, theta_d, clamped) = attitude_from_virtual(laws.ux, laws.uy, s.psi());
    Ok((phi_d, theta_d, laws.ux, laws.uy, clamped))
}

/// One full cascade evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeOutput {
    pub u: ControlVector,
    pub ux: f64,
    pub uy: f64,
    /// References the laws actually tracked (inner overrides applied).
    pub refs: ReferencePoint,
    pub z: [f64; 6],
    pub surfaces: SlidingSurfaces,
    pub virtual_clamped: bool,
}

/// Evaluates the cascade at one state.
///
/// Attitude mode tracks (phi_d, theta_d, psi_d) straight from the trajectory.
/// Position mode tracks the frozen `inner` attitude references derived from
/// the virtual controls; `inner` must be supplied by the caller in that mode.
pub fn cascade_step(
    ctrl: &Controller,
    s: &State12,
    rp: &ReferencePoint,
    inner: Option<&InnerRefs>,
    omega_r: RotorResidual,
    c: &DerivedConstants,
    p: &QuadParams,
) -> Result<CascadeOutput, ControlError> {
    let (refs_eff, position_active, virtual_clamped) = match ctrl.mode {
        ControlMode::Attitude => (*rp, false, false),
        ControlMode::Position => {
            let inner = inner.expect("position mode requires frozen inner references");
            let mut r = *rp;
            r.phi = inner.phi;
            r.theta = inner.theta;
            (r, true, inner.clamped)
        }
    };
    let (z, surfaces) = tracking_errors(s, &refs_eff, &ctrl.gains);
    let laws = control_laws(
        s,
        &refs_eff,
        &surfaces,
        omega_r,
        c,
        p,
        &ctrl.gains,
        ctrl.switching,
        position_active,
    )?;
    Ok(CascadeOutput {
        u: laws.u,
        ux: laws.ux,
        uy: laws.uy,
        refs: refs_eff,
        z,
        surfaces,
        virtual_clamped,
    })
}
