//! Fixed-step closed-loop integration with structured logging, plus summary
//! tracking metrics.
//!
//! The controller is evaluated inside the integrator's derivative function,
//! so in ideal actuation the closed loop is integrated as one smooth vector
//! field and the surface cancellation residual shrinks at the integrator's
//! order. The rotor residual fed to the gyroscopic terms is reconstructed
//! from control allocation (ideal mode) or taken from the simulated motor
//! states (motor mode); controller and plant always share the same value.

use crate::actuation::{
    allocate, mix, motor_step_derivative, rotor_residual, steady_voltage_for, ActuationMode,
    MotorState, RotorSpeeds,
};
use crate::control::{
    cascade_step, position_attitude_command, CascadeOutput, ControlError, ControlMode, Controller,
    GainSet, InnerRefMemory, InnerRefs, Switching,
};
use crate::dynamics::{state_derivative, RotorResidual};
use crate::model::{
    derive_constants, ControlVector, DerivedConstants, ModelError, QuadParams, State12,
};
use crate::trajectory::TrajectorySpec;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("invalid simulation config: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A failed run carries the failure time and everything logged up to it.
#[derive(Debug, Clone)]
pub struct SimFailure {
    pub time: f64,
    pub error: SimError,
    pub partial: SimLog,
}

impl std::fmt::Display for SimFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "simulation failed at t = {}: {}", self.time, self.error)
    }
}

/// State types the fixed-step integrator can advance.
pub trait OdeState: Copy {
    /// self + a * other, componentwise.
    fn axpy(&self, a: f64, other: &Self) -> Self;
    fn is_finite(&self) -> bool;
}

impl OdeState for f64 {
    fn axpy(&self, a: f64, other: &f64) -> f64 {
        self + a * other
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl OdeState for State12 {
    fn axpy(&self, a: f64, other: &State12) -> State12 {
        State12::axpy(self, a, other)
    }
    fn is_finite(&self) -> bool {
        State12::is_finite(self)
    }
}

/// Vehicle plus rotor speeds, integrated together in motor mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledState {
    pub vehicle: State12,
    pub motors: MotorState,
}

impl OdeState for CoupledState {
    fn axpy(&self, a: f64, other: &CoupledState) -> CoupledState {
        let mut motors = self.motors.0;
        for (m, o) in motors.iter_mut().zip(other.motors.0) {
            *m += a * o;
        }
        CoupledState {
            vehicle: self.vehicle.axpy(a, &other.vehicle),
            motors: MotorState(motors),
        }
    }
    fn is_finite(&self) -> bool {
        self.vehicle.is_finite() && self.motors.0.iter().all(|v| v.is_finite())
    }
}

/// Classical 4th-order Runge-Kutta step.
pub fn rk4_step<S, F>(f: &mut F, t: f64, y: &S, dt: f64) -> Result<S, SimError>
where
    S: OdeState,
    F: FnMut(f64, &S) -> Result<S, SimError>,
{
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * dt, &y.axpy(0.5 * dt, &k1))?;
    let k3 = f(t + 0.5 * dt, &y.axpy(0.5 * dt, &k2))?;
    let k4 = f(t + dt, &y.axpy(dt, &k3))?;
    let out = y
        .axpy(dt / 6.0, &k1)
        .axpy(dt / 3.0, &k2)
        .axpy(dt / 3.0, &k3)
        .axpy(dt / 6.0, &k4);
    if !out.is_finite() {
        return Err(SimError::NonFiniteState { t: t + dt });
    }
    Ok(out)
}

/// Run setup: step size, horizon, start state, modes and logging stride.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub t_end: f64,
    pub stride: usize,
    pub initial_state: State12,
    pub actuation: ActuationMode,
    pub control_mode: ControlMode,
    pub switching: Switching,
}

impl SimConfig {
    fn validate(&self) -> Result<(), SimError> {
        if self.dt <= 0.0 || !self.dt.is_finite() {
            return Err(SimError::InvalidConfig("dt must be > 0"));
        }
        if self.t_end < self.dt || !self.t_end.is_finite() {
            return Err(SimError::InvalidConfig("t_end must be >= dt"));
        }
        if self.stride == 0 {
            return Err(SimError::InvalidConfig("stride must be >= 1"));
        }
        if !self.initial_state.is_finite() {
            return Err(SimError::InvalidConfig("initial state must be finite"));
        }
        Ok(())
    }
}

/// One logged sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRow {
    pub t: f64,
    pub state: State12,
    /// Tracked reference values in loop order (inner overrides applied).
    pub refs: [f64; 6],
    pub u: ControlVector,
    pub surfaces: [f64; 6],
    /// Tracking errors z = reference - state, loop order.
    pub errors: [f64; 6],
    pub rotor_speeds: [f64; 4],
    /// Sum of the per-loop Lyapunov terms (z^2 + S^2) / 2.
    pub lyapunov: f64,
    pub alloc_clamped: bool,
    pub virtual_clamped: bool,
}

/// Time-indexed record of everything the experiment plots.
#[derive(Debug, Clone, PartialEq)]
pub struct SimLog {
    pub rows: Vec<LogRow>,
    pub dt: f64,
    pub stride: usize,
}

impl SimLog {
    /// Spacing between logged rows.
    pub fn log_dt(&self) -> f64 {
        self.dt * self.stride as f64
    }
}

struct Plant<'a> {
    ctrl: Controller,
    traj: &'a TrajectorySpec,
    c: DerivedConstants,
    p: &'a QuadParams,
}

impl Plant<'_> {
    /// Cascade evaluation with the gyroscopic residual reconstructed from
    /// allocation: one bootstrap pass at zero residual fixes the residual the
    /// controller and the plant then share.
    fn eval_ideal(
        &self,
        t: f64,
        s: &State12,
        inner: Option<&InnerRefs>,
    ) -> Result<(CascadeOutput, RotorSpeeds, bool, RotorResidual), SimError> {
        let rp = self.traj.sample(t);
        let first = cascade_step(
            &self.ctrl,
            s,
            &rp,
            inner,
            RotorResidual(0.0),
            &self.c,
            self.p,
        )?;
        let om = rotor_residual(&allocate(&first.u, self.p).speeds);
        let out = cascade_step(&self.ctrl, s, &rp, inner, om, &self.c, self.p)?;
        let alloc = allocate(&out.u, self.p);
        Ok((out, alloc.speeds, alloc.clamped, om))
    }

    fn derivative_ideal(
        &self,
        t: f64,
        s: &State12,
        inner: Option<&InnerRefs>,
    ) -> Result<State12, SimError> {
        let (out, _, _, om) = self.eval_ideal(t, s, inner)?;
        Ok(state_derivative(s, &out.u, om, &self.c, self.p))
    }

    /// Cascade evaluation against the actual motor speeds.
    fn eval_motor(
        &self,
        t: f64,
        cs: &CoupledState,
        inner: Option<&InnerRefs>,
    ) -> Result<(CascadeOutput, [f64; 4], RotorResidual), SimError> {
        let rp = self.traj.sample(t);
        let w = cs.motors.0;
        let om = RotorResidual(w[0] - w[1] + w[2] - w[3]);
        let out = cascade_step(&self.ctrl, &cs.vehicle, &rp, inner, om, &self.c, self.p)?;
        let targets = allocate(&out.u, self.p).speeds.as_array();
        let volts = [
            steady_voltage_for(targets[0], self.p),
            steady_voltage_for(targets[1], self.p),
            steady_voltage_for(targets[2], self.p),
            steady_voltage_for(targets[3], self.p),
        ];
        Ok((out, volts, om))
    }

    fn derivative_motor(
        &self,
        t: f64,
        cs: &CoupledState,
        inner: Option<&InnerRefs>,
    ) -> Result<CoupledState, SimError> {
        let (_, volts, om) = self.eval_motor(t, cs, inner)?;
        let speeds = RotorSpeeds {
            w1: cs.motors.0[0],
            w2: cs.motors.0[1],
            w3: cs.motors.0[2],
            w4: cs.motors.0[3],
        };
        let u_applied = mix(&speeds, self.p);
        Ok(CoupledState {
            vehicle: state_derivative(&cs.vehicle, &u_applied, om, &self.c, self.p),
            motors: MotorState(motor_step_derivative(&cs.motors, &volts, self.p)),
        })
    }

    /// Frozen inner attitude references for the step starting at (t, s).
    fn prepare_inner(
        &self,
        mem: &mut InnerRefMemory,
        t: f64,
        s: &State12,
        dt: f64,
    ) -> Result<Option<InnerRefs>, SimError> {
        match self.ctrl.mode {
            ControlMode::Attitude => Ok(None),
            ControlMode::Position => {
                let rp = self.traj.sample(t);
                let (phi_d, theta_d, _, _, clamped) =
                    position_attitude_command(&self.ctrl, s, &rp, &self.c, self.p)?;
                Ok(Some(mem.advance(phi_d, theta_d, dt, clamped)))
            }
        }
    }
}

fn log_row(
    t: f64,
    state: &State12,
    out: &CascadeOutput,
    speeds: [f64; 4],
    alloc_clamped: bool,
) -> LogRow {
    let refs = out.refs.channels().map(|c| c.value);
    let surfaces = out.surfaces.as_array();
    let lyapunov = 0.5
        * out
            .z
            .iter()
            .zip(surfaces.iter())
            .map(|(z, s)| z * z + s * s)
            .sum::<f64>();
    LogRow {
        t,
        state: *state,
        refs,
        u: out.u,
        surfaces,
        errors: out.z,
        rotor_speeds: speeds,
        lyapunov,
        alloc_clamped,
        virtual_clamped: out.virtual_clamped,
    }
}

/// Integrates the closed loop and logs every `stride`-th step. Deterministic:
/// identical inputs give bit-identical logs.
pub fn run(
    cfg: &SimConfig,
    p: &QuadParams,
    gains: &GainSet,
    traj: &TrajectorySpec,
) -> Result<SimLog, Box<SimFailure>> {
    let fail = |time: f64, error: SimError, rows: Vec<LogRow>| {
        Box::new(SimFailure {
            time,
            error,
            partial: SimLog {
                rows,
                dt: cfg.dt,
                stride: cfg.stride.max(1),
            },
        })
    };

    if let Err(e) = cfg.validate() {
        return Err(fail(0.0, e, Vec::new()));
    }
    if let Err(e) = gains.validate() {
        return Err(fail(0.0, e.into(), Vec::new()));
    }
    let c = match derive_constants(p) {
        Ok(c) => c,
        Err(e) => return Err(fail(0.0, e.into(), Vec::new())),
    };

    let plant = Plant {
        ctrl: Controller {
            gains: *gains,
            mode: cfg.control_mode,
            switching: cfg.switching,
        },
        traj,
        c,
        p,
    };

    let steps = (cfg.t_end / cfg.dt).round().max(1.0) as usize;
    let mut rows = Vec::with_capacity(steps / cfg.stride + 2);
    let mut mem = InnerRefMemory::new();

    match cfg.actuation {
        ActuationMode::Ideal => {
            let mut s = cfg.initial_state;
            for n in 0..=steps {
                let t = n as f64 * cfg.dt;
                let inner = match plant.prepare_inner(&mut mem, t, &s, cfg.dt) {
                    Ok(i) => i,
                    Err(e) => return Err(fail(t, e, rows)),
                };
                if n % cfg.stride == 0 {
                    match plant.eval_ideal(t, &s, inner.as_ref()) {
                        Ok((out, speeds, clamped, _)) => {
                            rows.push(log_row(t, &s, &out, speeds.as_array(), clamped));
                        }
                        Err(e) => return Err(fail(t, e, rows)),
                    }
                }
                if n < steps {
                    s = match rk4_step(
                        &mut |tau, y| plant.derivative_ideal(tau, y, inner.as_ref()),
                        t,
                        &s,
                        cfg.dt,
                    ) {
                        Ok(s) => s,
                        Err(e) => return Err(fail(t, e, rows)),
                    };
                }
            }
        }
        ActuationMode::Motor => {
            // Bootstrap rotor speeds from the allocation of the first command.
            let s0 = cfg.initial_state;
            let inner0 = match plant.prepare_inner(&mut mem.clone(), 0.0, &s0, cfg.dt) {
                Ok(i) => i,
                Err(e) => return Err(fail(0.0, e, rows)),
            };
            let w0 = match plant.eval_ideal(0.0, &s0, inner0.as_ref()) {
                Ok((_, speeds, _, _)) => speeds,
                Err(e) => return Err(fail(0.0, e, rows)),
            };
            let mut cs = CoupledState {
                vehicle: s0,
                motors: MotorState(w0.as_array()),
            };
            for n in 0..=steps {
                let t = n as f64 * cfg.dt;
                let inner = match plant.prepare_inner(&mut mem, t, &cs.vehicle, cfg.dt) {
                    Ok(i) => i,
                    Err(e) => return Err(fail(t, e, rows)),
                };
                if n % cfg.stride == 0 {
                    match plant.eval_motor(t, &cs, inner.as_ref()) {
                        Ok((out, _, _)) => {
                            rows.push(log_row(t, &cs.vehicle, &out, cs.motors.0, false))
                        }
                        Err(e) => return Err(fail(t, e, rows)),
                    }
                }
                if n < steps {
                    cs = match rk4_step(
                        &mut |tau, y| plant.derivative_motor(tau, y, inner.as_ref()),
                        t,
                        &cs,
                        cfg.dt,
                    ) {
                        Ok(cs) => cs,
                        Err(e) => return Err(fail(t, e, rows)),
                    };
                    for w in cs.motors.0.iter_mut() {
                        *w = w.max(0.0);
                    }
                }
            }
        }
    }

    Ok(SimLog {
        rows,
        dt: cfg.dt,
        stride: cfg.stride,
    })
}

/// Per-channel tracking summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelMetrics {
    /// Integral of squared error, rectangle rule over the logged samples.
    pub ise: f64,
    pub final_abs_error: f64,
    pub max_abs_error: f64,
    /// First time after which the error stays inside the 5% band of the
    /// trajectory scale; None when it never settles.
    pub settling_time: Option<f64>,
    /// Trajectory scale: max |reference| over the run (floored at 1e-9).
    pub scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub phi: ChannelMetrics,
    pub theta: ChannelMetrics,
    pub psi: ChannelMetrics,
    pub x: ChannelMetrics,
    pub y: ChannelMetrics,
    pub z: ChannelMetrics,
}

impl Metrics {
    pub fn channels(&self) -> [ChannelMetrics; 6] {
        [self.phi, self.theta, self.psi, self.x, self.y, self.z]
    }

    /// Sum of the per-channel ISE values, the tuning objective.
    pub fn total_ise(&self) -> f64 {
        self.channels().iter().map(|c| c.ise).sum()
    }
}

const SETTLING_BAND: f64 = 0.05;

fn channel_metrics(log: &SimLog, i: usize) -> ChannelMetrics {
    let dt = log.log_dt();
    let mut ise = 0.0;
    let mut max_abs = 0.0f64;
    let mut scale = 0.0f64;
    for row in &log.rows {
        let e = row.errors[i];
        ise += e * e * dt;
        max_abs = max_abs.max(e.abs());
        scale = scale.max(row.refs[i].abs());
    }
    let scale = scale.max(1e-9);
    let band = SETTLING_BAND * scale;
    let mut settling_time = None;
    for row in log.rows.iter().rev() {
        if row.errors[i].abs() > band {
            break;
        }
        settling_time = Some(row.t);
    }
    ChannelMetrics {
        ise,
        final_abs_error: log.rows.last().map_or(0.0, |r| r.errors[i].abs()),
        max_abs_error: max_abs,
        settling_time,
        scale,
    }
}

/// Summary metrics for a completed run. The log must be non-empty.
pub fn metrics(log: &SimLog) -> Metrics {
    assert!(!log.rows.is_empty(), "metrics of an empty log");
    Metrics {
        phi: channel_metrics(log, 0),
        theta: channel_metrics(log, 1),
        psi: channel_metrics(log, 2),
        x: channel_metrics(log, 3),
        y: channel_metrics(log, 4),
        z: channel_metrics(log, 5),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use approx::assert_relative_eq;

    #[test]
    fn rk4_constant_field_keeps_state() {
        let y = rk4_step(&mut |_, _: &f64| Ok(0.0), 0.0, &1.5, 0.1).unwrap();
        assert_eq!(y, 1.5);
    }

    #[test]
    fn rk4_exponential_accuracy_and_order() {
        let integrate = |dt: f64| {
            let steps = (1.0 / dt).round() as usize;
            let mut y = 1.0f64;
            for n in 0..steps {
                y = rk4_step(&mut |_, v: &f64| Ok(*v), n as f64 * dt, &y, dt).unwrap();
            }
            y
        };
        let e = std::f64::consts::E;
        let err_coarse = (integrate(0.1) - e).abs();
        assert!(err_coarse < 1e-5, "error {err_coarse:.3e}");
        let err_fine = (integrate(0.05) - e).abs();
        let ratio = err_coarse / err_fine;
        assert!(
            (12.8..=19.2).contains(&ratio),
            "order-4 ratio out of range: {ratio}"
        );
    }

    #[test]
    fn rk4_rejects_non_finite() {
        let err = rk4_step(&mut |_, _: &f64| Ok(f64::INFINITY), 2.0, &0.0, 0.5);
        assert!(matches!(err, Err(SimError::NonFiniteState { t }) if t == 2.5));
    }

    #[test]
    fn equilibrium_preserved_for_ten_seconds() {
        let cfg = presets::hover().sim_config().unwrap();
        let run_cfg = presets::hover();
        let log = run(
            &cfg,
            &run_cfg.params,
            &run_cfg.gain_set().unwrap(),
            &run_cfg.trajectory,
        )
        .unwrap();
        let last = log.rows.last().unwrap();
        for (i, v) in last.state.0.iter().enumerate() {
            assert!(v.abs() < 1e-9, "state component {i} drifted to {v:.3e}");
        }
        assert_relative_eq!(last.u.u1, 4.7628, epsilon = 1e-9);
    }

    #[test]
    fn runs_are_deterministic() {
        let rc = presets::fig3_attitude();
        let mut cfg = rc.sim_config().unwrap();
        cfg.t_end = 1.0;
        let gains = rc.gain_set().unwrap();
        let a = run(&cfg, &rc.params, &gains, &rc.trajectory).unwrap();
        let b = run(&cfg, &rc.params, &gains, &rc.trajectory).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn row_count_matches_stride_contract() {
        let rc = presets::fig3_attitude();
        let mut cfg = rc.sim_config().unwrap();
        cfg.t_end = 2.0;
        cfg.stride = 7;
        let gains = rc.gain_set().unwrap();
        let log = run(&cfg, &rc.params, &gains, &rc.trajectory).unwrap();
        let expected = (2.0 / (cfg.dt * 7.0)).floor() as usize + 1;
        assert_eq!(log.rows.len(), expected);
        for pair in log.rows.windows(2) {
            assert!(pair[1].t > pair[0].t);
        }
    }

    #[test]
    fn attitude_error_shrinks_on_reference_scenario() {
        let rc = presets::fig3_attitude();
        let cfg = rc.sim_config().unwrap();
        let gains = rc.gain_set().unwrap();
        let log = run(&cfg, &rc.params, &gains, &rc.trajectory).unwrap();
        let at = |t: f64| {
            let idx = (t / log.log_dt()).round() as usize;
            log.rows[idx].errors[0].abs()
        };
        assert!(at(10.0) < at(1.0));
        let m = metrics(&log);
        for cm in [m.phi, m.theta, m.psi] {
            assert!(cm.settling_time.is_some(), "attitude channel never settled");
        }
    }

    #[test]
    fn surfaces_decay_monotonically_with_frozen_references() {
        let rc = presets::fig3_attitude();
        let mut cfg = rc.sim_config().unwrap();
        cfg.t_end = 5.0;
        cfg.switching = Switching::Saturation { epsilon: 0.05 };
        let traj = TrajectorySpec::default(); // all references frozen at zero
        let mut init = State12::ZERO;
        init.0[0] = 0.4;
        init.0[2] = -0.3;
        init.0[4] = 0.2;
        init.0[10] = -0.3;
        cfg.initial_state = init;
        let log = run(&cfg, &rc.params, &rc.gain_set().unwrap(), &traj).unwrap();
        for ch in [0usize, 1, 2, 5] {
            for pair in log.rows.windows(2) {
                let (a, b) = (pair[0].surfaces[ch].abs(), pair[1].surfaces[ch].abs());
                assert!(
                    b <= a + 1e-12,
                    "|S| grew on channel {ch}: {a:.3e} -> {b:.3e}"
                );
            }
        }
    }

    #[test]
    fn motor_mode_holds_hover() {
        let rc = presets::hover();
        let mut cfg = rc.sim_config().unwrap();
        cfg.actuation = ActuationMode::Motor;
        cfg.t_end = 2.0;
        let gains = rc.gain_set().unwrap();
        let log = run(&cfg, &rc.params, &gains, &rc.trajectory).unwrap();
        let last = log.rows.last().unwrap();
        for v in last.state.0.iter() {
            assert!(v.abs() < 1e-6, "motor-mode hover drifted: {v:.3e}");
        }
        assert!(last.rotor_speeds.iter().all(|&w| w > 100.0));
    }

    #[test]
    fn divergence_reports_failure_time_and_partial_log() {
        let rc = presets::fig3_attitude();
        let mut cfg = rc.sim_config().unwrap();
        cfg.dt = 0.5;
        cfg.t_end = 50.0;
        let gains = GainSet::uniform(500.0, 900.0, 900.0);
        let err = run(&cfg, &rc.params, &gains, &rc.trajectory).unwrap_err();
        assert!(matches!(err.error, SimError::NonFiniteState { .. }));
        assert!(err.time > 0.0);
        assert!(!err.partial.rows.is_empty());
    }

    #[test]
    fn closed_loop_order_on_smooth_configuration() {
        // Inside the boundary layer the saturation law is linear, the closed
        // loop is smooth, and halving dt must shrink the endpoint error at
        // order >= 3.8.
        let rc = presets::fig3_attitude();
        let gains = rc.gain_set().unwrap();
        let mut base = rc.sim_config().unwrap();
        base.switching = Switching::Saturation { epsilon: 0.05 };
        base.t_end = 1.0;
        base.initial_state.0[0] = 0.1; // |S(0)| ~ 0.023 < epsilon
        base.initial_state.0[2] = 1.1;
        base.initial_state.0[4] = 0.1;
        base.initial_state.0[10] = 0.0;

        let endpoint = |dt: f64| {
            let mut cfg = base;
            cfg.dt = dt;
            cfg.stride = (1.0 / dt).round() as usize;
            let log = run(&cfg, &rc.params, &gains, &rc.trajectory).unwrap();
            log.rows.last().unwrap().state
        };
        let reference = endpoint(1.25e-4);
        let err = |s: State12| {
            s.0.iter()
                .zip(reference.0.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max)
        };
        let e1 = err(endpoint(4e-3));
        let e2 = err(endpoint(2e-3));
        let order = (e1 / e2).log2();
        assert!(
            order >= 3.8,
            "observed order {order:.2} (e1={e1:.3e}, e2={e2:.3e})"
        );
    }

    #[test]
    fn metrics_rectangle_rule_and_settling() {
        let mut rows = Vec::new();
        for n in 0..=100 {
            let t = n as f64 * 0.01;
            let mut row = LogRow {
                t,
                state: State12::ZERO,
                refs: [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
                u: ControlVector::ZERO,
                surfaces: [0.0; 6],
                errors: [0.0; 6],
                rotor_speeds: [0.0; 4],
                lyapunov: 0.0,
                alloc_clamped: false,
                virtual_clamped: false,
            };
            row.errors[0] = 0.5;
            rows.push(row);
        }
        let log = SimLog {
            rows,
            dt: 0.01,
            stride: 1,
        };
        let m = metrics(&log);
        // Constant error e over T: ISE = e^2 T within one bin.
        assert!((m.phi.ise - 0.25).abs() <= 0.01 * 0.25 + 1e-12);
        assert_eq!(m.phi.settling_time, None);
        assert_eq!(m.phi.max_abs_error, 0.5);
        assert_eq!(m.theta.ise, 0.0);
        assert_eq!(m.theta.settling_time, Some(0.0));
    }
}
