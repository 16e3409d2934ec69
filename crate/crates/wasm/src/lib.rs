//! Browser bindings for the flight-control simulator: run a tracking
//! scenario at the requested gains and hand back SVG markup or metrics JSON
//! for a static page to display. Everything runs synchronously in the wasm
//! module; a 10 s rollout is a few milliseconds.

use quadsmc::control::Switching;
use quadsmc::presets;
use quadsmc::report;
use quadsmc::sim;
use quadsmc::{GainSet, RunConfig, SimConfig};
use wasm_bindgen::prelude::*;

const DEMO_DT: f64 = 2e-3;

fn clamp_inputs(alpha: f64, k: f64, q: f64, epsilon: f64, t_end: f64) -> (f64, f64, f64, f64, f64) {
    (
        alpha.clamp(0.01, 50.0),
        k.clamp(0.0, 50.0),
        q.clamp(0.0, 10.0),
        epsilon.clamp(0.0, 0.5),
        t_end.clamp(1.0, 30.0),
    )
}

fn switching_for(epsilon: f64) -> Switching {
    if epsilon > 0.0 {
        Switching::Saturation { epsilon }
    } else {
        Switching::Sign
    }
}

fn attitude_setup(
    alpha: f64,
    k: f64,
    q: f64,
    epsilon: f64,
    t_end: f64,
) -> (RunConfig, SimConfig, GainSet) {
    let rc = presets::fig3_attitude();
    let mut cfg = rc.sim_config().expect("bundled config");
    cfg.dt = DEMO_DT;
    cfg.t_end = t_end;
    cfg.switching = switching_for(epsilon);
    let gains = GainSet::uniform(alpha, k, q);
    (rc, cfg, gains)
}

fn position_setup(
    alpha: f64,
    k: f64,
    q: f64,
    epsilon: f64,
    t_end: f64,
) -> (RunConfig, SimConfig, GainSet) {
    let rc = presets::fig7_position();
    let mut cfg = rc.sim_config().expect("bundled config");
    cfg.dt = DEMO_DT;
    cfg.t_end = t_end;
    cfg.switching = switching_for(epsilon.max(1e-3));
    // Sliders drive the outer position loops; the inner attitude loops keep
    // the bundled fast gains so the cascade stays well separated.
    let mut gains = rc.gain_set().expect("bundled gains");
    for i in 3..6 {
        gains.alpha[i] = alpha;
        gains.k[i] = k;
        gains.q[i] = q;
    }
    (rc, cfg, gains)
}

fn run_or_err(rc: &RunConfig, cfg: &SimConfig, gains: &GainSet) -> Result<sim::SimLog, JsValue> {
    sim::run(cfg, &rc.params, gains, &rc.trajectory).map_err(|f| JsValue::from_str(&format!("{f}")))
}

/// Attitude tracking of (sin t, cos t, 0.1 t) at uniform gains; returns the
/// tracking SVG for `channel` ("phi", "theta" or "psi"). `epsilon` = 0 selects
/// pure sign switching.
#[wasm_bindgen]
pub fn attitude_tracking_svg(
    alpha: f64,
    k: f64,
    q: f64,
    epsilon: f64,
    t_end: f64,
    channel: &str,
) -> Result<String, JsValue> {
    let (alpha, k, q, epsilon, t_end) = clamp_inputs(alpha, k, q, epsilon, t_end);
    let (rc, cfg, gains) = attitude_setup(alpha, k, q, epsilon, t_end);
    let log = run_or_err(&rc, &cfg, &gains)?;
    let (idx, unit) = match channel {
        "theta" => (1, "rad"),
        "psi" => (2, "rad"),
        _ => (0, "rad"),
    };
    let label = ["phi", "theta", "psi"][idx];
    Ok(report::tracking_plot(&log, idx, label, unit))
}

/// Position tracking of (sin t, 2t, 3t) with the sliders driving the outer
/// loops; returns the isometric 3-D path SVG.
#[wasm_bindgen]
pub fn position_tracking_svg(
    alpha: f64,
    k: f64,
    q: f64,
    epsilon: f64,
    t_end: f64,
) -> Result<String, JsValue> {
    let (alpha, k, q, epsilon, t_end) = clamp_inputs(alpha, k, q, epsilon, t_end);
    let (rc, cfg, gains) = position_setup(alpha, k, q, epsilon, t_end);
    let log = run_or_err(&rc, &cfg, &gains)?;
    Ok(report::trajectory_plot_3d(&log))
}

/// Tracking metrics (ISE, final/max error, settling time per channel) for
/// either scenario, as pretty-printed JSON. `mode` is "attitude" or
/// "position".
#[wasm_bindgen]
pub fn tracking_metrics_json(
    mode: &str,
    alpha: f64,
    k: f64,
    q: f64,
    epsilon: f64,
    t_end: f64,
) -> Result<String, JsValue> {
    let (alpha, k, q, epsilon, t_end) = clamp_inputs(alpha, k, q, epsilon, t_end);
    let (rc, cfg, gains) = match mode {
        "position" => position_setup(alpha, k, q, epsilon, t_end),
        _ => attitude_setup(alpha, k, q, epsilon, t_end),
    };
    let log = run_or_err(&rc, &cfg, &gains)?;
    serde_json::to_string_pretty(&sim::metrics(&log)).map_err(|e| JsValue::from_str(&e.to_string()))
}
