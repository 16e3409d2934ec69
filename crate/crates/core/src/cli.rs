//! Command-line experiment harness: `simulate`, `tune` and `check`.
//!
//! Exit codes: 0 success, 1 failed invariant check, 2 configuration or usage
//! error, 3 diverged simulation (the partial log is still written).

use crate::actuation::{allocate, mix, RotorSpeeds};
use crate::config::RunConfig;
use crate::control::{ControlMode, GainSet, Switching};
use crate::dynamics::{state_derivative, torque_form_derivative, RotorResidual};
use crate::model::{derive_constants, rotation_matrix, ControlVector, State12};
use crate::report;
use crate::rng::SplitMix64;
use crate::sim::{self, SimLog};
use crate::tune::{self, GainComponent, TuneProblem};
use nalgebra::Matrix3;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;

const USAGE: &str =
    "usage: quadsmc <simulate|tune|check> --config <path> [--out <dir>] [--seed <u64>]

  simulate   integrate the closed loop; writes log.csv, metrics.json and SVG plots
  tune       minimize tracking ISE over the free gains; writes trace.csv, best_gains.json
  check      run the invariant oracle suite against the config";

struct Flags {
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: u64,
}

fn parse_flags(args: &[String]) -> Result<Flags, String> {
    let mut flags = Flags {
        config: None,
        out: None,
        seed: 0,
    };
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let mut take = |name: &str| {
            it.next()
                .cloned()
                .ok_or_else(|| format!("{name} needs a value"))
        };
        match arg.as_str() {
            "--config" => flags.config = Some(PathBuf::from(take("--config")?)),
            "--out" => flags.out = Some(PathBuf::from(take("--out")?)),
            "--seed" => {
                flags.seed = take("--seed")?
                    .parse()
                    .map_err(|_| "--seed must be an unsigned integer".to_string())?
            }
            other => return Err(format!("unknown flag {other}")),
        }
    }
    Ok(flags)
}

/// Entry point for the binary; `args` excludes the program name.
pub fn run(args: &[String]) -> i32 {
    let Some(command) = args.first() else {
        eprintln!("{USAGE}");
        return EXIT_CONFIG;
    };
    let flags = match parse_flags(&args[1..]) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}\n{USAGE}");
            return EXIT_CONFIG;
        }
    };
    let Some(config_path) = flags.config.as_deref() else {
        eprintln!("error: --config is required\n{USAGE}");
        return EXIT_CONFIG;
    };

    match command.as_str() {
        "simulate" => {
            let Some(out) = flags.out.as_deref() else {
                eprintln!("error: simulate requires --out\n{USAGE}");
                return EXIT_CONFIG;
            };
            cmd_simulate(config_path, out)
        }
        "tune" => {
            let Some(out) = flags.out.as_deref() else {
                eprintln!("error: tune requires --out\n{USAGE}");
                return EXIT_CONFIG;
            };
            cmd_tune(config_path, out, flags.seed)
        }
        "check" => cmd_check(config_path),
        other => {
            eprintln!("error: unknown command {other}\n{USAGE}");
            EXIT_CONFIG
        }
    }
}

fn load_config(path: &Path) -> Result<RunConfig, i32> {
    RunConfig::from_path(path).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_CONFIG
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), i32> {
    std::fs::write(path, contents).map_err(|e| {
        eprintln!("error: writing {}: {e}", path.display());
        EXIT_CONFIG
    })
}

const CHANNELS: [(&str, &str); 6] = [
    ("phi", "rad"),
    ("theta", "rad"),
    ("psi", "rad"),
    ("x", "m"),
    ("y", "m"),
    ("z", "m"),
];

fn write_plots(out: &Path, log: &SimLog) -> Result<(), i32> {
    for (i, (name, unit)) in CHANNELS.iter().enumerate() {
        write_file(
            &out.join(format!("{name}.svg")),
            &report::tracking_plot(log, i, name, unit),
        )?;
    }
    write_file(
        &out.join("trajectory_3d.svg"),
        &report::trajectory_plot_3d(log),
    )
}

pub fn cmd_simulate(config_path: &Path, out: &Path) -> i32 {
    let cfg = match load_config(config_path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let (sim_cfg, gains) = match (cfg.sim_config(), cfg.gain_set()) {
        (Ok(s), Ok(g)) => (s, g),
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Err(e) = std::fs::create_dir_all(out) {
        eprintln!("error: creating {}: {e}", out.display());
        return EXIT_CONFIG;
    }

    match sim::run(&sim_cfg, &cfg.params, &gains, &cfg.trajectory) {
        Ok(log) => {
            if let Err(code) = write_file(&out.join("log.csv"), &report::log_to_csv(&log)) {
                return code;
            }
            let metrics = sim::metrics(&log);
            let json = serde_json::to_string_pretty(&metrics).expect("metrics serialize");
            if let Err(code) = write_file(&out.join("metrics.json"), &json) {
                return code;
            }
            if let Err(code) = write_plots(out, &log) {
                return code;
            }
            println!(
                "simulate: {} steps logged, total ISE {:.6e}",
                log.rows.len(),
                metrics.total_ise()
            );
            EXIT_OK
        }
        Err(failure) => {
            eprintln!("error: {failure}");
            let _ = write_file(&out.join("log.csv"), &report::log_to_csv(&failure.partial));
            EXIT_DIVERGED
        }
    }
}

pub fn cmd_tune(config_path: &Path, out: &Path, seed: u64) -> i32 {
    let cfg = match load_config(config_path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let Some(tune_cfg) = cfg.tune.clone() else {
        eprintln!("error: config has no tune block");
        return EXIT_CONFIG;
    };
    if let Err(e) = std::fs::create_dir_all(out) {
        eprintln!("error: creating {}: {e}", out.display());
        return EXIT_CONFIG;
    }
    let bounds = (tune_cfg.bounds[0], tune_cfg.bounds[1]);

    if tune_cfg.selftest {
        // Synthetic quadratic with the analytic minimum at 5.
        if tune_cfg.budget < 2 {
            eprintln!("error: selftest budget must be at least 2");
            return EXIT_CONFIG;
        }
        let f = |x: &[f64]| (x[0] - 5.0) * (x[0] - 5.0);
        let result = tune::minimize(&f, &[500.0], bounds, tune_cfg.budget, seed);
        let trace = report::trace_to_csv(&result.trace, &["g"]);
        let best = serde_json::json!({
            "selftest": true,
            "best_point": result.best_point,
            "best_value": result.best_value,
            "evaluations": result.evaluations,
            "seed": seed,
        });
        if let Err(code) = write_file(&out.join("trace.csv"), &trace) {
            return code;
        }
        if let Err(code) = write_file(
            &out.join("best_gains.json"),
            &serde_json::to_string_pretty(&best).unwrap(),
        ) {
            return code;
        }
        println!(
            "tune selftest: best {} at {:?}",
            result.best_value, result.best_point
        );
        return EXIT_OK;
    }

    let (sim_cfg, gains) = match (cfg.sim_config(), cfg.gain_set()) {
        (Ok(s), Ok(g)) => (s, g),
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let problem = TuneProblem {
        params: cfg.params,
        base_gains: gains,
        sim: sim_cfg,
        trajectory: cfg.trajectory,
        free: tune_cfg.free.clone(),
        bounds,
    };
    let (best_gains, result) = match tune::optimize(&problem, tune_cfg.budget, seed) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let names: Vec<&str> = tune_cfg
        .free
        .iter()
        .map(|c| match c {
            GainComponent::Alpha => "alpha",
            GainComponent::K => "k",
            GainComponent::Q => "q",
        })
        .collect();
    if let Err(code) = write_file(
        &out.join("trace.csv"),
        &report::trace_to_csv(&result.trace, &names),
    ) {
        return code;
    }
    let best = serde_json::json!({
        "gains": best_gains,
        "objective": result.best_value,
        "evaluations": result.evaluations,
        "seed": seed,
    });
    if let Err(code) = write_file(
        &out.join("best_gains.json"),
        &serde_json::to_string_pretty(&best).unwrap(),
    ) {
        return code;
    }
    println!(
        "tune: best objective {:.6e} after {} evaluations",
        result.best_value, result.evaluations
    );
    EXIT_OK
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn check_dual_form(cfg: &RunConfig) -> Check {
    let base = match derive_constants(&cfg.params) {
        Ok(c) => c,
        Err(e) => {
            return Check {
                name: "dual_form_equivalence",
                pass: false,
                detail: e.to_string(),
            }
        }
    };
    let c = cfg.overrides.map_or(base, |ov| ov.apply(base));
    let mut rng = SplitMix64::new(0x6d75);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let mut s = State12::ZERO;
        for v in s.0.iter_mut() {
            *v = rng.uniform(-1.0, 1.0);
        }
        let u = ControlVector {
            u1: rng.uniform(-5.0, 5.0),
            u2: rng.uniform(-5.0, 5.0),
            u3: rng.uniform(-5.0, 5.0),
            u4: rng.uniform(-5.0, 5.0),
        };
        let om = RotorResidual(rng.uniform(-50.0, 50.0));
        let a = state_derivative(&s, &u, om, &c, &cfg.params);
        let b = torque_form_derivative(&s, &u, om, &cfg.params);
        for i in 0..12 {
            worst = worst.max((a.0[i] - b.0[i]).abs());
        }
    }
    Check {
        name: "dual_form_equivalence",
        pass: worst < 1e-12,
        detail: format!("max componentwise difference {worst:.3e}"),
    }
}

fn check_mixer_round_trip(cfg: &RunConfig) -> Check {
    let mut rng = SplitMix64::new(0x6d69);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let w = RotorSpeeds {
            w1: rng.uniform(0.0, 400.0),
            w2: rng.uniform(0.0, 400.0),
            w3: rng.uniform(0.0, 400.0),
            w4: rng.uniform(0.0, 400.0),
        };
        let u = mix(&w, &cfg.params);
        let back = mix(&allocate(&u, &cfg.params).speeds, &cfg.params);
        for (a, b) in [
            (u.u1, back.u1),
            (u.u2, back.u2),
            (u.u3, back.u3),
            (u.u4, back.u4),
        ] {
            worst = worst.max((a - b).abs() / a.abs().max(1e-9));
        }
    }
    Check {
        name: "mixer_round_trip",
        pass: worst < 1e-9,
        detail: format!("max relative error {worst:.3e}"),
    }
}

fn check_rotation_orthonormality() -> Check {
    let mut rng = SplitMix64::new(0x726f);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let r = rotation_matrix(
            rng.uniform(-3.2, 3.2),
            rng.uniform(-3.2, 3.2),
            rng.uniform(-3.2, 3.2),
        );
        let err = (r.transpose() * r - Matrix3::identity()).abs().max();
        worst = worst.max(err).max((r.determinant() - 1.0).abs());
    }
    Check {
        name: "rotation_orthonormality",
        pass: worst < 1e-12,
        detail: format!("max deviation {worst:.3e}"),
    }
}

/// Estimates d/dt of a logged series with a five-point central difference.
fn fd5(series: &[f64], i: usize, dt: f64) -> f64 {
    (-series[i + 2] + 8.0 * series[i + 1] - 8.0 * series[i - 1] + series[i - 2]) / (12.0 * dt)
}

/// RMS of S_dot + q sat(S/eps) + k S for one surface over a log. Samples
/// whose difference stencil straddles the |S| = eps kink are skipped: the
/// estimator is only valid where the series is smooth.
fn reaching_residual_rms(log: &SimLog, gains: &GainSet, epsilon: f64, channel: usize) -> f64 {
    let s: Vec<f64> = log.rows.iter().map(|r| r.surfaces[channel]).collect();
    let dt = log.log_dt();
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 2..s.len().saturating_sub(2) {
        let outside = s[i - 2].abs() > epsilon;
        if (i - 1..=i + 2).any(|j| (s[j].abs() > epsilon) != outside) {
            continue;
        }
        let s_dot = fd5(&s, i, dt);
        let sat = (s[i] / epsilon).clamp(-1.0, 1.0);
        let r = s_dot + gains.q[channel] * sat + gains.k[channel] * s[i];
        sum += r * r;
        count += 1;
    }
    (sum / count.max(1) as f64).sqrt()
}

fn check_reaching_residual(cfg: &RunConfig) -> Check {
    let name = "reaching_law_residual";
    let (mut sim_cfg, gains) = match (cfg.sim_config(), cfg.gain_set()) {
        (Ok(s), Ok(g)) => (s, g),
        (Err(e), _) | (_, Err(e)) => {
            return Check {
                name,
                pass: false,
                detail: e.to_string(),
            }
        }
    };
    // Canonical attitude scenario with a boundary layer, driven by the
    // config's own parameters and gains.
    sim_cfg.control_mode = ControlMode::Attitude;
    sim_cfg.switching = Switching::Saturation { epsilon: 0.05 };
    sim_cfg.actuation = crate::actuation::ActuationMode::Ideal;
    sim_cfg.t_end = sim_cfg.t_end.min(5.0);
    sim_cfg.stride = 1;
    match sim::run(&sim_cfg, &cfg.params, &gains, &cfg.trajectory) {
        Ok(log) => {
            let rms = reaching_residual_rms(&log, &gains, 0.05, 0);
            Check {
                name,
                pass: rms < 1e-6,
                detail: format!("phi-surface residual RMS {rms:.3e}"),
            }
        }
        Err(failure) => Check {
            name,
            pass: false,
            detail: failure.to_string(),
        },
    }
}

pub fn cmd_check(config_path: &Path) -> i32 {
    let cfg = match load_config(config_path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let checks = [
        check_dual_form(&cfg),
        check_mixer_round_trip(&cfg),
        check_rotation_orthonormality(),
        check_reaching_residual(&cfg),
    ];
    let mut all_pass = true;
    for c in &checks {
        println!(
            "check {}: {} ({})",
            c.name,
            if c.pass { "PASS" } else { "FAIL" },
            c.detail
        );
        all_pass &= c.pass;
    }
    if all_pass {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}
