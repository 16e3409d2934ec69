//! JSON experiment configuration: one document aggregating parameters, gains,
//! trajectory, controller/actuation modes and the simulation grid. Unknown
//! keys are rejected everywhere.

use crate::actuation::ActuationMode;
use crate::control::{ControlMode, GainSet, Switching};
use crate::model::{DerivedConstants, QuadParams, State12};
use crate::sim::SimConfig;
use crate::trajectory::TrajectorySpec;
use crate::tune::GainComponent;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("config read error: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid config: {0}")]
    Invalid(&'static str),
}

/// A scalar broadcast to all six loops, or one value per loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarOrPerLoop {
    Scalar(f64),
    PerLoop([f64; 6]),
}

impl ScalarOrPerLoop {
    fn expand(&self) -> [f64; 6] {
        match *self {
            ScalarOrPerLoop::Scalar(v) => [v; 6],
            ScalarOrPerLoop::PerLoop(v) => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainConfig {
    pub alpha: ScalarOrPerLoop,
    pub k: ScalarOrPerLoop,
    pub q: ScalarOrPerLoop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SwitchingKind {
    Sign,
    Saturation,
}

fn default_epsilon() -> f64 {
    0.05
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerConfig {
    pub mode: ControlMode,
    pub switching: SwitchingKind,
    /// Boundary-layer width for saturation switching.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ActuationConfig {
    #[serde(default)]
    pub mode: ActuationMode,
}

fn default_stride() -> usize {
    1
}

fn zero_state() -> [f64; 12] {
    [0.0; 12]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimFileConfig {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default = "zero_state")]
    pub initial_state: [f64; 12],
}

fn default_bounds() -> [f64; 2] {
    [0.0, 1000.0]
}

fn default_free() -> Vec<GainComponent> {
    vec![GainComponent::Alpha, GainComponent::K, GainComponent::Q]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuneConfig {
    pub budget: usize,
    #[serde(default = "default_free")]
    pub free: Vec<GainComponent>,
    #[serde(default = "default_bounds")]
    pub bounds: [f64; 2],
    /// Replace the simulation objective with a synthetic quadratic; exercises
    /// the optimizer end to end without the plant.
    #[serde(default)]
    pub selftest: bool,
}

/// Optional raw overrides of the lumped constants, a fault-injection surface
/// for the `check` command. Ignored by `simulate` and `tune`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantOverrides {
    pub a1: Option<f64>,
    pub a2: Option<f64>,
    pub a3: Option<f64>,
    pub a4: Option<f64>,
    pub a5: Option<f64>,
    pub a6: Option<f64>,
    pub a7: Option<f64>,
    pub a8: Option<f64>,
    pub a9: Option<f64>,
    pub a10: Option<f64>,
    pub a11: Option<f64>,
    pub b1: Option<f64>,
    pub b2: Option<f64>,
    pub b3: Option<f64>,
}

impl ConstantOverrides {
    pub fn apply(&self, mut c: DerivedConstants) -> DerivedConstants {
        c.a1 = self.a1.unwrap_or(c.a1);
        c.a2 = self.a2.unwrap_or(c.a2);
        c.a3 = self.a3.unwrap_or(c.a3);
        c.a4 = self.a4.unwrap_or(c.a4);
        c.a5 = self.a5.unwrap_or(c.a5);
        c.a6 = self.a6.unwrap_or(c.a6);
        c.a7 = self.a7.unwrap_or(c.a7);
        c.a8 = self.a8.unwrap_or(c.a8);
        c.a9 = self.a9.unwrap_or(c.a9);
        c.a10 = self.a10.unwrap_or(c.a10);
        c.a11 = self.a11.unwrap_or(c.a11);
        c.b1 = self.b1.unwrap_or(c.b1);
        c.b2 = self.b2.unwrap_or(c.b2);
        c.b3 = self.b3.unwrap_or(c.b3);
        c
    }

    pub fn is_empty(&self) -> bool {
        *self == ConstantOverrides::default()
    }
}

/// The complete experiment document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: QuadParams,
    pub gains: GainConfig,
    pub trajectory: TrajectorySpec,
    pub controller: ControllerConfig,
    #[serde(default)]
    pub actuation: ActuationConfig,
    pub sim: SimFileConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tune: Option<TuneConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overrides: Option<ConstantOverrides>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.params
            .validate()
            .map_err(|_| ConfigError::Invalid("params violate their invariants"))?;
        if cfg.controller.switching == SwitchingKind::Saturation && cfg.controller.epsilon <= 0.0 {
            return Err(ConfigError::Invalid("epsilon must be > 0 for saturation"));
        }
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<RunConfig, ConfigError> {
        RunConfig::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn gain_set(&self) -> Result<GainSet, ConfigError> {
        let g = GainSet {
            alpha: self.gains.alpha.expand(),
            k: self.gains.k.expand(),
            q: self.gains.q.expand(),
        };
        g.validate()
            .map_err(|_| ConfigError::Invalid("gains violate their invariants"))?;
        Ok(g)
    }

    pub fn switching(&self) -> Switching {
        match self.controller.switching {
            SwitchingKind::Sign => Switching::Sign,
            SwitchingKind::Saturation => Switching::Saturation {
                epsilon: self.controller.epsilon,
            },
        }
    }

    pub fn sim_config(&self) -> Result<SimConfig, ConfigError> {
        if self.sim.dt <= 0.0 {
            return Err(ConfigError::Invalid("sim.dt must be > 0"));
        }
        if self.sim.t_end < self.sim.dt {
            return Err(ConfigError::Invalid("sim.t_end must be >= sim.dt"));
        }
        if self.sim.stride == 0 {
            return Err(ConfigError::Invalid("sim.stride must be >= 1"));
        }
        Ok(SimConfig {
            dt: self.sim.dt,
            t_end: self.sim.t_end,
            stride: self.sim.stride,
            initial_state: State12(self.sim.initial_state),
            actuation: self.actuation.mode,
            control_mode: self.controller.mode,
            switching: self.switching(),
        })
    }
}
