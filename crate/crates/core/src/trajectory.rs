//! Closed-form reference trajectories and their analytic derivatives.

use serde::{Deserialize, Serialize};

/// One channel's reference value with its first and second time derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChannelRef {
    pub value: f64,
    pub rate: f64,
    pub accel: f64,
}

/// References for all six tracked channels at one instant, in the order
/// (phi, theta, psi, x, y, z).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReferencePoint {
    pub phi: ChannelRef,
    pub theta: ChannelRef,
    pub psi: ChannelRef,
    pub x: ChannelRef,
    pub y: ChannelRef,
    pub z: ChannelRef,
}

impl ReferencePoint {
    pub fn channels(&self) -> [ChannelRef; 6] {
        [self.phi, self.theta, self.psi, self.x, self.y, self.z]
    }
}

/// One channel's trajectory family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ChannelSpec {
    #[default]
    Zero,
    Constant {
        value: f64,
    },
    Ramp {
        slope: f64,
    },
    Sine {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
}

impl ChannelSpec {
    pub fn sample(&self, t: f64) -> ChannelRef {
        match *self {
            ChannelSpec::Zero => ChannelRef::default(),
            ChannelSpec::Constant { value } => ChannelRef {
                value,
                rate: 0.0,
                accel: 0.0,
            },
            ChannelSpec::Ramp { slope } => ChannelRef {
                value: slope * t,
                rate: slope,
                accel: 0.0,
            },
            ChannelSpec::Sine {
                amplitude,
                frequency,
                phase,
            } => {
                let arg = frequency * t + phase;
                ChannelRef {
                    value: amplitude * arg.sin(),
                    rate: amplitude * frequency * arg.cos(),
                    accel: -amplitude * frequency * frequency * arg.sin(),
                }
            }
        }
    }
}

/// Reference trajectories for all six channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySpec {
    #[serde(default)]
    pub phi: ChannelSpec,
    #[serde(default)]
    pub theta: ChannelSpec,
    #[serde(default)]
    pub psi: ChannelSpec,
    #[serde(default)]
    pub x: ChannelSpec,
    #[serde(default)]
    pub y: ChannelSpec,
    #[serde(default)]
    pub z: ChannelSpec,
}

impl TrajectorySpec {
    pub fn sample(&self, t: f64) -> ReferencePoint {
        ReferencePoint {
            phi: self.phi.sample(t),
            theta: self.theta.sample(t),
            psi: self.psi.sample(t),
            x: self.x.sample(t),
            y: self.y.sample(t),
            z: self.z.sample(t),
        }
    }
}
