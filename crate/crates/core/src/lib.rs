//! Closed-loop quadrotor flight dynamics with backstepping-based sliding mode
//! control.
//!
//! The crate provides:
//!
//! - [`model`]: physical parameters, the 12-state vector, lumped constants
//!   and attitude kinematics
//! - [`dynamics`]: the nonlinear state derivative plus an independent
//!   torque-form oracle
//! - [`actuation`]: the rotor mixer, its inverse, and DC-motor rotor dynamics
//! - [`control`]: sliding surfaces, the six control laws, and the
//!   position-to-attitude cascade
//! - [`trajectory`]: closed-form references with analytic derivatives
//! - [`sim`]: fixed-step RK4 closed-loop integration, logging and metrics
//! - [`tune`]: bounded Nelder-Mead gain tuning on the tracking objective
//! - [`cli`]: the `simulate` / `tune` / `check` experiment harness
//!
//! Everything is deterministic: identical configurations produce
//! bit-identical logs.

pub mod actuation;
pub mod cli;
pub mod config;
pub mod control;
pub mod dynamics;
pub mod model;
pub mod presets;
pub mod report;
pub mod rng;
pub mod sim;
pub mod trajectory;
pub mod tune;

pub use config::RunConfig;
pub use control::{ControlMode, GainSet, Switching};
pub use model::{ControlVector, DerivedConstants, QuadParams, State12};
pub use sim::{metrics, run, Metrics, SimConfig, SimLog};
pub use trajectory::TrajectorySpec;
