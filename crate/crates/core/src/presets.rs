//! Bundled experiment configurations, parsed from the JSON files shipped in
//! `configs/`. Those files are the single source of the physical parameter
//! set, so the library itself carries no baked-in constants.

use crate::config::RunConfig;
use crate::control::GainSet;
use crate::model::QuadParams;

pub const HOVER_JSON: &str = include_str!("../../../configs/hover.json");
pub const FIG3_ATTITUDE_JSON: &str = include_str!("../../../configs/fig3_attitude.json");
pub const FIG7_POSITION_JSON: &str = include_str!("../../../configs/fig7_position.json");
pub const MOTOR_MODE_JSON: &str = include_str!("../../../configs/motor_mode.json");
pub const TUNE_FIG3_JSON: &str = include_str!("../../../configs/tune_fig3.json");

fn parse(text: &str, name: &str) -> RunConfig {
    RunConfig::from_json(text).unwrap_or_else(|e| panic!("bundled config {name} invalid: {e}"))
}

/// Hover hold at the origin: the equilibrium scenario.
pub fn hover() -> RunConfig {
    parse(HOVER_JSON, "hover")
}

/// Attitude tracking of (sin t, cos t, 0.1 t) with the reference gain set.
pub fn fig3_attitude() -> RunConfig {
    parse(FIG3_ATTITUDE_JSON, "fig3_attitude")
}

/// Position tracking of (sin t, 2t, 3t) with yaw ramp, cascaded loops.
pub fn fig7_position() -> RunConfig {
    parse(FIG7_POSITION_JSON, "fig7_position")
}

/// The attitude scenario with rotor speeds lagging through the motor ODE.
pub fn motor_mode() -> RunConfig {
    parse(MOTOR_MODE_JSON, "motor_mode")
}

/// The attitude scenario plus a gain-tuning block.
pub fn tune_fig3() -> RunConfig {
    parse(TUNE_FIG3_JSON, "tune_fig3")
}

/// The reference physical parameter set.
pub fn params() -> QuadParams {
    fig3_attitude().params
}

/// The reference gain set (alpha = 0.2285737, k = q = 0.1 on every loop).
pub fn gains_reference() -> GainSet {
    fig3_attitude().gain_set().expect("bundled gains valid")
}
