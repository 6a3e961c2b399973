// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("coupling field amplitude |c_1s| is zero, amplitude ratio n is undefined")]
    ZeroCouplingField,

    #[error("effective coupling G is zero")]
    ZeroCoupling,

    #[error("steady state did not converge after {iterations} iterations (last residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("steady-state iteration oscillates between candidate fixed points after {iterations} iterations (residual {residual:e})")]
    AmbiguousBranch { iterations: usize, residual: f64 },

    #[error("response denominator is near singular (|D| = {magnitude:e}, threshold {threshold:e})")]
    NearSingular { magnitude: f64, threshold: f64 },

    #[error("system is unstable or too close to threshold to integrate: {0}")]
    UnstableSystem(String),

    #[error("time step {dt:e} s exceeds resolution limit {limit:e} s")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("trajectory too short for the demodulation window: {0}")]
    WindowTooShort(String),

    #[error("unknown preset `{name}` (valid presets: {valid})")]
    UnknownPreset { name: String, valid: String },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("malformed CSV: {0}")]
    Parse(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
