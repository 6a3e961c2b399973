// SPDX-License-Identifier: Apache-2.0

//! JSON run configuration.
//!
//! Frequencies are given in Hz and converted to rad/s on load. Two modes:
//!
//! ```json
//! { "mode": "reduced", "kappa_hz": 215e3, "gamma_m_hz": 141, "coupling_hz": 54.9e3, "n": 0.7 }
//! ```
//!
//! or a full device description with `"mode": "physical"` (see
//! [`PhysicalConfig`]). Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{angular, reduce, PhysicalParams, ReducedParams};
use crate::steadystate::{apply_phase_convention, solve_steady_state, SolverOptions, SteadyState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Config {
    Physical(PhysicalConfig),
    Reduced(ReducedConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalConfig {
    pub cavity_length_m: f64,
    pub effective_mass_kg: f64,
    pub kappa_hz: f64,
    pub mech_freq_hz: f64,
    pub gamma_m_hz: f64,
    pub wavelength_m: f64,
    pub power_c_w: f64,
    pub power_d_w: f64,
    #[serde(default)]
    pub power_p_w: f64,
    pub detuning_c_hz: f64,
    pub detuning_d_hz: f64,
    #[serde(default)]
    pub ignore_backaction: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReducedConfig {
    pub kappa_hz: f64,
    pub gamma_m_hz: f64,
    /// Effective coupling G/2π.
    pub coupling_hz: f64,
    pub n: f64,
}

impl PhysicalConfig {
    pub fn paper_device() -> Self {
        Self {
            cavity_length_m: 25e-3,
            effective_mass_kg: 145e-12,
            kappa_hz: 215e3,
            mech_freq_hz: 947e3,
            gamma_m_hz: 141.0,
            wavelength_m: 1064e-9,
            power_c_w: 1e-3,
            power_d_w: 0.0,
            power_p_w: 0.0,
            detuning_c_hz: 947e3,
            detuning_d_hz: -947e3,
            ignore_backaction: false,
        }
    }

    pub fn to_params(&self) -> Result<PhysicalParams> {
        let p = PhysicalParams {
            cavity_length: self.cavity_length_m,
            effective_mass: self.effective_mass_kg,
            kappa: angular(self.kappa_hz),
            mech_freq: angular(self.mech_freq_hz),
            mech_decay: angular(self.gamma_m_hz),
            wavelength: self.wavelength_m,
            power_c: self.power_c_w,
            power_d: self.power_d_w,
            power_p: self.power_p_w,
            detuning_c: angular(self.detuning_c_hz),
            detuning_d: angular(self.detuning_d_hz),
        };
        p.validate()?;
        Ok(p)
    }
}

impl ReducedConfig {
    pub fn to_params(&self) -> Result<ReducedParams> {
        ReducedParams::new(
            angular(self.kappa_hz),
            angular(self.gamma_m_hz),
            angular(self.coupling_hz),
            self.n,
        )
    }
}

/// Everything derived from a config: reduced parameters, plus the device and
/// its steady state in physical mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub reduced: ReducedParams,
    pub physical: Option<(PhysicalParams, SteadyState)>,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// `force_ignore_backaction` overrides the file's own setting when true.
    pub fn resolve(&self, force_ignore_backaction: bool) -> Result<Resolved> {
        match self {
            Config::Reduced(c) => Ok(Resolved {
                reduced: c.to_params()?,
                physical: None,
            }),
            Config::Physical(c) => {
                let p = c.to_params()?;
                let opts = SolverOptions {
                    ignore_backaction: c.ignore_backaction || force_ignore_backaction,
                    ..SolverOptions::default()
                };
                let s = apply_phase_convention(&solve_steady_state(&p, &opts)?);
                Ok(Resolved {
                    reduced: reduce(&p, &s)?,
                    physical: Some((p, s)),
                })
            }
        }
    }
}
