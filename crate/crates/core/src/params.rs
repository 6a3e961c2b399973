// SPDX-License-Identifier: Apache-2.0

//! Laboratory-unit device description and its reduction to the four numbers
//! (κ, γ_m, G, n) that fix the linear response.
//!
//! All rates are angular (rad/s). Config files carry ordinary frequencies in Hz;
//! the conversion happens in [`crate::config`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::steadystate::SteadyState;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Hz → rad/s.
#[inline]
pub fn angular(hz: f64) -> f64 {
    2.0 * PI * hz
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Length of each cavity, m.
    pub cavity_length: f64,
    /// Effective mass of the membrane, kg.
    pub effective_mass: f64,
    /// Common cavity decay rate κ, rad/s.
    pub kappa: f64,
    /// Mechanical frequency ω_m, rad/s.
    pub mech_freq: f64,
    /// Mechanical decay rate γ_m, rad/s.
    pub mech_decay: f64,
    /// Laser wavelength, m. Sets the optical frequency of all three fields.
    pub wavelength: f64,
    /// Coupling (left, red-sideband) field power, W.
    pub power_c: f64,
    /// Driving (right, blue-sideband) field power, W.
    pub power_d: f64,
    /// Probe power, W. Never enters the linear response.
    pub power_p: f64,
    /// Cavity–coupling-field detuning Δ_c, rad/s.
    pub detuning_c: f64,
    /// Cavity–driving-field detuning Δ_d, rad/s.
    pub detuning_d: f64,
}

impl PhysicalParams {
    /// The membrane-in-the-middle device the figures are computed for, with a
    /// 1 mW coupling field on the red sideband and the driving field off.
    pub fn paper_device() -> Self {
        let mech_freq = angular(947e3);
        Self {
            cavity_length: 25e-3,
            effective_mass: 145e-12,
            kappa: angular(215e3),
            mech_freq,
            mech_decay: angular(141.0),
            wavelength: 1064e-9,
            power_c: 1e-3,
            power_d: 0.0,
            power_p: 0.0,
            detuning_c: mech_freq,
            detuning_d: -mech_freq,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("cavity_length", self.cavity_length),
            ("effective_mass", self.effective_mass),
            ("kappa", self.kappa),
            ("mech_freq", self.mech_freq),
            ("wavelength", self.wavelength),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and > 0, got {v}"),
                });
            }
        }
        let non_negative = [
            ("mech_decay", self.mech_decay),
            ("power_c", self.power_c),
            ("power_d", self.power_d),
            ("power_p", self.power_p),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and >= 0, got {v}"),
                });
            }
        }
        for (name, v) in [("detuning_c", self.detuning_c), ("detuning_d", self.detuning_d)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite, got {v}"),
                });
            }
        }
        if !self.is_resolved_sideband() {
            log::warn!(
                "outside the resolved-sideband regime: omega_m = {:e} rad/s <= kappa = {:e} rad/s",
                self.mech_freq,
                self.kappa
            );
        }
        Ok(())
    }

    /// ω_m > κ. The rotating-wave reduction of the dynamics assumes this.
    pub fn is_resolved_sideband(&self) -> bool {
        self.mech_freq > self.kappa
    }

    /// Optical angular frequency 2πc/λ.
    pub fn optical_freq(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.wavelength
    }

    /// Mechanical quality factor ω_m/γ_m (infinite for γ_m = 0).
    pub fn quality_factor(&self) -> f64 {
        self.mech_freq / self.mech_decay
    }

    pub fn eps_c(&self) -> f64 {
        drive_amplitude(self.power_c, self.optical_freq(), self.kappa)
    }

    pub fn eps_d(&self) -> f64 {
        drive_amplitude(self.power_d, self.optical_freq(), self.kappa)
    }

    pub fn eps_p(&self) -> f64 {
        drive_amplitude(self.power_p, self.optical_freq(), self.kappa)
    }
}

/// Single-photon optomechanical coupling g₀ = (ω₀/L)·√(ħ/(2mω_m)), rad/s.
pub fn single_photon_coupling(p: &PhysicalParams) -> f64 {
    p.optical_freq() / p.cavity_length * (HBAR / (2.0 * p.effective_mass * p.mech_freq)).sqrt()
}

/// Intracavity drive amplitude ε = √(2κ℘/(ħω)), s⁻¹.
pub fn drive_amplitude(power: f64, omega: f64, kappa: f64) -> f64 {
    (2.0 * kappa * power / (HBAR * omega)).sqrt()
}

/// The four numbers that fully determine the linear response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedParams {
    /// Cavity decay κ, rad/s.
    pub kappa: f64,
    /// Mechanical decay γ_m, rad/s.
    pub gamma_m: f64,
    /// Effective optomechanical coupling G = g₀|c_1s|, rad/s.
    pub coupling: f64,
    /// Amplitude ratio |c_2s/c_1s|.
    pub n: f64,
}

impl ReducedParams {
    pub fn new(kappa: f64, gamma_m: f64, coupling: f64, n: f64) -> Result<Self> {
        let r = Self {
            kappa,
            gamma_m,
            coupling,
            n,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(Error::InvalidParameter {
                name: "kappa",
                reason: format!("must be finite and > 0, got {}", self.kappa),
            });
        }
        for (name, v) in [
            ("gamma_m", self.gamma_m),
            ("coupling", self.coupling),
            ("n", self.n),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and >= 0, got {v}"),
                });
            }
        }
        Ok(())
    }

    pub fn with_n(self, n: f64) -> Self {
        Self { n, ..self }
    }

    pub fn with_gamma_m(self, gamma_m: f64) -> Self {
        Self { gamma_m, ..self }
    }

    /// Reduced parameters of [`PhysicalParams::paper_device`] with the coupling
    /// field exactly on the red sideband (Δ_1 = ω_m, back-action ignored).
    pub fn paper_device(gamma_m: f64, n: f64) -> Self {
        let p = PhysicalParams::paper_device();
        let c1 = p.eps_c() / p.kappa.hypot(p.mech_freq);
        Self {
            kappa: p.kappa,
            gamma_m,
            coupling: single_photon_coupling(&p) * c1,
            n,
        }
    }
}

/// Collapse a solved steady state onto the reduced model.
pub fn reduce(p: &PhysicalParams, s: &SteadyState) -> Result<ReducedParams> {
    let c1 = s.c1.norm();
    if c1 == 0.0 {
        return Err(Error::ZeroCouplingField);
    }
    ReducedParams::new(
        p.kappa,
        p.mech_decay,
        single_photon_coupling(p) * c1,
        s.c2.norm() / c1,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steadystate::{solve_steady_state, SolverOptions};

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn coupling_of_paper_device() {
        let g0 = single_photon_coupling(&PhysicalParams::paper_device());
        // direct evaluation: (2πc/λ/L)·sqrt(ħ/(2 m ω_m))
        let omega0 = 2.0 * PI * 299_792_458.0 / 1064e-9;
        let expected = omega0 / 25e-3 * (1.054_571_817e-34 / (2.0 * 145e-12 * 2.0 * PI * 947e3)).sqrt();
        assert!(rel(g0, expected) < 1e-14);
        assert!(rel(g0, 17.5) < 1e-2, "g0 = {g0}");
    }

    #[test]
    fn coupling_scalings() {
        let p = PhysicalParams::paper_device();
        let g0 = single_photon_coupling(&p);
        let heavy = PhysicalParams {
            effective_mass: 4.0 * p.effective_mass,
            ..p
        };
        let long = PhysicalParams {
            cavity_length: 2.0 * p.cavity_length,
            ..p
        };
        assert!(rel(single_photon_coupling(&heavy), g0 / 2.0) < 1e-14);
        assert!(rel(single_photon_coupling(&long), g0 / 2.0) < 1e-14);
    }

    #[test]
    fn drive_amplitude_values() {
        let p = PhysicalParams::paper_device();
        let eps = drive_amplitude(1e-3, p.optical_freq(), p.kappa);
        assert!(rel(eps, 1.20e11) < 5e-3, "eps = {eps:e}");
        assert_eq!(drive_amplitude(0.0, p.optical_freq(), p.kappa), 0.0);
        let quad = drive_amplitude(4e-3, p.optical_freq(), p.kappa);
        assert!(rel(quad, 2.0 * eps) < 1e-14);
    }

    #[test]
    fn quality_factor_of_paper_device() {
        let q = PhysicalParams::paper_device().quality_factor();
        assert!(rel(q, 6700.0) < 0.01, "Q = {q}");
    }

    #[test]
    fn reduce_paper_device() {
        let p = PhysicalParams::paper_device();
        let opts = SolverOptions {
            ignore_backaction: true,
            ..SolverOptions::default()
        };
        let s = solve_steady_state(&p, &opts).unwrap();
        let r = reduce(&p, &s).unwrap();
        assert!(rel(r.coupling, 3.45e5) < 1e-2, "G = {:e}", r.coupling);
        assert!(rel(r.coupling / (2.0 * PI), 54.9e3) < 1e-3);
        assert_eq!(r.n, 0.0);
        assert!(rel(r.coupling, ReducedParams::paper_device(0.0, 0.0).coupling) < 1e-14);
    }

    #[test]
    fn equal_powers_give_unit_ratio() {
        let p = PhysicalParams {
            power_d: 1e-3,
            ..PhysicalParams::paper_device()
        };
        let s = solve_steady_state(&p, &SolverOptions::default()).unwrap();
        assert_eq!(reduce(&p, &s).unwrap().n, 1.0);
    }

    #[test]
    fn zero_coupling_field_is_rejected() {
        let p = PhysicalParams {
            power_c: 0.0,
            power_d: 1e-3,
            ..PhysicalParams::paper_device()
        };
        let s = solve_steady_state(&p, &SolverOptions::default()).unwrap();
        assert!(matches!(reduce(&p, &s), Err(Error::ZeroCouplingField)));
    }

    #[test]
    fn ratio_invariant_under_common_power_scaling() {
        let base = PhysicalParams {
            power_d: 0.3e-3,
            ..PhysicalParams::paper_device()
        };
        let opts = SolverOptions {
            ignore_backaction: true,
            ..SolverOptions::default()
        };
        let n0 = reduce(&base, &solve_steady_state(&base, &opts).unwrap()).unwrap().n;
        for alpha in [0.01, 0.5, 3.0, 40.0] {
            let p = PhysicalParams {
                power_c: alpha * base.power_c,
                power_d: alpha * base.power_d,
                ..base
            };
            let n = reduce(&p, &solve_steady_state(&p, &opts).unwrap()).unwrap().n;
            assert!(rel(n, n0) < 1e-12, "alpha = {alpha}: {n} vs {n0}");
        }
    }

    #[test]
    fn validation_rejects_bad_values() {
        let p = PhysicalParams {
            effective_mass: 0.0,
            ..PhysicalParams::paper_device()
        };
        assert!(matches!(
            p.validate(),
            Err(Error::InvalidParameter { name: "effective_mass", .. })
        ));
        assert!(ReducedParams::new(1.0, -1.0, 1.0, 0.0).is_err());
        assert!(ReducedParams::new(0.0, 1.0, 1.0, 0.0).is_err());
        assert!(ReducedParams::new(1.0, 0.0, 0.0, 0.0).is_ok());
    }
}
