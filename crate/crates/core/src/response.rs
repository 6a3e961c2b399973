// SPDX-License-Identifier: Apache-2.0

//! Closed-form linear response to a weak probe at offset x = δ − ω_m from the
//! red mechanical sideband.
//!
//! Every amplitude is returned per unit probe amplitude ε_p. With
//! a = κ − ix, m = γ_m/2 − ix and D = a·m + G²(1 − n²):
//!
//! ```text
//! δb₊   =  iG / D
//! δc_1₊ =  (a·m − n²G²) / (a·D)
//! δc_2₋ = −nG² / (conj(a)·conj(D))
//! ```
//!
//! and the probe-frequency outputs are ε_T = 2κδc_1₊, ε_outL₊ = ε_T − 1 and
//! ε_outR₋ = 2κδc_2₋.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ReducedParams;

/// Relative size of the common denominator below which a point is treated as
/// the divergence itself.
pub const SINGULAR_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseAmplitudes {
    /// δb₊/ε_p, s.
    pub b_plus: Complex64,
    /// δc_1₊/ε_p, s.
    pub c1_plus: Complex64,
    /// δc_2₋/ε_p, s.
    pub c2_minus: Complex64,
    /// 2κ·δc_1₊/ε_p.
    pub eps_t: Complex64,
    /// ε_outL₊/ε_p.
    pub out_l_plus: Complex64,
    /// ε_outR₋/ε_p.
    pub out_r_minus: Complex64,
    /// Probe offset x, rad/s.
    pub x: f64,
}

impl ResponseAmplitudes {
    /// Fill the output fields from the three mode amplitudes.
    pub fn from_modes(kappa: f64, x: f64, b_plus: Complex64, c1_plus: Complex64, c2_minus: Complex64) -> Self {
        let eps_t = c1_plus * (2.0 * kappa);
        Self {
            b_plus,
            c1_plus,
            c2_minus,
            eps_t,
            out_l_plus: eps_t - 1.0,
            out_r_minus: c2_minus * (2.0 * kappa),
            x,
        }
    }

    /// |κ·δb₊/ε_p|², the normalized mechanical oscillation.
    pub fn abs2_b(&self, kappa: f64) -> f64 {
        (self.b_plus * kappa).norm_sqr()
    }

    /// |ε_outL₊/ε_p|², the normalized left output energy.
    pub fn abs2_out_l(&self) -> f64 {
        self.out_l_plus.norm_sqr()
    }

    /// |ε_outR₋/ε_p|², the normalized right output energy.
    pub fn abs2_out_r(&self) -> f64 {
        self.out_r_minus.norm_sqr()
    }
}

fn check_singular(r: &ReducedParams, denominator: Complex64) -> Result<()> {
    let threshold = SINGULAR_THRESHOLD * r.kappa * r.kappa * (r.gamma_m / 2.0).max(r.kappa);
    let magnitude = denominator.norm();
    if magnitude < threshold || !magnitude.is_finite() {
        return Err(Error::NearSingular { magnitude, threshold });
    }
    Ok(())
}

/// Steady-state fluctuation amplitudes and output fields at probe offset `x`.
pub fn fluctuation_amplitudes(r: &ReducedParams, x: f64) -> Result<ResponseAmplitudes> {
    let g2 = r.coupling * r.coupling;
    let a = Complex64::new(r.kappa, -x);
    let m = Complex64::new(r.gamma_m / 2.0, -x);
    let d = a * m + g2 * (1.0 - r.n * r.n);
    check_singular(r, a * d)?;

    let b_plus = Complex64::new(0.0, r.coupling) / d;
    let c1_plus = (a * m - r.n * r.n * g2) / (a * d);
    let c2_minus = Complex64::new(-r.n * g2, 0.0) / (a.conj() * d.conj());
    Ok(ResponseAmplitudes::from_modes(r.kappa, x, b_plus, c1_plus, c2_minus))
}

/// ε_T evaluated directly from its own closed form, without going through the
/// mode amplitudes.
pub fn transmission_quadrature(r: &ReducedParams, x: f64) -> Result<Complex64> {
    let g2 = r.coupling * r.coupling;
    let a = Complex64::new(r.kappa, -x);
    let m = Complex64::new(r.gamma_m / 2.0, -x);
    let denominator = a * a * m + a * (g2 * (1.0 - r.n * r.n));
    check_singular(r, denominator)?;
    Ok((a * m - r.n * r.n * g2) * (2.0 * r.kappa) / denominator)
}

/// The ratio n* = √(γ_mκ/(2G²)) at which ε_T(x = 0) vanishes.
pub fn transparency_ratio(r: &ReducedParams) -> Result<f64> {
    if r.coupling == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    Ok((r.gamma_m * r.kappa / (2.0 * r.coupling * r.coupling)).sqrt())
}

/// The ratio n_div = √(1 + γ_mκ/(2G²)) at which the x = 0 response diverges.
pub fn divergence_ratio(r: &ReducedParams) -> Result<f64> {
    if r.coupling == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    Ok((1.0 + r.gamma_m * r.kappa / (2.0 * r.coupling * r.coupling)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stability {
    pub stable: bool,
    /// (κγ_m/2 + G²(1 − n²))/κ, rad/s. The boundary itself counts as unstable.
    pub margin: f64,
}

pub fn is_stable(r: &ReducedParams) -> Stability {
    let margin = (r.kappa * r.gamma_m / 2.0 + r.coupling * r.coupling * (1.0 - r.n * r.n)) / r.kappa;
    Stability {
        stable: margin > 0.0,
        margin,
    }
}

/// Effective mechanical linewidth γ_eff = γ_m + 2G²(1 − n²)/κ.
pub fn effective_linewidth(r: &ReducedParams) -> f64 {
    r.gamma_m + 2.0 * r.coupling * r.coupling * (1.0 - r.n * r.n) / r.kappa
}
