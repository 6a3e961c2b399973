// SPDX-License-Identifier: Apache-2.0

//! Mean-field steady state of the driven double cavity.
//!
//! The membrane displacement shifts the two cavity detunings in opposite
//! directions, Δ_{1,2} = Δ_{c,d} ∓ g₀(b_s + b_s*), which in turn changes the
//! intracavity amplitudes that push the membrane. The self-consistent solution
//! is found by damped fixed-point iteration in b_s starting from the undriven
//! state b_s = 0, which selects the branch continuously connected to it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{single_photon_coupling, PhysicalParams};

/// g₀|b_s|/ω_m above this triggers a warning.
pub const BACKACTION_WARN_RATIO: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Weight α of the new iterate in b ← (1−α)·b + α·F(b).
    pub damping: f64,
    pub max_iterations: usize,
    /// Relative residual |F(b) − b| / |b| at which iteration stops.
    pub tolerance: f64,
    /// Pin Δ_1 = Δ_c and Δ_2 = Δ_d instead of solving self-consistently.
    pub ignore_backaction: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            damping: 0.5,
            max_iterations: 1000,
            tolerance: 1e-12,
            ignore_backaction: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    /// Phonon amplitude b_s.
    pub b: Complex64,
    /// Left cavity amplitude c_1s.
    pub c1: Complex64,
    /// Right cavity amplitude c_2s.
    pub c2: Complex64,
    /// Effective detuning Δ_1, rad/s.
    pub delta_1: f64,
    /// Effective detuning Δ_2, rad/s.
    pub delta_2: f64,
    /// Relative fixed-point residual at the returned b_s.
    pub residual: f64,
    pub iterations: usize,
    /// Whether Δ_{1,2} include the membrane shift.
    pub backaction: bool,
}

impl SteadyState {
    /// Re-substitute into the mean-field equations and return the worst
    /// relative residual over the three lines.
    pub fn check_residual(&self, p: &PhysicalParams) -> f64 {
        let g0 = single_photon_coupling(p);
        let kappa = Complex64::new(p.kappa, 0.0);
        let line = |c: Complex64, delta: f64, eps: f64| {
            let lhs = c * (kappa + Complex64::i() * delta);
            if eps == 0.0 {
                lhs.norm()
            } else {
                (lhs - eps).norm() / eps
            }
        };
        let r1 = line(self.c1, self.delta_1, p.eps_c());
        let r2 = line(self.c2, self.delta_2, p.eps_d());
        let fb = phonon_amplitude(g0, p, self.c1, self.c2);
        let rb = relative_gap(self.b, fb);
        let mut worst = r1.max(r2).max(rb);
        if self.backaction {
            let shift = g0 * 2.0 * self.b.re;
            let d1 = ((p.detuning_c - shift) - self.delta_1).abs() / p.kappa;
            let d2 = ((p.detuning_d + shift) - self.delta_2).abs() / p.kappa;
            worst = worst.max(d1).max(d2);
        }
        worst
    }

    /// g₀|b_s|/ω_m, the size of the membrane back-action on the detunings.
    pub fn backaction_ratio(&self, p: &PhysicalParams) -> f64 {
        single_photon_coupling(p) * self.b.norm() / p.mech_freq
    }
}

fn relative_gap(b: Complex64, fb: Complex64) -> f64 {
    let scale = b.norm().max(fb.norm());
    if scale == 0.0 {
        0.0
    } else {
        (fb - b).norm() / scale
    }
}

/// b_s = −i g₀(|c_2s|² − |c_1s|²)/(γ_m/2 + iω_m).
fn phonon_amplitude(g0: f64, p: &PhysicalParams, c1: Complex64, c2: Complex64) -> Complex64 {
    let num = Complex64::new(0.0, -g0 * (c2.norm_sqr() - c1.norm_sqr()));
    num / Complex64::new(p.mech_decay / 2.0, p.mech_freq)
}

struct MeanField {
    g0: f64,
    eps_c: f64,
    eps_d: f64,
    backaction: bool,
}

impl MeanField {
    fn detunings(&self, p: &PhysicalParams, b: Complex64) -> (f64, f64) {
        if self.backaction {
            let shift = self.g0 * 2.0 * b.re;
            (p.detuning_c - shift, p.detuning_d + shift)
        } else {
            (p.detuning_c, p.detuning_d)
        }
    }

    fn evaluate(&self, p: &PhysicalParams, b: Complex64) -> (Complex64, Complex64, Complex64, f64, f64) {
        let (d1, d2) = self.detunings(p, b);
        let c1 = Complex64::new(self.eps_c, 0.0) / Complex64::new(p.kappa, d1);
        let c2 = Complex64::new(self.eps_d, 0.0) / Complex64::new(p.kappa, d2);
        (phonon_amplitude(self.g0, p, c1, c2), c1, c2, d1, d2)
    }
}

/// Solve the mean-field steady state for the device `p`.
///
/// Returns `NoConvergence` when the iteration runs out of budget and
/// `AmbiguousBranch` when the damped update settles into a sign-alternating
/// cycle instead of shrinking.
pub fn solve_steady_state(p: &PhysicalParams, opts: &SolverOptions) -> Result<SteadyState> {
    p.validate()?;
    let field = MeanField {
        g0: single_photon_coupling(p),
        eps_c: p.eps_c(),
        eps_d: p.eps_d(),
        backaction: !opts.ignore_backaction,
    };

    let finish = |b: Complex64, iterations: usize| {
        let (fb, c1, c2, delta_1, delta_2) = field.evaluate(p, b);
        let s = SteadyState {
            b,
            c1,
            c2,
            delta_1,
            delta_2,
            residual: relative_gap(b, fb),
            iterations,
            backaction: field.backaction,
        };
        let ratio = s.backaction_ratio(p);
        if ratio >= BACKACTION_WARN_RATIO {
            log::warn!("membrane back-action is not small: g0|b_s|/omega_m = {ratio:e}");
        }
        s
    };

    if !field.backaction {
        // detunings are fixed, so one evaluation is the exact fixed point
        let (fb, ..) = field.evaluate(p, Complex64::new(0.0, 0.0));
        return Ok(finish(fb, 1));
    }

    let alpha = opts.damping;
    let mut b = Complex64::new(0.0, 0.0);
    let mut prev_step = 0.0_f64;
    let mut alternating = 0usize;
    let mut residual = f64::INFINITY;
    for it in 0..opts.max_iterations {
        let (fb, ..) = field.evaluate(p, b);
        residual = relative_gap(b, fb);
        if residual <= opts.tolerance {
            return Ok(finish(b, it));
        }
        // only Re b feeds back into the detunings
        let step = fb.re - b.re;
        if step * prev_step < 0.0 && step.abs() >= 0.999 * prev_step.abs() {
            alternating += 1;
            if alternating >= 16 {
                return Err(Error::AmbiguousBranch {
                    iterations: it + 1,
                    residual,
                });
            }
        } else {
            alternating = 0;
        }
        prev_step = step;
        b = b * (1.0 - alpha) + fb * alpha;
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iterations,
        residual,
    })
}

/// Rotate the optical phases away so that c_1s and c_2s are real and
/// non-negative. b_s is left untouched.
pub fn apply_phase_convention(s: &SteadyState) -> SteadyState {
    SteadyState {
        c1: Complex64::new(s.c1.norm(), 0.0),
        c2: Complex64::new(s.c2.norm(), 0.0),
        ..*s
    }
}
