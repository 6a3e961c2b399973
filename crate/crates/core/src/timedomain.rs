// SPDX-License-Identifier: Apache-2.0

//! Time-domain check of the closed-form response.
//!
//! The mean fluctuations y = (⟨δb⟩, ⟨δc_1⟩, ⟨δc_2†⟩) obey the closed linear
//! system ẏ = M·y + (0, e^{−ixt}, 0) under unit probe drive. Starting from
//! y = 0 we integrate until the transient has died out, then project the late
//! trajectory onto e^{−ixt} to recover δb₊, δc_1₊ and conj(δc_2₋).

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ReducedParams;
use crate::response::{effective_linewidth, is_stable, ResponseAmplitudes};

/// Integrations are refused when γ_eff falls below this fraction of γ_m.
pub const LINEWIDTH_FLOOR: f64 = 1e-3;

type State = Vector3<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rk4Fixed,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationConfig {
    /// Requested output step, s. The step actually used is shortened so that
    /// one probe beat period is an integer number of steps.
    pub dt: f64,
    /// Settle time in units of the slowest relaxation time 1/min(κ, σ), where
    /// σ is the damping rate of the slowest eigenmode.
    pub settle_periods: f64,
    /// Number of beat periods 2π/|x| projected onto (2π/κ when x = 0).
    pub demod_periods: usize,
    pub method: Method,
}

impl IntegrationConfig {
    /// Default configuration for the point (r, x): dt = 0.02/max(κ, G, γ_m, |x|).
    pub fn for_point(r: &ReducedParams, x: f64) -> Self {
        Self {
            dt: 0.02 / rate_scale(r, x),
            settle_periods: 40.0,
            demod_periods: 4,
            method: Method::Rk4Fixed,
        }
    }

    pub fn validate(&self, r: &ReducedParams, x: f64) -> Result<()> {
        let limit = 0.1 / rate_scale(r, x);
        if !(self.dt > 0.0 && self.dt < limit) {
            return Err(Error::StepTooLarge { dt: self.dt, limit });
        }
        if self.settle_periods.is_nan() || self.settle_periods < 10.0 {
            return Err(Error::InvalidParameter {
                name: "settle_periods",
                reason: format!("must be >= 10, got {}", self.settle_periods),
            });
        }
        if self.demod_periods < 4 {
            return Err(Error::InvalidParameter {
                name: "demod_periods",
                reason: format!("must be >= 4, got {}", self.demod_periods),
            });
        }
        Ok(())
    }
}

fn rate_scale(r: &ReducedParams, x: f64) -> f64 {
    r.kappa.max(r.coupling).max(r.gamma_m).max(x.abs())
}

/// Uniformly sampled solution of the fluctuation equations.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub b: Vec<Complex64>,
    pub c1: Vec<Complex64>,
    pub c2_dag: Vec<Complex64>,
    /// Cavity decay the trajectory was integrated with, rad/s.
    pub kappa: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Dump as `t,re_b,im_b,re_c1,im_c1,re_c2dag,im_c2dag`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "re_b", "im_b", "re_c1", "im_c1", "re_c2dag", "im_c2dag"])?;
        for k in 0..self.len() {
            let row = [
                self.times[k],
                self.b[k].re,
                self.b[k].im,
                self.c1[k].re,
                self.c1[k].im,
                self.c2_dag[k].re,
                self.c2_dag[k].im,
            ];
            w.write_record(row.iter().map(|v| format!("{v:.16e}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Drift matrix of (⟨δb⟩, ⟨δc_1⟩, ⟨δc_2†⟩) under real steady-state amplitudes.
pub fn drift_matrix(r: &ReducedParams) -> Matrix3<Complex64> {
    let g = r.coupling;
    let ng = r.n * r.coupling;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    Matrix3::new(
        c(-r.gamma_m / 2.0, 0.0), c(0.0, g), c(0.0, -ng),
        c(0.0, g), c(-r.kappa, 0.0), c(0.0, 0.0),
        c(0.0, ng), c(0.0, 0.0), c(-r.kappa, 0.0),
    )
}

/// Eigenvalues of the drift matrix, largest real part first.
pub fn eigenvalues(r: &ReducedParams) -> [Complex64; 3] {
    let m = drift_matrix(r);
    let ev = m
        .schur()
        .eigenvalues()
        .expect("complex Schur form is always triangular");
    let mut out = [ev[0], ev[1], ev[2]];
    out.sort_by(|a, b| b.re.total_cmp(&a.re));
    out
}

/// Damping rate of the slowest mode, −max Re λ, from the factored
/// characteristic polynomial (κ + λ)[(κ + λ)(γ_m/2 + λ) + G²(1 − n²)].
fn slowest_damping(r: &ReducedParams) -> f64 {
    let p = r.kappa + r.gamma_m / 2.0;
    let q = r.kappa * r.gamma_m / 2.0 + r.coupling * r.coupling * (1.0 - r.n * r.n);
    let disc = p * p - 4.0 * q;
    let quad = if disc >= 0.0 {
        // slow root −(p − √disc)/2 = −2q/(p + √disc), written without cancellation
        2.0 * q / (p + disc.sqrt())
    } else {
        p / 2.0
    };
    quad.min(r.kappa)
}

struct Grid {
    dt: f64,
    settle_steps: usize,
    window_steps: usize,
}

fn grid(r: &ReducedParams, x: f64, cfg: &IntegrationConfig) -> Grid {
    let relax = 1.0 / slowest_damping(r).min(r.kappa);
    let window = demod_window(r.kappa, x, cfg);
    let (dt, window_steps) = if x != 0.0 {
        let period = 2.0 * PI / x.abs();
        let per_period = (period / cfg.dt).ceil() as usize;
        (period / per_period as f64, per_period * cfg.demod_periods)
    } else {
        let steps = (window / cfg.dt).ceil() as usize;
        (cfg.dt, steps)
    };
    Grid {
        dt,
        settle_steps: (cfg.settle_periods * relax / dt).ceil() as usize,
        window_steps,
    }
}

fn demod_window(kappa: f64, x: f64, cfg: &IntegrationConfig) -> f64 {
    let period = if x != 0.0 { 2.0 * PI / x.abs() } else { 2.0 * PI / kappa };
    period * cfg.demod_periods as f64
}

fn rhs(m: &Matrix3<Complex64>, x: f64, t: f64, y: &State) -> State {
    let mut dy = m * y;
    dy[1] += Complex64::from_polar(1.0, -x * t);
    dy
}

fn rk4_step(m: &Matrix3<Complex64>, x: f64, t: f64, y: &State, h: f64) -> State {
    let k1 = rhs(m, x, t, y);
    let k2 = rhs(m, x, t + h / 2.0, &(y + k1 * Complex64::from(h / 2.0)));
    let k3 = rhs(m, x, t + h / 2.0, &(y + k2 * Complex64::from(h / 2.0)));
    let k4 = rhs(m, x, t + h, &(y + k3 * Complex64::from(h)));
    y + (k1 + k2 * Complex64::from(2.0) + k3 * Complex64::from(2.0) + k4) * Complex64::from(h / 6.0)
}

// Dormand–Prince 5(4) tableau.
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One embedded step; returns the fifth-order solution and the error estimate.
fn dopri_step(m: &Matrix3<Complex64>, x: f64, t: f64, y: &State, h: f64) -> (State, f64) {
    let mut k = [State::zeros(); 7];
    for s in 0..7 {
        let mut ys = *y;
        for j in 0..s {
            if DP_A[s][j] != 0.0 {
                ys += k[j] * Complex64::from(h * DP_A[s][j]);
            }
        }
        k[s] = rhs(m, x, t + DP_C[s] * h, &ys);
    }
    let mut y5 = *y;
    let mut err = State::zeros();
    for s in 0..7 {
        y5 += k[s] * Complex64::from(h * DP_B5[s]);
        err += k[s] * Complex64::from(h * (DP_B5[s] - DP_B4[s]));
    }
    let scale = 1e-11 * y.norm().max(y5.norm()).max(f64::MIN_POSITIVE);
    (y5, err.norm() / scale)
}

/// Advance from t to t + span with adaptive substeps.
fn dopri_advance(m: &Matrix3<Complex64>, x: f64, t: f64, y: &State, span: f64, h_hint: &mut f64) -> State {
    let mut tau = 0.0;
    let mut cur = *y;
    while tau < span {
        let h = h_hint.min(span - tau);
        let (next, err) = dopri_step(m, x, t + tau, &cur, h);
        if err <= 1.0 {
            cur = next;
            tau += h;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        *h_hint = (h * factor).min(span);
    }
    cur
}

/// Integrate from zero fluctuations under unit probe drive at offset `x`.
pub fn integrate(r: &ReducedParams, x: f64, cfg: &IntegrationConfig) -> Result<Trajectory> {
    r.validate()?;
    let stability = is_stable(r);
    let gamma_eff = effective_linewidth(r);
    if !stability.stable || gamma_eff <= 0.0 || gamma_eff < LINEWIDTH_FLOOR * r.gamma_m {
        return Err(Error::UnstableSystem(format!(
            "gamma_eff = {gamma_eff:e} rad/s, stability margin = {:e} rad/s",
            stability.margin
        )));
    }
    cfg.validate(r, x)?;

    let m = drift_matrix(r);
    let g = grid(r, x, cfg);
    let total = g.settle_steps + g.window_steps;
    let mut traj = Trajectory {
        times: Vec::with_capacity(total + 1),
        b: Vec::with_capacity(total + 1),
        c1: Vec::with_capacity(total + 1),
        c2_dag: Vec::with_capacity(total + 1),
        kappa: r.kappa,
    };
    let mut y = State::zeros();
    let mut h_hint = g.dt;
    for k in 0..=total {
        let t = k as f64 * g.dt;
        traj.times.push(t);
        traj.b.push(y[0]);
        traj.c1.push(y[1]);
        traj.c2_dag.push(y[2]);
        if k == total {
            break;
        }
        y = match cfg.method {
            Method::Rk4Fixed => rk4_step(&m, x, t, &y, g.dt),
            Method::Adaptive => dopri_advance(&m, x, t, &y, g.dt, &mut h_hint),
        };
    }
    Ok(traj)
}

/// Index range of the demodulation window: the last whole number of beat
/// periods in the trajectory.
fn window_range(traj: &Trajectory, x: f64, cfg: &IntegrationConfig) -> Result<std::ops::Range<usize>> {
    if traj.len() < 2 {
        return Err(Error::WindowTooShort(format!("{} samples", traj.len())));
    }
    let dt = traj.times[1] - traj.times[0];
    let window = demod_window(traj.kappa, x, cfg);
    let steps = (window / dt).round() as usize;
    // the last sample duplicates the first one of the next period
    if steps == 0 || steps + 1 > traj.len() {
        return Err(Error::WindowTooShort(format!(
            "window needs {} samples, trajectory has {}",
            steps + 1,
            traj.len()
        )));
    }
    let end = traj.len() - 1;
    Ok(end - steps..end)
}

fn project(times: &[f64], s: &[Complex64], x: f64, range: std::ops::Range<usize>) -> Complex64 {
    let n = range.len() as f64;
    let sum: Complex64 = range
        .map(|k| s[k] * Complex64::from_polar(1.0, x * times[k]))
        .sum();
    sum / n
}

/// Recover the e^{−ixt} amplitudes from the settled part of a trajectory.
pub fn demodulate(traj: &Trajectory, x: f64, cfg: &IntegrationConfig) -> Result<ResponseAmplitudes> {
    let range = window_range(traj, x, cfg)?;
    let b_plus = project(&traj.times, &traj.b, x, range.clone());
    let c1_plus = project(&traj.times, &traj.c1, x, range.clone());
    let c2_dag = project(&traj.times, &traj.c2_dag, x, range);
    Ok(ResponseAmplitudes::from_modes(traj.kappa, x, b_plus, c1_plus, c2_dag.conj()))
}

/// Largest deviation of the windowed trajectory from a pure e^{−ixt}
/// oscillation, relative to the largest mode amplitude.
pub fn single_frequency_residual(traj: &Trajectory, x: f64, cfg: &IntegrationConfig) -> Result<f64> {
    let range = window_range(traj, x, cfg)?;
    let modes = [&traj.b, &traj.c1, &traj.c2_dag];
    let amps: Vec<Complex64> = modes
        .iter()
        .map(|s| project(&traj.times, s, x, range.clone()))
        .collect();
    let scale = amps.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let mut worst = 0.0_f64;
    for (s, a) in modes.iter().zip(&amps) {
        for k in range.clone() {
            let pure = a * Complex64::from_polar(1.0, -x * traj.times[k]);
            worst = worst.max((s[k] - pure).norm());
        }
    }
    Ok(if scale == 0.0 { worst } else { worst / scale })
}

/// Integrate and demodulate in one go with the default configuration.
pub fn simulate_response(r: &ReducedParams, x: f64) -> Result<ResponseAmplitudes> {
    let cfg = IntegrationConfig::for_point(r, x);
    let traj = integrate(r, x, &cfg)?;
    demodulate(&traj, x, &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::angular;
    use crate::response::{divergence_ratio, fluctuation_amplitudes};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn device(n: f64) -> ReducedParams {
        ReducedParams::paper_device(angular(141.0), n)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn uncoupled_drift_is_diagonal() {
        let r = ReducedParams::new(3.0, 0.4, 0.0, 0.5).unwrap();
        let m = drift_matrix(&r);
        let want = Matrix3::from_diagonal(&Vector3::new(
            Complex64::from(-0.2),
            Complex64::from(-3.0),
            Complex64::from(-3.0),
        ));
        assert_eq!(m, want);
        let ev = eigenvalues(&r);
        assert!((ev[0] - Complex64::from(-0.2)).norm() < 1e-14);
        assert!((ev[1] - Complex64::from(-3.0)).norm() < 1e-14);
        assert!((ev[2] - Complex64::from(-3.0)).norm() < 1e-14);
    }

    #[test]
    fn trace_is_coupling_free() {
        for (g, n) in [(0.0, 0.0), (1.0, 0.5), (4.0, 1.3)] {
            let r = ReducedParams::new(2.0, 0.6, g, n).unwrap();
            let tr = drift_matrix(&r).trace();
            assert!((tr - Complex64::from(-0.3 - 4.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn unit_ratio_spectrum() {
        let r = ReducedParams::new(2.0, 0.6, 1.7, 1.0).unwrap();
        let ev = eigenvalues(&r);
        assert!((ev[0] - Complex64::from(-0.3)).norm() < 1e-12, "{ev:?}");
        assert!((ev[1] - Complex64::from(-2.0)).norm() < 1e-6, "{ev:?}");
        assert!((ev[2] - Complex64::from(-2.0)).norm() < 1e-6, "{ev:?}");
    }

    #[test]
    fn characteristic_polynomial_factorization() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let r = ReducedParams::new(
                rng.gen_range(0.1..5.0),
                rng.gen_range(0.0..2.0),
                rng.gen_range(0.0..5.0),
                rng.gen_range(0.0..1.5),
            )
            .unwrap();
            let lambda = Complex64::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let det = (drift_matrix(&r) - Matrix3::identity() * lambda).determinant();
            let k = lambda + r.kappa;
            let expected = -k * (k * (lambda + r.gamma_m / 2.0) + r.coupling.powi(2) * (1.0 - r.n * r.n));
            assert!(rel(det, expected) < 1e-10, "{det} vs {expected}");
        }
    }

    #[test]
    fn slowest_damping_matches_eigenvalues() {
        for n in [0.0, 0.5, 0.9, 1.0] {
            let r = device(n);
            let sigma = slowest_damping(&r);
            let from_ev = -eigenvalues(&r)[0].re;
            assert!((sigma - from_ev).abs() / from_ev < 1e-6, "n = {n}: {sigma} vs {from_ev}");
        }
    }

    #[test]
    fn just_above_threshold_grows() {
        let r = device(0.0);
        let nd = divergence_ratio(&r).unwrap();
        assert!(eigenvalues(&r.with_n(nd * 1.001))[0].re > 0.0);
        assert!(eigenvalues(&r.with_n(nd * 0.999))[0].re < 0.0);
    }

    #[test]
    fn driven_bare_cavity_settles() {
        let r = ReducedParams::new(1.0, 0.5, 0.0, 0.0).unwrap();
        let cfg = IntegrationConfig::for_point(&r, 0.0);
        let traj = integrate(&r, 0.0, &cfg).unwrap();
        let last = *traj.c1.last().unwrap();
        assert!((last - Complex64::from(1.0)).norm() < 1e-12, "{last}");
        // distance to the steady oscillation only shrinks
        let x = 0.0;
        let mut prev = f64::INFINITY;
        for (t, c) in traj.times.iter().zip(&traj.c1) {
            let target = Complex64::from_polar(1.0 / r.kappa, -x * t);
            let dist = (c - target).norm();
            assert!(dist <= prev * (1.0 + 1e-12));
            prev = dist;
        }
    }

    #[test]
    fn projection_recovers_pure_tone() {
        let x = 3.0;
        let amp = Complex64::new(0.4, -1.3);
        let cfg = IntegrationConfig {
            dt: 0.01,
            settle_periods: 10.0,
            demod_periods: 4,
            method: Method::Rk4Fixed,
        };
        let period = 2.0 * PI / x;
        let per = (period / cfg.dt).ceil() as usize;
        let dt = period / per as f64;
        let times: Vec<f64> = (0..=per * 6).map(|k| k as f64 * dt).collect();
        let tone: Vec<Complex64> = times.iter().map(|t| amp * Complex64::from_polar(1.0, -x * t)).collect();
        let traj = Trajectory {
            b: tone.clone(),
            c1: tone.clone(),
            c2_dag: tone,
            times,
            kappa: 1.0,
        };
        let got = demodulate(&traj, x, &cfg).unwrap();
        assert!((got.b_plus - amp).norm() < 1e-10);
        assert!((got.c2_minus - amp.conj()).norm() < 1e-10);
        assert!(single_frequency_residual(&traj, x, &cfg).unwrap() < 1e-10);
    }

    #[test]
    fn short_trajectory_is_rejected() {
        let cfg = IntegrationConfig {
            dt: 0.01,
            settle_periods: 10.0,
            demod_periods: 4,
            method: Method::Rk4Fixed,
        };
        let traj = Trajectory {
            times: vec![0.0, 0.01, 0.02],
            b: vec![Complex64::from(0.0); 3],
            c1: vec![Complex64::from(0.0); 3],
            c2_dag: vec![Complex64::from(0.0); 3],
            kappa: 1.0,
        };
        assert!(matches!(demodulate(&traj, 1.0, &cfg), Err(Error::WindowTooShort(_))));
    }

    #[test]
    fn refuses_unstable_and_coarse_runs() {
        let r = device(1.2);
        let cfg = IntegrationConfig::for_point(&r, 0.0);
        assert!(matches!(integrate(&r, 0.0, &cfg), Err(Error::UnstableSystem(_))));
        let ok = device(0.5);
        let coarse = IntegrationConfig {
            dt: 1.0 / ok.kappa,
            ..IntegrationConfig::for_point(&ok, 0.0)
        };
        assert!(matches!(integrate(&ok, 0.0, &coarse), Err(Error::StepTooLarge { .. })));
        let short = IntegrationConfig {
            demod_periods: 2,
            ..IntegrationConfig::for_point(&ok, 0.0)
        };
        assert!(integrate(&ok, 0.0, &short).is_err());
    }

    #[test]
    fn oracle_matches_closed_form() {
        for (n, x_rel) in [(0.7, 0.0), (0.9, 0.5)] {
            let r = device(n);
            let x = x_rel * r.kappa;
            let cfg = IntegrationConfig::for_point(&r, x);
            let traj = integrate(&r, x, &cfg).unwrap();
            let sim = demodulate(&traj, x, &cfg).unwrap();
            let exact = fluctuation_amplitudes(&r, x).unwrap();
            assert!(rel(sim.b_plus, exact.b_plus) < 1e-6, "n={n} b: {}", rel(sim.b_plus, exact.b_plus));
            assert!(rel(sim.eps_t, exact.eps_t) < 1e-6, "n={n} eps_T");
            assert!(rel(sim.out_r_minus, exact.out_r_minus) < 1e-6, "n={n} outR");
            assert!(single_frequency_residual(&traj, x, &cfg).unwrap() < 1e-6);
        }
    }

    #[test]
    fn adaptive_method_agrees() {
        let r = device(0.3);
        let x = 0.1 * r.kappa;
        let cfg = IntegrationConfig {
            method: Method::Adaptive,
            ..IntegrationConfig::for_point(&r, x)
        };
        let sim = demodulate(&integrate(&r, x, &cfg).unwrap(), x, &cfg).unwrap();
        let exact = fluctuation_amplitudes(&r, x).unwrap();
        assert!(rel(sim.eps_t, exact.eps_t) < 1e-6, "{}", rel(sim.eps_t, exact.eps_t));
    }

    #[test]
    fn trajectory_csv_layout() {
        let r = ReducedParams::new(1.0, 0.5, 0.2, 0.1).unwrap();
        let cfg = IntegrationConfig::for_point(&r, 0.0);
        let traj = integrate(&r, 0.0, &cfg).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,re_b,im_b,re_c1,im_c1,re_c2dag,im_c2dag");
        assert_eq!(lines.count(), traj.len());
    }
}
