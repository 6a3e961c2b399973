// SPDX-License-Identifier: Apache-2.0

//! Grid harness comparing the closed-form response with the time-domain
//! oracle.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::params::ReducedParams;
use crate::response::{is_stable, ResponseAmplitudes};
use crate::timedomain::simulate_response;

/// Largest accepted relative deviation between oracle and closed form.
pub const TOLERANCE: f64 = 1e-6;
/// Points with stability margin at or below this fraction of κ are skipped.
pub const MARGIN_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyGrid {
    pub ns: Vec<f64>,
    pub x_over_kappa: Vec<f64>,
}

impl Default for VerifyGrid {
    fn default() -> Self {
        Self {
            ns: vec![0.0, 0.3, 0.7, 0.9],
            x_over_kappa: vec![-0.5, -0.1, 0.0, 0.1, 0.5],
        }
    }
}

impl FromStr for VerifyGrid {
    type Err = Error;

    /// `n=0,0.3,0.7;x=-0.5,0,0.5`. Either part may be omitted to keep the
    /// default list.
    fn from_str(s: &str) -> Result<Self> {
        let mut grid = VerifyGrid::default();
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, list) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("grid part `{part}` is not key=values")))?;
            let values = list
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad grid value `{v}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            match key.trim() {
                "n" => grid.ns = values,
                "x" | "x_over_kappa" => grid.x_over_kappa = values,
                other => return Err(Error::Config(format!("unknown grid key `{other}`"))),
            }
        }
        if grid.ns.is_empty() || grid.x_over_kappa.is_empty() {
            return Err(Error::Config("grid must have at least one n and one x".into()));
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviations {
    pub b_plus: f64,
    pub eps_t: f64,
    pub out_r_minus: f64,
}

impl Deviations {
    pub fn max(&self) -> f64 {
        self.b_plus.max(self.eps_t).max(self.out_r_minus)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Checked(Deviations),
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointReport {
    pub n: f64,
    pub x_over_kappa: f64,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub points: Vec<PointReport>,
    pub tolerance: f64,
}

impl VerifyReport {
    pub fn max_deviation(&self) -> Option<Deviations> {
        let mut it = self.points.iter().filter_map(|p| match &p.outcome {
            Outcome::Checked(d) => Some(*d),
            Outcome::Skipped(_) => None,
        });
        let first = it.next()?;
        Some(it.fold(first, |acc, d| Deviations {
            b_plus: acc.b_plus.max(d.b_plus),
            eps_t: acc.eps_t.max(d.eps_t),
            out_r_minus: acc.out_r_minus.max(d.out_r_minus),
        }))
    }

    pub fn checked(&self) -> usize {
        self.points
            .iter()
            .filter(|p| matches!(p.outcome, Outcome::Checked(_)))
            .count()
    }

    /// Every checked point within tolerance. A grid with nothing checked
    /// passes vacuously.
    pub fn passed(&self) -> bool {
        match self.max_deviation() {
            Some(d) => d.max() < self.tolerance,
            None => true,
        }
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.points {
            write!(f, "n={:<8} x/kappa={:<8} ", p.n, p.x_over_kappa)?;
            match &p.outcome {
                Outcome::Checked(d) => writeln!(
                    f,
                    "b+ {:.3e}  epsT {:.3e}  outR- {:.3e}",
                    d.b_plus, d.eps_t, d.out_r_minus
                )?,
                Outcome::Skipped(why) => writeln!(f, "skipped: {why}")?,
            }
        }
        match self.max_deviation() {
            Some(d) => writeln!(
                f,
                "max relative deviation: b+ {:.3e}  epsT {:.3e}  outR- {:.3e}  (tolerance {:e})",
                d.b_plus, d.eps_t, d.out_r_minus, self.tolerance
            )?,
            None => writeln!(f, "no stable points checked")?,
        }
        write!(f, "{}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

fn relative(sim: Complex64, exact: Complex64) -> f64 {
    let diff = (sim - exact).norm();
    if diff == 0.0 {
        0.0
    } else {
        diff / exact.norm()
    }
}

/// Closed-form evaluator under test.
pub type ClosedForm = fn(&ReducedParams, f64) -> Result<ResponseAmplitudes>;

/// Compare `closed_form` against the time-domain oracle at every grid point.
pub fn verify_grid(base: &ReducedParams, grid: &VerifyGrid, exec: Execution, closed_form: ClosedForm) -> VerifyReport {
    let tasks: Vec<(f64, f64)> = grid
        .ns
        .iter()
        .flat_map(|&n| grid.x_over_kappa.iter().map(move |&x| (n, x)))
        .collect();
    let points = exec.map(&tasks, |&(n, x_rel)| {
        let r = base.with_n(n);
        let x = x_rel * r.kappa;
        let stability = is_stable(&r);
        let outcome = if !stability.stable {
            Outcome::Skipped("unstable".into())
        } else if stability.margin <= MARGIN_FLOOR * r.kappa {
            Outcome::Skipped(format!("too close to threshold (margin {:.3e} rad/s)", stability.margin))
        } else {
            match (simulate_response(&r, x), closed_form(&r, x)) {
                (Ok(sim), Ok(exact)) => Outcome::Checked(Deviations {
                    b_plus: relative(sim.b_plus, exact.b_plus),
                    eps_t: relative(sim.eps_t, exact.eps_t),
                    out_r_minus: relative(sim.out_r_minus, exact.out_r_minus),
                }),
                (Err(e), _) | (_, Err(e)) => Outcome::Skipped(e.to_string()),
            }
        };
        PointReport {
            n,
            x_over_kappa: x_rel,
            outcome,
        }
    });
    VerifyReport {
        points,
        tolerance: TOLERANCE,
    }
}
