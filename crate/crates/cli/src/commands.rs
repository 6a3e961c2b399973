// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use optomech::config::{Config, PhysicalConfig, Resolved};
use optomech::params::single_photon_coupling;
use optomech::response::{
    divergence_ratio, effective_linewidth, fluctuation_amplitudes, is_stable, transparency_ratio,
};
use optomech::sweep::{run_sweep, Axis, Preset, Quantity, SweepSpec};
use optomech::timedomain::{eigenvalues, integrate, IntegrationConfig};
use optomech::verify::{verify_grid, Outcome, VerifyGrid};
use optomech::{Error, Execution, ReducedParams};

use crate::Common;

pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_VERIFY: u8 = 2;
pub const EXIT_NO_CONVERGENCE: u8 = 3;

pub fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::NoConvergence { .. } | Error::AmbiguousBranch { .. }) => EXIT_NO_CONVERGENCE,
        _ => EXIT_CONFIG,
    }
}

fn load(common: &Common) -> Result<Config> {
    match &common.config {
        Some(path) => Ok(Config::load(path)?),
        None => Ok(Config::Physical(PhysicalConfig::paper_device())),
    }
}

fn resolve(common: &Common) -> Result<Resolved> {
    Ok(load(common)?.resolve(common.ignore_backaction)?)
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_ratios(base: &ReducedParams, list: &[String]) -> Result<Vec<f64>> {
    if list.is_empty() {
        return Ok(vec![base.n]);
    }
    list.iter()
        .map(|s| match s.trim() {
            "nstar" => Ok(transparency_ratio(base)?),
            "ndiv" => Ok(divergence_ratio(base)?),
            other => other
                .parse::<f64>()
                .with_context(|| format!("bad n value `{other}`")),
        })
        .collect()
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))
}

pub fn steady(common: &Common) -> Result<ExitCode> {
    let Config::Physical(cfg) = load(common)? else {
        bail!("`steady` needs a physical-mode config");
    };
    let resolved = Config::Physical(cfg).resolve(common.ignore_backaction)?;
    let (p, s) = resolved.physical.expect("physical mode");
    let r = resolved.reduced;
    println!("b_s          = {} {:+.16e}i", num(s.b.re), s.b.im);
    println!("|c_1s|       = {}", num(s.c1.norm()));
    println!("|c_2s|       = {}", num(s.c2.norm()));
    println!("Delta_1      = {} rad/s", num(s.delta_1));
    println!("Delta_2      = {} rad/s", num(s.delta_2));
    println!("backaction   = {}", if s.backaction { "self-consistent" } else { "ignored" });
    println!("residual     = {:.3e} ({} iterations)", s.residual, s.iterations);
    println!("g0           = {} rad/s", num(single_photon_coupling(&p)));
    println!("G            = {} rad/s ({} Hz)", num(r.coupling), num(r.coupling / (2.0 * PI)));
    println!("n            = {}", num(r.n));
    println!("Q            = {}", num(p.quality_factor()));
    match (transparency_ratio(&r), divergence_ratio(&r)) {
        (Ok(ns), Ok(nd)) => {
            println!("n_transparent = {}", num(ns));
            println!("n_divergent   = {}", num(nd));
        }
        _ => println!("n_transparent, n_divergent undefined (G = 0)"),
    }
    Ok(ExitCode::SUCCESS)
}

pub fn response(common: &Common, xs: &[f64], ns: &[String]) -> Result<ExitCode> {
    let base = resolve(common)?.reduced;
    let ns = parse_ratios(&base, ns)?;
    println!(
        "{:>24} {:>24} {:>24} {:>24} {:>24} {:>24} {:>24} {:>24} {:>7}",
        "x/kappa", "n", "Re_epsT", "Im_epsT", "abs2_kappa_b", "abs2_outL", "abs2_outR", "outL-outR", "stable"
    );
    for &n in &ns {
        let r = base.with_n(n);
        let stable = is_stable(&r).stable;
        for &x in xs {
            match fluctuation_amplitudes(&r, x * r.kappa) {
                Ok(a) => println!(
                    "{:>24} {:>24} {:>24} {:>24} {:>24} {:>24} {:>24} {:>24} {:>7}",
                    num(x),
                    num(n),
                    num(a.eps_t.re),
                    num(a.eps_t.im),
                    num(a.abs2_b(r.kappa)),
                    num(a.abs2_out_l()),
                    num(a.abs2_out_r()),
                    num(a.abs2_out_l() - a.abs2_out_r()),
                    stable
                ),
                Err(e @ Error::NearSingular { .. }) => {
                    println!("{:>24} {:>24} singular: {e}", num(x), num(n))
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

pub fn figure(common: &Common, name: &str, points: Option<usize>) -> Result<ExitCode> {
    let presets: Vec<Preset> = if name == "all" {
        Preset::ALL.to_vec()
    } else {
        vec![name.parse()?]
    };
    ensure_dir(&common.out)?;
    for preset in presets {
        let mut spec = preset.spec();
        if let Some(k) = points {
            spec.points = k;
        }
        let path = common.out.join(preset.file_name());
        run_sweep(&spec)?.write_csv_file(&path)?;
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
pub fn sweep(
    common: &Common,
    axis: &str,
    start: f64,
    stop: f64,
    points: usize,
    overlays: &[f64],
    quantities: &[String],
    name: &str,
) -> Result<ExitCode> {
    let base = resolve(common)?.reduced;
    let axis: Axis = axis.parse()?;
    let overlays = if !overlays.is_empty() {
        overlays.to_vec()
    } else {
        match axis {
            Axis::XOverKappa => vec![base.n],
            Axis::N => vec![0.0],
        }
    };
    let spec = SweepSpec {
        base,
        axis,
        start,
        stop,
        points,
        overlays,
        quantities: quantities
            .iter()
            .map(|q| q.parse::<Quantity>())
            .collect::<optomech::Result<_>>()?,
    };
    ensure_dir(&common.out)?;
    let path = common.out.join(format!("{name}.csv"));
    run_sweep(&spec)?.write_csv_file(&path)?;
    println!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

pub fn verify(common: &Common, grid: Option<&str>, dump: bool) -> Result<ExitCode> {
    let base = resolve(common)?.reduced;
    let grid: VerifyGrid = match grid {
        Some(g) => g.parse()?,
        None => VerifyGrid::default(),
    };
    let report = verify_grid(&base, &grid, Execution::Parallel, fluctuation_amplitudes);
    if dump {
        ensure_dir(&common.out)?;
        for p in &report.points {
            if let Outcome::Checked(_) = p.outcome {
                let r = base.with_n(p.n);
                let x = p.x_over_kappa * r.kappa;
                let traj = integrate(&r, x, &IntegrationConfig::for_point(&r, x))?;
                let path = common
                    .out
                    .join(format!("trajectory_n={}_x={}.csv", p.n, p.x_over_kappa));
                traj.write_csv(std::io::BufWriter::new(std::fs::File::create(&path)?))?;
            }
        }
    }
    println!("{report}");
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFY)
    })
}

pub fn stability(common: &Common, ns: &[String]) -> Result<ExitCode> {
    let base = resolve(common)?.reduced;
    println!("kappa   = {} rad/s", num(base.kappa));
    println!("gamma_m = {} rad/s", num(base.gamma_m));
    println!("G       = {} rad/s", num(base.coupling));
    if let (Ok(ns), Ok(nd)) = (transparency_ratio(&base), divergence_ratio(&base)) {
        println!("n_transparent = {}", num(ns));
        println!("n_divergent   = {}", num(nd));
    }
    for n in parse_ratios(&base, ns)? {
        let r = base.with_n(n);
        let s = is_stable(&r);
        let ev = eigenvalues(&r);
        println!(
            "n = {}  stable = {}  margin = {} rad/s  gamma_eff = {} rad/s",
            num(n),
            s.stable,
            num(s.margin),
            num(effective_linewidth(&r))
        );
        for (i, l) in ev.iter().enumerate() {
            println!("  lambda_{i} = {} {:+.16e}i", num(l.re), l.im);
        }
    }
    Ok(ExitCode::SUCCESS)
}
