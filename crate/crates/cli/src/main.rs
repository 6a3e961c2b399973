// SPDX-License-Identifier: Apache-2.0

//! `optomech` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 verification failure,
//! 3 steady-state non-convergence.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "optomech", version, about = "Linearized double-cavity optomechanics")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON parameter file; the built-in device (1 mW red drive) when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for CSV files.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Pin Δ_1 = Δ_c and Δ_2 = Δ_d in the steady state.
    #[arg(long, global = true)]
    pub ignore_backaction: bool,
    /// Increase log verbosity (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the mean-field steady state of a physical-mode config.
    Steady,
    /// Tabulate the probe response at the given x/κ and n values.
    Response {
        /// Probe offsets in units of κ, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
        x: Vec<f64>,
        /// Amplitude ratios, comma separated; `nstar` and `ndiv` are accepted.
        /// Defaults to the config's own n.
        #[arg(long, value_delimiter = ',')]
        n: Vec<String>,
    },
    /// Write the CSV data behind a figure preset (or `all`).
    Figure {
        name: String,
        /// Grid points per axis.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Run a custom sweep around the config's parameters.
    Sweep {
        /// `x_over_kappa` or `n`.
        #[arg(long, default_value = "x_over_kappa")]
        axis: String,
        #[arg(long, allow_hyphen_values = true, default_value_t = -1.0)]
        start: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
        stop: f64,
        #[arg(long, default_value_t = optomech::sweep::DEFAULT_POINTS)]
        points: usize,
        /// n values for an x sweep, x/κ values for an n sweep; defaults to the
        /// config's n (x sweep) or 0 (n sweep).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        overlays: Vec<f64>,
        /// Subset of re_epsT, im_epsT, abs2_b, abs2_outL, abs2_outR.
        #[arg(long, value_delimiter = ',', default_value = "re_epsT,im_epsT,abs2_b,abs2_outL,abs2_outR")]
        quantities: Vec<String>,
        /// Output file stem.
        #[arg(long, default_value = "sweep")]
        name: String,
    },
    /// Compare the closed forms with the time-domain integration on a grid.
    Verify {
        /// Grid as `n=0,0.3,0.7,0.9;x=-0.5,-0.1,0,0.1,0.5` (x in units of κ).
        #[arg(long)]
        grid: Option<String>,
        /// Also dump each integrated trajectory as CSV into --out.
        #[arg(long)]
        dump: bool,
    },
    /// Report stability thresholds and drift-matrix eigenvalues.
    Stability {
        #[arg(long, value_delimiter = ',')]
        n: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.common.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match cli.command {
        Command::Steady => commands::steady(&cli.common),
        Command::Response { x, n } => commands::response(&cli.common, &x, &n),
        Command::Figure { name, points } => commands::figure(&cli.common, &name, points),
        Command::Sweep {
            axis,
            start,
            stop,
            points,
            overlays,
            quantities,
            name,
        } => commands::sweep(&cli.common, &axis, start, stop, points, &overlays, &quantities, &name),
        Command::Verify { grid, dump } => commands::verify(&cli.common, grid.as_deref(), dump),
        Command::Stability { n } => commands::stability(&cli.common, &n),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
