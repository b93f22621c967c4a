//! `casimir`: spectra, energies, constants, force and cross-representation
//! checks for two plasma half-spaces.
//!
//! Exit codes: 0 success, 1 validation failure, 2 usage error, 3
//! computational failure.

mod commands;
mod error;
mod grid;
mod output;

use std::io;
use std::process::ExitCode;

use casimir_core::analysis::ValidationThresholds;
use casimir_core::QuadratureSpec;
use clap::{Args, Parser, Subcommand};

use commands::{Context, Pol, Repr};
use error::CliError;
use grid::{positive, Grid};
use output::OutputFormat;

#[derive(Parser, Debug)]
#[command(name = "casimir", version, about = "Casimir energy between two plasma half-spaces")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Plasma frequency: a value or an inclusive grid lo:hi:n; numbers may end in `pi`.
    #[arg(long, global = true, value_name = "GRID")]
    omega_p: Option<Grid>,
    /// Gap width.
    #[arg(long, global = true, default_value = "1", value_parser = positive)]
    length: f64,
    /// Output format [default: json for validate, csv otherwise].
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// Relative quadrature tolerance.
    #[arg(long, global = true, value_parser = positive)]
    tol: Option<f64>,
    /// Rotation angle of the tilted real-axis contour, in [0, π/4).
    #[arg(long, global = true)]
    tilt_alpha: Option<f64>,
    /// Worker threads for grids; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Discrete mode frequencies on a k_par grid.
    Spectrum {
        #[arg(long, default_value = "20", value_parser = positive)]
        kpar_max: f64,
        #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u32).range(1..))]
        points: u32,
    },
    /// Energy per unit area in either representation.
    Energy {
        #[arg(long, value_enum, default_value_t = Repr::Both)]
        repr: Repr,
        #[arg(long, value_enum, default_value_t = Pol::Total)]
        pol: Pol,
    },
    /// The universal constants c2, c, c_s and c_a.
    Constants,
    /// Cross-check the two representations over a grid.
    Validate {
        #[arg(long, value_parser = positive)]
        te_tol: Option<f64>,
        #[arg(long, value_parser = positive)]
        tm_tol: Option<f64>,
        #[arg(long, value_parser = positive)]
        sum_tol: Option<f64>,
    },
    /// Force per unit area, -dE/dL.
    Force,
}

const DEFAULT_VALIDATION_GRID: &str = "0.6pi:3.4pi:8";

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let c = cli.common;
    let mut spec = QuadratureSpec::default();
    if let Some(t) = c.tol {
        spec.rel_tol = t;
    }
    if let Some(a) = c.tilt_alpha {
        spec.tilt_alpha = a;
    }
    spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let default_format = match cli.command {
        Command::Validate { .. } => OutputFormat::Json,
        _ => OutputFormat::Csv,
    };
    let ctx = Context {
        length: c.length,
        spec,
        format: c.format.unwrap_or(default_format),
        jobs: c.jobs,
    };
    let required = || c.omega_p.clone().ok_or_else(|| CliError::Usage("--omega-p is required".into()));
    let out = io::stdout().lock();
    match cli.command {
        Command::Spectrum { kpar_max, points } => commands::spectrum(&ctx, &required()?, kpar_max, points as usize, out),
        Command::Energy { repr, pol } => commands::energy(&ctx, &required()?, repr, pol, out),
        Command::Force => commands::force(&ctx, &required()?, out),
        Command::Constants => commands::constants(&ctx, c.tol.is_some(), out),
        Command::Validate { te_tol, tm_tol, sum_tol } => {
            let d = ValidationThresholds::default();
            let thresholds = ValidationThresholds {
                te_tol: te_tol.unwrap_or(d.te_tol),
                tm_tol: tm_tol.unwrap_or(d.tm_tol),
                sum_rule_tol: sum_tol.unwrap_or(d.sum_rule_tol),
            };
            let grid = match &c.omega_p {
                Some(g) => g.clone(),
                None => DEFAULT_VALIDATION_GRID.parse().map_err(CliError::Usage)?,
            };
            commands::validate(&ctx, &grid, thresholds, out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("casimir: error: {e}");
            e.exit_code()
        }
    }
}
