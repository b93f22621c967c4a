use std::io::Write;
use std::process::ExitCode;

use casimir_core::analysis::{self, ValidationStatus, ValidationThresholds};
use casimir_core::energy_imag;
use casimir_core::energy_real;
use casimir_core::modes::modes_at;
use casimir_core::{EnergyBreakdown, HalfspaceConfig, Polarization, QuadratureSpec};
use clap::ValueEnum;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliError;
use crate::grid::Grid;
use crate::output::{emit, num, opt, OutputFormat, Table};

/// Settings shared by every subcommand, already validated.
pub struct Context {
    pub length: f64,
    pub spec: QuadratureSpec,
    pub format: OutputFormat,
    pub jobs: usize,
}

impl Context {
    fn cfg(&self, omega_p: f64) -> Result<HalfspaceConfig, CliError> {
        HalfspaceConfig::new(omega_p, self.length).map_err(|e| CliError::Usage(e.to_string()))
    }

    fn configs(&self, omega_p: &Grid) -> Result<Vec<HalfspaceConfig>, CliError> {
        omega_p.values().into_iter().map(|w| self.cfg(w)).collect()
    }

    /// Evaluates `f` over `items` on up to `jobs` threads. Results come back
    /// in input order, and the first failure in that order is reported.
    fn map_grid<I, T, F>(&self, items: &[I], f: F) -> Result<Vec<T>, CliError>
    where
        I: Sync,
        T: Send,
        F: Fn(&I) -> Result<T, CliError> + Sync,
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {} worker threads: {e}", self.jobs)))?;
        let results: Vec<Result<T, CliError>> = pool.install(|| items.par_iter().map(&f).collect());
        results.into_iter().collect()
    }
}

#[derive(Serialize)]
pub struct SpectrumRow {
    kind: &'static str,
    j: usize,
    k_par: f64,
    omega: f64,
    q_or_eta: f64,
    kappa: f64,
}

impl Table for SpectrumRow {
    const HEADER: &'static [&'static str] = &["kind", "j", "k_par", "omega", "q_or_eta", "kappa"];

    fn cells(&self) -> Vec<String> {
        vec![
            self.kind.to_string(),
            self.j.to_string(),
            num(self.k_par),
            num(self.omega),
            num(self.q_or_eta),
            num(self.kappa),
        ]
    }
}

pub fn spectrum(ctx: &Context, omega_p: &Grid, kpar_max: f64, points: usize, out: impl Write) -> Result<ExitCode, CliError> {
    if !omega_p.is_scalar() {
        return Err(CliError::Usage("spectrum takes a single --omega-p value".into()));
    }
    let cfg = ctx.cfg(omega_p.lo)?;
    let grid: Vec<f64> = (1..=points).map(|i| kpar_max * i as f64 / points as f64).collect();
    let per_k = ctx.map_grid(&grid, |&k| modes_at(&cfg, k).map_err(CliError::compute(format!("k_par = {k:?}"))))?;
    let rows: Vec<SpectrumRow> = per_k
        .into_iter()
        .flatten()
        .map(|m| SpectrumRow {
            kind: m.kind.label(),
            j: m.index_j,
            k_par: m.k_par,
            omega: m.omega,
            q_or_eta: m.q_or_eta,
            kappa: m.kappa,
        })
        .collect();
    emit(&rows, ctx.format, out)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Repr {
    Imag,
    Real,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Pol {
    Te,
    Tm,
    Total,
}

#[derive(Serialize)]
pub struct EnergyRow {
    omega_p: f64,
    #[serde(rename = "L")]
    length: f64,
    e_imag: Option<f64>,
    e_wg: Option<f64>,
    e_cont: Option<f64>,
    e_sf: Option<f64>,
    residual: Option<f64>,
}

impl Table for EnergyRow {
    const HEADER: &'static [&'static str] = &["omega_p", "L", "e_imag", "e_wg", "e_cont", "e_sf", "residual"];

    fn cells(&self) -> Vec<String> {
        vec![
            num(self.omega_p),
            num(self.length),
            opt(self.e_imag),
            opt(self.e_wg),
            opt(self.e_cont),
            opt(self.e_sf),
            opt(self.residual),
        ]
    }
}

fn sum_breakdowns(te: &EnergyBreakdown, tm: &EnergyBreakdown) -> EnergyBreakdown {
    EnergyBreakdown::new(
        Polarization::TM,
        te.e_imag + tm.e_imag,
        te.e_wg + tm.e_wg,
        te.e_cont + tm.e_cont,
        tm.e_sf,
        te.error + tm.error,
    )
}

fn energy_row(cfg: &HalfspaceConfig, spec: &QuadratureSpec, repr: Repr, pol: Pol) -> Result<EnergyRow, CliError> {
    let ctx = format!("omega_p = {:?}", cfg.omega_p());
    let fail = |part: &str| CliError::compute(format!("{ctx}, {part}"));
    let mut row = EnergyRow {
        omega_p: cfg.omega_p(),
        length: cfg.gap_l(),
        e_imag: None,
        e_wg: None,
        e_cont: None,
        e_sf: None,
        residual: None,
    };
    let imag = |p: Polarization| match p {
        Polarization::TE => energy_imag::e_te_imag(cfg, spec).map_err(fail("e_te_imag")),
        Polarization::TM => energy_imag::e_tm_imag(cfg, spec).map_err(fail("e_tm_imag")),
    };
    match repr {
        Repr::Imag => {
            row.e_imag = Some(match pol {
                Pol::Te => imag(Polarization::TE)?,
                Pol::Tm => imag(Polarization::TM)?,
                Pol::Total => imag(Polarization::TE)? + imag(Polarization::TM)?,
            });
        }
        Repr::Real if pol == Pol::Te => {
            row.e_wg = Some(energy_real::e_te_wg(cfg).map_err(fail("e_te_wg"))?);
            row.e_cont = Some(energy_real::e_te_cont(cfg, spec).map_err(fail("e_te_cont"))?);
        }
        Repr::Real => {
            let p = energy_real::real_axis_parts(cfg, spec).map_err(fail("real-axis parts"))?;
            let (wg, cont) = match pol {
                Pol::Tm => (p.e_te_wg + p.delta_e_wg, p.e_te_cont + p.delta_e_cont),
                _ => (2.0 * p.e_te_wg + p.delta_e_wg, 2.0 * p.e_te_cont + p.delta_e_cont),
            };
            row.e_wg = Some(wg);
            row.e_cont = Some(cont);
            row.e_sf = Some(p.e_sf);
        }
        Repr::Both => {
            let (te, tm) = energy_real::assemble_breakdown(cfg, spec).map_err(fail("breakdown"))?;
            let b = match pol {
                Pol::Te => te,
                Pol::Tm => tm,
                Pol::Total => sum_breakdowns(&te, &tm),
            };
            row.e_imag = Some(b.e_imag);
            row.e_wg = Some(b.e_wg);
            row.e_cont = Some(b.e_cont);
            row.e_sf = (pol != Pol::Te).then_some(b.e_sf);
            row.residual = Some(b.residual);
        }
    }
    Ok(row)
}

pub fn energy(ctx: &Context, omega_p: &Grid, repr: Repr, pol: Pol, out: impl Write) -> Result<ExitCode, CliError> {
    let cfgs = ctx.configs(omega_p)?;
    let rows = ctx.map_grid(&cfgs, |cfg| energy_row(cfg, &ctx.spec, repr, pol))?;
    emit(&rows, ctx.format, out)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
pub struct ForceRow {
    omega_p: f64,
    #[serde(rename = "L")]
    length: f64,
    force: f64,
}

impl Table for ForceRow {
    const HEADER: &'static [&'static str] = &["omega_p", "L", "force"];

    fn cells(&self) -> Vec<String> {
        vec![num(self.omega_p), num(self.length), num(self.force)]
    }
}

pub fn force(ctx: &Context, omega_p: &Grid, out: impl Write) -> Result<ExitCode, CliError> {
    let cfgs = ctx.configs(omega_p)?;
    let rows = ctx.map_grid(&cfgs, |cfg| {
        let w = cfg.omega_p();
        let force = energy_imag::force(cfg, &ctx.spec).map_err(CliError::compute(format!("omega_p = {w:?}")))?;
        Ok(ForceRow {
            omega_p: w,
            length: cfg.gap_l(),
            force,
        })
    })?;
    emit(&rows, ctx.format, out)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
pub struct ConstantRow {
    name: &'static str,
    value: f64,
    error: f64,
}

impl Table for ConstantRow {
    const HEADER: &'static [&'static str] = &["name", "value", "error"];

    fn cells(&self) -> Vec<String> {
        vec![self.name.to_string(), num(self.value), num(self.error)]
    }
}

pub fn constants(ctx: &Context, custom_tol: bool, out: impl Write) -> Result<ExitCode, CliError> {
    let report = if custom_tol {
        analysis::constants_report(&ctx.spec)
    } else {
        analysis::cached_constants()
    }
    .map_err(CliError::compute("constants"))?;
    let e = &report.errors;
    let rows = [
        ConstantRow { name: "c2", value: report.c2, error: e.c2 },
        ConstantRow { name: "c", value: report.c, error: e.c },
        ConstantRow { name: "c_s", value: report.c_s, error: e.c_s },
        ConstantRow { name: "c_a", value: report.c_a, error: e.c_a },
    ];
    emit(&rows, ctx.format, out)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
pub struct ValidationRow {
    omega_p: f64,
    #[serde(rename = "L")]
    length: f64,
    lambda: f64,
    status: ValidationStatus,
    te_residual: Option<f64>,
    tm_residual: Option<f64>,
    sum_rule_residual: Option<f64>,
    strip_modes_consistent: Option<bool>,
}

impl Table for ValidationRow {
    const HEADER: &'static [&'static str] = &[
        "omega_p",
        "L",
        "lambda",
        "status",
        "te_residual",
        "tm_residual",
        "sum_rule_residual",
        "strip_modes_consistent",
    ];

    fn cells(&self) -> Vec<String> {
        let status = match self.status {
            ValidationStatus::Pass => "pass",
            ValidationStatus::Fail => "fail",
            ValidationStatus::EdgeModeIllConditioned => "edge_mode_ill_conditioned",
        };
        vec![
            num(self.omega_p),
            num(self.length),
            num(self.lambda),
            status.to_string(),
            opt(self.te_residual),
            opt(self.tm_residual),
            opt(self.sum_rule_residual),
            self.strip_modes_consistent.map(|b| b.to_string()).unwrap_or_default(),
        ]
    }
}

pub fn validate(ctx: &Context, omega_p: &Grid, thresholds: ValidationThresholds, out: impl Write) -> Result<ExitCode, CliError> {
    let cfgs = ctx.configs(omega_p)?;
    let rows = ctx.map_grid(&cfgs, |cfg| {
        let r = analysis::validate(cfg, &ctx.spec, &thresholds)
            .map_err(CliError::compute(format!("omega_p = {:?}", cfg.omega_p())))?;
        Ok(ValidationRow {
            omega_p: r.omega_p,
            length: r.gap_l,
            lambda: r.lambda,
            status: r.status,
            te_residual: r.te_residual,
            tm_residual: r.tm_residual,
            sum_rule_residual: r.sum_rule_residual,
            strip_modes_consistent: r.strip_modes_consistent,
        })
    })?;
    emit(&rows, ctx.format, out)?;
    for r in rows.iter().filter(|r| r.status == ValidationStatus::EdgeModeIllConditioned) {
        eprintln!("casimir: omega_p = {:?} is at a mode edge; excluded from pass/fail", r.omega_p);
    }
    if rows.iter().any(|r| r.status == ValidationStatus::Fail) {
        Ok(ExitCode::from(1))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}
