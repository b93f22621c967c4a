//! Vacuum energy and force on the imaginary frequency axis.
//!
//! All integrals are done at unit gap width with `ω_p = λ` and rescaled.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analysis;
use crate::config::{dimensionless_lambda, HalfspaceConfig, Polarization, QuadratureSpec};
use crate::error::Result;
use crate::optics::{ln_t1_imag, ImagAxisPoint};
use crate::quadrature::{try_integrate_semi_infinite, Estimate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AsymptoticRegime {
    LargeSeparation,
    SmallSeparation,
}

/// Absolute tolerance adapted to the expected size of the result, so that
/// tiny energies at small `λ` are still resolved to `rel_tol`.
pub(crate) fn with_magnitude(spec: &QuadratureSpec, magnitude: f64) -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: spec.abs_tol * magnitude.min(1.0),
        ..*spec
    }
}

fn te_integral<F>(lambda: f64, spec: &QuadratureSpec, weight: F) -> Result<Estimate<f64>>
where
    F: Fn(f64, f64) -> f64,
{
    let cfg = HalfspaceConfig::from_lambda(lambda)?;
    let spec = with_magnitude(spec, lambda.powi(3));
    try_integrate_semi_infinite(
        |x| {
            let z_ln = ln_t1_imag(Polarization::TE, &cfg, &ImagAxisPoint::new(0.0, x))?;
            Ok(weight(x, z_ln))
        },
        0.0,
        lambda.min(1.0),
        &spec,
    )
}

/// TE energy `-(1/4π²) ∫₀^∞ dξ ξ² ln T1(iξ)` with its error estimate, at
/// unit gap width.
pub(crate) fn e_te_imag_reduced(lambda: f64, spec: &QuadratureSpec) -> Result<Estimate<f64>> {
    if lambda == 0.0 {
        return Ok(Estimate { value: 0.0, error: 0.0, evaluations: 0, warning: None });
    }
    let est = te_integral(lambda, spec, |x, ln_t| x * x * ln_t)?;
    Ok(est.map(|v| -v / (4.0 * PI * PI)))
}

pub fn e_te_imag(cfg: &HalfspaceConfig, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    Ok(e_te_imag_reduced(dimensionless_lambda(cfg), spec)?.value * cfg.energy_scale())
}

/// `∫ dk k ∫ dξ g(k, ξ)` over the quarter plane, the inner integral in the
/// variable `ξ = λ sinh u`.
fn tm_double_integral<G>(lambda: f64, spec: &QuadratureSpec, magnitude: f64, g: G) -> Result<Estimate<f64>>
where
    G: Fn(&HalfspaceConfig, f64, f64) -> Result<f64>,
{
    let cfg = HalfspaceConfig::from_lambda(lambda)?;
    let outer_spec = with_magnitude(spec, magnitude);
    let inner_spec = outer_spec.inner();
    let outer = try_integrate_semi_infinite(
        |k: f64| {
            let inner = try_integrate_semi_infinite(
                |u: f64| {
                    let xi = lambda * u.sinh();
                    if xi > 1500.0 {
                        return Ok(0.0);
                    }
                    Ok(lambda * u.cosh() * g(&cfg, k, xi)?)
                },
                0.0,
                1.0,
                &inner_spec,
            )
            .map_err(|e| e.at_k_par(k))?;
            Ok(k * inner.value)
        },
        0.0,
        0.5,
        &outer_spec,
    )?;
    // Inner integrals carry a relative error of at most their tolerance.
    Ok(Estimate {
        error: outer.error + inner_spec.rel_tol * outer.value.abs(),
        ..outer
    })
}

pub(crate) fn e_tm_imag_reduced(lambda: f64, spec: &QuadratureSpec) -> Result<Estimate<f64>> {
    if lambda == 0.0 {
        return Ok(Estimate { value: 0.0, error: 0.0, evaluations: 0, warning: None });
    }
    let est = tm_double_integral(lambda, spec, lambda.min(1.0), |cfg, k, xi| {
        ln_t1_imag(Polarization::TM, cfg, &ImagAxisPoint::new(k, xi))
    })?;
    Ok(est.map(|v| -v / (4.0 * PI * PI)))
}

/// TM energy `-(1/4π²) ∫ dk_∥ k_∥ ∫ dξ ln T1^TM(iξ)`.
pub fn e_tm_imag(cfg: &HalfspaceConfig, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    Ok(e_tm_imag_reduced(dimensionless_lambda(cfg), spec)?.value * cfg.energy_scale())
}

/// `2η z/(1 - z)` with `z = r² e^{-2η}`, the `L`-derivative of `-ln T1`
/// up to sign, computed from `ln T1 = -ln(1 - z)`.
fn d_ln_t1_dl(ln_t: f64, eta: f64) -> f64 {
    // z/(1 - z) = e^{ln T1} - 1
    2.0 * eta * ln_t.exp_m1()
}

/// Force per unit area `F = -dE/dL` of both polarizations, from the
/// `L`-derivative taken under the integral sign.
pub fn force(cfg: &HalfspaceConfig, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    let lambda = dimensionless_lambda(cfg);
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let te = te_integral(lambda, spec, |x, ln_t| x * x * d_ln_t1_dl(ln_t, x))?;
    let tm = tm_double_integral(lambda, spec, lambda.min(1.0), |c, k, xi| {
        let ln_t = ln_t1_imag(Polarization::TM, c, &ImagAxisPoint::new(k, xi))?;
        Ok(d_ln_t1_dl(ln_t, xi.hypot(k)))
    })?;
    Ok(-(te.value + tm.value) / (4.0 * PI * PI) * cfg.force_scale())
}

/// Closed-form limits of the imaginary-axis energies.
pub fn asymptotic(pol: Polarization, regime: AsymptoticRegime, cfg: &HalfspaceConfig) -> Result<f64> {
    let l = cfg.gap_l();
    let wp = cfg.omega_p();
    Ok(match (pol, regime) {
        (_, AsymptoticRegime::LargeSeparation) => -PI * PI / (1440.0 * l.powi(3)),
        (Polarization::TE, AsymptoticRegime::SmallSeparation) => {
            -(3.0 * PI - 8.0) / (72.0 * PI * PI) * wp.powi(3)
        }
        (Polarization::TM, AsymptoticRegime::SmallSeparation) => {
            -analysis::cached_constants()?.c2 * wp / (l * l)
        }
    })
}
