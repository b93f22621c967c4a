//! Universal constants, the TE sum rule and the end-to-end validation of the
//! two energy representations.

use std::f64::consts::{LN_2, PI, SQRT_2};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::config::{dimensionless_lambda, EnergyBreakdown, HalfspaceConfig, Polarization, QuadratureSpec};
use crate::energy_imag::{e_te_imag_reduced, e_tm_imag_reduced};
use crate::energy_real::{real_axis_parts_reduced, RealAxisEnergyParts};
use crate::error::{Error, Result};
use crate::modes::{strip_pole_count, te_roots};
use crate::optics::{ln_t1, RealAxisPoint};
use crate::quadrature::{
    try_integrate_adaptive, try_integrate_algebraic_tail, try_integrate_ray, try_integrate_semi_infinite, Estimate,
};

/// Distance of `λ/π` from an integer below which a point is treated as an
/// edge-mode degeneracy.
pub const EDGE_MODE_MARGIN: f64 = 1e-3;

const PV_MIN_DISTANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantErrors {
    pub c2: f64,
    pub c: f64,
    pub c_s: f64,
    pub c_a: f64,
}

/// The universal numbers of the small-separation and subtraction terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub c2: f64,
    pub c: f64,
    pub c_s: f64,
    pub c_a: f64,
    pub errors: ConstantErrors,
}

/// `c₂ = (1/4π²) ∫ dk k ∫ dξ -ln(1 - e^{-2k}/(1 + 2ξ²)²)`.
pub fn c2_constant(spec: &QuadratureSpec) -> Result<Estimate<f64>> {
    spec.validate()?;
    let inner_spec = spec.inner();
    let est = try_integrate_semi_infinite(
        |k: f64| {
            let a = (-2.0 * k).exp();
            let inner = try_integrate_algebraic_tail(
                |x: f64| {
                    let d = 1.0 + 2.0 * x * x;
                    Ok(-(-a / (d * d)).ln_1p())
                },
                0.0,
                1.0,
                &inner_spec,
            )?;
            Ok(k * inner.value)
        },
        0.0,
        0.5,
        spec,
    )?;
    let s = 1.0 / (4.0 * PI * PI);
    Ok(Estimate {
        value: est.value * s,
        error: (est.error + inner_spec.rel_tol * est.value.abs()) * s,
        ..est
    })
}

/// Subtracted integrand `g_B - g₃` of the constant `c` at plasma frequency
/// `ω_p`, with `g_B = 2 ln(1 + ω_p⁴/(2(κ+η)(ξ²κ + (ξ²+ω_p²)η)))` and its
/// large-momentum asymptote `g₃ = ω_p⁴/(2(ω_p² + 2ξ²)(ω_p² + k²))`.
fn subtracted_g(wp: f64, k: f64, xi: f64) -> f64 {
    let wp2 = wp * wp;
    let xi2 = xi * xi;
    let eta = k.hypot(xi);
    let kappa = (xi2 + wp2 + k * k).sqrt();
    let gb = 2.0 * (wp2 * wp2 / (2.0 * (kappa + eta) * (xi2 * kappa + (xi2 + wp2) * eta))).ln_1p();
    let g3 = wp2 * wp2 / (2.0 * (wp2 + 2.0 * xi2) * (wp2 + k * k));
    gb - g3
}

/// `-(1/2) ∫ dk k ∫ dξ (g_B - g₃)`, which scales as `ω_p³`.
pub(crate) fn subtracted_double_integral(wp: f64, spec: &QuadratureSpec) -> Result<Estimate<f64>> {
    let inner_spec = spec.inner();
    let est = try_integrate_algebraic_tail(
        |k: f64| {
            let inner = try_integrate_algebraic_tail(|x| Ok(subtracted_g(wp, k, x)), 0.0, wp, &inner_spec)?;
            Ok(k * inner.value)
        },
        0.0,
        wp,
        spec,
    )?;
    Ok(Estimate {
        value: -0.5 * est.value,
        error: 0.5 * (est.error + inner_spec.rel_tol * est.value.abs()),
        ..est
    })
}

/// Dimensionless constant `c` of the TM waveguide renormalization.
pub fn constant_c(spec: &QuadratureSpec) -> Result<Estimate<f64>> {
    spec.validate()?;
    subtracted_double_integral(1.0, spec)
}

/// `(1/√(2 + d) - 1/√2)` without cancellation for small `d`.
fn bracket(d: f64) -> f64 {
    let s = (2.0 + d).sqrt();
    -d / (s * SQRT_2 * (SQRT_2 + s))
}

/// Small-separation surface-plasmon coefficients from quadrature:
/// `c_s = (1/4π) ∫ dk k (1/√(1 + coth(k/2)) - 1/√2)` and `c_a` with `tanh`.
pub fn plasmon_small_l_coeffs(spec: &QuadratureSpec) -> Result<(Estimate<f64>, Estimate<f64>)> {
    spec.validate()?;
    let s = 1.0 / (4.0 * PI);
    // coth(k/2) = 1 + 2/(e^k - 1), tanh(k/2) = 1 - 2/(e^k + 1)
    let cs = try_integrate_semi_infinite(|k: f64| Ok(k * bracket(2.0 / k.exp_m1())), 0.0, 1.0, spec)?;
    let ca = try_integrate_semi_infinite(|k: f64| Ok(k * bracket(-2.0 / (k.exp() + 1.0))), 0.0, 1.0, spec)?;
    Ok((cs.map(|v| v * s), ca.map(|v| v * s)))
}

fn dilog_small(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut p = x;
    for n in 1..200 {
        let term = p / (n * n) as f64;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        p *= x;
    }
    sum
}

/// Closed forms of the two surface-plasmon coefficients.
pub fn plasmon_small_l_closed_forms() -> (f64, f64) {
    let c_s = (PI * PI - 24.0 * (1.0 + (-1.0 + 0.5 * LN_2) * LN_2)) / (24.0 * SQRT_2 * PI);
    let as1 = 1f64.asinh();
    let c_a = (2.0 * (SQRT_2 - 1.0) + (2.0 - LN_2) * LN_2 + as1 * (2.0 * (LN_2 - 1.0) - as1)
        - dilog_small(3.0 - 2.0 * SQRT_2))
        / (2.0 * SQRT_2 * PI);
    (c_s, c_a)
}

pub fn constants_report(spec: &QuadratureSpec) -> Result<ConstantsReport> {
    let c2 = c2_constant(spec)?;
    let c = constant_c(spec)?;
    let (cs, ca) = plasmon_small_l_coeffs(spec)?;
    Ok(ConstantsReport {
        c2: c2.value,
        c: c.value,
        c_s: cs.value,
        c_a: ca.value,
        errors: ConstantErrors {
            c2: c2.error,
            c: c.error,
            c_s: cs.error,
            c_a: ca.error,
        },
    })
}

/// Constants at tight tolerance, computed once per process.
pub fn cached_constants() -> Result<ConstantsReport> {
    static CACHE: OnceLock<Result<ConstantsReport>> = OnceLock::new();
    CACHE
        .get_or_init(|| {
            let spec = QuadratureSpec {
                rel_tol: 1e-12,
                abs_tol: 1e-16,
                ..QuadratureSpec::default()
            };
            constants_report(&spec)
        })
        .clone()
}

/// Phase `φ(ω) = 2 asin(ω/ω_p) + ωL` of the evanescent TE strip.
fn evanescent_phase(wp: f64, l: f64, omega: f64) -> f64 {
    2.0 * (omega / wp).min(1.0).asin() + omega * l
}

/// `(1/12π²) [ω_p³ φ(ω_p) - 3 ∫₀^{ω_p} dω ω² φ(ω)]`, evaluated with
/// `ω = ω_p sin θ`.
pub fn evanescent_phase_integral(cfg: &HalfspaceConfig, spec: &QuadratureSpec) -> Result<Estimate<f64>> {
    spec.validate()?;
    let wp = cfg.omega_p();
    let l = cfg.gap_l();
    if wp == 0.0 {
        return Ok(Estimate { value: 0.0, error: 0.0, evaluations: 0, warning: None });
    }
    let est = try_integrate_adaptive(
        |t: f64| {
            let w = wp * t.sin();
            Ok(w * w * evanescent_phase(wp, l, w) * wp * t.cos())
        },
        0.0,
        0.5 * PI,
        spec,
    )?;
    let s = 1.0 / (12.0 * PI * PI);
    Ok(Estimate {
        value: (wp.powi(3) * (PI + wp * l) - 3.0 * est.value) * s,
        error: 3.0 * est.error * s,
        ..est
    })
}

pub fn evanescent_phase_closed_form(cfg: &HalfspaceConfig) -> f64 {
    let wp = cfg.omega_p();
    wp.powi(3) / (9.0 * PI * PI) + wp.powi(4) * cfg.gap_l() / (48.0 * PI * PI)
}

/// `∫ (u + a)² ln|u| du` antiderivative.
fn log_weight_antiderivative(u: f64, a: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    let lu = u.abs().ln();
    u.powi(3) * (lu / 3.0 - 1.0 / 9.0) + 2.0 * a * u * u * (lu / 2.0 - 0.25) + a * a * u * (lu - 1.0)
}

/// Normalized residual of the TE sum rule `∫₀^∞ dω ω³ d/dω Re ln T1 = 0`,
/// evaluated in its integrated-by-parts form as the evanescent piece
/// `ω_p³R(ω_p) - 3∫₀^{ω_p} ω²R` plus the photonic piece
/// `-ω_p³R(ω_p) - 3∫_{ω_p}^∞ ω²R`, divided by the sum of their magnitudes.
///
/// In the evanescent strip `R = -ln|2 sin φ|` diverges logarithmically at
/// the waveguide frequencies. Those singularities are subtracted and
/// integrated in closed form.
pub fn te_sum_rule(cfg: &HalfspaceConfig, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    let lambda = dimensionless_lambda(cfg);
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let c = HalfspaceConfig::from_lambda(lambda)?;
    let poles: Vec<f64> = te_roots(&c)?.iter().map(|r| r.q).collect();
    let r_edge = -(2.0 * lambda.sin()).abs().ln();

    let regular = |w: f64| -> Result<f64> {
        for &p in &poles {
            if (w - p).abs() < PV_MIN_DISTANCE {
                return Err(Error::PoleProximity {
                    pole: p,
                    distance: (w - p).abs(),
                });
            }
        }
        let r = -(2.0 * evanescent_phase(lambda, 1.0, w).sin()).abs().ln();
        let singular: f64 = poles.iter().map(|p| (w - p).abs().ln()).sum();
        Ok(w * w * (r + singular))
    };
    let mut pts = vec![0.0];
    pts.extend(poles.iter().copied());
    pts.push(lambda);
    let mut strip = 0.0;
    for w in pts.windows(2) {
        strip += try_integrate_adaptive(regular, w[0], w[1], spec)?.value;
    }
    for &p in &poles {
        strip -= log_weight_antiderivative(lambda - p, p) - log_weight_antiderivative(-p, p);
    }
    let p1 = lambda.powi(3) * r_edge - 3.0 * strip;

    let photonic = try_integrate_ray(
        |k| {
            let pt = RealAxisPoint::new(0.0, k);
            Ok(pt.q(&c) * k * ln_t1(Polarization::TE, &c, &pt)?)
        },
        1.0,
        spec,
    )?;
    let p2 = -lambda.powi(3) * r_edge - 3.0 * photonic.value.re;
    Ok((p1 + p2) / (p1.abs() + p2.abs()))
}

/// Acceptance thresholds for [`validate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationThresholds {
    pub te_tol: f64,
    pub tm_tol: f64,
    pub sum_rule_tol: f64,
}

impl Default for ValidationThresholds {
    fn default() -> Self {
        Self {
            te_tol: 1e-5,
            tm_tol: 1e-4,
            sum_rule_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationStatus {
    Pass,
    Fail,
    /// `λ/π` is too close to an integer: a waveguide mode sits at the
    /// continuum edge. Not counted as pass or fail.
    EdgeModeIllConditioned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub omega_p: f64,
    pub gap_l: f64,
    pub lambda: f64,
    pub status: ValidationStatus,
    pub te: Option<EnergyBreakdown>,
    pub tm: Option<EnergyBreakdown>,
    pub parts: Option<RealAxisEnergyParts>,
    /// `|E_wg + E_cont - E_imag| / |E_imag|` for TE.
    pub te_residual: Option<f64>,
    /// `|e_sf + ΔE_wg + ΔE_cont - ΔE_imag| / |ΔE_imag|`.
    pub tm_residual: Option<f64>,
    pub sum_rule_residual: Option<f64>,
    /// Whether the argument-principle zero count in the strip `0 < ω < k_∥`
    /// matched the solver at all probed momenta.
    pub strip_modes_consistent: Option<bool>,
    pub thresholds: ValidationThresholds,
}

/// Compares both representations at one configuration.
pub fn validate(cfg: &HalfspaceConfig, spec: &QuadratureSpec, thresholds: &ValidationThresholds) -> Result<ValidationReport> {
    spec.validate()?;
    let lambda = dimensionless_lambda(cfg);
    let mut report = ValidationReport {
        omega_p: cfg.omega_p(),
        gap_l: cfg.gap_l(),
        lambda,
        status: ValidationStatus::EdgeModeIllConditioned,
        te: None,
        tm: None,
        parts: None,
        te_residual: None,
        tm_residual: None,
        sum_rule_residual: None,
        strip_modes_consistent: None,
        thresholds: *thresholds,
    };
    if lambda > 0.0 && cfg.distance_to_edge_mode() < EDGE_MODE_MARGIN {
        return Ok(report);
    }

    let (te_imag, tm_imag) = std::thread::scope(|s| {
        let tm = s.spawn(|| e_tm_imag_reduced(lambda, spec));
        let te = e_te_imag_reduced(lambda, spec);
        (te, tm.join().unwrap_or(Err(Error::Domain("worker thread panicked"))))
    });
    let te_imag = te_imag.map_err(|e| e.in_part("e_te_imag"))?;
    let tm_imag = tm_imag.map_err(|e| e.in_part("e_tm_imag"))?;
    let parts = real_axis_parts_reduced(lambda, spec)?;
    let sum_rule = te_sum_rule(cfg, spec).map_err(|e| e.in_part("te_sum_rule"))?;

    let te = EnergyBreakdown::new(Polarization::TE, te_imag.value, parts.e_te_wg, parts.e_te_cont, 0.0, te_imag.error);
    let tm = EnergyBreakdown::new(
        Polarization::TM,
        tm_imag.value,
        parts.e_te_wg + parts.delta_e_wg,
        parts.e_te_cont + parts.delta_e_cont,
        parts.e_sf,
        tm_imag.error,
    );
    let d_imag = tm_imag.value - te_imag.value;
    let relative = |num: f64, den: f64| if den == 0.0 { num.abs() } else { (num / den).abs() };
    let te_res = relative(te.residual, te.e_imag);
    let tm_res = relative(parts.tm_minus_te() - d_imag, d_imag);

    let strip_ok = if lambda > 0.0 {
        let kt = HalfspaceConfig::from_lambda(lambda)?.antisymmetric_threshold();
        let mut ok = true;
        for k in [0.5 * kt, 2.0 * kt, 2.0 * lambda.max(1.0)] {
            ok &= strip_pole_count(&HalfspaceConfig::from_lambda(lambda)?, k)?.consistent();
        }
        Some(ok)
    } else {
        None
    };

    let pass = te_res < thresholds.te_tol && tm_res < thresholds.tm_tol && sum_rule.abs() < thresholds.sum_rule_tol;
    let s = cfg.energy_scale();
    report.status = if pass { ValidationStatus::Pass } else { ValidationStatus::Fail };
    report.te = Some(te.scaled(s));
    report.tm = Some(tm.scaled(s));
    report.parts = Some(RealAxisEnergyParts {
        e_te_wg: parts.e_te_wg * s,
        e_te_cont: parts.e_te_cont * s,
        e_sf: parts.e_sf * s,
        delta_e_wg: parts.delta_e_wg * s,
        delta_e_cont: parts.delta_e_cont * s,
        ..parts
    });
    report.te_residual = Some(te_res);
    report.tm_residual = Some(tm_res);
    report.sum_rule_residual = Some(sum_rule);
    report.strip_modes_consistent = strip_ok;
    Ok(report)
}
