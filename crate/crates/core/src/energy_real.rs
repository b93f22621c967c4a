//! Vacuum energy in the real-frequency representation: waveguide mode sums,
//! the photonic continuum on a tilted contour, and the surface plasmons.
//!
//! The TM energy is assembled from the TE parts plus the differences
//! `ΔE_wg`, `ΔE_cont` and the surface term.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis;
use crate::config::{dimensionless_lambda, EnergyBreakdown, HalfspaceConfig, Polarization, QuadratureSpec};
use crate::energy_imag::{e_te_imag_reduced, e_tm_imag_reduced, with_magnitude};
use crate::error::{Error, Result};
use crate::modes::{antisymmetric_frequency, omega_single, surface_roots, te_roots, tm_roots};
use crate::optics::{ln_t1, ln_t1_difference, RealAxisPoint};
use crate::quadrature::{
    try_integrate_adaptive, try_integrate_algebraic_tail, try_integrate_ray, Estimate,
};

/// Beyond this value of `ηL` the gap no longer affects surface modes in
/// double precision.
const DECOUPLED_ETA_L: f64 = 80.0;

/// Real-frequency parts at one configuration, each with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealAxisEnergyParts {
    pub e_te_wg: f64,
    pub e_te_cont: f64,
    pub e_sf: f64,
    pub delta_e_wg: f64,
    pub delta_e_cont: f64,
    pub quadrature_errors: PartErrors,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PartErrors {
    pub e_te_wg: f64,
    pub e_te_cont: f64,
    pub e_sf: f64,
    pub delta_e_wg: f64,
    pub delta_e_cont: f64,
}

impl RealAxisEnergyParts {
    /// `e_sf + ΔE_wg + ΔE_cont`, to be compared with `E_TM - E_TE` on the
    /// imaginary axis.
    pub fn tm_minus_te(&self) -> f64 {
        self.e_sf + self.delta_e_wg + self.delta_e_cont
    }
}

fn zero() -> Estimate<f64> {
    Estimate {
        value: 0.0,
        error: 0.0,
        evaluations: 0,
        warning: None,
    }
}

/// Smallest non-zero `ω_p L` the real-axis parts accept. Below it the mode
/// and continuum pieces cancel to roundoff; use the imaginary axis there.
pub const MIN_REAL_AXIS_LAMBDA: f64 = 1e-4;

fn reduced_cfg(lambda: f64) -> Result<HalfspaceConfig> {
    if lambda > 0.0 && lambda < MIN_REAL_AXIS_LAMBDA {
        return Err(Error::Domain("real-axis parts need omega_p L >= 1e-4"));
    }
    HalfspaceConfig::from_lambda(lambda)
}

/// Waveguide part of the TE energy at unit gap width: the renormalized sum
/// `-(1/12π) Σ q_j³ + λ³/(9π²) + λ⁴/(48π²)`.
pub(crate) fn e_te_wg_reduced(lambda: f64) -> Result<f64> {
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let cfg = reduced_cfg(lambda)?;
    let cubes: f64 = te_roots(&cfg)?.iter().map(|r| r.q.powi(3)).sum();
    Ok(-cubes / (12.0 * PI) + lambda.powi(3) / (9.0 * PI * PI) + lambda.powi(4) / (48.0 * PI * PI))
}

pub fn e_te_wg(cfg: &HalfspaceConfig) -> Result<f64> {
    Ok(e_te_wg_reduced(dimensionless_lambda(cfg))? * cfg.energy_scale())
}

/// `Im ln T1(0)` for TE, where `r = -1` and `ln T1 = -ln(1 - e^{2iλ})`.
/// Evaluated in closed form because `λ ∈ πℤ` puts a pole at `k = 0`; the
/// branch follows the sign of `sin λ`, i.e. the side the root count sees.
fn te_threshold_phase(lambda: f64) -> f64 {
    let shifted = if lambda.sin() >= 0.0 { lambda - FRAC_PI_2 } else { lambda + FRAC_PI_2 };
    -(shifted - TAU * (shifted / TAU).round())
}

/// Photonic TE part at unit gap width. After integrating by parts,
/// `(1/12π²) [λ³ Im ln T1(0) + Im ∫₀^∞ dk 3k√(λ² + k²) ln T1(k)]`, with the
/// `k` integral taken along the tilted ray.
pub(crate) fn e_te_cont_reduced(lambda: f64, spec: &QuadratureSpec) -> Result<Estimate<f64>> {
    if lambda == 0.0 {
        return Ok(zero());
    }
    let cfg = reduced_cfg(lambda)?;
    let boundary = te_threshold_phase(lambda) * lambda.powi(3);
    let spec = with_magnitude(spec, lambda.powi(3));
    let ray = try_integrate_ray(
        |k| {
            let q = RealAxisPoint::new(0.0, k).q(&cfg);
            Ok(3.0 * k * q * ln_t1(Polarization::TE, &cfg, &RealAxisPoint::new(0.0, k))?)
        },
        1.0,
        &spec,
    )?;
    let scale = 1.0 / (12.0 * PI * PI);
    Ok(Estimate {
        value: (boundary + ray.value.im) * scale,
        error: ray.error * scale,
        ..zero()
    })
}

pub fn e_te_cont(cfg: &HalfspaceConfig, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    Ok(e_te_cont_reduced(dimensionless_lambda(cfg), spec)?.value * cfg.energy_scale())
}

/// `∫₀^∞ f(k) dk` for the mode integrands: adaptive pieces between the
/// given breakpoints and a mapped algebraic tail beyond the last one.
fn integrate_k_par<F>(mut f: F, breaks: &[f64], spec: &QuadratureSpec) -> Result<Estimate<f64>>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|x| *x > 0.0).collect();
    pts.insert(0, 0.0);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut total = zero();
    for w in pts.windows(2) {
        let est = try_integrate_adaptive(&mut f, w[0], w[1], spec)?;
        total.value += est.value;
        total.error += est.error;
        total.evaluations += est.evaluations;
    }
    let last = *pts.last().unwrap_or(&0.0);
    let tail = try_integrate_algebraic_tail(&mut f, last, last.max(1.0), spec)?;
    total.value += tail.value;
    total.error += tail.error;
    total.evaluations += tail.evaluations;
    Ok(total)
}

/// Subtracted surface-mode energy at unit gap width,
/// `(1/4π) ∫ dk k [(ω_s - ω_single) + (ω_a - ω_single)]`.
pub(crate) fn e_sf_reduced(lambda: f64, spec: &QuadratureSpec) -> Result<Estimate<f64>> {
    if lambda == 0.0 {
        return Ok(zero());
    }
    let cfg = reduced_cfg(lambda)?;
    let kt = cfg.antisymmetric_threshold();
    // Past this momentum both modes equal the single-interface one.
    let k_max = (DECOUPLED_ETA_L * DECOUPLED_ETA_L + 0.5 * lambda * lambda).sqrt();
    let integrand = |k: f64| -> Result<f64> {
        if k >= k_max || k == 0.0 {
            return Ok(0.0);
        }
        let ws = omega_single(lambda, k);
        let omega_s = surface_roots(&cfg, k)?.omega_s;
        let omega_a = antisymmetric_frequency(&cfg, k)?;
        Ok(k * ((omega_s - ws) + (omega_a - ws)))
    };
    let spec = with_magnitude(spec, lambda.min(1.0));
    let mut pts = vec![kt, lambda, 4.0 * lambda.max(1.0)];
    pts.retain(|x| *x < k_max);
    pts.push(k_max);
    let est = integrate_k_par(|k| integrand(k).map_err(|e| e.at_k_par(k)), &pts, &spec)?;
    Ok(est.map(|v| v / (4.0 * PI)))
}

pub fn e_sf(cfg: &HalfspaceConfig, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    Ok(e_sf_reduced(dimensionless_lambda(cfg), spec)?.value * cfg.energy_scale())
}

/// Constant term `(-c/(2π²) + (1 - 12 ln 2)/(96√2 π)) ω_p³` of `ΔE_wg`.
fn delta_wg_constant(lambda: f64, c: f64) -> f64 {
    (-c / (2.0 * PI * PI) + (1.0 - 12.0 * std::f64::consts::LN_2) / (96.0 * SQRT_2 * PI)) * lambda.powi(3)
}

/// `Σ_{j≥1} (ω_j^TM - ω_j^TE)` at one parallel momentum.
fn paired_frequency_difference(cfg: &HalfspaceConfig, te_q: &[f64], k: f64) -> Result<f64> {
    let tm: Vec<f64> = tm_roots(cfg, k)?
        .iter()
        .filter(|r| r.index > 0)
        .map(|r| r.q)
        .collect();
    if tm.len() != te_q.len() {
        return Err(Error::RootConvergence(format!(
            "{} TM waveguide roots cannot be paired with {} TE roots",
            tm.len(),
            te_q.len()
        )));
    }
    Ok(tm
        .iter()
        .zip(te_q)
        .map(|(&qm, &qe)| {
            // Pairs merge like 1/k²; a split at roundoff level is noise that
            // the k weight would otherwise integrate to infinity.
            if (qm - qe).abs() <= 8.0 * f64::EPSILON * qm {
                return 0.0;
            }
            let wm = qm.hypot(k);
            let we = qe.hypot(k);
            (qm - qe) * (qm + qe) / (wm + we)
        })
        .sum())
}

pub(crate) fn delta_e_wg_reduced(lambda: f64, spec: &QuadratureSpec) -> Result<Estimate<f64>> {
    if lambda == 0.0 {
        return Ok(zero());
    }
    let cfg = reduced_cfg(lambda)?;
    let te_q: Vec<f64> = te_roots(&cfg)?.iter().map(|r| r.q).collect();
    let kt = cfg.antisymmetric_threshold();
    let spec = with_magnitude(spec, lambda.min(1.0).powi(3));
    // With no TE modes there is nothing to pair; skip the all-zero integral.
    let est = if te_q.is_empty() {
        zero()
    } else {
        integrate_k_par(
            |k| Ok(k * paired_frequency_difference(&cfg, &te_q, k).map_err(|e| e.at_k_par(k))?),
            &[kt, lambda, 4.0 * lambda.max(1.0)],
            &spec,
        )?
    };
    let c = analysis::cached_constants()?;
    let constant = delta_wg_constant(lambda, c.c);
    Ok(Estimate {
        value: est.value / (4.0 * PI) + constant,
        error: est.error / (4.0 * PI) + c.errors.c / (2.0 * PI * PI) * lambda.powi(3),
        ..est
    })
}

/// TM minus TE waveguide energy, with index-0 TM mode assigned to the
/// surface channel.
pub fn delta_e_wg(cfg: &HalfspaceConfig, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    Ok(delta_e_wg_reduced(dimensionless_lambda(cfg), spec)?.value * cfg.energy_scale())
}

/// Inner integral `Im ∫₀^∞ dk -(k/W) [ln T1^TM - ln T1^TE]` along the ray,
/// `W = √(λ² + k_∥² + k²)`.
fn delta_cont_inner(cfg: &HalfspaceConfig, k_par: f64, spec: &QuadratureSpec) -> Result<Estimate<f64>> {
    let est = try_integrate_ray(
        |k: Complex64| {
            let p = RealAxisPoint::new(k_par, k);
            let w = p.omega(cfg);
            Ok(-(k / w) * ln_t1_difference(cfg, &p)?)
        },
        1.0,
        spec,
    )?;
    Ok(est.map(|v| v.im))
}

pub(crate) fn delta_e_cont_reduced(lambda: f64, spec: &QuadratureSpec) -> Result<Estimate<f64>> {
    if lambda == 0.0 {
        return Ok(zero());
    }
    let cfg = reduced_cfg(lambda)?;
    let outer_spec = with_magnitude(spec, lambda.min(1.0).powi(3));
    let inner_spec = outer_spec.inner();
    let est = integrate_k_par(
        |k_par| {
            let inner = delta_cont_inner(&cfg, k_par, &inner_spec).map_err(|e| e.at_k_par(k_par))?;
            Ok(k_par * inner.value)
        },
        &[lambda, 4.0 * lambda.max(1.0)],
        &outer_spec,
    )?;
    let scale = 1.0 / (4.0 * PI * PI);
    Ok(Estimate {
        value: est.value * scale,
        error: (est.error + inner_spec.rel_tol * est.value.abs()) * scale,
        ..est
    })
}

pub fn delta_e_cont(cfg: &HalfspaceConfig, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    Ok(delta_e_cont_reduced(dimensionless_lambda(cfg), spec)?.value * cfg.energy_scale())
}

/// All real-frequency parts at unit gap width, computed concurrently.
pub(crate) fn real_axis_parts_reduced(lambda: f64, spec: &QuadratureSpec) -> Result<RealAxisEnergyParts> {
    // Fill the constants cache once before spawning.
    analysis::cached_constants()?;
    let (wg, cont, sf, dwg, dcont) = std::thread::scope(|s| {
        let cont = s.spawn(|| e_te_cont_reduced(lambda, spec));
        let sf = s.spawn(|| e_sf_reduced(lambda, spec));
        let dwg = s.spawn(|| delta_e_wg_reduced(lambda, spec));
        let dcont = s.spawn(|| delta_e_cont_reduced(lambda, spec));
        let wg = e_te_wg_reduced(lambda);
        let join = |h: std::thread::ScopedJoinHandle<'_, Result<Estimate<f64>>>| {
            h.join().unwrap_or(Err(Error::Domain("worker thread panicked")))
        };
        (wg, join(cont), join(sf), join(dwg), join(dcont))
    });
    let wg = wg.map_err(|e| e.in_part("e_te_wg"))?;
    let cont = cont.map_err(|e| e.in_part("e_te_cont"))?;
    let sf = sf.map_err(|e| e.in_part("e_sf"))?;
    let dwg = dwg.map_err(|e| e.in_part("delta_e_wg"))?;
    let dcont = dcont.map_err(|e| e.in_part("delta_e_cont"))?;
    Ok(RealAxisEnergyParts {
        e_te_wg: wg,
        e_te_cont: cont.value,
        e_sf: sf.value,
        delta_e_wg: dwg.value,
        delta_e_cont: dcont.value,
        quadrature_errors: PartErrors {
            e_te_wg: 1e-14 * wg.abs(),
            e_te_cont: cont.error,
            e_sf: sf.error,
            delta_e_wg: dwg.error,
            delta_e_cont: dcont.error,
        },
    })
}

/// Real-frequency parts, scaled to the configured gap width.
pub fn real_axis_parts(cfg: &HalfspaceConfig, spec: &QuadratureSpec) -> Result<RealAxisEnergyParts> {
    spec.validate()?;
    let p = real_axis_parts_reduced(dimensionless_lambda(cfg), spec)?;
    let s = cfg.energy_scale();
    let e = p.quadrature_errors;
    Ok(RealAxisEnergyParts {
        e_te_wg: p.e_te_wg * s,
        e_te_cont: p.e_te_cont * s,
        e_sf: p.e_sf * s,
        delta_e_wg: p.delta_e_wg * s,
        delta_e_cont: p.delta_e_cont * s,
        quadrature_errors: PartErrors {
            e_te_wg: e.e_te_wg * s,
            e_te_cont: e.e_te_cont * s,
            e_sf: e.e_sf * s,
            delta_e_wg: e.delta_e_wg * s,
            delta_e_cont: e.delta_e_cont * s,
        },
    })
}

/// Both polarizations in both representations.
pub fn assemble_breakdown(cfg: &HalfspaceConfig, spec: &QuadratureSpec) -> Result<(EnergyBreakdown, EnergyBreakdown)> {
    spec.validate()?;
    let lambda = dimensionless_lambda(cfg);
    let (te_imag, tm_imag) = std::thread::scope(|s| {
        let tm = s.spawn(|| e_tm_imag_reduced(lambda, spec));
        let te = e_te_imag_reduced(lambda, spec);
        (te, tm.join().unwrap_or(Err(Error::Domain("worker thread panicked"))))
    });
    let te_imag = te_imag.map_err(|e| e.in_part("e_te_imag"))?;
    let tm_imag = tm_imag.map_err(|e| e.in_part("e_tm_imag"))?;
    let p = real_axis_parts_reduced(lambda, spec)?;
    let e = p.quadrature_errors;
    let te = EnergyBreakdown::new(
        Polarization::TE,
        te_imag.value,
        p.e_te_wg,
        p.e_te_cont,
        0.0,
        te_imag.error + e.e_te_wg + e.e_te_cont,
    );
    let tm = EnergyBreakdown::new(
        Polarization::TM,
        tm_imag.value,
        p.e_te_wg + p.delta_e_wg,
        p.e_te_cont + p.delta_e_cont,
        p.e_sf,
        tm_imag.error + e.e_te_wg + e.e_te_cont + e.e_sf + e.delta_e_wg + e.delta_e_cont,
    );
    let s = cfg.energy_scale();
    Ok((te.scaled(s), tm.scaled(s)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn te_wg_reference() {
        assert_relative_eq!(e_te_wg_reduced(2.7 * PI).unwrap(), 3.546086664, max_relative = 1e-9);
        assert_eq!(e_te_wg_reduced(0.0).unwrap(), 0.0);
    }

    #[test]
    fn te_cont_reference() {
        let v = e_te_cont_reduced(2.7 * PI, &spec()).unwrap().value;
        assert_relative_eq!(v, -3.549732748, max_relative = 1e-9);
    }

    #[test]
    fn threshold_phase_matches_direct_evaluation() {
        for lambda in [0.3, 1.0, 2.0, 4.0, 7.5, 10.0, 20.0] {
            let cfg = reduced_cfg(lambda).unwrap();
            let direct = ln_t1(Polarization::TE, &cfg, &RealAxisPoint::real(0.0, 0.0)).unwrap().im;
            assert_relative_eq!(te_threshold_phase(lambda), direct, max_relative = 1e-12);
        }
    }

    #[test]
    fn te_identity_at_multiple_of_pi() {
        let lambda = 3.0 * PI;
        let imag = crate::energy_imag::e_te_imag_reduced(lambda, &spec()).unwrap().value;
        let real = e_te_wg_reduced(lambda).unwrap() + e_te_cont_reduced(lambda, &spec()).unwrap().value;
        assert_relative_eq!(real, imag, max_relative = 1e-5);
    }

    #[test]
    fn te_cont_tilt_invariance() {
        let a = e_te_cont_reduced(1.0, &spec().with_tilt(0.1)).unwrap().value;
        let b = e_te_cont_reduced(1.0, &spec().with_tilt(0.2)).unwrap().value;
        assert_relative_eq!(a, b, max_relative = 1e-6);
    }

    #[test]
    fn te_identity_holds() {
        for x in [0.6, 1.8, 3.4] {
            let lambda = x * PI;
            let imag = e_te_imag_reduced(lambda, &spec()).unwrap().value;
            let real = e_te_wg_reduced(lambda).unwrap() + e_te_cont_reduced(lambda, &spec()).unwrap().value;
            assert_relative_eq!(real, imag, max_relative = 1e-5);
        }
    }

    #[test]
    fn te_wg_jumps_at_multiples_of_pi() {
        let below = e_te_wg_reduced(PI * (1.0 - 1e-6)).unwrap();
        let above = e_te_wg_reduced(PI * (1.0 + 1e-6)).unwrap();
        assert!((above - below).abs() > 0.01);
        let mid_a = e_te_wg_reduced(1.5 * PI * (1.0 - 1e-6)).unwrap();
        let mid_b = e_te_wg_reduced(1.5 * PI * (1.0 + 1e-6)).unwrap();
        assert!((mid_a - mid_b).abs() < 1e-4);
    }

    #[test]
    fn surface_energy_is_finite() {
        let a = e_sf_reduced(1.0, &spec()).unwrap();
        assert!(a.value.is_finite());
        assert_eq!(e_sf_reduced(0.0, &spec()).unwrap().value, 0.0);
    }

    #[test]
    fn delta_cont_tilt_invariance() {
        let a = delta_e_cont_reduced(1.0, &spec().with_tilt(0.1)).unwrap().value;
        let b = delta_e_cont_reduced(1.0, &spec().with_tilt(0.2)).unwrap().value;
        assert_relative_eq!(a, b, max_relative = 1e-5);
    }

    #[test]
    fn tm_difference_identity_at_fig_point() {
        let lambda = 2.7 * PI;
        let parts = real_axis_parts_reduced(lambda, &spec()).unwrap();
        let d_imag = e_tm_imag_reduced(lambda, &spec()).unwrap().value - e_te_imag_reduced(lambda, &spec()).unwrap().value;
        assert_relative_eq!(parts.tm_minus_te(), d_imag, max_relative = 1e-4);
    }

    #[test]
    fn vacuum_breakdown_is_zero() {
        let cfg = HalfspaceConfig::new(0.0, 1.0).unwrap();
        let (te, tm) = assemble_breakdown(&cfg, &spec()).unwrap();
        for b in [te, tm] {
            assert_eq!(b.e_imag, 0.0);
            assert_eq!(b.e_wg, 0.0);
            assert_eq!(b.e_cont, 0.0);
            assert_eq!(b.e_sf, 0.0);
        }
    }

    #[test]
    fn thin_gaps_stay_consistent() {
        for lambda in [MIN_REAL_AXIS_LAMBDA, 0.01] {
            let cfg = HalfspaceConfig::from_lambda(lambda).unwrap();
            let (te, tm) = assemble_breakdown(&cfg, &spec()).unwrap();
            assert!(te.relative_residual() < 1e-5, "{te:?}");
            assert!(tm.relative_residual() < 1e-4, "{tm:?}");
        }
        assert!(matches!(e_te_wg_reduced(1e-5), Err(Error::Domain(_))));
        assert!(matches!(e_sf_reduced(1e-30, &spec()), Err(Error::Domain(_))));
    }
}
