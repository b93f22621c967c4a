//! Adaptive Gauss–Kronrod integration on finite intervals, semi-infinite
//! ranges and rays tilted into the complex plane.
//!
//! The panel rule is the 7-point Gauss / 15-point Kronrod pair with the
//! QUADPACK error heuristic. Values may be real or complex; everything is
//! generic over [`QuadValue`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::QuadratureSpec;
use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_PANELS: usize = 64;

/// Scalar types the integrator can accumulate.
pub trait QuadValue:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn norm(&self) -> f64;
    fn finite(&self) -> bool;
}

impl QuadValue for f64 {
    fn norm(&self) -> f64 {
        self.abs()
    }
    fn finite(&self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Complex64 {
    fn norm(&self) -> f64 {
        Complex64::norm(*self)
    }
    fn finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Attached when the requested tolerance could not be met because the
/// intervals became too small to split further.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyWarning {
    pub requested: f64,
    pub achieved: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
    pub warning: Option<AccuracyWarning>,
}

impl<T: QuadValue> Estimate<T> {
    fn zero() -> Self {
        Self {
            value: T::default(),
            error: 0.0,
            evaluations: 0,
            warning: None,
        }
    }

    fn absorb(&mut self, other: &Estimate<T>) {
        self.value = self.value + other.value;
        self.error += other.error;
        self.evaluations += other.evaluations;
        if self.warning.is_none() {
            self.warning = other.warning;
        }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Estimate<U> {
        Estimate {
            value: f(self.value),
            error: self.error,
            evaluations: self.evaluations,
            warning: self.warning,
        }
    }
}

/// One sample of an integrand, kept for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrandSample<X, T> {
    pub abscissa: X,
    pub value: T,
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<T, F>(f: &mut F, a: f64, b: f64) -> Result<Panel<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> Result<T>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut eval = |x: f64| -> Result<T> {
        let v = f(x)?;
        if v.finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite(x))
        }
    };

    let fc = eval(center)?;
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = fc.norm() * WGK[7];
    let mut fv1 = [T::default(); 7];
    let mut fv2 = [T::default(); 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k = res_k + (f1 + f2) * WGK[j];
        res_abs += WGK[j] * (f1.norm() + f2.norm());
        if j % 2 == 1 {
            res_g = res_g + (f1 + f2) * WG[j / 2];
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).norm();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).norm() + (fv2[j] - mean).norm());
    }
    let scale = half.abs();
    let value = res_k * half;
    res_abs *= scale;
    res_asc *= scale;

    let mut error = ((res_k - res_g) * half).norm();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Panel { a, b, value, error })
}

fn tolerance(spec: &QuadratureSpec, value: f64) -> f64 {
    spec.abs_tol.max(spec.rel_tol * value)
}

/// Adaptive integration of a fallible integrand over `[a, b]`.
pub fn try_integrate_adaptive<T, F>(
    mut f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> Result<T>,
{
    if a == b {
        return Ok(Estimate::zero());
    }
    if !(a < b) {
        return Err(Error::Domain("integration limits must satisfy a < b"));
    }
    let first = gauss_kronrod(&mut f, a, b)?;
    let mut evaluations = 15;
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut subdivisions = 1;
    let mut stuck_error = 0.0;
    let mut warning = None;

    while total_err > tolerance(spec, total.norm()) {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        let resolvable = mid > worst.a && mid < worst.b && (worst.b - worst.a) > 4.0 * f64::EPSILON * worst.a.abs().max(worst.b.abs());
        if !resolvable || subdivisions >= spec.max_subdivisions {
            if !resolvable {
                // Interval cannot be split further: park its error and continue.
                stuck_error += worst.error;
                total_err -= worst.error;
                warning = Some(AccuracyWarning {
                    requested: tolerance(spec, total.norm()),
                    achieved: total_err + stuck_error,
                });
                continue;
            }
            heap.push(worst);
            let requested = tolerance(spec, total.norm());
            return Err(Error::QuadratureNonConvergence {
                a,
                b,
                value: total.norm(),
                error: total_err + stuck_error,
                subdivisions,
            })
            .or_else(|e| {
                // Within two orders of magnitude, return the value with a warning.
                if total_err + stuck_error <= 100.0 * requested {
                    Ok(Estimate {
                        value: total,
                        error: total_err + stuck_error,
                        evaluations,
                        warning: Some(AccuracyWarning {
                            requested,
                            achieved: total_err + stuck_error,
                        }),
                    })
                } else {
                    Err(e)
                }
            });
        }
        let left = gauss_kronrod(&mut f, worst.a, mid)?;
        let right = gauss_kronrod(&mut f, mid, worst.b)?;
        evaluations += 30;
        subdivisions += 1;
        total = total - worst.value + left.value + right.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum to avoid drift from the running updates.
    let mut value = T::default();
    let mut error = stuck_error;
    for p in heap.iter() {
        value = value + p.value;
        error += p.error;
    }
    Ok(Estimate {
        value,
        error,
        evaluations,
        warning,
    })
}

/// Adaptive integration over `[a, b]`.
pub fn integrate_adaptive<T, F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    try_integrate_adaptive(|x| Ok(f(x)), a, b, spec)
}

/// Integral over `[a, ∞)` of an integrand that decays at least exponentially
/// beyond `scale`. Panels of doubling width are added until the integrand has
/// been negligible over `truncation_decades` decades.
pub fn try_integrate_semi_infinite<T, F>(
    mut f: F,
    a: f64,
    scale: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> Result<T>,
{
    if !(scale > 0.0) {
        return Err(Error::Domain("panel scale must be positive"));
    }
    let quiet_needed = 1 + (spec.truncation_decades.max(1) as f64 * std::f64::consts::LOG2_10).ceil() as usize;
    let mut total: Estimate<T> = Estimate::zero();
    let mut x0 = a;
    let mut width = scale;
    let mut quiet = 0;
    let mut last_panel = f64::INFINITY;
    for _ in 0..MAX_PANELS {
        let panel_tol = 0.25 * tolerance(spec, total.value.norm());
        let panel_spec = QuadratureSpec {
            abs_tol: panel_tol,
            ..*spec
        };
        let est = try_integrate_adaptive(&mut f, x0, x0 + width, &panel_spec)?;
        total.absorb(&est);
        last_panel = est.value.norm() + est.error;
        if last_panel <= 0.1 * tolerance(spec, total.value.norm()) {
            quiet += 1;
            if quiet >= quiet_needed {
                return Ok(total);
            }
        } else {
            quiet = 0;
        }
        x0 += width;
        width *= 2.0;
    }
    Err(Error::DecayFailure {
        reached: x0,
        last_panel,
    })
}

pub fn integrate_semi_infinite<T, F>(mut f: F, a: f64, scale: f64, spec: &QuadratureSpec) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    try_integrate_semi_infinite(|x| Ok(f(x)), a, scale, spec)
}

/// Integral over `[a, ∞)` for integrands with an algebraic tail (at least
/// `x⁻²`). The range is mapped onto `(0, 1]` via `x = a + s (1 - t) / t`.
pub fn try_integrate_algebraic_tail<T, F>(
    mut f: F,
    a: f64,
    scale: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> Result<T>,
{
    if !(scale > 0.0) {
        return Err(Error::Domain("tail scale must be positive"));
    }
    try_integrate_adaptive(
        |t: f64| {
            let x = a + scale * (1.0 - t) / t;
            Ok(f(x)? * (scale / (t * t)))
        },
        0.0,
        1.0,
        spec,
    )
}

/// Integral of `f(k)` along the ray `k = t e^{iα}`, `t ∈ [0, ∞)`, with
/// `α = spec.tilt_alpha`. For `f` analytic in the sector between the ray and
/// the positive real axis and decaying on arcs, this equals the integral
/// along the real axis.
pub fn try_integrate_ray<F>(mut f: F, scale: f64, spec: &QuadratureSpec) -> Result<Estimate<Complex64>>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let dir = Complex64::from_polar(1.0, spec.tilt_alpha);
    try_integrate_semi_infinite(|t| Ok(f(dir * t)? * dir), 0.0, scale, spec)
}

pub fn integrate_ray<F>(mut f: F, scale: f64, spec: &QuadratureSpec) -> Result<Estimate<Complex64>>
where
    F: FnMut(Complex64) -> Complex64,
{
    try_integrate_ray(|k| Ok(f(k)), scale, spec)
}

/// Real-valued integral `∫₀^∞ f(k) dk` evaluated along the tilted ray.
///
/// The target must be real. The imaginary part of the ray integral is a
/// consistency check; a residue above ten times the tolerance means the
/// sector between ray and real axis was not free of singularities.
pub fn integrate_tilted<F>(f: F, scale: f64, spec: &QuadratureSpec) -> Result<Estimate<f64>>
where
    F: FnMut(Complex64) -> Complex64,
{
    let est = integrate_ray(f, scale, spec)?;
    let allowed = 10.0 * (tolerance(spec, est.value.re.abs()) + est.error);
    if est.value.im.abs() > allowed {
        return Err(Error::TiltResidue {
            residue: est.value.im.abs(),
            allowed,
        });
    }
    Ok(est.map(|v| v.re))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn polynomial_is_exact() {
        let est = integrate_adaptive(|x: f64| x * x, 0.0, 1.0, &spec()).unwrap();
        assert!((est.value - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(est.evaluations, 15);
    }

    #[test]
    fn sine_over_half_period() {
        let est = integrate_adaptive(f64::sin, 0.0, PI, &spec()).unwrap();
        assert!((est.value - 2.0).abs() < 1e-13);
    }

    #[test]
    fn endpoint_log_singularity() {
        // ∫₀¹ ln x dx = -1
        let est = integrate_adaptive(|x: f64| x.ln(), 0.0, 1.0, &spec()).unwrap();
        assert!((est.value + 1.0).abs() < 1e-9, "{}", est.value);
    }

    #[test]
    fn exponential_tail() {
        let est = integrate_semi_infinite(|x: f64| (-x).exp(), 0.0, 1.0, &spec()).unwrap();
        assert!((est.value - 1.0).abs() < 1e-11);
        let est = integrate_semi_infinite(|x: f64| x.powi(3) * (-2.0 * x).exp(), 0.0, 1.0, &spec()).unwrap();
        assert!((est.value - 3.0 / 8.0).abs() < 1e-11);
    }

    #[test]
    fn algebraic_tail() {
        // ∫₀^∞ dx / (1 + x²) = π / 2
        let est = try_integrate_algebraic_tail(|x: f64| Ok(1.0 / (1.0 + x * x)), 0.0, 1.0, &spec()).unwrap();
        assert!((est.value - PI / 2.0).abs() < 1e-11);
    }

    #[test]
    fn growing_integrand_fails_to_decay() {
        let err = integrate_semi_infinite(|x: f64| x, 0.0, 1.0, &spec()).unwrap_err();
        assert!(matches!(err, Error::DecayFailure { .. }));
    }

    #[test]
    fn subdivision_limit_is_reported() {
        let mut s = spec();
        s.max_subdivisions = 2;
        s.rel_tol = 1e-14;
        let err = integrate_adaptive(|x: f64| (1.0 / x).sin(), 1e-3, 1.0, &s).unwrap_err();
        assert!(matches!(err, Error::QuadratureNonConvergence { .. }));
    }

    #[test]
    fn complex_values() {
        // ∫₀^π e^{ix} dx = 2i
        let est = integrate_adaptive(|x: f64| Complex64::new(0.0, x).exp(), 0.0, PI, &spec()).unwrap();
        assert!((est.value - Complex64::new(0.0, 2.0)).norm() < 1e-13);
    }

    #[test]
    fn tilt_matches_real_axis_for_damped_oscillation() {
        // ∫₀^∞ e^{ik} e^{-k} dk = 1 / (1 - i) computed along tilted rays.
        let exact = Complex64::new(1.0, 0.0) / Complex64::new(1.0, -1.0);
        for alpha in [0.0, 0.1, 0.3] {
            let s = spec().with_tilt(alpha);
            let est = integrate_ray(|k| (Complex64::i() * k - k).exp(), 1.0, &s).unwrap();
            assert!((est.value - exact).norm() < 1e-10, "alpha {alpha}: {}", est.value);
        }
    }

    #[test]
    fn tilted_real_target_agrees_with_semi_infinite() {
        let f = |k: Complex64| (-k * k).exp();
        let flat = integrate_semi_infinite(|x: f64| (-x * x).exp(), 0.0, 1.0, &spec()).unwrap();
        let zero_tilt = integrate_tilted(f, 1.0, &spec().with_tilt(0.0)).unwrap();
        assert!((zero_tilt.value - flat.value).abs() < 1e-13);
        let tilted = integrate_tilted(f, 1.0, &spec().with_tilt(0.2)).unwrap();
        assert!((tilted.value - PI.sqrt() / 2.0).abs() < 1e-10);
    }

    #[test]
    fn tilt_detects_enclosed_pole() {
        // 1/(k - k0)² with k0 inside the sector: the ray result differs from
        // the real-axis value by a residue, which shows up as an imaginary part.
        let k0 = Complex64::from_polar(1.0, 0.1);
        let f = |k: Complex64| 1.0 / ((k - k0) * (k - k0.conj()) * (1.0 + k * k));
        let err = integrate_tilted(f, 1.0, &spec().with_tilt(0.3)).unwrap_err();
        assert!(matches!(err, Error::TiltResidue { .. }));
    }
}
