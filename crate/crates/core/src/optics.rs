//! Plasma permittivity and the single-gap transmission factor `T1` on the
//! real and imaginary frequency axes.
//!
//! Reflection coefficients are evaluated in cancellation-free forms, e.g.
//! `r_TE = (k - q)/(k + q) = -ω_p²/(k + q)²`, so that `ln T1` keeps full
//! relative accuracy where `r² e^{2iqL}` is tiny.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{HalfspaceConfig, Polarization};
use crate::error::{Error, Result};

/// `ε(ω) = 1 - ω_p²/ω²`.
pub fn permittivity_real(omega_p: f64, omega: f64) -> Result<f64> {
    if omega == 0.0 {
        return Err(Error::Domain("permittivity is singular at omega = 0"));
    }
    Ok(1.0 - (omega_p / omega).powi(2))
}

/// `ε(iξ) = 1 + ω_p²/ξ²`.
pub fn permittivity_imag(omega_p: f64, xi: f64) -> Result<f64> {
    if xi == 0.0 {
        return Err(Error::Domain("permittivity is singular at xi = 0"));
    }
    Ok(1.0 + (omega_p / xi).powi(2))
}

/// Square root on the branch with non-negative imaginary part.
pub(crate) fn sqrt_upper(z: Complex64) -> Complex64 {
    let s = z.sqrt();
    if s.im < 0.0 {
        -s
    } else {
        s
    }
}

/// `ln(1 + z)` accurate for small `|z|`.
pub(crate) fn ln_1p(z: Complex64) -> Complex64 {
    let modulus = 0.5 * (z.re * (2.0 + z.re) + z.im * z.im).ln_1p();
    Complex64::new(modulus, z.im.atan2(1.0 + z.re))
}

/// Point of the photonic continuum, parametrized by the parallel momentum and
/// the perpendicular momentum `k` outside the gap. `k` may be complex on a
/// tilted contour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealAxisPoint {
    pub k_par: f64,
    pub k: Complex64,
}

impl RealAxisPoint {
    pub fn new(k_par: f64, k: Complex64) -> Self {
        Self { k_par, k }
    }

    pub fn real(k_par: f64, k: f64) -> Self {
        Self::new(k_par, Complex64::new(k, 0.0))
    }

    /// `ω = √(ω_p² + k_∥² + k²)`.
    pub fn omega(&self, cfg: &HalfspaceConfig) -> Complex64 {
        sqrt_upper(self.k * self.k + cfg.omega_p().powi(2) + self.k_par * self.k_par)
    }

    /// Momentum inside the gap, `q = √(ω_p² + k²)`.
    pub fn q(&self, cfg: &HalfspaceConfig) -> Complex64 {
        sqrt_upper(self.k * self.k + cfg.omega_p().powi(2))
    }
}

/// Point on the imaginary frequency axis `ω = iξ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImagAxisPoint {
    pub k_par: f64,
    pub xi: f64,
}

impl ImagAxisPoint {
    pub fn new(k_par: f64, xi: f64) -> Self {
        Self { k_par, xi }
    }

    /// Decay constant inside the medium, `√(ξ² + ω_p² + k_∥²)`.
    pub fn kappa(&self, cfg: &HalfspaceConfig) -> f64 {
        (self.xi * self.xi + cfg.omega_p().powi(2) + self.k_par * self.k_par).sqrt()
    }

    /// Decay constant inside the gap, `√(ξ² + k_∥²)`.
    pub fn eta(&self) -> f64 {
        self.xi.hypot(self.k_par)
    }

    pub fn eps(&self, cfg: &HalfspaceConfig) -> Result<f64> {
        permittivity_imag(cfg.omega_p(), self.xi)
    }
}

/// Reflection coefficients at a single interface on the real axis.
fn reflection_real(cfg: &HalfspaceConfig, point: &RealAxisPoint) -> (Complex64, Complex64) {
    let wp2 = cfg.omega_p().powi(2);
    let k = point.k;
    let q = point.q(cfg);
    let omega2 = k * k + wp2 + point.k_par * point.k_par;
    let r_te = -wp2 / ((k + q) * (k + q));
    if wp2 == 0.0 {
        return (r_te, r_te);
    }
    let one_minus_eps = wp2 / omega2;
    let eps = 1.0 - one_minus_eps;
    let delta = 2.0 * k * q * one_minus_eps / ((k + eps * q) * (k + q));
    (r_te, r_te + delta)
}

/// `r² e^{2iqL}` for the requested polarization.
fn round_trip(pol: Polarization, cfg: &HalfspaceConfig, point: &RealAxisPoint) -> Complex64 {
    let (r_te, r_tm) = reflection_real(cfg, point);
    let r = match pol {
        Polarization::TE => r_te,
        Polarization::TM => r_tm,
    };
    let phase = (Complex64::i() * 2.0 * point.q(cfg) * cfg.gap_l()).exp();
    r * r * phase
}

/// `T1 = 1/(1 - r² e^{2iqL})`.
pub fn t1(pol: Polarization, cfg: &HalfspaceConfig, point: &RealAxisPoint) -> Result<Complex64> {
    let denom = 1.0 - round_trip(pol, cfg, point);
    if denom.norm() < 1e-14 {
        return Err(Error::Pole {
            k_re: point.k.re,
            k_im: point.k.im,
        });
    }
    Ok(1.0 / denom)
}

/// `ln T1 = -ln(1 - r² e^{2iqL})`, principal branch.
pub fn ln_t1(pol: Polarization, cfg: &HalfspaceConfig, point: &RealAxisPoint) -> Result<Complex64> {
    let z = round_trip(pol, cfg, point);
    if (1.0 - z).norm() < 1e-14 {
        return Err(Error::Pole {
            k_re: point.k.re,
            k_im: point.k.im,
        });
    }
    Ok(-ln_1p(-z))
}

/// `ln T1^TM - ln T1^TE` without cancellation between the two logarithms.
pub fn ln_t1_difference(cfg: &HalfspaceConfig, point: &RealAxisPoint) -> Result<Complex64> {
    let wp2 = cfg.omega_p().powi(2);
    if wp2 == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (r_te, r_tm) = reflection_real(cfg, point);
    let phase = (Complex64::i() * 2.0 * point.q(cfg) * cfg.gap_l()).exp();
    let z_tm = r_tm * r_tm * phase;
    let denom = 1.0 - z_tm;
    if denom.norm() < 1e-14 {
        return Err(Error::Pole {
            k_re: point.k.re,
            k_im: point.k.im,
        });
    }
    let dz = (r_tm - r_te) * (r_tm + r_te) * phase;
    Ok(ln_1p(dz / denom))
}

/// Scattering phase `δ = Im ln T1` for real `k`.
pub fn phase_shift(pol: Polarization, cfg: &HalfspaceConfig, point: &RealAxisPoint) -> Result<f64> {
    if point.k.im != 0.0 {
        return Err(Error::Domain("phase shift requires real k"));
    }
    Ok(ln_t1(pol, cfg, point)?.im)
}

/// Squared single-interface reflection coefficient on the imaginary axis.
fn reflection_imag_sq(pol: Polarization, cfg: &HalfspaceConfig, point: &ImagAxisPoint) -> Result<f64> {
    let wp2 = cfg.omega_p().powi(2);
    if wp2 == 0.0 {
        return Ok(0.0);
    }
    let eta = point.eta();
    let kappa = point.kappa(cfg);
    let r = match pol {
        Polarization::TE => -wp2 / ((eta + kappa) * (eta + kappa)),
        Polarization::TM => {
            if point.xi == 0.0 && point.k_par == 0.0 {
                return Err(Error::Pole { k_re: 0.0, k_im: 0.0 });
            }
            let xi2 = point.xi * point.xi;
            let k2 = point.k_par * point.k_par;
            -wp2 * (eta * kappa + k2) / ((kappa + eta) * (xi2 * kappa + (xi2 + wp2) * eta))
        }
    };
    Ok(r * r)
}

/// `ln T1(iξ) = -ln(1 - r² e^{-2ηL})`, real and non-negative.
pub fn ln_t1_imag(pol: Polarization, cfg: &HalfspaceConfig, point: &ImagAxisPoint) -> Result<f64> {
    if point.xi < 0.0 || point.k_par < 0.0 {
        return Err(Error::Domain("imaginary-axis point needs xi >= 0 and k_par >= 0"));
    }
    let decay = 2.0 * point.eta() * cfg.gap_l();
    if decay > 1500.0 {
        return Ok(0.0);
    }
    let r2 = reflection_imag_sq(pol, cfg, point)?;
    let z = r2 * (-decay).exp();
    if z >= 1.0 {
        return Err(Error::Pole { k_re: 0.0, k_im: point.xi });
    }
    Ok(-(-z).ln_1p())
}

/// `T1(iξ) = 1/(1 - r² e^{-2ηL})`.
pub fn t1_imag(pol: Polarization, cfg: &HalfspaceConfig, point: &ImagAxisPoint) -> Result<f64> {
    Ok(ln_t1_imag(pol, cfg, point)?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg(wp: f64, l: f64) -> HalfspaceConfig {
        HalfspaceConfig::new(wp, l).unwrap()
    }

    #[test]
    fn permittivity_values() {
        assert_eq!(permittivity_real(1.0, 1.0).unwrap(), 0.0);
        assert_eq!(permittivity_real(2.0, 1.0).unwrap(), -3.0);
        assert!((permittivity_real(1.0, 1e8).unwrap() - 1.0).abs() < 1e-15);
        assert!(permittivity_real(1.0, 0.0).is_err());
        assert_eq!(permittivity_imag(1.0, 1.0).unwrap(), 2.0);
        assert_eq!(permittivity_imag(0.0, 3.0).unwrap(), 1.0);
        assert!(permittivity_imag(1.0, 0.0).is_err());
    }

    #[test]
    fn dispersion_relations_hold() {
        let c = cfg(1.3, 0.7);
        let p = RealAxisPoint::new(0.4, Complex64::from_polar(2.0, 0.1));
        let w = p.omega(&c);
        let q = p.q(&c);
        let wp2 = 1.3f64.powi(2);
        assert!((w * w - (wp2 + 0.16 + p.k * p.k)).norm() < 1e-13);
        assert!((w * w - (0.16 + q * q)).norm() < 1e-13);
        assert!(q.im >= 0.0 && w.im >= 0.0);
    }

    #[test]
    fn stable_reflection_matches_textbook_form() {
        let c = cfg(1.0, 1.0);
        for &(kp, k) in &[(0.0, 1.0), (0.7, 0.3), (2.0, 5.0)] {
            let p = RealAxisPoint::real(kp, k);
            let q = p.q(&c).re;
            let w2 = 1.0 + kp * kp + k * k;
            let eps = 1.0 - 1.0 / w2;
            let (rte, rtm) = reflection_real(&c, &p);
            assert_relative_eq!(rte.re, (k - q) / (k + q), max_relative = 1e-13);
            assert_relative_eq!(rtm.re, (k - eps * q) / (k + eps * q), max_relative = 1e-12);
        }
    }

    #[test]
    fn vacuum_has_no_reflection() {
        let c = cfg(0.0, 1.0);
        let p = RealAxisPoint::real(0.3, 0.8);
        assert_eq!(t1(Polarization::TE, &c, &p).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(phase_shift(Polarization::TE, &c, &p).unwrap(), 0.0);
        assert_eq!(t1_imag(Polarization::TE, &c, &ImagAxisPoint::new(0.2, 0.4)).unwrap(), 1.0);
        assert_eq!(t1_imag(Polarization::TM, &c, &ImagAxisPoint::new(0.2, 0.4)).unwrap(), 1.0);
    }

    #[test]
    fn tm_at_normal_incidence() {
        // ω_p = L = 1, k_∥ = 0, k = 1: q = √2, ε = 1/2.
        let c = cfg(1.0, 1.0);
        let p = RealAxisPoint::real(0.0, 1.0);
        let s2 = 2f64.sqrt();
        let r = (1.0 - 0.5 * s2) / (1.0 + 0.5 * s2);
        let expect = 1.0 / (1.0 - r * r * Complex64::new(0.0, 2.0 * s2).exp());
        let got = t1(Polarization::TM, &c, &p).unwrap();
        assert!((got - expect).norm() < 1e-14, "{got} vs {expect}");
    }

    /// Full transmission amplitude through the gap, `T1` times the two
    /// interface factors and the propagation phase.
    fn full_transmission(pol: Polarization, c: &HalfspaceConfig, p: &RealAxisPoint) -> Complex64 {
        let k = p.k;
        let q = p.q(c);
        let w2 = k * k + c.omega_p().powi(2) + p.k_par * p.k_par;
        let eps = 1.0 - c.omega_p().powi(2) / w2;
        let (a, b) = match pol {
            Polarization::TE => (q, k),
            Polarization::TM => (eps * q, k),
        };
        let phase = (Complex64::i() * (q - k) * c.gap_l()).exp();
        t1(pol, c, p).unwrap() * 4.0 * a * b / ((a + b) * (a + b)) * phase
    }

    #[test]
    fn conjugation_symmetry_on_real_axis() {
        let c = cfg(2.0, 1.0);
        for pol in [Polarization::TE, Polarization::TM] {
            for i in 1..40 {
                let k = 0.25 * i as f64;
                let plus = full_transmission(pol, &c, &RealAxisPoint::real(0.5, k));
                let minus = full_transmission(pol, &c, &RealAxisPoint::real(0.5, -k));
                assert!((plus - minus.conj()).norm() < 1e-12 * plus.norm(), "{pol:?} {k}: {plus} {minus}");
            }
        }
    }

    #[test]
    fn large_k_decay() {
        let c = cfg(1.0, 1.0);
        for k in [10.0, 20.0, 40.0] {
            let v = ln_t1(Polarization::TE, &c, &RealAxisPoint::real(0.0, k)).unwrap();
            let scaled = v.norm() * k.powi(4);
            assert!(scaled > 1.0 / 32.0 && scaled < 1.0 / 8.0, "{scaled}");
        }
    }

    #[test]
    fn difference_matches_direct_subtraction() {
        let c = cfg(3.0, 1.0);
        let p = RealAxisPoint::new(1.5, Complex64::from_polar(2.0, 0.1));
        let direct = ln_t1(Polarization::TM, &c, &p).unwrap() - ln_t1(Polarization::TE, &c, &p).unwrap();
        let stable = ln_t1_difference(&c, &p).unwrap();
        assert!((direct - stable).norm() < 1e-13);
    }

    #[test]
    fn imaginary_axis_bounds() {
        let c = cfg(1.0, 1.0);
        for &(kp, xi) in &[(0.5, 0.5), (0.0, 0.1), (3.0, 0.01), (0.01, 2.0)] {
            let p = ImagAxisPoint::new(kp, xi);
            for pol in [Polarization::TE, Polarization::TM] {
                let r2 = reflection_imag_sq(pol, &c, &p).unwrap();
                assert!(r2 < 1.0);
                let t = t1_imag(pol, &c, &p).unwrap();
                assert!(t > 1.0 && t.is_finite());
            }
            assert!(p.kappa(&c) >= p.eta() && p.eta() >= kp);
        }
    }

    #[test]
    fn tm_imaginary_reflection_matches_textbook_form() {
        let c = cfg(1.0, 1.0);
        let p = ImagAxisPoint::new(0.5, 0.5);
        let eps = p.eps(&c).unwrap();
        let (eta, kappa) = (p.eta(), p.kappa(&c));
        let r = (eps * eta - kappa) / (eps * eta + kappa);
        assert_relative_eq!(reflection_imag_sq(Polarization::TM, &c, &p).unwrap(), r * r, max_relative = 1e-14);
        let t = 1.0 / (1.0 - r * r * (-2.0 * eta).exp());
        assert_relative_eq!(t1_imag(Polarization::TM, &c, &p).unwrap(), t, max_relative = 1e-14);
    }

    #[test]
    fn complex_log1p_is_accurate() {
        let z = Complex64::new(1e-20, -3e-20);
        let v = ln_1p(z);
        assert!((v - z).norm() < 1e-35);
        let z = Complex64::new(0.3, 0.4);
        assert!((ln_1p(z) - (1.0 + z).ln()).norm() < 1e-15);
    }
}
