//! Configuration, units and shared result types.
//!
//! Units are ħ = c = 1. Every energy per unit area depends on the two
//! parameters only through `f(ω_p L) / L³`, so the numerical routines work
//! with the dimensionless product `λ = ω_p L` at unit gap width and rescale
//! on output.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_4;
use std::fmt;

use crate::error::{Error, Result};

/// Plasma frequency and gap width of the two half-spaces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfspaceConfig {
    omega_p: f64,
    gap_l: f64,
}

impl HalfspaceConfig {
    /// `omega_p = 0` is accepted and describes empty space, where every
    /// energy vanishes.
    pub fn new(omega_p: f64, gap_l: f64) -> Result<Self> {
        if !omega_p.is_finite() || omega_p < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "plasma frequency must be finite and non-negative, got {omega_p}"
            )));
        }
        if !gap_l.is_finite() || gap_l <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "gap width must be finite and positive, got {gap_l}"
            )));
        }
        if !gap_l.powi(-4).is_finite() {
            return Err(Error::InvalidConfig(format!(
                "gap width {gap_l:?} is too small for the L^-4 force scale"
            )));
        }
        Ok(Self { omega_p, gap_l })
    }

    /// Configuration at unit gap width with `ω_p = λ`.
    pub fn from_lambda(lambda: f64) -> Result<Self> {
        Self::new(lambda, 1.0)
    }

    pub fn omega_p(&self) -> f64 {
        self.omega_p
    }

    pub fn gap_l(&self) -> f64 {
        self.gap_l
    }

    /// Factor turning a unit-gap energy per area into the energy at `gap_l`.
    pub(crate) fn energy_scale(&self) -> f64 {
        self.gap_l.powi(-3)
    }

    pub(crate) fn force_scale(&self) -> f64 {
        self.gap_l.powi(-4)
    }

    /// Threshold `ω_p / √(1 + ω_p L / 2)` below which the antisymmetric
    /// surface plasmon continues as the lowest TM waveguide mode.
    pub fn antisymmetric_threshold(&self) -> f64 {
        self.omega_p / (1.0 + 0.5 * self.omega_p * self.gap_l).sqrt()
    }

    /// Distance of `ω_p L / π` from the nearest integer. Near integers a
    /// waveguide root sits at the continuum edge and mode counting is
    /// ill-conditioned.
    pub fn distance_to_edge_mode(&self) -> f64 {
        let x = dimensionless_lambda(self) / std::f64::consts::PI;
        (x - x.round()).abs()
    }
}

/// The single parameter `λ = ω_p L` that fixes all dimensionless energies.
pub fn dimensionless_lambda(cfg: &HalfspaceConfig) -> f64 {
    cfg.omega_p * cfg.gap_l
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    TE,
    TM,
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarization::TE => f.write_str("TE"),
            Polarization::TM => f.write_str("TM"),
        }
    }
}

/// Tolerances and contour settings shared by all integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Rotation angle of the contour `k → k e^{iα}` for real-axis integrals.
    pub tilt_alpha: f64,
    /// Number of decades over which a semi-infinite integrand must stay
    /// negligible before the range is truncated.
    pub truncation_decades: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
            tilt_alpha: 0.1,
            truncation_decades: 1,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::InvalidSpec(format!(
                "rel_tol must lie in (0, 1), got {}",
                self.rel_tol
            )));
        }
        if !(self.abs_tol >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "abs_tol must be non-negative, got {}",
                self.abs_tol
            )));
        }
        if !(self.tilt_alpha >= 0.0 && self.tilt_alpha < FRAC_PI_4) {
            return Err(Error::InvalidSpec(format!(
                "tilt_alpha must lie in [0, π/4), got {}",
                self.tilt_alpha
            )));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::InvalidSpec("max_subdivisions must be at least 1".into()));
        }
        Ok(())
    }

    pub fn with_tilt(mut self, alpha: f64) -> Self {
        self.tilt_alpha = alpha;
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    /// Tighter settings for integrals nested inside an outer quadrature.
    pub(crate) fn inner(&self) -> Self {
        Self {
            rel_tol: (self.rel_tol * 0.1).max(1e-13),
            abs_tol: self.abs_tol * 0.1,
            ..*self
        }
    }
}

/// Energy per unit area of one polarization in both representations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub pol: Polarization,
    /// Imaginary-frequency (Lifshitz) value.
    pub e_imag: f64,
    /// Renormalized waveguide-mode sum.
    pub e_wg: f64,
    /// Photonic continuum contribution.
    pub e_cont: f64,
    /// Subtracted surface-plasmon contribution; zero for TE.
    pub e_sf: f64,
    /// `e_sf + e_wg + e_cont - e_imag`.
    pub residual: f64,
    /// Combined quadrature error estimate of all parts.
    pub error: f64,
}

impl EnergyBreakdown {
    pub fn new(pol: Polarization, e_imag: f64, e_wg: f64, e_cont: f64, e_sf: f64, error: f64) -> Self {
        let e_sf = match pol {
            Polarization::TE => 0.0,
            Polarization::TM => e_sf,
        };
        Self {
            pol,
            e_imag,
            e_wg,
            e_cont,
            e_sf,
            residual: e_sf + e_wg + e_cont - e_imag,
            error,
        }
    }

    /// Sum of the real-frequency parts.
    pub fn e_real(&self) -> f64 {
        self.e_sf + self.e_wg + self.e_cont
    }

    pub fn relative_residual(&self) -> f64 {
        if self.e_imag == 0.0 {
            self.residual.abs()
        } else {
            (self.residual / self.e_imag).abs()
        }
    }

    pub(crate) fn scaled(self, factor: f64) -> Self {
        Self {
            e_imag: self.e_imag * factor,
            e_wg: self.e_wg * factor,
            e_cont: self.e_cont * factor,
            e_sf: self.e_sf * factor,
            residual: self.residual * factor,
            error: self.error * factor,
            ..self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn lambda_is_the_product() {
        let one = HalfspaceConfig::new(1.0, 1.0).unwrap();
        assert_eq!(dimensionless_lambda(&one), 1.0);
        let fig = HalfspaceConfig::new(2.7 * PI, 1.0).unwrap();
        assert!((dimensionless_lambda(&fig) - 8.4823).abs() < 1e-4);
        let scaled = HalfspaceConfig::new(2.0, 0.5).unwrap();
        assert_eq!(dimensionless_lambda(&scaled), 1.0);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(HalfspaceConfig::new(-1.0, 1.0).is_err());
        assert!(HalfspaceConfig::new(1.0, 0.0).is_err());
        assert!(HalfspaceConfig::new(1.0, 1e-200).is_err());
        assert!(HalfspaceConfig::new(1.0, 1e-70).is_ok());
        assert!(HalfspaceConfig::new(f64::NAN, 1.0).is_err());
        assert!(HalfspaceConfig::new(0.0, 1.0).is_ok());
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::default().validate().is_ok());
        assert!(QuadratureSpec::default().with_tilt(FRAC_PI_4).validate().is_err());
        assert!(QuadratureSpec::default().with_rel_tol(0.0).validate().is_err());
        let s = QuadratureSpec {
            max_subdivisions: 0,
            ..QuadratureSpec::default()
        };
        assert!(s.validate().is_err());
    }

    #[test]
    fn te_breakdown_drops_surface_part() {
        let b = EnergyBreakdown::new(Polarization::TE, -1.0, 2.0, -3.0, 5.0, 0.0);
        assert_eq!(b.e_sf, 0.0);
        assert_eq!(b.residual, 0.0);
    }
}
