//! Discrete spectrum of the gap: waveguide modes of both polarizations and
//! the two surface plasmons.
//!
//! Dispersion relations are solved in forms free of poles. For waveguide
//! modes the variable is the gap momentum `q ∈ (0, ω_p)`, for surface modes
//! the frequency `ω ∈ (0, min(k_∥, ω_p))`, which keeps `η = √(k_∥² - ω²)`
//! well conditioned at large `k_∥`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{HalfspaceConfig, Polarization};
use crate::error::{Error, Result};
use crate::roots::{brent, scan_roots};

const TE_SUBDIVISIONS: usize = 4;
const TM_SUBDIVISIONS: usize = 12;
const TM_RETRY_SUBDIVISIONS: usize = 192;
const SURFACE_SUBDIVISIONS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModeKind {
    WaveguideTE,
    WaveguideTM,
    SurfaceSymmetric,
    SurfaceAntisymmetric,
}

impl ModeKind {
    pub fn label(&self) -> &'static str {
        match self {
            ModeKind::WaveguideTE => "wg_te",
            ModeKind::WaveguideTM => "wg_tm",
            ModeKind::SurfaceSymmetric => "sf_sym",
            ModeKind::SurfaceAntisymmetric => "sf_anti",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Symmetric,
    Antisymmetric,
}

/// One discrete mode at a given parallel momentum.
///
/// For waveguide modes `q_or_eta` is the real gap momentum `q`. For surface
/// modes it is the decay constant `η`; on the antisymmetric branch below the
/// threshold momentum, where the mode oscillates inside the gap, it holds
/// `-q₀`; the sign marks the branch and `κ = √(ω_p² - q₀²)` there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeRecord {
    pub kind: ModeKind,
    pub index_j: usize,
    pub k_par: f64,
    pub omega: f64,
    pub q_or_eta: f64,
    pub kappa: f64,
}

/// A waveguide solution with its symmetry family. Index 0 is reserved for
/// the lowest TM antisymmetric root that exists only below the threshold
/// momentum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveguideRoot {
    pub index: usize,
    pub q: f64,
    pub parity: Parity,
}

/// The antisymmetric surface branch either exists as a true surface mode or
/// continues as the TM waveguide mode with index 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AntisymmetricBranch {
    Surface { eta: f64, omega: f64 },
    ContinuesAsWaveguide,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceRoots {
    pub eta_s: f64,
    pub omega_s: f64,
    pub antisymmetric: AntisymmetricBranch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTable {
    pub cfg: HalfspaceConfig,
    pub k_par_grid: Vec<f64>,
    pub records: Vec<Vec<ModeRecord>>,
}

/// `sin(x q)/q`, continuous at `q = 0`.
fn sin_over(q: f64, x: f64) -> f64 {
    if q * x < 1e-8 {
        x
    } else {
        (q * x).sin() / q
    }
}

/// `tanh(x η)/η`, continuous at `η = 0`.
fn tanh_over(eta: f64, x: f64) -> f64 {
    if eta * x < 1e-8 {
        x
    } else {
        (eta * x).tanh() / eta
    }
}

fn te_form(parity: Parity, cfg: &HalfspaceConfig, q: f64) -> f64 {
    let wp = cfg.omega_p();
    let half = 0.5 * cfg.gap_l();
    let kappa = ((wp - q) * (wp + q)).max(0.0).sqrt();
    match parity {
        Parity::Symmetric => kappa * (q * half).cos() - q * (q * half).sin(),
        Parity::Antisymmetric => kappa * sin_over(q, half) + (q * half).cos(),
    }
}

/// TM conditions multiplied by `ω² = q² + k_∥²`, removing the pole of `ε`.
fn tm_form(parity: Parity, cfg: &HalfspaceConfig, k_par: f64, q: f64) -> f64 {
    let wp = cfg.omega_p();
    let half = 0.5 * cfg.gap_l();
    let kappa = ((wp - q) * (wp + q)).max(0.0).sqrt();
    let w2 = q * q + k_par * k_par;
    let eps_w2 = w2 - wp * wp;
    match parity {
        Parity::Symmetric => w2 * kappa * (q * half).cos() - eps_w2 * q * (q * half).sin(),
        Parity::Antisymmetric => w2 * kappa * sin_over(q, half) + eps_w2 * (q * half).cos(),
    }
}

/// Scale of the TM form terms, for relative residuals.
fn tm_form_scale(cfg: &HalfspaceConfig, k_par: f64, q: f64) -> f64 {
    let wp = cfg.omega_p();
    let w2 = q * q + k_par * k_par;
    w2 * wp + (w2 - wp * wp).abs() * q.max(1.0 / cfg.gap_l()) + f64::MIN_POSITIVE
}

/// Sign of this quantity decides whether the antisymmetric surface mode
/// exists (`≥ 0`) or continues as the TM waveguide mode of index 0.
fn antisymmetric_edge(cfg: &HalfspaceConfig, k_par: f64) -> f64 {
    let wp = cfg.omega_p();
    k_par * k_par * (1.0 + 0.5 * wp * cfg.gap_l()) - wp * wp
}

fn q_breakpoints(cfg: &HalfspaceConfig, extra: Option<f64>) -> Vec<f64> {
    let wp = cfg.omega_p();
    let step = PI / cfg.gap_l();
    let mut pts = vec![0.0];
    let mut m = 1.0;
    while m * step < wp {
        pts.push(m * step);
        m += 1.0;
    }
    if let Some(x) = extra {
        if x > 0.0 && x < wp {
            pts.push(x);
        }
    }
    pts.push(wp);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// TE roots `q_j`, independent of `k_∥`, ascending with indices from 1.
pub fn te_roots(cfg: &HalfspaceConfig) -> Result<Vec<WaveguideRoot>> {
    if cfg.omega_p() == 0.0 {
        return Ok(Vec::new());
    }
    let pts = q_breakpoints(cfg, None);
    let mut roots = Vec::new();
    for parity in [Parity::Symmetric, Parity::Antisymmetric] {
        for q in scan_roots(|q| te_form(parity, cfg, q), &pts, TE_SUBDIVISIONS)? {
            if q > 0.0 && q < cfg.omega_p() {
                roots.push(WaveguideRoot { index: 0, q, parity });
            }
        }
    }
    roots.sort_by(|a, b| a.q.total_cmp(&b.q));
    for (i, r) in roots.iter_mut().enumerate() {
        r.index = i + 1;
    }
    Ok(roots)
}

fn tm_scan(cfg: &HalfspaceConfig, k_par: f64, parity: Parity, subdivisions: usize) -> Result<Vec<f64>> {
    let wp = cfg.omega_p();
    let eps_zero = if k_par < wp {
        Some(((wp - k_par) * (wp + k_par)).sqrt())
    } else {
        None
    };
    let pts = q_breakpoints(cfg, eps_zero);
    Ok(scan_roots(|q| tm_form(parity, cfg, k_par, q), &pts, subdivisions)?
        .into_iter()
        .filter(|&q| q > 0.0 && q < wp)
        .collect())
}

/// Near `k_∥ = 0` one TM root merges with the continuum edge `q = ω_p`
/// closer than rounding resolves. Returns the family that lacks it, if the
/// form vanishes at the edge to that precision.
fn edge_root_parity(
    cfg: &HalfspaceConfig,
    k_par: f64,
    has_q0: bool,
    found: &[WaveguideRoot],
) -> Result<Option<Parity>> {
    let te = te_roots(cfg)?;
    let wp = cfg.omega_p();
    for parity in [Parity::Symmetric, Parity::Antisymmetric] {
        let want = te.iter().filter(|r| r.parity == parity).count()
            + usize::from(has_q0 && parity == Parity::Antisymmetric);
        let have = found.iter().filter(|r| r.parity == parity).count();
        if have + 1 == want {
            let residual = tm_form(parity, cfg, k_par, wp).abs() / tm_form_scale(cfg, k_par, wp);
            return Ok((residual < 1e-8).then_some(parity));
        }
    }
    Ok(None)
}

/// TM roots at `k_∥`, ascending. Below the threshold momentum the lowest
/// antisymmetric root gets index 0; the remaining roots are numbered from 1
/// so that they pair with the TE roots of the same index.
pub fn tm_roots(cfg: &HalfspaceConfig, k_par: f64) -> Result<Vec<WaveguideRoot>> {
    if !(k_par >= 0.0) {
        return Err(Error::Domain("k_par must be non-negative"));
    }
    if cfg.omega_p() == 0.0 {
        return Ok(Vec::new());
    }
    let expected = te_roots(cfg)?.len();
    let has_q0 = antisymmetric_edge(cfg, k_par) < 0.0;
    let mut found = Vec::new();
    for subdivisions in [TM_SUBDIVISIONS, TM_RETRY_SUBDIVISIONS] {
        found.clear();
        for parity in [Parity::Symmetric, Parity::Antisymmetric] {
            for q in tm_scan(cfg, k_par, parity, subdivisions)? {
                found.push(WaveguideRoot { index: 0, q, parity });
            }
        }
        if found.len() == expected + usize::from(has_q0) {
            break;
        }
    }
    if found.len() + 1 == expected + usize::from(has_q0) {
        if let Some(parity) = edge_root_parity(cfg, k_par, has_q0, &found)? {
            found.push(WaveguideRoot { index: 0, q: cfg.omega_p(), parity });
        }
    }
    found.sort_by(|a, b| a.q.total_cmp(&b.q));
    let q0_pos = if has_q0 {
        found.iter().position(|r| r.parity == Parity::Antisymmetric)
    } else {
        None
    };
    let mut next = 1;
    for (i, r) in found.iter_mut().enumerate() {
        if Some(i) == q0_pos {
            r.index = 0;
        } else {
            r.index = next;
            next += 1;
        }
    }
    found.sort_by_key(|r| r.index);
    Ok(found)
}

/// Waveguide roots of either polarization.
pub fn waveguide_roots(pol: Polarization, cfg: &HalfspaceConfig, k_par: f64) -> Result<Vec<WaveguideRoot>> {
    match pol {
        Polarization::TE => te_roots(cfg),
        Polarization::TM => tm_roots(cfg, k_par),
    }
}

/// Relative residual of a waveguide root in its defining equation.
pub fn waveguide_residual(pol: Polarization, cfg: &HalfspaceConfig, k_par: f64, root: &WaveguideRoot) -> f64 {
    match pol {
        Polarization::TE => te_form(root.parity, cfg, root.q).abs() / (cfg.omega_p() + root.q),
        Polarization::TM => {
            tm_form(root.parity, cfg, k_par, root.q).abs() / tm_form_scale(cfg, k_par, root.q)
        }
    }
}

fn surface_form(parity: Parity, cfg: &HalfspaceConfig, k_par: f64, omega: f64) -> f64 {
    let wp = cfg.omega_p();
    let half = 0.5 * cfg.gap_l();
    let eta2 = ((k_par - omega) * (k_par + omega)).max(0.0);
    let eta = eta2.sqrt();
    let kappa = (wp * wp + eta2).sqrt();
    let w2 = omega * omega;
    match parity {
        Parity::Symmetric => kappa * w2 + (w2 - wp * wp) * eta * (eta * half).tanh(),
        Parity::Antisymmetric => kappa * w2 * tanh_over(eta, half) + (w2 - wp * wp),
    }
}

fn surface_root(parity: Parity, cfg: &HalfspaceConfig, k_par: f64) -> Result<f64> {
    let hi = k_par.min(cfg.omega_p());
    let f = |w: f64| surface_form(parity, cfg, k_par, w);
    let f_hi = f(hi);
    // At the threshold momentum the antisymmetric root is `ω = k_∥`, and
    // `f(hi)` may round to either sign.
    let at_threshold = parity == Parity::Antisymmetric && f_hi.abs() <= 1e-13 * surface_scale(cfg, k_par);
    if f_hi == 0.0 || at_threshold {
        return Ok(hi);
    }
    let roots = scan_roots(f, &[0.0, hi], SURFACE_SUBDIVISIONS)?;
    match roots.as_slice() {
        [w] => Ok(*w),
        [] if parity == Parity::Antisymmetric && f_hi > 0.0 && f(0.0) < 0.0 => {
            // The root sits inside the last grid cell at rounding level.
            brent(f, 0.0, hi, f(0.0), f_hi)
        }
        _ => Err(Error::RootConvergence(format!(
            "{} surface roots found for {:?} parity at k_par = {k_par}",
            roots.len(),
            parity
        ))),
    }
}

/// Surface plasmons at `k_∥ > 0`: `η_s` always, `η_a` only at or above the
/// threshold momentum `ω_p/√(1 + ω_p L/2)`.
pub fn surface_roots(cfg: &HalfspaceConfig, k_par: f64) -> Result<SurfaceRoots> {
    if !(k_par > 0.0) {
        return Err(Error::Domain("surface modes need k_par > 0"));
    }
    if cfg.omega_p() == 0.0 {
        return Err(Error::Domain("surface modes need a non-zero plasma frequency"));
    }
    let eta_of = |w: f64| ((k_par - w) * (k_par + w)).max(0.0).sqrt();
    let omega_s = surface_root(Parity::Symmetric, cfg, k_par)?;
    let antisymmetric = if antisymmetric_edge(cfg, k_par) >= 0.0 {
        let omega = surface_root(Parity::Antisymmetric, cfg, k_par)?;
        AntisymmetricBranch::Surface {
            eta: eta_of(omega),
            omega,
        }
    } else {
        AntisymmetricBranch::ContinuesAsWaveguide
    };
    Ok(SurfaceRoots {
        eta_s: eta_of(omega_s),
        omega_s,
        antisymmetric,
    })
}

fn surface_scale(cfg: &HalfspaceConfig, k_par: f64) -> f64 {
    let wp = cfg.omega_p();
    wp * wp + wp * k_par
}

/// Relative residual of a surface frequency in its defining equation.
pub fn surface_residual(cfg: &HalfspaceConfig, k_par: f64, parity: Parity, omega: f64) -> f64 {
    surface_form(parity, cfg, k_par, omega).abs() / surface_scale(cfg, k_par)
}

/// Surface plasmon of a single interface,
/// `ω² = ω_p²/2 + k_∥² - √(ω_p⁴/4 + k_∥⁴)`, in a cancellation-free form.
pub fn omega_single(omega_p: f64, k_par: f64) -> f64 {
    let h = 0.5 * omega_p * omega_p;
    let k2 = k_par * k_par;
    if k2 == 0.0 || h == 0.0 {
        return 0.0;
    }
    let s = (k2 * k2 + h * h).sqrt();
    (h * (k2 + k2 * k2 / (s + h)) / (k2 + s)).sqrt()
}

/// The antisymmetric surface frequency, continued below the threshold by
/// the TM waveguide mode of index 0.
pub fn antisymmetric_frequency(cfg: &HalfspaceConfig, k_par: f64) -> Result<f64> {
    match surface_roots(cfg, k_par)?.antisymmetric {
        AntisymmetricBranch::Surface { omega, .. } => Ok(omega),
        AntisymmetricBranch::ContinuesAsWaveguide => {
            let roots = tm_roots(cfg, k_par)?;
            let q0 = roots
                .iter()
                .find(|r| r.index == 0)
                .ok_or_else(|| Error::RootConvergence(format!("missing TM index-0 root at k_par = {k_par}")))?;
            Ok(q0.q.hypot(k_par))
        }
    }
}

fn waveguide_record(kind: ModeKind, cfg: &HalfspaceConfig, k_par: f64, r: &WaveguideRoot) -> ModeRecord {
    let wp = cfg.omega_p();
    ModeRecord {
        kind,
        index_j: r.index,
        k_par,
        omega: r.q.hypot(k_par),
        q_or_eta: r.q,
        kappa: ((wp - r.q) * (wp + r.q)).max(0.0).sqrt(),
    }
}

/// All modes at one parallel momentum.
pub fn modes_at(cfg: &HalfspaceConfig, k_par: f64) -> Result<Vec<ModeRecord>> {
    let wp = cfg.omega_p();
    let mut out = Vec::new();
    if wp == 0.0 {
        return Ok(out);
    }
    let te = te_roots(cfg)?;
    out.extend(te.iter().map(|r| waveguide_record(ModeKind::WaveguideTE, cfg, k_par, r)));
    let tm = tm_roots(cfg, k_par)?;
    out.extend(
        tm.iter()
            .filter(|r| r.index > 0)
            .map(|r| waveguide_record(ModeKind::WaveguideTM, cfg, k_par, r)),
    );
    if k_par > 0.0 {
        let sf = surface_roots(cfg, k_par)?;
        out.push(ModeRecord {
            kind: ModeKind::SurfaceSymmetric,
            index_j: 0,
            k_par,
            omega: sf.omega_s,
            q_or_eta: sf.eta_s,
            kappa: (wp * wp + sf.eta_s * sf.eta_s).sqrt(),
        });
        let anti = match sf.antisymmetric {
            AntisymmetricBranch::Surface { eta, omega } => ModeRecord {
                kind: ModeKind::SurfaceAntisymmetric,
                index_j: 0,
                k_par,
                omega,
                q_or_eta: eta,
                kappa: (wp * wp + eta * eta).sqrt(),
            },
            AntisymmetricBranch::ContinuesAsWaveguide => {
                let q0 = tm.iter().find(|r| r.index == 0).ok_or_else(|| {
                    Error::RootConvergence(format!("missing TM index-0 root at k_par = {k_par}"))
                })?;
                ModeRecord {
                    kind: ModeKind::SurfaceAntisymmetric,
                    index_j: 0,
                    k_par,
                    omega: q0.q.hypot(k_par),
                    q_or_eta: -q0.q,
                    kappa: ((wp - q0.q) * (wp + q0.q)).max(0.0).sqrt(),
                }
            }
        };
        out.push(anti);
    }
    Ok(out)
}

/// Spectrum over an ascending grid of parallel momenta.
pub fn spectrum_table(cfg: &HalfspaceConfig, k_par_grid: &[f64]) -> Result<SpectrumTable> {
    if k_par_grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::Domain("k_par grid must be sorted ascending"));
    }
    let records = k_par_grid
        .iter()
        .map(|&k| modes_at(cfg, k).map_err(|e| e.at_k_par(k)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumTable {
        cfg: *cfg,
        k_par_grid: k_par_grid.to_vec(),
        records,
    })
}

/// Zero count of the surface-mode conditions in the strip `0 < ω < k_∥`,
/// from the argument principle on a rectangle around the strip, compared
/// with the number of real surface roots the solver reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StripPoleCount {
    pub expected: i64,
    pub found: i64,
}

impl StripPoleCount {
    pub fn consistent(&self) -> bool {
        self.expected == self.found
    }
}

fn surface_form_complex(cfg: &HalfspaceConfig, k_par: f64, omega: Complex64) -> Complex64 {
    // Both conditions are even in η, so they are analytic in ω.
    let wp2 = cfg.omega_p().powi(2);
    let half = 0.5 * cfg.gap_l();
    let eta2 = k_par * k_par - omega * omega;
    let eta = eta2.sqrt();
    let kappa = (eta2 + wp2).sqrt();
    let w2 = omega * omega;
    let th = (eta * half).tanh();
    let t_over = if eta.norm() * half < 1e-8 {
        Complex64::new(half, 0.0)
    } else {
        th / eta
    };
    let s = kappa * w2 + (w2 - wp2) * eta * th;
    let a = kappa * w2 * t_over + (w2 - wp2);
    s * a
}

pub fn strip_pole_count(cfg: &HalfspaceConfig, k_par: f64) -> Result<StripPoleCount> {
    if !(k_par > 0.0) || cfg.omega_p() == 0.0 {
        return Ok(StripPoleCount { expected: 0, found: 0 });
    }
    let right = k_par.min(cfg.omega_p()) * (1.0 - 1e-9);
    let left = right * 1e-6;
    let h = 0.25 * right;
    let corners = [
        Complex64::new(left, -h),
        Complex64::new(right, -h),
        Complex64::new(right, h),
        Complex64::new(left, h),
    ];
    let mut total_arg = 0.0;
    for i in 0..4 {
        let (a, b) = (corners[i], corners[(i + 1) % 4]);
        total_arg += winding_segment(|z| surface_form_complex(cfg, k_par, z), a, b, 0)?;
    }
    let found = (total_arg / (2.0 * PI)).round() as i64;
    let expected = 1 + i64::from(antisymmetric_edge(cfg, k_par) >= 0.0);
    Ok(StripPoleCount { expected, found })
}

fn winding_segment<F>(f: F, a: Complex64, b: Complex64, depth: usize) -> Result<f64>
where
    F: Fn(Complex64) -> Complex64 + Copy,
{
    const N: usize = 64;
    let mut sum = 0.0;
    let mut prev = f(a);
    for i in 1..=N {
        let z = a + (b - a) * (i as f64 / N as f64);
        let cur = f(z);
        if cur.norm() == 0.0 || !cur.re.is_finite() || !cur.im.is_finite() {
            return Err(Error::NonFinite(z.re));
        }
        let d = (cur / prev).arg();
        if d.abs() > 0.5 && depth < 12 {
            let za = a + (b - a) * ((i - 1) as f64 / N as f64);
            sum += winding_segment(f, za, z, depth + 1)?;
        } else {
            sum += d;
        }
        prev = cur;
    }
    Ok(sum)
}
