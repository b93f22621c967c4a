//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with
//! a non-zero status if any criterion fails.

use std::f64::consts::{PI, SQRT_2};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use casimir_core::analysis::{
    c2_constant, constant_c, evanescent_phase_closed_form, evanescent_phase_integral, plasmon_small_l_coeffs,
    te_sum_rule,
};
use casimir_core::energy_imag::{asymptotic, e_te_imag, e_tm_imag, force, AsymptoticRegime};
use casimir_core::energy_real::{delta_e_cont, e_te_cont, real_axis_parts};
use casimir_core::modes::{
    antisymmetric_frequency, omega_single, surface_roots, te_roots, tm_roots, AntisymmetricBranch,
};
use casimir_core::{HalfspaceConfig, Polarization, QuadratureSpec};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

const IDENTITY_GRID: [f64; 6] = [0.6, 1.2, 1.8, 2.4, 3.0, 3.4];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

type Check = fn() -> Result<Outcome, casimir_core::Error>;

fn cfg(wp: f64, l: f64) -> HalfspaceConfig {
    HalfspaceConfig::new(wp, l).expect("valid configuration")
}

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn within_time(outcome: Outcome, elapsed: Duration, limit: Duration) -> Outcome {
    let pass = outcome.pass && elapsed < limit;
    Outcome::new(pass, format!("{}, {:.2?} (limit {:?})", outcome.detail, elapsed, limit))
}

fn timed(limit: Duration, f: impl FnOnce() -> Result<Outcome, casimir_core::Error>) -> Result<Outcome, casimir_core::Error> {
    let t = Instant::now();
    let out = f()?;
    Ok(within_time(out, t.elapsed(), limit))
}

fn c1_c2() -> Result<Outcome, casimir_core::Error> {
    timed(Duration::from_secs(10), || {
        let c2 = c2_constant(&spec())?.value;
        Ok(Outcome::new((c2 - 0.00391).abs() <= 1e-5, format!("c2 = {c2:.9}, target 0.00391 ± 1e-5")))
    })
}

fn c2_c() -> Result<Outcome, casimir_core::Error> {
    timed(Duration::from_secs(30), || {
        let c = constant_c(&spec())?.value;
        Ok(Outcome::new((c - 0.06777).abs() <= 2e-4, format!("c = {c:.9}, target 0.06777 ± 2e-4")))
    })
}

fn c3_plasmon_coeffs() -> Result<Outcome, casimir_core::Error> {
    timed(Duration::from_secs(10), || {
        let (cs, ca) = plasmon_small_l_coeffs(&spec())?;
        let c2 = c2_constant(&spec())?.value;
        let sum = cs.value + ca.value + c2;
        let pass = (cs.value + 0.030576).abs() <= 1e-5 && (ca.value - 0.0266708).abs() <= 1e-5 && sum.abs() < 2e-5;
        Ok(Outcome::new(
            pass,
            format!("c_s = {:.9}, c_a = {:.9}, c_s + c_a + c2 = {sum:.3e}", cs.value, ca.value),
        ))
    })
}

fn c4_te_identity() -> Result<Outcome, casimir_core::Error> {
    timed(Duration::from_secs(60), || {
        let mut worst: f64 = 0.0;
        for x in IDENTITY_GRID {
            let c = cfg(x * PI, 1.0);
            let imag = e_te_imag(&c, &spec())?;
            let parts = real_axis_parts(&c, &spec())?;
            worst = worst.max(((parts.e_te_wg + parts.e_te_cont - imag) / imag).abs());
        }
        Ok(Outcome::new(worst < 1e-5, format!("max relative residual {worst:.3e} (< 1e-5)")))
    })
}

fn c5_tm_identity() -> Result<Outcome, casimir_core::Error> {
    timed(Duration::from_secs(600), || {
        let mut worst: f64 = 0.0;
        for x in IDENTITY_GRID {
            let c = cfg(x * PI, 1.0);
            let d_imag = e_tm_imag(&c, &spec())? - e_te_imag(&c, &spec())?;
            let parts = real_axis_parts(&c, &spec())?;
            worst = worst.max(((parts.tm_minus_te() - d_imag) / d_imag).abs());
        }
        Ok(Outcome::new(worst < 1e-4, format!("max relative residual {worst:.3e} (< 1e-4)")))
    })
}

fn c6_ideal_conductor() -> Result<Outcome, casimir_core::Error> {
    timed(Duration::from_secs(30), || {
        let c = cfg(50.0, 1.0);
        let total = e_te_imag(&c, &spec())? + e_tm_imag(&c, &spec())?;
        let ratio = total * 1440.0 / (2.0 * PI * PI);
        Ok(Outcome::new((-1.05..=-0.95).contains(&ratio), format!("normalized total {ratio:.6} in [-1.05, -0.95]")))
    })
}

fn c7_te_small_separation() -> Result<Outcome, casimir_core::Error> {
    let c = cfg(0.01, 1.0);
    let ratio = e_te_imag(&c, &spec())? / asymptotic(Polarization::TE, AsymptoticRegime::SmallSeparation, &c)?;
    Ok(Outcome::new((0.99..=1.01).contains(&ratio), format!("ratio {ratio:.6} in [0.99, 1.01] at lambda = 0.01")))
}

fn c8_tm_small_separation() -> Result<Outcome, casimir_core::Error> {
    let c = cfg(0.01, 1.0);
    let c2 = c2_constant(&spec())?.value;
    let ratio = e_tm_imag(&c, &spec())? / (-c2 * 0.01);
    Ok(Outcome::new((0.98..=1.02).contains(&ratio), format!("ratio {ratio:.6} in [0.98, 1.02] at lambda = 0.01")))
}

fn c9_sum_rule() -> Result<Outcome, casimir_core::Error> {
    let mut worst: f64 = 0.0;
    for lambda in [1.0, 5.0, 10.0] {
        worst = worst.max(te_sum_rule(&cfg(lambda, 1.0), &spec())?.abs());
    }
    Ok(Outcome::new(worst < 1e-4, format!("max |residual| {worst:.3e} (< 1e-4)")))
}

fn c10_evanescent_phase() -> Result<Outcome, casimir_core::Error> {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let c = cfg(rng.random_range(0.1..20.0), rng.random_range(0.1..5.0));
        let exact = evanescent_phase_closed_form(&c);
        let num = evanescent_phase_integral(&c, &spec().with_rel_tol(1e-12))?.value;
        worst = worst.max(((num - exact) / exact).abs());
    }
    Ok(Outcome::new(worst < 1e-8, format!("max relative deviation {worst:.3e} (< 1e-8)")))
}

/// Violations of one property: how many sampled points failed and the first.
#[derive(Default)]
struct Violations {
    count: usize,
    first: Option<String>,
}

impl Violations {
    fn record(&mut self, at: impl FnOnce() -> String) {
        self.count += 1;
        if self.first.is_none() {
            self.first = Some(at());
        }
    }

    fn report(&self, name: &str) -> Option<String> {
        self.first.as_ref().map(|f| format!("{name}: {} violations, first at {f}", self.count))
    }
}

fn mode_properties() -> Result<Vec<String>, casimir_core::Error> {
    let mut interlacing = Violations::default();
    let mut bound = Violations::default();
    let mut sandwich = Violations::default();
    let mut continuity = Violations::default();
    for x in [0.5, 1.3, 2.7, 3.4] {
        let c = cfg(x * PI, 1.0);
        let wp = c.omega_p();
        let te = te_roots(&c)?;
        for i in 0..=200 {
            let k = 0.05 * i as f64;
            let tm = tm_roots(&c, k)?;
            let omega = |q: f64| q.hypot(k);
            for t in &te {
                let below = tm.iter().find(|r| r.index + 1 == t.index).map(|r| omega(r.q));
                let above = tm.iter().find(|r| r.index == t.index).map(|r| omega(r.q));
                let w = omega(t.q);
                if below.is_some_and(|b| b > w * (1.0 + 1e-12)) || above.is_some_and(|a| a < w * (1.0 - 1e-12)) {
                    interlacing.record(|| format!("lambda = {x}π, k = {k:.2}, j = {}", t.index));
                }
            }
            if k == 0.0 {
                continue;
            }
            let sf = surface_roots(&c, k)?;
            let single = omega_single(wp, k);
            let tol = 1e-12 * wp;
            let limit = wp / SQRT_2 + tol;
            if sf.omega_s > limit {
                bound.record(|| format!("lambda = {x}π, k = {k:.2}, omega_s = {:.6} > {:.6}", sf.omega_s, limit));
            }
            if let AntisymmetricBranch::Surface { omega, .. } = sf.antisymmetric {
                if omega > limit {
                    bound.record(|| format!("lambda = {x}π, k = {k:.2}, omega_a = {omega:.6} > {limit:.6}"));
                }
                if sf.omega_s > single + tol || single > omega + tol {
                    sandwich.record(|| format!("lambda = {x}π, k = {k:.2}"));
                }
            }
        }
        let kt = c.antisymmetric_threshold();
        let eps = 1e-10;
        let left = tm_roots(&c, kt * (1.0 - eps))?
            .iter()
            .find(|r| r.index == 0)
            .map(|r| r.q.hypot(kt * (1.0 - eps)));
        let right = match surface_roots(&c, kt * (1.0 + eps))?.antisymmetric {
            AntisymmetricBranch::Surface { omega, .. } => Some(omega),
            AntisymmetricBranch::ContinuesAsWaveguide => None,
        };
        let joined = antisymmetric_frequency(&c, kt)?;
        match (left, right) {
            (Some(l), Some(r)) if (l - r).abs() < 1e-8 && (joined - kt).abs() < 1e-8 => {}
            _ => continuity.record(|| format!("lambda = {x}π: {left:?} vs {right:?}")),
        }
    }
    Ok([
        interlacing.report("interlacing"),
        bound.report("surface bound"),
        sandwich.report("sandwich"),
        continuity.report("threshold continuity"),
    ]
    .into_iter()
    .flatten()
    .collect())
}

fn c11_properties() -> Result<Outcome, casimir_core::Error> {
    let mut failures = mode_properties()?;

    let mut tilt_worst: f64 = 0.0;
    for wp in [1.0, 2.7 * PI] {
        let c = cfg(wp, 1.0);
        let (a, b) = (spec().with_tilt(0.1), spec().with_tilt(0.2));
        let te_a = e_te_cont(&c, &a)?;
        let de_a = delta_e_cont(&c, &a)?;
        tilt_worst = tilt_worst.max(((te_a - e_te_cont(&c, &b)?) / te_a).abs());
        tilt_worst = tilt_worst.max(((de_a - delta_e_cont(&c, &b)?) / de_a).abs());
    }
    if tilt_worst >= 1e-5 {
        failures.push(format!("tilt invariance {tilt_worst:.3e}"));
    }

    let mut scaling_worst: f64 = 0.0;
    for (wp, l, sigma) in [(1.0, 1.0, 2.5), (3.0, 0.7, 0.3), (8.4, 1.0, 1.7)] {
        let energy = |c: &HalfspaceConfig| -> Result<[f64; 3], casimir_core::Error> {
            let parts = real_axis_parts(c, &spec())?;
            Ok([e_te_imag(c, &spec())?, e_tm_imag(c, &spec())?, parts.tm_minus_te()])
        };
        let e0 = energy(&cfg(wp, l))?;
        let e1 = energy(&cfg(sigma * wp, l / sigma))?;
        for (a, b) in e0.iter().zip(e1) {
            let rhs = a * l.powi(3);
            scaling_worst = scaling_worst.max(((b * (l / sigma).powi(3) - rhs) / rhs).abs());
        }
    }
    if scaling_worst >= 1e-8 {
        failures.push(format!("scaling law {scaling_worst:.3e}"));
    }

    // Central differences with h = 1e-4 carry a truncation error of about
    // 3e-8 relative for an L^-3 energy.
    let mut force_worst: f64 = 0.0;
    let fine = spec().with_rel_tol(1e-12);
    for lambda in [0.5, 2.0, 7.0, 20.0] {
        let f = force(&cfg(lambda, 1.0), &spec())?;
        let h = 1e-4;
        let total = |l: f64| -> Result<f64, casimir_core::Error> {
            let c = cfg(lambda, l);
            Ok(e_te_imag(&c, &fine)? + e_tm_imag(&c, &fine)?)
        };
        let fd = -(total(1.0 + h)? - total(1.0 - h)?) / (2.0 * h);
        force_worst = force_worst.max(((f - fd) / fd).abs());
    }
    if force_worst >= 1e-6 {
        failures.push(format!("force vs finite difference {force_worst:.3e}"));
    }

    let detail = format!("tilt {tilt_worst:.2e}, scaling {scaling_worst:.2e}, force {force_worst:.2e}");
    if failures.is_empty() {
        Ok(Outcome::new(true, format!("modes ok, {detail}")))
    } else {
        Ok(Outcome::new(false, format!("{detail}; {}", failures.join("; "))))
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 11] = [
        ("constant c2", c1_c2),
        ("constant c", c2_c),
        ("small-gap plasmon coefficients", c3_plasmon_coeffs),
        ("TE representation identity", c4_te_identity),
        ("TM representation identity", c5_tm_identity),
        ("ideal-conductor limit", c6_ideal_conductor),
        ("TE small-separation limit", c7_te_small_separation),
        ("TM small-separation limit", c8_tm_small_separation),
        ("TE sum rule", c9_sum_rule),
        ("evanescent phase integral", c10_evanescent_phase),
        ("property suites", c11_properties),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!("criterion {:>2} {}: {name}: {detail}", i + 1, if pass { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
