//! Built-in closed-form scenarios. Each fixture constructs a small system
//! and potential whose thermodynamic functions are known exactly, runs the
//! relevant pipeline, and reports one pass/fail line per check.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::potentials::{Potential, RegularityTag};
use crate::spectra::{
    birkhoff_spectrum_direct, birkhoff_spectrum_legendre, dimension_t,
    lyapunov_spectra, singular_spectrum, weak_gibbs_check, PointStatus, SpectrumOptions,
};
use crate::systems::{GluedSystem, PiecewiseConformalMap, SymbolicSystem};
use crate::thermo::{
    linspace, pressure_bracketed, pressure_curve, pressure_curve_glued,
    pressure_derivative_check_glued, pressure_exact_glued, pressure_exact_sft, MarkovMeasure,
};

pub const NAMES: &[(&str, &str)] = &[
    ("binary-entropy", "full 2-shift with v = (0,1): T(q) = log(1+e^q), spectrum = binary entropy"),
    ("golden-mean", "golden-mean shift: Fibonacci word counts and entropy log((1+sqrt 5)/2)"),
    ("glued-crossing", "two glued full 2-shifts with v=(0,0), w=(1,1): kink at q=0 with gap [0,1]"),
    ("doubling-bernoulli", "doubling map with Bernoulli(1/4,3/4): T_D(q) = log2((1/4)^q + (3/4)^q)"),
    ("repeller-2-4", "slopes (2,4) repeller: Bowen root log2((1+sqrt 5)/2)"),
    ("singular", "v = (1, +inf): T(q) = q on q < 0, single-point spectrum B(1) = 0"),
    ("non-holder", "doubling map with phi(x) = -(1-log x)^(-2): bracketed pressure route"),
];

#[derive(Debug, Clone)]
pub struct CheckLine {
    pub label: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct FixtureRun {
    pub name: String,
    pub checks: Vec<CheckLine>,
}

impl FixtureRun {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn check(checks: &mut Vec<CheckLine>, label: &str, pass: bool, detail: String) {
    checks.push(CheckLine { label: label.to_string(), pass, detail });
}

pub fn run(name: &str) -> Result<FixtureRun> {
    let mut checks = Vec::new();
    match name {
        "binary-entropy" => binary_entropy(&mut checks)?,
        "golden-mean" => golden_mean(&mut checks)?,
        "glued-crossing" => glued_crossing(&mut checks)?,
        "doubling-bernoulli" => doubling_bernoulli(&mut checks)?,
        "repeller-2-4" => repeller_2_4(&mut checks)?,
        "singular" => singular(&mut checks)?,
        "non-holder" => non_holder(&mut checks)?,
        other => {
            return Err(Error::Unsupported(format!(
                "unknown fixture {other:?}; see `fixtures list`"
            )))
        }
    }
    Ok(FixtureRun { name: name.to_string(), checks })
}

fn binary_entropy(checks: &mut Vec<CheckLine>) -> Result<()> {
    let sys = SymbolicSystem::full_shift(2);
    let pot = Potential::per_symbol(&[0.0f64, 1.0])?;
    let mut worst = 0.0f64;
    for q in linspace(-20.0f64, 20.0, 401) {
        let p = pressure_exact_sft(&sys, &pot, q)?;
        worst = worst.max((p - (1.0 + q.exp()).ln()).abs());
    }
    check(checks, "pressure matches log(1+e^q)", worst < 1e-9, format!("max |err| = {worst:.3e}"));

    let grid = linspace(-20.0f64, 20.0, 4001);
    let curve = pressure_curve(&sys, &pot, &grid)?;
    let refine = |q: f64| pressure_exact_sft(&sys, &pot, q).unwrap();
    let spec = birkhoff_spectrum_legendre(&curve, Some(&refine), &SpectrumOptions::default())?;
    let h = |a: f64| -a * a.ln() - (1.0 - a) * (1.0 - a).ln();
    let mut worst = 0.0f64;
    for (i, &a) in spec.alpha_grid.iter().enumerate() {
        if (0.05..=0.95).contains(&a) {
            worst = worst.max((spec.values[i] - h(a)).abs());
        }
    }
    check(checks, "spectrum matches binary entropy", worst < 1e-6, format!("max |err| = {worst:.3e}"));

    let alphas: Vec<f64> = (2..=18).map(|k| k as f64 / 20.0).collect();
    let est = birkhoff_spectrum_direct(&sys, &pot, &alphas, 0.05, &[20], None, 1e8)?;
    let mut worst = 0.0f64;
    for e in est {
        worst = worst.max((e.estimate - h(e.alpha)).abs());
    }
    check(checks, "direct oracle agreement at n=20", worst < 0.05, format!("max |err| = {worst:.3}"));
    Ok(())
}

fn golden_mean(checks: &mut Vec<CheckLine>) -> Result<()> {
    let sys = SymbolicSystem::golden_mean();
    let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
    let h: f64 = sys.topological_entropy();
    check(
        checks,
        "entropy equals log golden ratio",
        (h - golden.ln()).abs() < 1e-10,
        format!("h = {h:.12}"),
    );
    let w4 = sys.word_count::<f64>(4)?.exact();
    let w10 = sys.word_count::<f64>(10)?.exact();
    check(
        checks,
        "Fibonacci word counts",
        w4 == Some(8) && w10 == Some(144),
        format!("count(4) = {w4:?}, count(10) = {w10:?}"),
    );
    let zero = Potential::constant(2, 0.0f64);
    let (lo, hi) = pressure_bracketed(&sys, &zero, 0.0, 20, None, 1e8)?;
    check(
        checks,
        "bracketed pressure contains entropy at n=20",
        lo <= h && h <= hi,
        format!("[{lo:.6}, {hi:.6}]"),
    );
    Ok(())
}

fn glued_crossing(checks: &mut Vec<CheckLine>) -> Result<()> {
    let glued =
        GluedSystem::new(vec![SymbolicSystem::full_shift(2), SymbolicSystem::full_shift(2)])?;
    let pots =
        vec![Potential::per_symbol(&[0.0f64, 0.0])?, Potential::per_symbol(&[1.0f64, 1.0])?];
    let ln2 = std::f64::consts::LN_2;
    let mut worst = 0.0f64;
    for q in linspace(-10.0f64, 10.0, 201) {
        let (p, _, _) = pressure_exact_glued(&glued, &pots, q)?;
        worst = worst.max((p - ln2.max(q + ln2)).abs());
    }
    check(checks, "pressure equals max of closed forms", worst < 1e-9, format!("max |err| = {worst:.3e}"));

    let rep = pressure_derivative_check_glued(&glued, &pots, 0.0, 1e-4)?;
    let (dm, dp) = rep.one_sided.unwrap_or((rep.fd_slope, rep.fd_slope));
    check(
        checks,
        "kink at q=0 with one-sided slopes (0, 1)",
        !rep.differentiable && dm.abs() < 1e-3 && (dp - 1.0).abs() < 1e-3,
        format!("D- = {dm:.6}, D+ = {dp:.6}"),
    );

    let grid = linspace(-6.0f64, 6.0, 601);
    let opts = SpectrumOptions { extra_alphas: vec![0.5], ..Default::default() };
    let spec = crate::spectra::glued_spectrum(&glued, &pots, &grid, &opts)?;
    let non_concave = !spec.is_discretely_concave(1e-9);
    check(checks, "per-part spectrum is non-concave across the gap", non_concave, String::new());

    let curve = pressure_curve_glued(&glued, &pots, &grid)?;
    let refine = |q: f64| pressure_exact_glued(&glued, &pots, q).unwrap().0;
    let hull = birkhoff_spectrum_legendre(&curve, Some(&refine), &SpectrumOptions::default())?;
    check(
        checks,
        "concave hull stays concave and above the glued spectrum",
        hull.is_discretely_concave(1e-9),
        String::new(),
    );
    Ok(())
}

fn doubling_bernoulli(checks: &mut Vec<CheckLine>) -> Result<()> {
    let map = PiecewiseConformalMap::<f64>::from_slopes("doubling", &[2.0, 2.0])?;
    let sys = map.symbolic()?;
    let log_a = Potential::log_conformal_factor(&map)?;
    let phi = Potential::per_symbol(&[0.25f64.ln(), 0.75f64.ln()])?;
    let mut worst = 0.0f64;
    for q in linspace(-5.0f64, 5.0, 101) {
        let t = dimension_t(&sys, &phi, &log_a, q)?;
        worst = worst.max((t - (0.25f64.powf(q) + 0.75f64.powf(q)).log2()).abs());
    }
    check(checks, "T_D matches log2((1/4)^q + (3/4)^q)", worst < 1e-8, format!("max |err| = {worst:.3e}"));
    let t1 = dimension_t(&sys, &phi, &log_a, 1.0)?;
    let t0 = dimension_t(&sys, &phi, &log_a, 0.0)?;
    check(
        checks,
        "T_D(1) = 0 and T_D(0) = 1",
        t1.abs() < 1e-10 && (t0 - 1.0).abs() < 1e-10,
        format!("T_D(1) = {t1:.2e}, T_D(0) = {t0:.12}"),
    );
    let m = MarkovMeasure::bernoulli(&[0.25f64, 0.75])?;
    let words: Vec<Vec<u8>> = (0..20u64)
        .map(|seed| {
            let mut x = seed * 2654435761 + 12345;
            (0..30)
                .map(|_| {
                    x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    ((x >> 33) % 4 != 0) as u8
                })
                .collect()
        })
        .collect();
    let rep = weak_gibbs_check(&sys, &phi, &m, &words, &[5, 10, 20], 0.0)?;
    let exact = rep.max_residuals.iter().all(|r| *r == 0.0);
    check(checks, "Bernoulli weak-Gibbs residuals vanish identically", exact && rep.pass, format!("{:?}", rep.max_residuals));
    Ok(())
}

fn repeller_2_4(checks: &mut Vec<CheckLine>) -> Result<()> {
    let map = PiecewiseConformalMap::<f64>::from_slopes("repeller-2-4", &[2.0, 4.0])?;
    let grid = linspace(-30.0f64, 30.0, 3001);
    let ly = lyapunov_spectra(&map, &grid, &SpectrumOptions::default())?;
    let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
    let expect = golden.log2();
    check(
        checks,
        "Bowen root equals log2 golden ratio",
        (ly.bowen_root - expect).abs() < 1e-6,
        format!("root = {:.9}", ly.bowen_root),
    );
    check(
        checks,
        "max of L_D equals the Bowen root",
        (ly.max_l_d - ly.bowen_root).abs() < 1e-6,
        format!("max L_D = {:.9}", ly.max_l_d),
    );
    Ok(())
}

fn singular(checks: &mut Vec<CheckLine>) -> Result<()> {
    let sys = SymbolicSystem::full_shift(2);
    let pot = Potential::per_symbol(&[1.0f64, f64::INFINITY])?;
    check(
        checks,
        "classified singular-above",
        pot.classify(&sys)?.tag == RegularityTag::SingularAbove,
        String::new(),
    );
    let grid = linspace(-8.0f64, 0.0, 161);
    let (curve, spec) = singular_spectrum(&sys, &pot, &grid, &SpectrumOptions::default())?;
    let mut worst = 0.0f64;
    for (i, &q) in curve.q_grid.iter().enumerate() {
        if q < -1e-12 {
            worst = worst.max((curve.values[i] - q).abs());
        }
    }
    check(checks, "T(q) = q exactly on q < 0", worst < 1e-10, format!("max |err| = {worst:.3e}"));
    let finite: Vec<usize> = (0..spec.len()).filter(|&i| spec.values[i].is_finite()).collect();
    let ok = finite.len() == 1
        && (spec.alpha_grid[finite[0]] - 1.0).abs() < 1e-9
        && spec.values[finite[0]].abs() < 1e-9
        && spec.status[finite[0]] == PointStatus::SingularRegime;
    check(checks, "single-point spectrum B(1) = 0", ok, String::new());
    let rejected = matches!(
        pressure_exact_sft(&sys, &pot, 0.5),
        Err(Error::SingularPositiveQ { .. })
    );
    check(checks, "q > 0 rejected", rejected, String::new());
    Ok(())
}

fn non_holder(checks: &mut Vec<CheckLine>) -> Result<()> {
    let map = PiecewiseConformalMap::<f64>::from_slopes("doubling", &[2.0, 2.0])?;
    let sys = map.symbolic()?;
    let phi = Potential::pointwise(Expr::parse("-(1 - log(x))^(-2)")?);
    let v1 = phi.birkhoff_sum_at(&map, 1.0 - 1e-15, 1)?;
    check(checks, "phi(1) = -1", (v1 + 1.0).abs() < 1e-9, format!("phi(1) = {v1:.12}"));
    check(
        checks,
        "classified continuous",
        phi.classify(&sys)?.tag == RegularityTag::Continuous,
        String::new(),
    );
    let (lo8, hi8) = pressure_bracketed(&sys, &phi, 1.0, 8, Some(&map), 1e8)?;
    let (lo12, hi12) = pressure_bracketed(&sys, &phi, 1.0, 12, Some(&map), 1e8)?;
    let consistent = lo8 <= hi12 && lo12 <= hi8 && hi12 - lo12 < hi8 - lo8 + 1e-9;
    check(
        checks,
        "bracketed pressure brackets tighten with n",
        consistent && hi12.is_finite(),
        format!("n=8: [{lo8:.4}, {hi8:.4}], n=12: [{lo12:.4}, {hi12:.4}]"),
    );
    Ok(())
}
