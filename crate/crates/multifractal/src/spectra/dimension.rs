//! Lyapunov and pointwise-dimension spectra for uniformly expanding
//! piecewise-conformal maps.
//!
//! `L_E` is the Birkhoff spectrum of `log a`; `L_D(α) = L_E(α)/α` is a
//! rescaling, not a transform, and may fail to be concave. The dimension
//! function `T_D(q)` is defined implicitly by `P*(q φ1 - T_D(q) log a) = 0`
//! and found by bisection in `t`; the dimension spectrum is its flipped-sign
//! transform. The root of `P*(-s log a) = 0` doubles as the Hausdorff
//! dimension of the repeller.

use super::{
    birkhoff_spectrum_legendre, legendre_spectrum, PointStatus, SpectrumCurve, SpectrumOptions,
};
use crate::error::{Error, Result};
use crate::legendre::SampledConvexFunction;
use crate::potentials::Potential;
use crate::scalar::Real;
use crate::systems::{PiecewiseConformalMap, SymbolicSystem};
use crate::thermo::{
    pressure_curve, pressure_exact_sft, pressure_exact_terms, MarkovMeasure, PressureCurve,
};

/// Root of `P*(-s log a) = 0` by bisection; unique under uniform expansion
/// since the pressure is strictly decreasing in `s`.
pub fn bowen_root<R: Real>(system: &SymbolicSystem, log_a: &Potential<R>) -> Result<R> {
    let p = |s: R| pressure_exact_terms(system, &[(-s, log_a)]);
    let p0 = p(R::zero())?;
    if p0 < R::zero() {
        return Err(Error::Unsupported(
            "pressure already negative at s = 0; no Bowen root in [0, inf)".into(),
        ));
    }
    let (lam_min, _) = log_a.finite_values_range();
    if !(lam_min > R::zero()) {
        return Err(Error::Unsupported(
            "map is not uniformly expanding (min log-factor <= 0)".into(),
        ));
    }
    let mut hi = p0 / lam_min + R::one();
    let mut lo = R::zero();
    let mut tries = 0;
    while p(hi)? > R::zero() {
        lo = hi;
        hi = hi * R::of(2.0);
        tries += 1;
        if tries > 60 {
            return Err(Error::Unsupported("Bowen root bracket did not close".into()));
        }
    }
    for _ in 0..200 {
        let mid = (lo + hi) / R::of(2.0);
        if p(mid)? > R::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < R::of(1e-13) * (R::one() + hi.abs()) {
            break;
        }
    }
    Ok((lo + hi) / R::of(2.0))
}

/// `T_D(q)`: the `t` solving `P*(q φ1 - t log a) = 0`, to absolute
/// tolerance `1e-10`. Returns `+inf` when the pressure stays positive up to
/// the structural bound `t_max = (h_top + |q| ||φ1||) / log λ_min + 1`.
/// A non-decreasing `t`-section reports a violated expansivity assumption.
pub fn dimension_t<R: Real>(
    system: &SymbolicSystem,
    phi1: &Potential<R>,
    log_a: &Potential<R>,
    q: R,
) -> Result<R> {
    let (lam_min, _) = log_a.finite_values_range();
    if !(lam_min > R::zero()) {
        return Err(Error::Unsupported(
            "map is not uniformly expanding (min log-factor <= 0)".into(),
        ));
    }
    let g = |t: R| pressure_exact_terms(system, &[(q, phi1), (-t, log_a)]);
    let h_top: R = system.topological_entropy();
    let norm = phi1.finite_bound();
    let t_max = (h_top + q.abs() * norm) / lam_min + R::one();

    // expansivity probe: strictly decreasing t-section
    let mut prev = R::infinity();
    let mut t_probe = -t_max;
    for _ in 0..5 {
        let v = g(t_probe)?;
        if v >= prev {
            return Err(Error::NonMonotoneSection { q: q.to_f64().unwrap_or(f64::NAN) });
        }
        prev = v;
        t_probe = t_probe + t_max / R::of(2.0);
    }

    if g(t_max)? > R::zero() {
        return Ok(R::infinity());
    }
    let mut lo = -t_max;
    let mut expand = 0;
    while g(lo)? <= R::zero() {
        lo = lo * R::of(2.0);
        expand += 1;
        if expand > 8 {
            return Err(Error::Unsupported(format!(
                "no sign change in t for q = {q}: pressure never positive"
            )));
        }
    }
    let mut hi = t_max;
    for _ in 0..200 {
        let mid = (lo + hi) / R::of(2.0);
        if g(mid)? > R::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < R::of(1e-11) {
            break;
        }
    }
    Ok((lo + hi) / R::of(2.0))
}

/// Both Lyapunov spectra of a uniformly expanding map.
#[derive(Debug, Clone)]
pub struct LyapunovSpectra<R> {
    pub l_e: SpectrumCurve<R>,
    pub l_d: SpectrumCurve<R>,
    pub bowen_root: R,
    /// max over the α grid of `L_D(α)`; equals the Bowen root within
    /// tolerance on uniformly expanding fixtures.
    pub max_l_d: R,
    pub pressure: PressureCurve<R>,
}

pub fn lyapunov_spectra<R: Real>(
    map: &PiecewiseConformalMap<R>,
    q_grid: &[R],
    opts: &SpectrumOptions<R>,
) -> Result<LyapunovSpectra<R>> {
    if !map.is_uniformly_expanding() {
        return Err(Error::Unsupported(
            "Lyapunov spectra require a uniformly expanding map (a(x) > 1)".into(),
        ));
    }
    let system = map.symbolic()?;
    let log_a = Potential::log_conformal_factor(map)?;
    if !log_a.is_locally_constant() {
        return Err(Error::Unsupported(
            "exact Lyapunov spectra need piecewise-constant factors; use the bracketed pressure route".into(),
        ));
    }
    let curve = pressure_curve(&system, &log_a, q_grid)?;
    let root = bowen_root(&system, &log_a)?;
    let refine = |q: R| pressure_exact_sft(&system, &log_a, q).unwrap_or(R::nan());
    // the maximizer of L_D is the tangency α at q = -root; include it in the
    // grid so the max is sampled, not just approached
    let mut o = opts.clone();
    {
        // step large enough that eigensolver noise (~1e-12) stays below the
        // truncation error
        let h = R::of(1e-4);
        let alpha_star = (refine(-root + h) - refine(-root - h)) / (h + h);
        o.extra_alphas.push(alpha_star);
    }
    let l_e = birkhoff_spectrum_legendre(&curve, Some(&refine), &o)?;

    // L_D(α) = L_E(α) / α for α > 0, pointwise by construction
    let mut alpha = Vec::new();
    let mut values = Vec::new();
    let mut status = Vec::new();
    let mut max_l_d = R::neg_infinity();
    for (i, &a) in l_e.alpha_grid.iter().enumerate() {
        if a <= R::of(1e-12) {
            continue;
        }
        alpha.push(a);
        let v = if l_e.values[i].is_finite() { l_e.values[i] / a } else { l_e.values[i] };
        if v.is_finite() {
            max_l_d = max_l_d.max(v);
        }
        values.push(v);
        status.push(l_e.status[i]);
    }
    let l_d = SpectrumCurve { alpha_grid: alpha, values, status, label: "lyapunov-dimension".into() };
    Ok(LyapunovSpectra { l_e, l_d, bowen_root: root, max_l_d, pressure: curve })
}

/// Dimension spectrum assembled from the implicit `T_D` curve.
#[derive(Debug, Clone)]
pub struct DimensionSpectrum<R> {
    pub t_d: PressureCurve<R>,
    pub spectrum: SpectrumCurve<R>,
    /// The (q,t)-pressure was kink-free on the strip below the graph of
    /// `T_D` (five t-sections and five strip-following q-sections).
    pub smooth_strip: bool,
}

pub fn dimension_spectrum<R: Real>(
    system: &SymbolicSystem,
    phi1: &Potential<R>,
    log_a: &Potential<R>,
    q_grid: &[R],
    opts: &SpectrumOptions<R>,
) -> Result<DimensionSpectrum<R>> {
    let mut values = Vec::with_capacity(q_grid.len());
    for &q in q_grid {
        values.push(dimension_t(system, phi1, log_a, q)?);
    }
    let t_d = PressureCurve {
        q_grid: q_grid.to_vec(),
        values: values.clone(),
        method: vec![crate::thermo::Method::ExactSpectral; q_grid.len()],
        system_ref: system.label().to_string(),
        potential_ref: format!("dimension[{}]", phi1.label()),
    };

    // finite window (```+inf``` samples excluded, α window adjusted by the
    // convex-function constructor rejecting interior holes)
    let finite_q: Vec<R> = q_grid
        .iter()
        .zip(values.iter())
        .filter(|(_, v)| v.is_finite())
        .map(|(&q, _)| q)
        .collect();
    if finite_q.len() < 3 {
        return Err(Error::Unsupported("T_D is finite on fewer than three grid points".into()));
    }

    let smooth_strip = strip_kink_free(system, phi1, log_a, &t_d, opts.kink_tol)?;

    let f = SampledConvexFunction::from_pressure_curve(&t_d, R::of(1e-7))?;
    let refine = |q: R| dimension_t(system, phi1, log_a, q).unwrap_or(R::nan());
    let mut o = opts.clone();
    o.sign_flip = true;
    o.equilibrium_available = opts.equilibrium_available && smooth_strip;
    let mut spectrum = legendre_spectrum(&f, Some(&refine), &o, "dimension-spectrum")?;
    if !smooth_strip {
        for st in spectrum.status.iter_mut() {
            if *st == PointStatus::ProvedEqual {
                *st = PointStatus::ConcaveHullUpperBound;
            }
        }
    }
    Ok(DimensionSpectrum { t_d, spectrum, smooth_strip })
}

/// Kink scan of the (q,t)-pressure on the strip `T_D(q) - η < t < T_D(q)`,
/// with `η = 0.05 (1 + max|T_D|)`: five vertical t-sections and five
/// strip-following q-sections must be kink-free at the stated tolerance.
fn strip_kink_free<R: Real>(
    system: &SymbolicSystem,
    phi1: &Potential<R>,
    log_a: &Potential<R>,
    t_d: &PressureCurve<R>,
    tol: R,
) -> Result<bool> {
    let finite: Vec<(R, R)> = t_d
        .q_grid
        .iter()
        .zip(t_d.values.iter())
        .filter(|(_, v)| v.is_finite())
        .map(|(&q, &v)| (q, v))
        .collect();
    if finite.len() < 3 {
        return Ok(false);
    }
    let t_mag = finite.iter().fold(R::zero(), |m, &(_, v)| m.max(v.abs()));
    let eta = R::of(0.05) * (R::one() + t_mag);
    let p = |q: R, t: R| pressure_exact_terms(system, &[(q, phi1), (-t, log_a)]);

    let (q_lo, q_hi) = (finite[0].0, finite[finite.len() - 1].0);
    let m = 41;
    // vertical sections: t sweeps the strip at five interior q's
    for k in 1..=5 {
        let q = q_lo + (q_hi - q_lo) * R::of(k as f64 / 6.0);
        let t_top = dimension_t(system, phi1, log_a, q)?;
        if !t_top.is_finite() {
            continue;
        }
        let samples: Result<Vec<R>> = (0..m)
            .map(|i| p(q, t_top - eta + eta * R::of(i as f64 / (m - 1) as f64)))
            .collect();
        if has_kink(&samples?, tol) {
            return Ok(false);
        }
    }
    // strip-following sections: q sweeps at five depths below the graph
    for k in 1..=5 {
        let delta = eta * R::of(k as f64 / 6.0);
        let mut samples = Vec::with_capacity(m);
        for i in 0..m {
            let q = q_lo + (q_hi - q_lo) * R::of(i as f64 / (m - 1) as f64);
            let t_top = dimension_t(system, phi1, log_a, q)?;
            if !t_top.is_finite() {
                samples.clear();
                break;
            }
            samples.push(p(q, t_top - delta)?);
        }
        if samples.len() == m && has_kink(&samples, tol) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Slope-jump detector on an evenly sampled section (no convexity assumed).
fn has_kink<R: Real>(samples: &[R], tol: R) -> bool {
    for w in samples.windows(3) {
        let s1 = w[1] - w[0];
        let s2 = w[2] - w[1];
        if (s2 - s1).abs() > tol * R::of(2.0) {
            return true;
        }
    }
    false
}

/// Measure-averaged cylinder estimate of the pointwise dimension
/// `h_ν(x)/λ(x)`: `sum_w ν[w] (-log ν[w]) / S_n log a(w)` over `n`-cylinders.
/// For an exact-dimensional measure this converges to `h(ν)/λ(ν)`; only
/// cylinder masses and the factor sums enter, not the entropy formula.
pub fn pointwise_dimension_estimate<R: Real>(
    measure: &MarkovMeasure<R>,
    log_a: &Potential<R>,
    n: usize,
) -> Result<R> {
    if n < measure.depth {
        return Err(Error::WordTooShort { need: measure.depth, got: n });
    }
    if !log_a.is_locally_constant() || log_a.depth() > measure.depth {
        return Err(Error::Unsupported(
            "dimension estimate needs a locally constant factor no deeper than the measure".into(),
        ));
    }
    let d = measure.depth;
    let states = &measure.states;
    // per-state factor contribution of the appended symbol, and of the seed
    let sym_log_a = |s: u8| log_a.value_on_window(&[s]);
    let mut acc = R::zero();
    // DFS over chain paths of n - d steps
    struct Frame<R> {
        state: usize,
        consumed: usize,
        log_mass: R,
        s_log_a: R,
    }
    let mut stack: Vec<Frame<R>> = Vec::new();
    for (i, w) in states.iter().enumerate() {
        if measure.stationary[i] <= R::zero() {
            continue;
        }
        let mut s_a = R::zero();
        for &s in w.iter() {
            s_a = s_a + sym_log_a(s)?;
        }
        stack.push(Frame {
            state: i,
            consumed: d,
            log_mass: measure.stationary[i].ln(),
            s_log_a: s_a,
        });
    }
    while let Some(f) = stack.pop() {
        if f.consumed == n {
            let mass = f.log_mass.exp();
            acc = acc + mass * (-f.log_mass) / f.s_log_a;
            continue;
        }
        for (j, w) in states.iter().enumerate() {
            let p = measure.stochastic.get(f.state, j);
            if p <= R::zero() {
                continue;
            }
            stack.push(Frame {
                state: j,
                consumed: f.consumed + 1,
                log_mass: f.log_mass + p.ln(),
                s_log_a: f.s_log_a + sym_log_a(*w.last().unwrap())?,
            });
        }
    }
    Ok(acc)
}
