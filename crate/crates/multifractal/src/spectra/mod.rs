//! Multifractal spectra assembled from pressure curves, with per-point
//! validity statuses, plus the direct level-set counting oracle and the
//! weak-Gibbs residual check.
//!
//! Statuses record which regime justifies each reported value: a smooth
//! pressure region with equilibrium states proves equality with the
//! transform; inside a phase-transition gap only the concave hull upper
//! bound is known (unless a glued decomposition supplies exact per-part
//! spectra); outside the slope range the level set is empty and the value is
//! `-inf`.

pub mod dimension;

pub use dimension::{
    bowen_root, dimension_spectrum, dimension_t, lyapunov_spectra, pointwise_dimension_estimate,
    DimensionSpectrum, LyapunovSpectra,
};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::legendre::{
    alpha_bounds, phase_transitions, transform_l1, SampledConvexFunction,
    SubdifferentialMap,
};
use crate::potentials::Potential;
use crate::scalar::{Bracket, Real};
use crate::systems::{GluedSystem, PiecewiseConformalMap, SymbolicSystem};
use crate::thermo::{
    pressure_curve, pressure_exact_sft, MarkovMeasure, PressureCurve,
};

/// Why a spectrum value at a given α is believed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointStatus {
    /// α is reached by a smooth stretch of the pressure with equilibrium
    /// states: the value is proved equal to the transform.
    ProvedEqual,
    /// α sits inside a subdifferential gap (or equilibrium availability is
    /// not declared): the transform is only the concave-hull upper bound.
    ConcaveHullUpperBound,
    /// Exact value obtained as a pointwise max of per-part spectra of a
    /// glued system.
    GluedExact,
    /// α outside the attainable slope range: the level set is empty.
    OutOfDomain,
    /// Downgraded by the high-entropy window of a discontinuous potential:
    /// only `value <= h0` is claimed here.
    HighEntropyWindow,
    /// Potential takes the value `+inf`; the `q <= 0` regime applies.
    SingularRegime,
}

impl PointStatus {
    pub fn tag(&self) -> &'static str {
        match self {
            PointStatus::ProvedEqual => "proved-equal",
            PointStatus::ConcaveHullUpperBound => "concave-hull-upper-bound",
            PointStatus::GluedExact => "glued-exact",
            PointStatus::OutOfDomain => "out-of-domain",
            PointStatus::HighEntropyWindow => "high-entropy-window",
            PointStatus::SingularRegime => "singular-regime",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            PointStatus::ProvedEqual => {
                "smooth pressure region with equilibrium states: spectrum equals the transform"
            }
            PointStatus::ConcaveHullUpperBound => {
                "phase-transition gap or undeclared equilibria: transform is an upper bound only"
            }
            PointStatus::GluedExact => "pointwise max of per-part spectra of a disjoint union",
            PointStatus::OutOfDomain => "outside the attainable slope range: empty level set",
            PointStatus::HighEntropyWindow => {
                "below the discontinuity entropy h0: only the bound value <= h0 is claimed"
            }
            PointStatus::SingularRegime => {
                "potential takes +inf; q <= 0 regime with spectrum on (alpha_min, alpha_0)"
            }
        }
    }
}

/// Sampled spectrum `α -> value` with per-point validity status. `-inf`
/// encodes an empty level set.
#[derive(Debug, Clone)]
pub struct SpectrumCurve<R> {
    pub alpha_grid: Vec<R>,
    pub values: Vec<R>,
    pub status: Vec<PointStatus>,
    pub label: String,
}

impl<R: Real> SpectrumCurve<R> {
    pub fn len(&self) -> usize {
        self.alpha_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha_grid.is_empty()
    }

    /// Discrete concavity holds when no finite point lies strictly below the
    /// chord of its neighbours (with `-inf` treated as an immediate
    /// violation between finite points).
    pub fn is_discretely_concave(&self, tol: R) -> bool {
        let pts: Vec<(R, R)> = self
            .alpha_grid
            .iter()
            .zip(self.values.iter())
            .map(|(&a, &v)| (a, v))
            .collect();
        // a -inf between two finite values breaks concavity outright
        let finite_idx: Vec<usize> =
            (0..pts.len()).filter(|&i| pts[i].1.is_finite()).collect();
        if let (Some(&first), Some(&last)) = (finite_idx.first(), finite_idx.last()) {
            for i in first..=last {
                if !pts[i].1.is_finite() {
                    return false;
                }
            }
        }
        for w in finite_idx.windows(3) {
            let (a0, v0) = pts[w[0]];
            let (a1, v1) = pts[w[1]];
            let (a2, v2) = pts[w[2]];
            let s1 = (v1 - v0) / (a1 - a0);
            let s2 = (v2 - v1) / (a2 - a1);
            if s2 > s1 + tol {
                return false;
            }
        }
        true
    }

    pub fn value_near(&self, alpha: R, tol: R) -> Option<(R, PointStatus)> {
        let mut best: Option<(R, usize)> = None;
        for (i, &a) in self.alpha_grid.iter().enumerate() {
            let d = (a - alpha).abs();
            if d <= tol && best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, i));
            }
        }
        best.map(|(_, i)| (self.values[i], self.status[i]))
    }
}

/// Options for assembling a Legendre spectrum from a pressure curve.
#[derive(Debug, Clone)]
pub struct SpectrumOptions<R> {
    /// Join `α` to `q` through `T^L3` instead of `T^L1` (entropy/dimension
    /// spectra; flips the sign of the subdifferential maps).
    pub sign_flip: bool,
    /// Kink-detection tolerance.
    pub kink_tol: R,
    /// Equilibrium states exist on smooth stretches (auto-true for
    /// irreducible subshift fixtures).
    pub equilibrium_available: bool,
    /// Entropy map declared upper semi-continuous: spectrum endpoints are
    /// upgraded to proved-equal.
    pub entropy_usc: bool,
    /// Extra α values requested by the caller.
    pub extra_alphas: Vec<R>,
    /// Mark proved points as the singular `q <= 0` regime instead.
    pub singular_regime: bool,
}

impl<R: Real> Default for SpectrumOptions<R> {
    fn default() -> Self {
        SpectrumOptions {
            sign_flip: false,
            kink_tol: R::of(1e-3),
            equilibrium_available: true,
            entropy_usc: true,
            extra_alphas: Vec::new(),
            singular_regime: false,
        }
    }
}

/// Assemble a spectrum as the Legendre transform of a sampled convex
/// function, attaching statuses per α.
pub fn legendre_spectrum<R: Real>(
    f: &SampledConvexFunction<R>,
    refine: Option<&dyn Fn(R) -> R>,
    opts: &SpectrumOptions<R>,
    label: impl Into<String>,
) -> Result<SpectrumCurve<R>> {
    let bounds = alpha_bounds(f);
    let transitions = phase_transitions(f, opts.kink_tol, refine);

    // α grid in L1 coordinates: the image of the q grid under the
    // subdifferential (secant slopes), gap fills, plus requested extras.
    let mut slopes: Vec<R> = Vec::new();
    {
        let (lo, hi) = finite_range(f);
        for i in lo..hi {
            slopes.push((f.values[i + 1] - f.values[i]) / (f.grid[i + 1] - f.grid[i]));
        }
    }
    for t in &transitions {
        let fill = 19usize;
        for k in 1..fill {
            let frac = R::of(k as f64 / fill as f64);
            slopes.push(t.d_minus + (t.d_plus - t.d_minus) * frac);
        }
    }
    for &a in &opts.extra_alphas {
        slopes.push(if opts.sign_flip { -a } else { a });
    }
    slopes.retain(|s| s.is_finite());
    slopes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    slopes.dedup_by(|a, b| (*a - *b).abs() <= R::of(1e-9) * (R::one() + a.abs()));

    let eq_status = if opts.singular_regime {
        PointStatus::SingularRegime
    } else if opts.equilibrium_available {
        PointStatus::ProvedEqual
    } else {
        PointStatus::ConcaveHullUpperBound
    };

    let mut alpha_grid = Vec::with_capacity(slopes.len());
    let mut values = Vec::with_capacity(slopes.len());
    let mut status = Vec::with_capacity(slopes.len());
    let edge_tol = R::of(1e-9);
    for &s in &slopes {
        let t = transform_l1(f, s, refine);
        let in_gap = transitions
            .iter()
            .any(|tr| s > tr.d_minus + edge_tol && s < tr.d_plus - edge_tol);
        let at_edge = (s - bounds.alpha_min).abs() <= edge_tol
            || (s - bounds.alpha_max).abs() <= edge_tol
            || s < bounds.alpha_min
            || s > bounds.alpha_max;
        let st = if t.value == R::neg_infinity() {
            PointStatus::OutOfDomain
        } else if in_gap {
            PointStatus::ConcaveHullUpperBound
        } else if at_edge && !opts.entropy_usc {
            PointStatus::ConcaveHullUpperBound
        } else {
            eq_status
        };
        alpha_grid.push(if opts.sign_flip { -s } else { s });
        values.push(t.value);
        status.push(st);
    }
    if opts.sign_flip {
        alpha_grid.reverse();
        values.reverse();
        status.reverse();
    }
    Ok(SpectrumCurve { alpha_grid, values, status, label: label.into() })
}

fn finite_range<R: Real>(f: &SampledConvexFunction<R>) -> (usize, usize) {
    let lo = f.values.iter().position(|v| v.is_finite()).unwrap_or(0);
    let hi = f.values.iter().rposition(|v| v.is_finite()).unwrap_or(0);
    (lo, hi)
}

/// Birkhoff spectrum `B(α)` as the transform of the pressure curve.
/// Non-convex input is rejected.
pub fn birkhoff_spectrum_legendre<R: Real>(
    curve: &PressureCurve<R>,
    refine: Option<&dyn Fn(R) -> R>,
    opts: &SpectrumOptions<R>,
) -> Result<SpectrumCurve<R>> {
    let f = SampledConvexFunction::from_pressure_curve(curve, R::of(1e-8))?;
    legendre_spectrum(&f, refine, opts, format!("birkhoff[{}]", curve.potential_ref))
}

/// Per-part spectra of a glued system combined by pointwise max. Each part
/// must be kink-free on the grid (otherwise its own decomposition is
/// required); the combined curve is exact and typically non-concave.
pub fn glued_spectrum<R: Real>(
    glued: &GluedSystem,
    potentials: &[Potential<R>],
    q_grid: &[R],
    opts: &SpectrumOptions<R>,
) -> Result<SpectrumCurve<R>> {
    assert_eq!(glued.parts().len(), potentials.len());
    let mut part_curves: Vec<(SampledConvexFunction<R>, &SymbolicSystem, &Potential<R>)> =
        Vec::new();
    for (part, pot) in glued.parts().iter().zip(potentials.iter()) {
        let curve = pressure_curve(part, pot, q_grid)?;
        let f = SampledConvexFunction::from_pressure_curve(&curve, R::of(1e-8))?;
        let refine = |q: R| pressure_exact_sft(part, pot, q).unwrap_or(R::nan());
        let kinks = phase_transitions(&f, opts.kink_tol, Some(&refine));
        if !kinks.is_empty() {
            return Err(Error::Unsupported(format!(
                "glued part {:?} has its own phase transition at q = {:?}; decompose it first",
                part.label(),
                kinks[0].q.to_f64()
            )));
        }
        part_curves.push((f, part, pot));
    }

    // merged α grid = union of per-part slope images
    let mut alphas: Vec<R> = Vec::new();
    for (f, _, _) in &part_curves {
        let (lo, hi) = finite_range(f);
        for i in lo..hi {
            alphas.push((f.values[i + 1] - f.values[i]) / (f.grid[i + 1] - f.grid[i]));
        }
    }
    for &a in &opts.extra_alphas {
        alphas.push(a);
    }
    alphas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    alphas.dedup_by(|a, b| (*a - *b).abs() <= R::of(1e-9) * (R::one() + a.abs()));

    let mut values = Vec::with_capacity(alphas.len());
    let mut status = Vec::with_capacity(alphas.len());
    for &a in &alphas {
        let mut best = R::neg_infinity();
        for (f, part, pot) in &part_curves {
            let refine = |q: R| pressure_exact_sft(part, pot, q).unwrap_or(R::nan());
            let t = transform_l1(f, a, Some(&refine));
            best = best.max(t.value);
        }
        values.push(best);
        status.push(if best == R::neg_infinity() {
            PointStatus::OutOfDomain
        } else {
            PointStatus::GluedExact
        });
    }
    Ok(SpectrumCurve { alpha_grid: alphas, values, status, label: "glued-spectrum".into() })
}

/// One row of the direct counting oracle: at level-set window
/// `[α-ε, α+ε]`, `count` is the number of `n`-cylinders whose certified
/// average bracket meets the window, and `estimate = (1/n) log count`.
#[derive(Debug, Clone, Copy)]
pub struct OracleEstimate<R> {
    pub alpha: R,
    pub epsilon: R,
    pub n: usize,
    pub count: u64,
    pub estimate: R,
}

/// Direct level-set counting oracle over a list of depths `n`.
///
/// Completely independent of the transfer-operator route: only cylinder
/// enumeration and certified average brackets are used. Results are ordered
/// by (`n`, α) and deterministic across thread counts.
pub fn birkhoff_spectrum_direct<R: Real>(
    system: &SymbolicSystem,
    potential: &Potential<R>,
    alpha_grid: &[R],
    epsilon: R,
    n_list: &[usize],
    map: Option<&PiecewiseConformalMap<R>>,
    budget: f64,
) -> Result<Vec<OracleEstimate<R>>> {
    let mut out = Vec::new();
    for &n in n_list {
        if n == 0 {
            return Err(Error::ZeroCylinderLength);
        }
        let count = system.word_count::<R>(n)?.approx();
        if count > budget {
            return Err(Error::BudgetExceeded { n, count, budget });
        }
        let slack = R::of(1e-9) * (R::one() + epsilon.abs());
        let prefixes: Vec<u8> = (0..system.alphabet_size() as u8).collect();
        let partials: Vec<std::result::Result<Vec<u64>, Error>> = prefixes
            .par_iter()
            .map(|&s| {
                let mut counts = vec![0u64; alpha_grid.len()];
                let mut err: Option<Error> = None;
                let res = system.visit_cylinders_with_prefix(&[s], n, &mut |w| {
                    if err.is_some() {
                        return;
                    }
                    match potential.avg_bracket_on_cylinder(w, map) {
                        Ok(b) => {
                            for (i, &a) in alpha_grid.iter().enumerate() {
                                let window = Bracket::new(a - epsilon - slack, a + epsilon + slack);
                                if b.intersects(&window) {
                                    counts[i] += 1;
                                }
                            }
                        }
                        Err(e) => err = Some(e),
                    }
                });
                if let Err(e) = res {
                    return Err(e);
                }
                match err {
                    Some(e) => Err(e),
                    None => Ok(counts),
                }
            })
            .collect();
        let mut counts = vec![0u64; alpha_grid.len()];
        for p in partials {
            let p = p?;
            for (c, add) in counts.iter_mut().zip(p) {
                *c += add;
            }
        }
        let nn = R::of(n as f64);
        for (i, &a) in alpha_grid.iter().enumerate() {
            let estimate = if counts[i] == 0 {
                R::neg_infinity()
            } else {
                R::of(counts[i] as f64).ln() / nn
            };
            out.push(OracleEstimate { alpha: a, epsilon, n, count: counts[i], estimate });
        }
    }
    Ok(out)
}

/// The per-n trace of oracle estimates at a fixed α.
pub fn oracle_trace<R: Real>(estimates: &[OracleEstimate<R>], alpha: R) -> Vec<(usize, R)> {
    estimates
        .iter()
        .filter(|e| (e.alpha - alpha).abs() <= R::of(1e-12) * (R::one() + alpha.abs()))
        .map(|e| (e.n, e.estimate))
        .collect()
}

/// Entropy spectrum of a weak Gibbs measure: center the potential at the
/// declared pressure, build `T_E(q) = P*(q φ1)`, and transform with the
/// flipped sign convention.
pub struct EntropySpectrum<R> {
    pub t_e: PressureCurve<R>,
    pub spectrum: SpectrumCurve<R>,
    pub centered: Potential<R>,
}

pub fn entropy_spectrum<R: Real>(
    system: &SymbolicSystem,
    potential: &Potential<R>,
    p_star: R,
    q_grid: &[R],
    opts: &SpectrumOptions<R>,
) -> Result<EntropySpectrum<R>> {
    let centered = potential.center(p_star);
    let t_e = pressure_curve(system, &centered, q_grid)?;
    let f = SampledConvexFunction::from_pressure_curve(&t_e, R::of(1e-8))?;
    let refine = |q: R| pressure_exact_sft(system, &centered, q).unwrap_or(R::nan());
    let mut o = opts.clone();
    o.sign_flip = true;
    let spectrum = legendre_spectrum(
        &f,
        Some(&refine),
        &o,
        format!("entropy[{}]", potential.label()),
    )?;
    Ok(EntropySpectrum { t_e, spectrum, centered })
}

/// Residual trace of the weak Gibbs property
/// `|-(1/n) log μ([w_1..w_n]) + (1/n) S_n φ(w) - P|` over sample words.
#[derive(Debug, Clone)]
pub struct WeakGibbsReport<R> {
    pub n_list: Vec<usize>,
    /// Max residual over the sample words, one entry per n.
    pub max_residuals: Vec<R>,
    /// `C` fitted as `max n * r_n` over the calibration half of the trace.
    pub c_fit: R,
    /// Residuals on the verification half stayed within `1.5 C / n`.
    pub pass: bool,
    /// A sampled cylinder had zero mass.
    pub zero_mass_flag: bool,
}

pub fn weak_gibbs_check<R: Real>(
    system: &SymbolicSystem,
    potential: &Potential<R>,
    measure: &MarkovMeasure<R>,
    sample_words: &[Vec<u8>],
    n_list: &[usize],
    p: R,
) -> Result<WeakGibbsReport<R>> {
    let depth = potential.depth();
    let mut max_residuals = Vec::with_capacity(n_list.len());
    let mut zero_mass_flag = false;
    for &n in n_list {
        if n == 0 {
            return Err(Error::ZeroCylinderLength);
        }
        let mut worst = R::zero();
        for w in sample_words {
            let need = n + depth - 1;
            if w.len() < need {
                return Err(Error::WordTooShort { need, got: w.len() });
            }
            if !system.is_admissible(&w[..need]) {
                return Err(Error::InvalidSystem(format!(
                    "sample word {:?}... is not admissible",
                    &w[..need.min(8)]
                )));
            }
            let log_mass = measure.log_cylinder_mass(&w[..n])?;
            if log_mass == R::neg_infinity() {
                zero_mass_flag = true;
                worst = R::infinity();
                continue;
            }
            let s_n = potential.birkhoff_sum(w, n)?;
            let nn = R::of(n as f64);
            let r = (-log_mass / nn + s_n / nn - p).abs();
            worst = worst.max(r);
        }
        max_residuals.push(worst);
    }
    // fit C on the first half, verify r_n <= 1.5 C / n on the second half
    let half = (n_list.len() / 2).max(1);
    let mut c_fit = R::zero();
    for i in 0..half {
        let nn = R::of(n_list[i] as f64);
        if max_residuals[i].is_finite() {
            c_fit = c_fit.max(nn * max_residuals[i]);
        } else {
            c_fit = R::infinity();
        }
    }
    let mut pass = !zero_mass_flag && c_fit.is_finite();
    for i in half..n_list.len() {
        let nn = R::of(n_list[i] as f64);
        let bound = R::of(1.5) * c_fit / nn + R::of(1e-12);
        if !(max_residuals[i] <= bound) {
            pass = false;
        }
    }
    Ok(WeakGibbsReport {
        n_list: n_list.to_vec(),
        max_residuals,
        c_fit,
        pass,
        zero_mass_flag,
    })
}

/// High-entropy validity window for bounded measurable potentials:
/// `I_A = {α : transform(α) > h0}` and `I_Q = Q(I_A)`.
#[derive(Debug, Clone)]
pub struct HighEntropyWindow<R> {
    pub h0: R,
    pub i_a: Vec<(R, R)>,
    pub i_q: Vec<(R, R)>,
}

impl<R: Real> HighEntropyWindow<R> {
    pub fn contains_alpha(&self, a: R) -> bool {
        self.i_a.iter().any(|&(lo, hi)| lo <= a && a <= hi)
    }

    /// Downgrade statuses outside `I_A`; values are untouched (outside the
    /// window the transform is already the bound `<= h0`).
    pub fn apply<T: Real>(&self, spectrum: &SpectrumCurve<T>) -> SpectrumCurve<T>
    where
        R: Real,
        T: Real,
    {
        let mut out = spectrum.clone();
        for (i, &a) in spectrum.alpha_grid.iter().enumerate() {
            let af = R::of(a.to_f64().unwrap());
            if !self.contains_alpha(af) && out.status[i] != PointStatus::OutOfDomain {
                out.status[i] = PointStatus::HighEntropyWindow;
            }
        }
        out
    }
}

pub fn high_entropy_window<R: Real>(
    curve: &PressureCurve<R>,
    h0: R,
    refine: Option<&dyn Fn(R) -> R>,
) -> Result<HighEntropyWindow<R>> {
    let f = SampledConvexFunction::from_pressure_curve(curve, R::of(1e-8))?;
    let (lo, hi) = finite_range(&f);
    let mut slopes: Vec<R> = Vec::new();
    for i in lo..hi {
        slopes.push((f.values[i + 1] - f.values[i]) / (f.grid[i + 1] - f.grid[i]));
    }
    slopes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    slopes.dedup_by(|a, b| (*a - *b).abs() <= R::of(1e-9) * (R::one() + a.abs()));
    let val = |a: R| transform_l1(&f, a, refine).value;

    // contiguous runs where the transform exceeds h0, endpoints refined by
    // bisection between neighbouring slope samples
    let above: Vec<bool> = slopes.iter().map(|&a| val(a) > h0).collect();
    let mut i_a: Vec<(R, R)> = Vec::new();
    let mut run_start: Option<usize> = None;
    for i in 0..slopes.len() {
        if above[i] && run_start.is_none() {
            run_start = Some(i);
        }
        let run_ends = run_start.is_some() && (i + 1 == slopes.len() || !above[i + 1]);
        if run_ends {
            let s = run_start.take().unwrap();
            let mut left = slopes[s];
            if s > 0 && !above[s - 1] {
                left = bisect_level(&val, slopes[s - 1], slopes[s], h0);
            }
            let mut right = slopes[i];
            if i + 1 < slopes.len() && !above[i + 1] {
                right = bisect_level(&val, slopes[i + 1], slopes[i], h0);
            }
            i_a.push((left, right));
        }
    }

    // I_Q: grid q's whose subdifferential meets I_A, as contiguous intervals
    let sd = SubdifferentialMap::compute(&f, refine)?;
    let mut i_q: Vec<(R, R)> = Vec::new();
    let mut q_run: Option<(R, R)> = None;
    for (q, iv) in sd.q_grid.iter().zip(sd.intervals.iter()) {
        let hit = i_a
            .iter()
            .any(|&(lo_a, hi_a)| iv.intersects(&Bracket::new(lo_a, hi_a)));
        match (hit, q_run) {
            (true, None) => q_run = Some((*q, *q)),
            (true, Some((s, _))) => q_run = Some((s, *q)),
            (false, Some(run)) => {
                i_q.push(run);
                q_run = None;
            }
            (false, None) => {}
        }
    }
    if let Some(run) = q_run {
        i_q.push(run);
    }
    Ok(HighEntropyWindow { h0, i_a, i_q })
}

/// Bisection for `val(α) = level` between `a_out` (below) and `a_in` (above).
fn bisect_level<R: Real, F: Fn(R) -> R>(val: &F, mut a_out: R, mut a_in: R, level: R) -> R {
    for _ in 0..60 {
        let mid = (a_out + a_in) / R::of(2.0);
        if val(mid) > level {
            a_in = mid;
        } else {
            a_out = mid;
        }
    }
    (a_out + a_in) / R::of(2.0)
}

/// Spectrum of a potential taking the value `+inf`: valid for `q <= 0` only.
/// The grid must not contain positive q; the curve keeps the counting
/// convention at `q = 0` while slopes (and hence the α window) come from the
/// strictly negative side.
pub fn singular_spectrum<R: Real>(
    system: &SymbolicSystem,
    potential: &Potential<R>,
    q_grid: &[R],
    opts: &SpectrumOptions<R>,
) -> Result<(PressureCurve<R>, SpectrumCurve<R>)> {
    if !potential.has_infinite_values() {
        // consistency: a finite table goes through the ordinary route
        let curve = pressure_curve(system, potential, q_grid)?;
        let refine = |q: R| pressure_exact_sft(system, potential, q).unwrap_or(R::nan());
        let spectrum = birkhoff_spectrum_legendre(&curve, Some(&refine), opts)?;
        return Ok((curve, spectrum));
    }
    if let Some(&q) = q_grid.iter().find(|&&q| q > R::zero()) {
        return Err(Error::SingularPositiveQ { q: q.to_f64().unwrap_or(f64::NAN) });
    }
    let curve = pressure_curve(system, potential, q_grid)?;

    // slopes from the strictly negative part; the q = 0 sample may sit
    // strictly above the limit from the left (counting convention) and is
    // excluded from the subdifferential image
    let neg: Vec<usize> = (0..curve.q_grid.len())
        .filter(|&i| curve.q_grid[i] < -R::of(1e-15) && curve.values[i].is_finite())
        .collect();
    if neg.len() < 2 {
        return Err(Error::Unsupported("need at least two negative q samples".into()));
    }
    let mut alphas: Vec<R> = Vec::new();
    for w in neg.windows(2) {
        let (i, j) = (w[0], w[1]);
        alphas.push((curve.values[j] - curve.values[i]) / (curve.q_grid[j] - curve.q_grid[i]));
    }
    for &a in &opts.extra_alphas {
        alphas.push(a);
    }
    alphas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    alphas.dedup_by(|a, b| (*a - *b).abs() <= R::of(1e-9) * (R::one() + a.abs()));
    let alpha_min = alphas.first().copied().unwrap_or(R::zero());
    // alpha_0 = left derivative at 0 taken as the limit of slopes from the
    // negative side
    let alpha_0 = alphas.last().copied().unwrap_or(R::zero());

    let f = SampledConvexFunction::from_pressure_curve(&curve, R::of(1e-8))?;
    let mut values = Vec::with_capacity(alphas.len());
    let mut status = Vec::with_capacity(alphas.len());
    let refine = |q: R| pressure_exact_sft(system, potential, q).unwrap_or(R::nan());
    let tol = R::of(1e-9);
    for &a in &alphas {
        let t = transform_l1(&f, a, Some(&refine));
        if a < alpha_min - tol || t.value == R::neg_infinity() {
            values.push(R::neg_infinity());
            status.push(PointStatus::OutOfDomain);
        } else if a > alpha_0 + tol {
            // beyond the q <= 0 window nothing is claimed
            values.push(t.value);
            status.push(PointStatus::ConcaveHullUpperBound);
        } else {
            values.push(t.value);
            status.push(PointStatus::SingularRegime);
        }
    }
    let spectrum = SpectrumCurve {
        alpha_grid: alphas,
        values,
        status,
        label: format!("singular[{}]", potential.label()),
    };
    Ok((curve, spectrum))
}

#[cfg(test)]
mod tests;
