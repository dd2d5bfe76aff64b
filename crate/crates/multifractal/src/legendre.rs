//! Convex-analysis toolkit: one-sided derivatives, subdifferential maps, the
//! four Legendre-transform sign conventions, domain bounds, and
//! phase-transition (kink) detection on sampled convex functions.
//!
//! Sign conventions, for convex `T` and concave `S`:
//!
//! ```text
//! T^L1(α) = inf_q (T(q) - qα)        S^L2(q) = sup_α (S(α) + qα)
//! T^L3(α) = inf_q (T(q) + qα)        S^L4(q) = sup_α (S(α) - qα)
//! ```
//!
//! A sampled representation can never certify smoothness, only bound
//! subdifferential gaps; "no kink" below always means "no kink above the
//! stated tolerance".

use crate::error::{Error, Result};
use crate::scalar::{Bracket, Real};
use crate::thermo::PressureCurve;

/// A convex function known through samples on a sorted grid. `+inf` values
/// are allowed only on an initial or final contiguous block (hard domain
/// constraints); `-inf` is rejected.
#[derive(Debug, Clone)]
pub struct SampledConvexFunction<R> {
    pub grid: Vec<R>,
    pub values: Vec<R>,
    pub provenance: String,
}

impl<R: Real> SampledConvexFunction<R> {
    pub fn new(grid: Vec<R>, values: Vec<R>, tol: R, provenance: impl Into<String>) -> Result<Self> {
        if grid.len() != values.len() || grid.len() < 2 {
            return Err(Error::NonConvex("need at least two samples".into()));
        }
        for w in grid.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::NonConvex("grid must be strictly increasing".into()));
            }
        }
        let mut seen_finite = false;
        let mut finite_ended = false;
        for v in &values {
            if v.is_nan() || *v == R::neg_infinity() {
                return Err(Error::NonConvex(format!("value {v} not allowed")));
            }
            if v.is_finite() {
                if finite_ended {
                    return Err(Error::NonConvex(
                        "+inf values must form boundary blocks, not holes".into(),
                    ));
                }
                seen_finite = true;
            } else if seen_finite {
                finite_ended = true;
            }
        }
        let f = SampledConvexFunction { grid, values, provenance: provenance.into() };
        let defect = f.convexity_defect();
        if defect < -tol {
            return Err(Error::NonConvex(format!(
                "secant slopes decrease by {defect} (tolerance {tol})"
            )));
        }
        Ok(f)
    }

    pub fn from_pressure_curve(curve: &PressureCurve<R>, tol: R) -> Result<Self> {
        SampledConvexFunction::new(
            curve.q_grid.clone(),
            curve.values.clone(),
            tol,
            format!("pressure[{} ; {}]", curve.system_ref, curve.potential_ref),
        )
    }

    /// Most negative slope increment over consecutive finite triples.
    pub fn convexity_defect(&self) -> R {
        let mut worst = R::zero();
        let f = &self.values;
        for i in 0..self.grid.len().saturating_sub(2) {
            if !(f[i].is_finite() && f[i + 1].is_finite() && f[i + 2].is_finite()) {
                continue;
            }
            let s1 = (f[i + 1] - f[i]) / (self.grid[i + 1] - self.grid[i]);
            let s2 = (f[i + 2] - f[i + 1]) / (self.grid[i + 2] - self.grid[i + 1]);
            worst = worst.min(s2 - s1);
        }
        worst
    }

    /// Indices of the finite block.
    fn finite_range(&self) -> (usize, usize) {
        let lo = self.values.iter().position(|v| v.is_finite()).unwrap_or(0);
        let hi = self.values.iter().rposition(|v| v.is_finite()).unwrap_or(0);
        (lo, hi)
    }

    fn secant(&self, i: usize, j: usize) -> R {
        (self.values[j] - self.values[i]) / (self.grid[j] - self.grid[i])
    }

    /// Extremes of the finite secant slopes (the attainable slope range).
    pub fn secant_range(&self) -> (R, R) {
        let (lo, hi) = self.finite_range();
        let mut mn = R::infinity();
        let mut mx = R::neg_infinity();
        for i in lo..hi {
            let s = self.secant(i, i + 1);
            mn = mn.min(s);
            mx = mx.max(s);
        }
        if mn > mx {
            (R::zero(), R::zero())
        } else {
            (mn, mx)
        }
    }

    pub fn grid_index_of(&self, q: R) -> Option<usize> {
        self.grid.iter().position(|&g| (g - q).abs() <= R::of(1e-12) * (R::one() + g.abs()))
    }
}

/// One-sided derivatives at a grid point.
#[derive(Debug, Clone, Copy)]
pub struct OneSidedDerivatives<R> {
    pub d_minus: R,
    pub d_plus: R,
    /// True when one side had to fall back to an asymptotic (boundary)
    /// estimate.
    pub boundary: bool,
}

/// One-sided derivatives of `f` at grid point `q`. With a `refine` callback
/// the raw secants are Richardson-extrapolated (`2 s(h/2) - s(h)`), removing
/// the first-order error of a one-sided difference.
pub fn one_sided_derivatives<R: Real>(
    f: &SampledConvexFunction<R>,
    q: R,
    refine: Option<&dyn Fn(R) -> R>,
) -> Result<OneSidedDerivatives<R>> {
    let i = f
        .grid_index_of(q)
        .ok_or_else(|| Error::Unsupported(format!("q = {q} is not a grid point")))?;
    let (lo, hi) = f.finite_range();
    if i < lo || i > hi || !f.values[i].is_finite() {
        return Err(Error::Unsupported(format!("q = {q} is outside the finite region")));
    }
    let side = |j_other: usize, left: bool| -> R {
        let h = (f.grid[i] - f.grid[j_other]).abs();
        let raw = if left { f.secant(j_other, i) } else { f.secant(i, j_other) };
        match refine {
            Some(eval) => {
                let h2 = h / R::of(2.0);
                let q2 = if left { q - h2 } else { q + h2 };
                let s2 = if left {
                    (f.values[i] - eval(q2)) / h2
                } else {
                    (eval(q2) - f.values[i]) / h2
                };
                s2 + s2 - raw
            }
            None => raw,
        }
    };
    let mut boundary = false;
    let d_minus = if i > lo {
        side(i - 1, true)
    } else {
        boundary = true;
        // asymptotic estimate: the first finite secant
        f.secant(lo, lo + 1)
    };
    let d_plus = if i < hi {
        side(i + 1, false)
    } else {
        boundary = true;
        f.secant(hi - 1, hi)
    };
    Ok(OneSidedDerivatives { d_minus, d_plus, boundary })
}

/// Per-grid-point subdifferential intervals `[D^-T(q), D^+T(q)]`.
#[derive(Debug, Clone)]
pub struct SubdifferentialMap<R> {
    pub q_grid: Vec<R>,
    pub intervals: Vec<Bracket<R>>,
}

impl<R: Real> SubdifferentialMap<R> {
    pub fn compute(
        f: &SampledConvexFunction<R>,
        refine: Option<&dyn Fn(R) -> R>,
    ) -> Result<Self> {
        let (lo, hi) = f.finite_range();
        let mut q_grid = Vec::new();
        let mut intervals = Vec::new();
        for i in lo..=hi {
            let d = one_sided_derivatives(f, f.grid[i], refine)?;
            q_grid.push(f.grid[i]);
            intervals.push(Bracket::new(d.d_minus.min(d.d_plus), d.d_minus.max(d.d_plus)));
        }
        Ok(SubdifferentialMap { q_grid, intervals })
    }

    /// Monotonicity defect: how far interval ends regress as q grows
    /// (nonpositive slack means monotone).
    pub fn monotonicity_defect(&self) -> R {
        let mut worst = R::zero();
        for w in self.intervals.windows(2) {
            worst = worst.min(w[1].lo - w[0].hi);
        }
        -worst
    }

    /// Set-valued inverse: grid q's whose subdifferential meets `[a, b]`.
    pub fn preimage(&self, a: R, b: R) -> Vec<R> {
        let want = Bracket::new(a, b);
        self.q_grid
            .iter()
            .zip(self.intervals.iter())
            .filter(|(_, iv)| iv.intersects(&want))
            .map(|(&q, _)| q)
            .collect()
    }
}

/// A Legendre-transform evaluation.
#[derive(Debug, Clone, Copy)]
pub struct TransformPoint<R> {
    pub value: R,
    /// Interval of grid minimizers/maximizers (flat within tolerance).
    pub arg: Bracket<R>,
    /// True when golden-section refinement between grid points was applied.
    pub refined: bool,
    /// True when the slope test fired: the witness is an asymptotic-slope
    /// certificate, not an interior minimizer.
    pub slope_certificate: bool,
}

/// `T^L1(α) = inf_q (T(q) - qα)`.
///
/// Values beyond the sampled slope range are reported `-inf` with a
/// slope certificate (the boundary secant). With `refine`, a golden-section
/// pass between the bracketing grid points sharpens the minimum.
pub fn transform_l1<R: Real>(
    f: &SampledConvexFunction<R>,
    alpha: R,
    refine: Option<&dyn Fn(R) -> R>,
) -> TransformPoint<R> {
    let (lo, hi) = f.finite_range();
    // global extremes over the finite secants: identical to the first/last
    // secant for exactly convex data, robust to solver noise on affine
    // stretches
    let (slope_lo, slope_hi) = f.secant_range();
    // margin covers slope noise of refined/derived α values; genuinely
    // unattainable α sit far beyond it
    let eps = R::of(1e-9) * (R::one() + alpha.abs());
    if alpha > slope_hi + eps || alpha < slope_lo - eps {
        // g(q) = T(q) - qα keeps decreasing toward the relevant end
        return TransformPoint {
            value: R::neg_infinity(),
            arg: if alpha > slope_hi {
                Bracket::point(f.grid[hi])
            } else {
                Bracket::point(f.grid[lo])
            },
            refined: false,
            slope_certificate: true,
        };
    }
    let g = |i: usize| f.values[i] - f.grid[i] * alpha;
    let mut best = R::infinity();
    let mut best_i = lo;
    for i in lo..=hi {
        let v = g(i);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    // flat argmin interval
    let flat = R::of(1e-11) * (R::one() + best.abs());
    let mut a = best_i;
    while a > lo && g(a - 1) <= best + flat {
        a -= 1;
    }
    let mut b = best_i;
    while b < hi && g(b + 1) <= best + flat {
        b += 1;
    }
    let mut value = best;
    let mut refined = false;
    if let Some(eval) = refine {
        let ql = f.grid[best_i.saturating_sub(1).max(lo)];
        let qr = f.grid[(best_i + 1).min(hi)];
        if qr > ql {
            let gq = |q: R| eval(q) - q * alpha;
            let (qm, vm) = golden_min(&gq, ql, qr);
            if vm < value {
                value = vm;
                refined = true;
                let _ = qm;
            }
        }
    }
    TransformPoint {
        value,
        arg: Bracket::new(f.grid[a], f.grid[b]),
        refined,
        slope_certificate: false,
    }
}

/// `S^L2(q) = sup_α (S(α) + qα)` over a sampled (not necessarily concave)
/// function; `-inf` samples (empty level sets) are skipped.
pub fn transform_l2<R: Real>(alphas: &[R], values: &[R], q: R) -> TransformPoint<R> {
    debug_assert_eq!(alphas.len(), values.len());
    let mut best = R::neg_infinity();
    let mut best_i = None;
    for (i, (&a, &s)) in alphas.iter().zip(values.iter()).enumerate() {
        if s == R::neg_infinity() {
            continue;
        }
        let v = s + q * a;
        if v > best {
            best = v;
            best_i = Some(i);
        }
    }
    match best_i {
        Some(i) => TransformPoint {
            value: best,
            arg: Bracket::point(alphas[i]),
            refined: false,
            slope_certificate: false,
        },
        None => TransformPoint {
            value: R::neg_infinity(),
            arg: Bracket::point(R::zero()),
            refined: false,
            slope_certificate: false,
        },
    }
}

/// `T^L3(α) = inf_q (T(q) + qα)`: the sign-flipped variant of L1.
pub fn transform_l3<R: Real>(
    f: &SampledConvexFunction<R>,
    alpha: R,
    refine: Option<&dyn Fn(R) -> R>,
) -> TransformPoint<R> {
    transform_l1(f, -alpha, refine)
}

/// `S^L4(q) = sup_α (S(α) - qα)`: the sign-flipped variant of L2.
pub fn transform_l4<R: Real>(alphas: &[R], values: &[R], q: R) -> TransformPoint<R> {
    transform_l2(alphas, values, -q)
}

/// Domain bounds of the transform: asymptotic slopes of the convex function,
/// estimated from the extreme finite secants of the grid.
#[derive(Debug, Clone, Copy)]
pub struct AlphaBounds<R> {
    pub alpha_min: R,
    pub alpha_max: R,
    /// Always true: sampled grids only ever yield asymptotic estimates.
    pub grid_estimate: bool,
}

pub fn alpha_bounds<R: Real>(f: &SampledConvexFunction<R>) -> AlphaBounds<R> {
    let (alpha_min, alpha_max) = f.secant_range();
    AlphaBounds { alpha_min, alpha_max, grid_estimate: true }
}

/// A confirmed non-differentiability point with its subdifferential gap
/// `[D^-, D^+]`: the transform is affine (non-strictly-concave) on that
/// α-interval.
#[derive(Debug, Clone, Copy)]
pub struct PhaseTransition<R> {
    pub q: R,
    pub d_minus: R,
    pub d_plus: R,
}

impl<R: Real> PhaseTransition<R> {
    pub fn gap(&self) -> R {
        self.d_plus - self.d_minus
    }
}

/// Detect kinks of a sampled convex function above `tol`.
///
/// Sampling a smooth convex function always shows a positive secant gap of
/// order `step * T''`, so raw candidates are refined at five dyadic scales
/// when `refine` is available: a genuine kink keeps its gap stable as the
/// scale shrinks, curvature decays linearly with it.
pub fn phase_transitions<R: Real>(
    f: &SampledConvexFunction<R>,
    tol: R,
    refine: Option<&dyn Fn(R) -> R>,
) -> Vec<PhaseTransition<R>> {
    let (lo, hi) = f.finite_range();
    let mut out = Vec::new();
    if hi - lo < 2 {
        return out;
    }
    for i in (lo + 1)..hi {
        let s_left = f.secant(i - 1, i);
        let s_right = f.secant(i, i + 1);
        let raw_gap = s_right - s_left;
        if raw_gap <= tol / R::of(4.0) {
            continue;
        }
        match refine {
            None => {
                if raw_gap > tol {
                    out.push(PhaseTransition { q: f.grid[i], d_minus: s_left, d_plus: s_right });
                }
            }
            Some(eval) => {
                let q = f.grid[i];
                let h0 = (f.grid[i] - f.grid[i - 1]).min(f.grid[i + 1] - f.grid[i]);
                let mut gaps = Vec::with_capacity(5);
                let mut last = (s_left, s_right);
                for k in 0..5 {
                    let h = h0 / R::of((1u32 << k) as f64);
                    let fm = eval(q - h);
                    let f0 = f.values[i];
                    let fp = eval(q + h);
                    let dm = (f0 - fm) / h;
                    let dp = (fp - f0) / h;
                    gaps.push(dp - dm);
                    last = (dm, dp);
                }
                let g_first = gaps[0];
                let g_last = gaps[4];
                // curvature shrinks the gap ~16x over four halvings
                let stable = g_last > g_first / R::of(2.0);
                if g_last > tol && stable {
                    out.push(PhaseTransition { q, d_minus: last.0, d_plus: last.1 });
                }
            }
        }
    }
    out
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
fn golden_min<R: Real, F: Fn(R) -> R>(g: &F, mut a: R, mut b: R) -> (R, R) {
    let inv_phi = R::of(0.618_033_988_749_894_9);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let mut fc = g(c);
    let mut fd = g(d);
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = g(d);
        }
        if (b - a).abs() < R::of(1e-13) * (R::one() + a.abs()) {
            break;
        }
    }
    let mid = (a + b) / R::of(2.0);
    (mid, g(mid).min(fc).min(fd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::linspace;

    fn log1pe_curve(step: f64, span: f64) -> SampledConvexFunction<f64> {
        let n = (2.0 * span / step).round() as usize + 1;
        let grid = linspace(-span, span, n);
        let values: Vec<f64> = grid.iter().map(|&q: &f64| q.exp().ln_1p()).collect();
        SampledConvexFunction::new(grid, values, 1e-8, "log(1+e^q)").unwrap()
    }

    fn binary_entropy(a: f64) -> f64 {
        if a <= 0.0 || a >= 1.0 {
            0.0
        } else {
            -a * a.ln() - (1.0 - a) * (1.0 - a).ln()
        }
    }

    #[test]
    fn one_sided_derivatives_smooth_and_kinked() {
        let f = log1pe_curve(0.01, 10.0);
        let d = one_sided_derivatives(&f, 0.0, None).unwrap();
        // raw secant error is step/2 * T'' ~ 1.25e-3
        assert!((d.d_minus - 0.5).abs() < 2e-3);
        assert!((d.d_plus - 0.5).abs() < 2e-3);
        assert!(d.d_plus - d.d_minus < 1e-2 && d.d_minus <= d.d_plus + 1e-12);

        // Richardson refinement sharpens both sides
        let refine = |q: f64| q.exp().ln_1p();
        let d = one_sided_derivatives(&f, 0.0, Some(&refine)).unwrap();
        assert!((d.d_minus - 0.5).abs() < 1e-5);
        assert!((d.d_plus - 0.5).abs() < 1e-5);

        // |q|: gap [-1, 1] at 0
        let grid: Vec<f64> = linspace(-2.0, 2.0, 41);
        let values: Vec<f64> = grid.iter().map(|q| q.abs()).collect();
        let f = SampledConvexFunction::new(grid, values, 1e-8, "|q|").unwrap();
        let d = one_sided_derivatives(&f, 0.0, None).unwrap();
        assert_eq!((d.d_minus, d.d_plus), (-1.0, 1.0));

        // affine: (c, c) everywhere
        let grid = linspace(-1.0, 1.0, 21);
        let values: Vec<f64> = grid.iter().map(|q| 3.0 * q + 0.5).collect();
        let f = SampledConvexFunction::new(grid, values, 1e-8, "affine").unwrap();
        for q in [-0.5, 0.0, 0.5] {
            let d = one_sided_derivatives(&f, q, None).unwrap();
            assert!((d.d_minus - 3.0).abs() < 1e-12 && (d.d_plus - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn l1_binary_entropy_point() {
        let f = log1pe_curve(0.01, 10.0);
        // α = 1/2: inf at q = 0, value log 2 = H(1/2)
        let t = transform_l1(&f, 0.5, None);
        assert!((t.value - 2.0f64.ln()).abs() < 1e-5);
        assert!(t.arg.contains(0.0));
        // refined: error drops to near machine precision
        let refine = |q: f64| q.exp().ln_1p();
        let t = transform_l1(&f, 0.5, Some(&refine));
        assert!((t.value - 2.0f64.ln()).abs() < 1e-12, "{}", t.value);

        // α beyond the slope range: -inf with certificate
        let t = transform_l1(&f, 1.5, None);
        assert_eq!(t.value, f64::NEG_INFINITY);
        assert!(t.slope_certificate);

        // constant F, α = 0 -> the constant
        let grid = linspace(-3.0, 3.0, 61);
        let values = vec![0.7f64; 61];
        let f = SampledConvexFunction::new(grid, values, 1e-8, "const").unwrap();
        let t = transform_l1(&f, 0.0, None);
        assert_eq!(t.value, 0.7);
    }

    #[test]
    fn l1_matches_entropy_across_domain() {
        let f = log1pe_curve(0.01, 20.0);
        let refine = |q: f64| q.exp().ln_1p();
        for i in 1..20 {
            let alpha = i as f64 / 20.0;
            let t = transform_l1(&f, alpha, Some(&refine));
            let expect = binary_entropy(alpha);
            assert!((t.value - expect).abs() < 1e-9, "α={alpha}: {} vs {expect}", t.value);
        }
    }

    #[test]
    fn affine_transform_is_degenerate() {
        let grid = linspace(-5.0, 5.0, 101);
        let c = 0.75f64;
        let values: Vec<f64> = grid.iter().map(|q| c * q + 2.0).collect();
        let f = SampledConvexFunction::new(grid, values, 1e-8, "affine").unwrap();
        let t = transform_l1(&f, c, None);
        assert!((t.value - 2.0).abs() < 1e-12);
        assert_eq!((t.arg.lo, t.arg.hi), (-5.0, 5.0));
        for bad in [c - 0.3, c + 0.4] {
            let t = transform_l1(&f, bad, None);
            assert_eq!(t.value, f64::NEG_INFINITY);
        }
    }

    #[test]
    fn l2_duality_and_l3_l4_conventions() {
        // S = binary entropy sampled densely; L2 at q reproduces log(1+e^q)
        let alphas = linspace(1e-6, 1.0 - 1e-6, 4001);
        let values: Vec<f64> = alphas.iter().map(|&a| binary_entropy(a)).collect();
        for q in [-3.0, -1.0, 0.0, 1.0, 2.5] {
            let t = transform_l2(&alphas, &values, q);
            let expect = (q as f64).exp().ln_1p();
            assert!((t.value - expect).abs() < 5e-3, "q={q}");
        }
        // L4 at q = 0 reduces to sup S
        let t = transform_l4(&alphas, &values, 0.0);
        assert!((t.value - 2.0f64.ln()).abs() < 1e-6);
        // L3 of affine T(q) = (1-q) log 2 at α = log 2: constant log 2
        let grid = linspace(-4.0, 4.0, 81);
        let tvals: Vec<f64> = grid.iter().map(|q| (1.0 - q) * 2.0f64.ln()).collect();
        let f = SampledConvexFunction::new(grid, tvals, 1e-8, "affine T").unwrap();
        let t = transform_l3(&f, 2.0f64.ln(), None);
        assert!((t.value - 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn alpha_bounds_estimates() {
        let f = log1pe_curve(0.01, 25.0);
        let b = alpha_bounds(&f);
        assert!(b.alpha_min.abs() < 1e-4);
        assert!((b.alpha_max - 1.0).abs() < 1e-4);
        assert!(b.grid_estimate);

        // log(e^{qa} + e^{qb}) has slopes in (a, b)
        let (a, bb) = (0.3f64, 1.7f64);
        let grid = linspace(-40.0, 40.0, 1601);
        let values: Vec<f64> =
            grid.iter().map(|&q: &f64| ((q * a).exp() + (q * bb).exp()).ln()).collect();
        let f = SampledConvexFunction::new(grid, values, 1e-7, "two-slope").unwrap();
        let bd = alpha_bounds(&f);
        assert!((bd.alpha_min - a).abs() < 1e-4);
        assert!((bd.alpha_max - bb).abs() < 1e-4);
    }

    #[test]
    fn kink_detection_separates_curvature() {
        // smooth: no transition above 1e-3 once refinement is allowed
        let f = log1pe_curve(0.01, 10.0);
        let refine = |q: f64| q.exp().ln_1p();
        let trs = phase_transitions(&f, 1e-3, Some(&refine));
        assert!(trs.is_empty(), "{trs:?}");

        // glued max(log2, q + log2): kink at 0 with gap [0, 1]
        let glued = |q: f64| (2.0f64.ln()).max(q + 2.0f64.ln());
        let grid = linspace(-5.0, 5.0, 1001);
        let values: Vec<f64> = grid.iter().map(|&q| glued(q)).collect();
        let f = SampledConvexFunction::new(grid, values, 1e-8, "glued").unwrap();
        let trs = phase_transitions(&f, 1e-3, Some(&glued));
        assert_eq!(trs.len(), 1);
        assert!(trs[0].q.abs() < 1e-12);
        assert!(trs[0].d_minus.abs() < 1e-3);
        assert!((trs[0].d_plus - 1.0).abs() < 1e-3);

        // |q|: one transition with gap [-1, 1]
        let grid: Vec<f64> = linspace(-2.0, 2.0, 81);
        let values: Vec<f64> = grid.iter().map(|q| q.abs()).collect();
        let f = SampledConvexFunction::new(grid, values, 1e-8, "|q|").unwrap();
        let trs = phase_transitions(&f, 1e-3, None);
        assert_eq!(trs.len(), 1);
        assert_eq!((trs[0].d_minus, trs[0].d_plus), (-1.0, 1.0));
    }

    #[test]
    fn concave_hull_roundtrip() {
        // deliberately non-concave S: two bumps
        let alphas: Vec<f64> = linspace(0.0, 1.0, 201);
        let s: Vec<f64> = alphas
            .iter()
            .map(|&a| {
                let b1 = 0.5 - 8.0 * (a - 0.25) * (a - 0.25);
                let b2 = 0.6 - 10.0 * (a - 0.75) * (a - 0.75);
                b1.max(b2)
            })
            .collect();
        // T = S^L2 on a q grid, then hull = T^L1 back on the α grid
        let q_grid: Vec<f64> = linspace(-30.0, 30.0, 1201);
        let tvals: Vec<f64> = q_grid.iter().map(|&q| transform_l2(&alphas, &s, q).value).collect();
        let t = SampledConvexFunction::new(q_grid.clone(), tvals, 1e-9, "S^L2").unwrap();
        let hull: Vec<f64> = alphas.iter().map(|&a| transform_l1(&t, a, None).value).collect();
        // hull >= S pointwise (floating slack only) and discretely concave
        for i in 0..alphas.len() {
            assert!(hull[i] >= s[i] - 1e-12, "at α={}", alphas[i]);
        }
        for w in 0..alphas.len() - 2 {
            let s1 = (hull[w + 1] - hull[w]) / (alphas[w + 1] - alphas[w]);
            let s2 = (hull[w + 2] - hull[w + 1]) / (alphas[w + 2] - alphas[w + 1]);
            assert!(s2 <= s1 + 1e-9, "hull not concave at {}", alphas[w + 1]);
        }
        // on a concave S the round trip reproduces S within grid tolerance
        let s_conc: Vec<f64> = alphas
            .iter()
            .map(|&a| if a <= 0.0 || a >= 1.0 { 0.0 } else { -a * a.ln() - (1.0 - a) * (1.0 - a).ln() })
            .collect();
        let tvals: Vec<f64> =
            q_grid.iter().map(|&q| transform_l2(&alphas, &s_conc, q).value).collect();
        let t = SampledConvexFunction::new(q_grid, tvals, 1e-9, "H^L2").unwrap();
        for (i, &a) in alphas.iter().enumerate() {
            if a < 0.02 || a > 0.98 {
                continue;
            }
            let rt = transform_l1(&t, a, None).value;
            assert!((rt - s_conc[i]).abs() < 5e-3, "α={a}: {rt} vs {}", s_conc[i]);
        }
    }

    #[test]
    fn subdifferential_monotone() {
        let f = log1pe_curve(0.05, 8.0);
        let sd = SubdifferentialMap::compute(&f, None).unwrap();
        assert!(sd.monotonicity_defect() <= 0.0 + 1e-12);
        let qs = sd.preimage(0.45, 0.55);
        assert!(!qs.is_empty());
        assert!(qs.iter().all(|q| q.abs() < 0.6));
    }

    #[test]
    fn infinite_values_only_at_boundary() {
        let grid = linspace(-2.0, 2.0, 5);
        let ok = vec![f64::INFINITY, 1.0, 0.5, 1.0, 3.0];
        assert!(SampledConvexFunction::new(grid.clone(), ok, 1e-8, "t").is_ok());
        let hole = vec![1.0, f64::INFINITY, 0.5, 1.0, 3.0];
        assert!(SampledConvexFunction::new(grid.clone(), hole, 1e-8, "t").is_err());
        let neg = vec![1.0, 0.5, f64::NEG_INFINITY, 1.0, 3.0];
        assert!(SampledConvexFunction::new(grid, neg, 1e-8, "t").is_err());
    }

    #[test]
    fn transform_skips_infinite_block() {
        // T = +inf for q < -1 (hard constraint), else |q|
        let grid: Vec<f64> = linspace(-3.0, 3.0, 61);
        let values: Vec<f64> =
            grid.iter().map(|&q| if q < -1.0 { f64::INFINITY } else { q.abs() }).collect();
        let f = SampledConvexFunction::new(grid, values, 1e-8, "constrained").unwrap();
        let t = transform_l1(&f, 0.0, None);
        assert_eq!(t.value, 0.0);
        // minimizers never land in the infinite block
        assert!(t.arg.lo >= -1.0 - 1e-12);
    }
}
