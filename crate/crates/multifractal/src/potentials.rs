//! Potential functions: locally constant tables on words, pointwise formulas
//! on `[0,1]`, and the geometric potential `log a(x)` of a conformal map.
//!
//! Values live in `R ∪ {+inf}`; `-inf` is rejected everywhere. Regularity
//! classification is syntactic: declared discontinuity data decides which
//! spectrum theorem governs validity, and misdeclaration can only shrink the
//! reported validity window.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::linalg::{spectral_radius, Matrix};
use crate::scalar::{Bracket, Real};
use crate::systems::{PiecewiseConformalMap, SymbolicSystem};

/// Declared discontinuity structure of a potential.
#[derive(Debug, Clone)]
pub enum DiscontinuitySpec<R> {
    None,
    /// Finitely many points; `periodic` declares whether any of them is
    /// periodic under the dynamics.
    FinitePoints { points: Vec<R>, periodic: bool },
    /// A union of cylinders covering the closure of the discontinuity set.
    Cylinders { words: Vec<Vec<u8>> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegularityTag {
    /// Continuous on the relevant space; the full Birkhoff machinery applies.
    Continuous,
    /// Bounded measurable with dynamically negligible discontinuities.
    ClassAf,
    /// Bounded measurable; validity restricted to the high-entropy window
    /// above `h0`.
    BoundedMeasurable,
    /// Takes the value `+inf` somewhere; only `q <= 0` is supported.
    SingularAbove,
}

/// Regularity class plus the capacity entropy `h0` of the closure of the
/// discontinuity set (meaningful for `BoundedMeasurable`).
#[derive(Debug, Clone, Copy)]
pub struct RegularityClass<R> {
    pub tag: RegularityTag,
    pub h0: R,
}

#[derive(Debug, Clone)]
pub enum PotentialKind<R> {
    /// Value per admissible `depth`-word, dense table of size `m^depth`.
    LocallyConstant { m: usize, depth: usize, table: Vec<R> },
    /// Formula on `[0,1]`, evaluated through branch cylinders of a map.
    Pointwise { formula: Expr },
}

#[derive(Debug, Clone)]
pub struct Potential<R> {
    kind: PotentialKind<R>,
    discontinuities: DiscontinuitySpec<R>,
    /// True when this is `log a(x)` of a conformal map.
    geometric: bool,
    label: String,
}

impl<R: Real> Potential<R> {
    pub fn locally_constant(m: usize, depth: usize, table: Vec<R>) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidPotential("depth must be >= 1".into()));
        }
        let want = m.checked_pow(depth as u32).ok_or_else(|| {
            Error::InvalidPotential(format!("table size m^depth overflows (m={m}, depth={depth})"))
        })?;
        if table.len() != want {
            return Err(Error::InvalidPotential(format!(
                "table has {} entries, expected m^depth = {want}",
                table.len()
            )));
        }
        for (i, v) in table.iter().enumerate() {
            if v.is_nan() || (*v == R::neg_infinity()) {
                return Err(Error::InvalidPotential(format!(
                    "entry {i} is {v}; only finite values and +inf are allowed"
                )));
            }
        }
        Ok(Potential {
            kind: PotentialKind::LocallyConstant { m, depth, table },
            discontinuities: DiscontinuitySpec::None,
            geometric: false,
            label: format!("locally-constant(depth {depth})"),
        })
    }

    /// Depth-1 potential from one value per symbol.
    pub fn per_symbol(values: &[R]) -> Result<Self> {
        Potential::locally_constant(values.len(), 1, values.to_vec())
    }

    pub fn constant(m: usize, c: R) -> Self {
        Potential::locally_constant(m, 1, vec![c; m]).expect("constant table is valid")
    }

    pub fn pointwise(formula: Expr) -> Self {
        Potential {
            kind: PotentialKind::Pointwise { formula },
            discontinuities: DiscontinuitySpec::None,
            geometric: false,
            label: "pointwise".into(),
        }
    }

    /// The geometric potential `log a(x)` of a map. Constant factors yield a
    /// depth-1 table (exact transfer-operator route); otherwise the factors
    /// are stitched into one piecewise formula.
    pub fn log_conformal_factor(map: &PiecewiseConformalMap<R>) -> Result<Self> {
        let all_const = map.branches().iter().all(|b| b.factor.is_constant());
        let mut p = if all_const {
            let table: Vec<R> = map
                .branches()
                .iter()
                .map(|b| b.factor.eval(b.domain.0).ln())
                .collect();
            Potential::locally_constant(map.branch_count(), 1, table)?
        } else {
            // iflt chain over branch right endpoints
            let mut expr = Expr::Log(Box::new(map.branches().last().unwrap().factor.clone()));
            for b in map.branches().iter().rev().skip(1) {
                let r = b.domain.1.to_f64().unwrap();
                expr = Expr::IfLt(
                    Box::new(Expr::Var),
                    Box::new(Expr::Const(r)),
                    Box::new(Expr::Log(Box::new(b.factor.clone()))),
                    Box::new(expr),
                );
            }
            Potential::pointwise(expr)
        };
        p.geometric = true;
        p.label = format!("log-factor({})", map.label());
        Ok(p)
    }

    pub fn with_discontinuities(mut self, spec: DiscontinuitySpec<R>) -> Self {
        self.discontinuities = spec;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> &PotentialKind<R> {
        &self.kind
    }

    pub fn is_geometric(&self) -> bool {
        self.geometric
    }

    pub fn discontinuities(&self) -> &DiscontinuitySpec<R> {
        &self.discontinuities
    }

    pub fn depth(&self) -> usize {
        match &self.kind {
            PotentialKind::LocallyConstant { depth, .. } => *depth,
            PotentialKind::Pointwise { .. } => 1,
        }
    }

    pub fn is_locally_constant(&self) -> bool {
        matches!(self.kind, PotentialKind::LocallyConstant { .. })
    }

    pub fn has_infinite_values(&self) -> bool {
        match &self.kind {
            PotentialKind::LocallyConstant { table, .. } => {
                table.iter().any(|v| *v == R::infinity())
            }
            PotentialKind::Pointwise { .. } => false,
        }
    }

    /// Table lookup on a window of exactly `depth` symbols.
    pub fn value_on_window(&self, window: &[u8]) -> Result<R> {
        match &self.kind {
            PotentialKind::LocallyConstant { m, depth, table } => {
                if window.len() != *depth {
                    return Err(Error::WordTooShort { need: *depth, got: window.len() });
                }
                let mut idx = 0usize;
                for &s in window {
                    if s as usize >= *m {
                        return Err(Error::InvalidPotential(format!("symbol {s} out of range")));
                    }
                    idx = idx * m + s as usize;
                }
                Ok(table[idx])
            }
            PotentialKind::Pointwise { .. } => Err(Error::Unsupported(
                "pointwise potential has no word table; evaluate through a map".into(),
            )),
        }
    }

    /// Bound `M` on the magnitude of the finite values.
    pub fn finite_bound(&self) -> R {
        match &self.kind {
            PotentialKind::LocallyConstant { table, .. } => {
                let mut m = R::zero();
                for v in table {
                    if v.is_finite() {
                        m = m.max(v.abs());
                    }
                }
                m
            }
            PotentialKind::Pointwise { formula } => {
                let enc = formula.eval_interval(Bracket::new(R::zero(), R::one()));
                enc.lo.abs().max(enc.hi.abs())
            }
        }
    }

    /// Range `[min, max]` of the finite values (interval enclosure for
    /// pointwise potentials).
    pub fn finite_values_range(&self) -> (R, R) {
        self.finite_min_max()
    }

    fn finite_min_max(&self) -> (R, R) {
        match &self.kind {
            PotentialKind::LocallyConstant { table, .. } => {
                let mut lo = R::infinity();
                let mut hi = R::neg_infinity();
                for v in table {
                    if v.is_finite() {
                        lo = lo.min(*v);
                        hi = hi.max(*v);
                    }
                }
                (lo, hi)
            }
            PotentialKind::Pointwise { formula } => {
                let enc = formula.eval_interval(Bracket::new(R::zero(), R::one()));
                (enc.lo, enc.hi)
            }
        }
    }

    /// Birkhoff sum `S_n φ` along a word: requires `n + depth - 1` symbols so
    /// every window is determined. `+inf` absorbs.
    pub fn birkhoff_sum(&self, word: &[u8], n: usize) -> Result<R> {
        match &self.kind {
            PotentialKind::LocallyConstant { depth, .. } => {
                let need = n + depth - 1;
                if word.len() < need {
                    return Err(Error::WordTooShort { need, got: word.len() });
                }
                let mut acc = R::zero();
                for i in 0..n {
                    acc = acc + self.value_on_window(&word[i..i + depth])?;
                }
                Ok(acc)
            }
            PotentialKind::Pointwise { .. } => Err(Error::Unsupported(
                "pointwise Birkhoff sums need a map; use birkhoff_sum_at".into(),
            )),
        }
    }

    /// Birkhoff sum at a point of the interval, iterating the map.
    pub fn birkhoff_sum_at(
        &self,
        map: &PiecewiseConformalMap<R>,
        x0: R,
        n: usize,
    ) -> Result<R> {
        let mut x = x0;
        let mut acc = R::zero();
        for k in 0..n {
            let v = match &self.kind {
                PotentialKind::Pointwise { formula } => formula.eval(x),
                PotentialKind::LocallyConstant { .. } => {
                    let b = map.branch_of(x).ok_or_else(|| {
                        Error::InvalidSystem(format!("point left the branch domains at step {k}"))
                    })?;
                    self.value_on_window(&[b as u8])?
                }
            };
            acc = acc + v;
            if k + 1 < n {
                x = map.apply(x).ok_or_else(|| {
                    Error::InvalidSystem(format!("orbit left the branch domains at step {k}"))
                })?;
            }
        }
        Ok(acc)
    }

    /// Certified bracket for the average `(1/n) S_n φ` over the cylinder of a
    /// word of length `n`. For locally constant potentials the first
    /// `n - depth + 1` terms are exact and the unseen tail contributes at most
    /// `(depth-1) * M`; pointwise potentials go through interval arithmetic on
    /// nested branch cylinders.
    pub fn avg_bracket_on_cylinder(
        &self,
        word: &[u8],
        map: Option<&PiecewiseConformalMap<R>>,
    ) -> Result<Bracket<R>> {
        let n = word.len();
        if n == 0 {
            return Err(Error::ZeroCylinderLength);
        }
        match &self.kind {
            PotentialKind::LocallyConstant { depth, .. } => {
                let d = *depth;
                if n < d {
                    return Err(Error::WordTooShort { need: d, got: n });
                }
                let mut exact = R::zero();
                for i in 0..=(n - d) {
                    exact = exact + self.value_on_window(&word[i..i + d])?;
                }
                let tail = R::of((d - 1) as f64);
                let (vmin, vmax) = self.finite_min_max();
                let (mut lo, mut hi) = if exact == R::infinity() {
                    (R::infinity(), R::infinity())
                } else if d == 1 {
                    (exact, exact)
                } else {
                    let hi_tail =
                        if self.has_infinite_values() { R::infinity() } else { exact + tail * vmax };
                    (exact + tail * vmin, hi_tail)
                };
                let nn = R::of(n as f64);
                lo = lo / nn;
                hi = hi / nn;
                Ok(Bracket::new(lo, hi))
            }
            PotentialKind::Pointwise { formula } => {
                let map = map.ok_or_else(|| {
                    Error::Unsupported("pointwise brackets need the underlying map".into())
                })?;
                let mut lo = R::zero();
                let mut hi = R::zero();
                for i in 0..n {
                    let j = map.cylinder_interval(&word[i..])?;
                    let enc = formula.eval_interval(j);
                    lo = lo + enc.lo;
                    hi = hi + enc.hi;
                }
                let nn = R::of(n as f64);
                Ok(Bracket::new(lo / nn, hi / nn))
            }
        }
    }

    /// Syntactic regularity classification. Conservative by construction: an
    /// undecidable case lands in `BoundedMeasurable` with an `h0` computed
    /// from the declared cylinder cover, which can only narrow validity.
    pub fn classify(&self, system: &SymbolicSystem) -> Result<RegularityClass<R>> {
        if self.has_infinite_values() {
            return Ok(RegularityClass { tag: RegularityTag::SingularAbove, h0: R::zero() });
        }
        match (&self.kind, &self.discontinuities) {
            (PotentialKind::LocallyConstant { .. }, DiscontinuitySpec::None) => {
                // locally constant => continuous on the shift space
                Ok(RegularityClass { tag: RegularityTag::Continuous, h0: R::zero() })
            }
            (_, DiscontinuitySpec::None) => {
                Ok(RegularityClass { tag: RegularityTag::Continuous, h0: R::zero() })
            }
            (_, DiscontinuitySpec::FinitePoints { periodic, .. }) => {
                if *periodic {
                    Ok(RegularityClass { tag: RegularityTag::BoundedMeasurable, h0: R::zero() })
                } else {
                    Ok(RegularityClass { tag: RegularityTag::ClassAf, h0: R::zero() })
                }
            }
            (_, DiscontinuitySpec::Cylinders { words }) => {
                let h0 = cylinder_cover_entropy(system, words)?;
                if h0 <= R::of(1e-12) {
                    Ok(RegularityClass { tag: RegularityTag::ClassAf, h0: R::zero() })
                } else {
                    Ok(RegularityClass { tag: RegularityTag::BoundedMeasurable, h0 })
                }
            }
        }
    }

    /// Centered potential `φ - P`, shifting only the finite values.
    pub fn center(&self, p: R) -> Potential<R> {
        let kind = match &self.kind {
            PotentialKind::LocallyConstant { m, depth, table } => PotentialKind::LocallyConstant {
                m: *m,
                depth: *depth,
                table: table.iter().map(|v| if v.is_finite() { *v - p } else { *v }).collect(),
            },
            PotentialKind::Pointwise { formula } => PotentialKind::Pointwise {
                formula: formula.shifted(-p.to_f64().unwrap()),
            },
        };
        Potential {
            kind,
            discontinuities: self.discontinuities.clone(),
            geometric: false,
            label: format!("{} - {p}", self.label),
        }
    }

    /// Violated invariants, empty when valid with respect to `system`.
    pub fn diagnostics(&self, system: &SymbolicSystem) -> Vec<String> {
        let mut out = Vec::new();
        if let PotentialKind::LocallyConstant { m, depth, table } = &self.kind {
            if *m != system.alphabet_size() {
                out.push(format!(
                    "table alphabet {m} does not match system alphabet {}",
                    system.alphabet_size()
                ));
                return out;
            }
            let mut word = Vec::new();
            check_cover(system, *depth, &mut word, table, *m, &mut out);
        }
        out
    }
}

fn check_cover<R: Real>(
    system: &SymbolicSystem,
    depth: usize,
    word: &mut Vec<u8>,
    table: &[R],
    m: usize,
    out: &mut Vec<String>,
) {
    if word.len() == depth {
        let mut idx = 0usize;
        for &s in word.iter() {
            idx = idx * m + s as usize;
        }
        if table[idx].is_nan() {
            out.push(format!("admissible word {word:?} has no table value"));
        }
        return;
    }
    let candidates: Vec<u8> = if word.is_empty() {
        (0..m as u8).collect()
    } else {
        system.successors(*word.last().unwrap()).to_vec()
    };
    for s in candidates {
        word.push(s);
        check_cover(system, depth, word, table, m, out);
        word.pop();
    }
}

/// Capacity entropy of the maximal invariant set inside a union of declared
/// cylinders: pad the words to a common depth, keep the padded words as
/// states, connect by overlap, and take the log spectral radius.
fn cylinder_cover_entropy<R: Real>(system: &SymbolicSystem, words: &[Vec<u8>]) -> Result<R> {
    if words.is_empty() {
        return Ok(R::zero());
    }
    let depth = words.iter().map(|w| w.len()).max().unwrap();
    if depth == 0 {
        return Err(Error::InvalidPotential("empty cylinder word in discontinuity spec".into()));
    }
    let mut states: Vec<Vec<u8>> = Vec::new();
    for w in words {
        if !system.is_admissible(w) {
            return Err(Error::InvalidPotential(format!(
                "declared cylinder {w:?} is not admissible"
            )));
        }
        // extend to full depth by every admissible continuation
        let mut grow = vec![w.clone()];
        while grow.first().map(|g| g.len()) < Some(depth) {
            let mut next = Vec::new();
            for g in &grow {
                for &s in system.successors(*g.last().unwrap()) {
                    let mut e = g.clone();
                    e.push(s);
                    next.push(e);
                }
            }
            grow = next;
        }
        states.extend(grow);
    }
    states.sort();
    states.dedup();
    let n = states.len();
    let mut mat = Matrix::zeros(n);
    for (i, u) in states.iter().enumerate() {
        for (j, v) in states.iter().enumerate() {
            let overlap_ok = if depth == 1 {
                system.allows(u[0], v[0])
            } else {
                u[1..] == v[..depth - 1] && system.allows(u[depth - 1], v[depth - 1])
            };
            if overlap_ok {
                mat.set(i, j, R::one());
            }
        }
    }
    let rho = spectral_radius(&mat).rho;
    Ok(if rho <= R::one() { R::zero() } else { rho.ln() })
}
