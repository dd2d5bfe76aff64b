//! Pressure functions and equilibrium states.
//!
//! The exact route recodes a locally constant potential of depth `d` onto the
//! `d`-block presentation of the subshift and takes the log spectral radius
//! of the weighted transfer matrix. The bracketed route enumerates cylinders
//! and produces certified two-sided bounds:
//!
//! * upper bound: `(1/n) log sum_w exp(n * sup-average)` is superadditive-free
//!   (Fekete from submultiplicativity), hence `>= P` at every `n`;
//! * lower bounds: a connector-corrected subadditive bound on primitive
//!   graphs, `(log sum_w exp(n * inf-average) + K * w_min) / (n + K)`, and a
//!   periodic-orbit bound `(1/n)(log trace-sum - log #states)`; both are
//!   `<= P` at every `n`, and the larger is reported.
//!
//! Weight conventions for potentials taking the value `+inf`: a window where
//! the combined coefficient is negative gets weight `0`; a zero coefficient
//! drops the term entirely (counting convention); a positive coefficient on
//! an infinite value is an error.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{spectral_radius, Matrix};
use crate::potentials::Potential;
use crate::scalar::{Bracket, Real};
use crate::systems::{BlockSystem, GluedSystem, PiecewiseConformalMap, SymbolicSystem};

pub const DEFAULT_ENUMERATION_BUDGET: f64 = 1e8;

/// How a pressure value was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method<R> {
    ExactSpectral,
    Bracketed { lo: R, hi: R, n_used: usize },
    VariationalLowerBound,
}

impl<R: Real> Method<R> {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::ExactSpectral => "exact-spectral",
            Method::Bracketed { .. } => "bracketed",
            Method::VariationalLowerBound => "variational-lower-bound",
        }
    }

    pub fn bounds(&self, value: R) -> (R, R) {
        match self {
            Method::Bracketed { lo, hi, .. } => (*lo, *hi),
            _ => (value, value),
        }
    }
}

/// Sampled pressure function `q -> P*(q φ)` with per-point provenance.
#[derive(Debug, Clone)]
pub struct PressureCurve<R> {
    pub q_grid: Vec<R>,
    pub values: Vec<R>,
    pub method: Vec<Method<R>>,
    pub system_ref: String,
    pub potential_ref: String,
}

impl<R: Real> PressureCurve<R> {
    /// Discrete convexity defect: most negative second divided difference
    /// over consecutive finite triples. Exact curves must stay above `-1e-8`.
    pub fn convexity_defect(&self) -> R {
        let mut worst = R::zero();
        for w in 0..self.q_grid.len().saturating_sub(2) {
            let (q0, q1, q2) = (self.q_grid[w], self.q_grid[w + 1], self.q_grid[w + 2]);
            let (v0, v1, v2) = (self.values[w], self.values[w + 1], self.values[w + 2]);
            if !(v0.is_finite() && v1.is_finite() && v2.is_finite()) {
                continue;
            }
            let s1 = (v1 - v0) / (q1 - q0);
            let s2 = (v2 - v1) / (q2 - q1);
            worst = worst.min(s2 - s1);
        }
        worst
    }

    pub fn value_at_grid(&self, q: R) -> Option<R> {
        self.q_grid
            .iter()
            .position(|&g| (g - q).abs() < R::of(1e-12))
            .map(|i| self.values[i])
    }
}

fn lc_terms_check<R: Real>(terms: &[(R, &Potential<R>)]) -> Result<usize> {
    let mut depth = 1;
    for (coef, p) in terms {
        if !p.is_locally_constant() {
            return Err(Error::Unsupported(
                "exact spectral pressure needs locally constant potentials".into(),
            ));
        }
        if p.has_infinite_values() && *coef > R::zero() {
            return Err(Error::SingularPositiveQ { q: coef.to_f64().unwrap_or(f64::NAN) });
        }
        depth = depth.max(p.depth());
    }
    Ok(depth)
}

/// Combined log-weight of a window of `depth` symbols: `sum_t coef_t *
/// φ_t(window)`. `-inf` encodes a killed window, `None` never occurs after
/// `lc_terms_check`.
fn window_log_weight<R: Real>(terms: &[(R, &Potential<R>)], window: &[u8]) -> Result<R> {
    let mut acc = R::zero();
    for (coef, p) in terms {
        if coef.is_zero() {
            continue;
        }
        let v = p.value_on_window(&window[..p.depth()])?;
        if v == R::infinity() {
            // coef > 0 was rejected earlier
            return Ok(R::neg_infinity());
        }
        acc = acc + *coef * v;
    }
    Ok(acc)
}

struct Transfer<R> {
    blocks: std::sync::Arc<BlockSystem>,
    log_weights: Vec<R>,
    scale: R,
    matrix: Matrix<R>,
}

fn build_transfer<R: Real>(
    system: &SymbolicSystem,
    terms: &[(R, &Potential<R>)],
) -> Result<Transfer<R>> {
    let depth = lc_terms_check(terms)?;
    let blocks = system.blocks(depth)?;
    let n = blocks.len();
    let mut log_weights = vec![R::neg_infinity(); n];
    let mut scale = R::neg_infinity();
    for (i, w) in blocks.states.iter().enumerate() {
        let lw = window_log_weight(terms, w)?;
        if lw.is_finite() {
            scale = scale.max(lw);
        }
        log_weights[i] = lw;
    }
    let mut matrix = Matrix::zeros(n);
    if scale.is_finite() {
        for (i, succ) in blocks.succ.iter().enumerate() {
            if log_weights[i] == R::neg_infinity() {
                continue;
            }
            let w = (log_weights[i] - scale).exp();
            for &j in succ {
                matrix.set(i, j, w);
            }
        }
    }
    Ok(Transfer { blocks, log_weights, scale, matrix })
}

/// Exact pressure `P*(sum_t coef_t φ_t)` on a subshift: log spectral radius
/// of the weighted transfer matrix on the block presentation.
pub fn pressure_exact_terms<R: Real>(
    system: &SymbolicSystem,
    terms: &[(R, &Potential<R>)],
) -> Result<R> {
    let t = build_transfer(system, terms)?;
    if !t.scale.is_finite() {
        return Ok(R::neg_infinity());
    }
    let sr = spectral_radius(&t.matrix);
    if sr.rho <= R::zero() {
        return Ok(R::neg_infinity());
    }
    Ok(t.scale + sr.rho.ln())
}

/// Exact pressure `T(q) = P*(q φ)` for a locally constant potential.
pub fn pressure_exact_sft<R: Real>(
    system: &SymbolicSystem,
    potential: &Potential<R>,
    q: R,
) -> Result<R> {
    pressure_exact_terms(system, &[(q, potential)])
}

/// Glued pressure: exactly the maximum over parts. Returns the value, the
/// index of the attaining part (lexicographically first on ties), and
/// whether there was a tie within `1e-12`.
pub fn pressure_exact_glued<R: Real>(
    glued: &GluedSystem,
    potentials: &[Potential<R>],
    q: R,
) -> Result<(R, usize, bool)> {
    assert_eq!(glued.parts().len(), potentials.len(), "one potential per part");
    let tol = R::of(1e-12);
    let mut best = R::neg_infinity();
    let mut arg = 0usize;
    let mut tie = false;
    for (k, (part, pot)) in glued.parts().iter().zip(potentials.iter()).enumerate() {
        let p = pressure_exact_sft(part, pot, q)?;
        if k == 0 {
            best = p;
        } else if p > best + tol {
            best = p;
            arg = k;
            tie = false;
        } else if (p - best).abs() <= tol {
            tie = true;
            // keep the exact max but the lexicographically first part
            best = best.max(p);
        }
    }
    Ok((best, arg, tie))
}

/// Two-parameter pressure `P*(q φ1 - t log a)` through the same machinery.
pub fn two_parameter_pressure<R: Real>(
    system: &SymbolicSystem,
    phi1: &Potential<R>,
    log_a: &Potential<R>,
    q: R,
    t: R,
) -> Result<R> {
    pressure_exact_terms(system, &[(q, phi1), (-t, log_a)])
}

/// Streaming log-sum-exp accumulator (deterministic in push order).
#[derive(Debug, Clone, Copy)]
pub struct LogSumAcc<R> {
    max: R,
    sum: R,
}

impl<R: Real> Default for LogSumAcc<R> {
    fn default() -> Self {
        LogSumAcc { max: R::neg_infinity(), sum: R::zero() }
    }
}

impl<R: Real> LogSumAcc<R> {
    pub fn push(&mut self, log_term: R) {
        if log_term == R::neg_infinity() {
            return;
        }
        if log_term <= self.max {
            self.sum = self.sum + (log_term - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - log_term).exp() + R::one();
            self.max = log_term;
        }
    }

    pub fn merge(&mut self, other: &LogSumAcc<R>) {
        if other.max == R::neg_infinity() {
            return;
        }
        if other.max <= self.max {
            self.sum = self.sum + other.sum * (other.max - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - other.max).exp() + other.sum;
            self.max = other.max;
        }
    }

    pub fn log_total(&self) -> R {
        if self.max == R::neg_infinity() || self.sum <= R::zero() {
            R::neg_infinity()
        } else {
            self.max + self.sum.ln()
        }
    }
}

fn budget_check<R: Real>(system: &SymbolicSystem, n: usize, budget: f64) -> Result<()> {
    let count = system.word_count::<R>(n)?.approx();
    if count > budget {
        return Err(Error::BudgetExceeded { n, count, budget });
    }
    Ok(())
}

/// Certified bracket `lo <= P*(sum coef_t φ_t) <= hi` from an `n`-cylinder
/// enumeration. Pointwise potentials are admitted when `map` supplies branch
/// cylinders. Cylinder sums are accumulated per first-symbol prefix and
/// merged in prefix order, so results are identical across thread counts.
pub fn pressure_bracketed_terms<R: Real>(
    system: &SymbolicSystem,
    terms: &[(R, &Potential<R>)],
    n: usize,
    map: Option<&PiecewiseConformalMap<R>>,
    budget: f64,
) -> Result<(R, R)> {
    if n == 0 {
        return Err(Error::ZeroCylinderLength);
    }
    budget_check::<R>(system, n, budget)?;
    for (coef, p) in terms {
        if p.has_infinite_values() && *coef > R::zero() {
            return Err(Error::SingularPositiveQ { q: coef.to_f64().unwrap_or(f64::NAN) });
        }
        if !p.is_locally_constant() && map.is_none() {
            return Err(Error::Unsupported(
                "bracketing a pointwise potential needs the underlying map".into(),
            ));
        }
    }
    let nn = R::of(n as f64);

    // per-word bracket of n * (combined average)
    let word_bracket = |w: &[u8]| -> Result<Bracket<R>> {
        let mut lo = R::zero();
        let mut hi = R::zero();
        for (coef, p) in terms {
            if coef.is_zero() {
                continue;
            }
            let b = p.avg_bracket_on_cylinder(w, map)?.scale(*coef);
            lo = lo + b.lo;
            hi = hi + b.hi;
        }
        Ok(Bracket::new(lo * nn, hi * nn))
    };

    let all_lc = terms.iter().all(|(_, p)| p.is_locally_constant());
    let max_depth = terms.iter().map(|(_, p)| p.depth()).max().unwrap_or(1);

    struct Partial<R> {
        sup: LogSumAcc<R>,
        inf: LogSumAcc<R>,
        per: LogSumAcc<R>,
        err: Option<Error>,
    }

    let prefixes: Vec<u8> = (0..system.alphabet_size() as u8).collect();
    let partials: Vec<Partial<R>> = prefixes
        .par_iter()
        .map(|&s| {
            let mut part = Partial {
                sup: LogSumAcc::default(),
                inf: LogSumAcc::default(),
                per: LogSumAcc::default(),
                err: None,
            };
            let res = system.visit_cylinders_with_prefix(&[s], n, &mut |w| {
                if part.err.is_some() {
                    return;
                }
                match word_bracket(w) {
                    Ok(b) => {
                        part.sup.push(b.hi);
                        part.inf.push(b.lo);
                    }
                    Err(e) => part.err = Some(e),
                }
                // periodic-orbit contribution: wrapped windows are exact
                if all_lc && system.allows(w[n - 1], w[0]) {
                    let mut wrapped = w.to_vec();
                    wrapped.extend_from_slice(&w[..max_depth.saturating_sub(1)]);
                    let mut s_exact = R::zero();
                    for i in 0..n {
                        match window_log_weight(terms, &wrapped[i..i + max_depth]) {
                            Ok(v) => s_exact = s_exact + v,
                            Err(e) => {
                                part.err = Some(e);
                                return;
                            }
                        }
                    }
                    part.per.push(s_exact);
                }
            });
            if let Err(e) = res {
                part.err = Some(e);
            }
            part
        })
        .collect();

    let mut sup = LogSumAcc::default();
    let mut inf = LogSumAcc::default();
    let mut per = LogSumAcc::default();
    for mut p in partials {
        if let Some(e) = p.err.take() {
            return Err(e);
        }
        sup.merge(&p.sup);
        inf.merge(&p.inf);
        per.merge(&p.per);
    }

    let hi = sup.log_total() / nn;

    // lower bound 1: periodic orbits, trace(L^n) <= #states * rho^n
    let states = R::of(system.blocks(max_depth)?.len() as f64);
    let lo_periodic = (per.log_total() - states.ln()) / nn;

    // lower bound 2: connector-corrected subadditivity on primitive graphs.
    // primitivity_index k means any two symbols are joined by a path of k
    // edges, i.e. k - 1 inserted connector symbols between concatenated
    // words. Each inserted step costs at least the per-step minimum of the
    // combined potential: the joint window minimum when everything is
    // locally constant, an oriented global bound otherwise.
    let mut lo = lo_periodic;
    if !terms.iter().any(|(_, p)| p.has_infinite_values()) {
        if let Some(k) = system.primitivity_index() {
            let w_min = if all_lc {
                let mut m = R::infinity();
                let mut word = Vec::new();
                collect_min_window(system, terms, max_depth, &mut word, &mut m)?;
                m
            } else {
                let mut acc = R::zero();
                for (coef, p) in terms {
                    if coef.is_zero() {
                        continue;
                    }
                    let (mn, mx) = p.finite_values_range();
                    acc = acc + if *coef >= R::zero() { *coef * mn } else { *coef * mx };
                }
                acc
            };
            let kk = R::of((k - 1) as f64);
            let lo_conn = (inf.log_total() + kk * w_min) / (nn + kk);
            lo = lo.max(lo_conn);
        }
    }
    Ok((lo, hi))
}

fn collect_min_window<R: Real>(
    system: &SymbolicSystem,
    terms: &[(R, &Potential<R>)],
    depth: usize,
    word: &mut Vec<u8>,
    w_min: &mut R,
) -> Result<()> {
    if word.len() == depth {
        let v = window_log_weight(terms, word)?;
        if v.is_finite() {
            *w_min = w_min.min(v);
        }
        return Ok(());
    }
    let cands: Vec<u8> = if word.is_empty() {
        (0..system.alphabet_size() as u8).collect()
    } else {
        system.successors(*word.last().unwrap()).to_vec()
    };
    for s in cands {
        word.push(s);
        collect_min_window(system, terms, depth, word, w_min)?;
        word.pop();
    }
    Ok(())
}

/// `P*(q φ)` with certified bounds; see [`pressure_bracketed_terms`].
pub fn pressure_bracketed<R: Real>(
    system: &SymbolicSystem,
    potential: &Potential<R>,
    q: R,
    n: usize,
    map: Option<&PiecewiseConformalMap<R>>,
    budget: f64,
) -> Result<(R, R)> {
    pressure_bracketed_terms(system, &[(q, potential)], n, map, budget)
}

/// Stationary Markov measure on the block presentation of a subshift.
#[derive(Debug, Clone)]
pub struct MarkovMeasure<R> {
    /// Block depth `d`; states are admissible `d`-words.
    pub depth: usize,
    pub states: Vec<Vec<u8>>,
    /// Row-stochastic transition matrix between states.
    pub stochastic: Matrix<R>,
    /// Stationary vector.
    pub stationary: Vec<R>,
    /// Measure-theoretic entropy.
    pub entropy: R,
    /// Log pressure realized: `h + sum coef ∫φ` (variational identity check).
    pub log_pressure: R,
    state_index: std::collections::BTreeMap<Vec<u8>, usize>,
}

impl<R: Real> MarkovMeasure<R> {
    /// Construct directly from a row-stochastic matrix and its stationary
    /// vector (no eigensolver involved, so product measures stay bit-exact).
    pub fn from_stochastic(
        states: Vec<Vec<u8>>,
        stochastic: Matrix<R>,
        stationary: Vec<R>,
        log_pressure: R,
    ) -> Result<Self> {
        if states.is_empty() || stochastic.n != states.len() || stationary.len() != states.len() {
            return Err(Error::InvalidSystem("inconsistent Markov measure dimensions".into()));
        }
        let depth = states[0].len();
        let mut entropy = R::zero();
        for (a, &pi) in stationary.iter().enumerate() {
            for b in 0..states.len() {
                let p = stochastic.get(a, b);
                if p > R::zero() {
                    entropy = entropy - pi * p * p.ln();
                }
            }
        }
        let mut state_index = std::collections::BTreeMap::new();
        for (a, w) in states.iter().enumerate() {
            state_index.insert(w.clone(), a);
        }
        let m = MarkovMeasure {
            depth,
            states,
            stochastic,
            stationary,
            entropy,
            log_pressure,
            state_index,
        };
        let d = m.diagnostics();
        if !d.is_empty() {
            return Err(Error::InvalidSystem(format!("invalid Markov measure: {d:?}")));
        }
        Ok(m)
    }

    /// Bernoulli measure on the full shift: every row of the transition
    /// matrix is the probability vector itself.
    pub fn bernoulli(probs: &[R]) -> Result<Self> {
        let m = probs.len();
        let mut stochastic = Matrix::zeros(m);
        for i in 0..m {
            for j in 0..m {
                stochastic.set(i, j, probs[j]);
            }
        }
        let states: Vec<Vec<u8>> = (0..m as u8).map(|s| vec![s]).collect();
        MarkovMeasure::from_stochastic(states, stochastic, probs.to_vec(), R::zero())
    }

    /// Violated invariants, empty when the measure is internally consistent.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.states.len();
        let tol = R::of(1e-12);
        for i in 0..n {
            let mut row = R::zero();
            for j in 0..n {
                row = row + self.stochastic.get(i, j);
            }
            if (row - R::one()).abs() > R::of(1e-10) {
                out.push(format!("row {i} sums to {row}, not 1"));
            }
        }
        let mut drift = R::zero();
        for j in 0..n {
            let mut pij = R::zero();
            for i in 0..n {
                pij = pij + self.stationary[i] * self.stochastic.get(i, j);
            }
            drift = drift.max((pij - self.stationary[j]).abs());
        }
        if drift > R::of(1e-9) {
            out.push(format!("stationarity drift {drift}"));
        }
        if self.entropy < -tol {
            out.push(format!("negative entropy {}", self.entropy));
        }
        out
    }

    /// `∫ φ dμ` for a locally constant potential of depth at most the block
    /// depth (deeper potentials via path enumeration).
    pub fn integral_of(&self, potential: &Potential<R>) -> Result<R> {
        let d = potential.depth();
        if d <= self.depth {
            let mut acc = R::zero();
            for (i, w) in self.states.iter().enumerate() {
                let v = potential.value_on_window(&w[..d])?;
                if v == R::infinity() && self.stationary[i] > R::zero() {
                    return Ok(R::infinity());
                }
                if self.stationary[i] > R::zero() {
                    acc = acc + self.stationary[i] * v;
                }
            }
            Ok(acc)
        } else {
            // enumerate words of length d with chain masses
            let mut acc = R::zero();
            let mut stack: Vec<(usize, Vec<u8>, R)> = self
                .states
                .iter()
                .enumerate()
                .map(|(i, w)| (i, w.clone(), self.stationary[i]))
                .collect();
            while let Some((i, w, mass)) = stack.pop() {
                if mass <= R::zero() {
                    continue;
                }
                if w.len() >= d {
                    acc = acc + mass * potential.value_on_window(&w[..d])?;
                    continue;
                }
                for (j, sw) in self.states.iter().enumerate() {
                    let p = self.stochastic.get(i, j);
                    if p > R::zero() {
                        let mut nw = w.clone();
                        nw.push(*sw.last().unwrap());
                        stack.push((j, nw, mass * p));
                    }
                }
            }
            Ok(acc)
        }
    }

    /// Natural log of the cylinder mass `μ([w])` for a word of length at
    /// least the block depth.
    pub fn log_cylinder_mass(&self, word: &[u8]) -> Result<R> {
        let d = self.depth;
        if word.len() < d {
            return Err(Error::WordTooShort { need: d, got: word.len() });
        }
        let first = &word[..d];
        let Some(&mut_state) = self.state_index.get(first) else {
            return Ok(R::neg_infinity());
        };
        let mut cur = mut_state;
        let mut acc = self.stationary[cur].ln();
        for i in 1..=(word.len() - d) {
            let next_word = &word[i..i + d];
            let Some(&next) = self.state_index.get(next_word) else {
                return Ok(R::neg_infinity());
            };
            let p = self.stochastic.get(cur, next);
            if p <= R::zero() {
                return Ok(R::neg_infinity());
            }
            acc = acc + p.ln();
            cur = next;
        }
        Ok(acc)
    }
}

/// Ruelle–Perron–Frobenius equilibrium state for `sum_t coef_t φ_t` on a
/// subshift. Transient block states (killed by `+inf` values or dangling)
/// are pruned; if more than one recurrent communicating class survives the
/// equilibrium is ambiguous and the classes are reported.
pub fn rpf_equilibrium_terms<R: Real>(
    system: &SymbolicSystem,
    terms: &[(R, &Potential<R>)],
) -> Result<MarkovMeasure<R>> {
    let t = build_transfer(system, terms)?;
    if !t.scale.is_finite() {
        return Err(Error::InvalidPotential("all windows are killed; no equilibrium".into()));
    }
    let n = t.blocks.len();

    // recurrent support: SCCs with a cycle in the positive-weight digraph
    let pos_edge = |i: usize, j: usize| {
        t.log_weights[i].is_finite() && t.blocks.succ[i].contains(&j)
    };
    let mut comps: Vec<Vec<usize>> = Vec::new();
    {
        let mut adj = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                if pos_edge(i, j) {
                    adj[i * n + j] = true;
                }
            }
        }
        let block = BlockSystem {
            states: t.blocks.states.clone(),
            succ: (0..n)
                .map(|i| (0..n).filter(|&j| adj[i * n + j]).collect::<Vec<_>>())
                .collect(),
        };
        for c in block.components() {
            let cyclic = c.len() > 1 || pos_edge(c[0], c[0]);
            if cyclic {
                comps.push(c);
            }
        }
    }
    if comps.is_empty() {
        return Err(Error::InvalidPotential("no recurrent states; no equilibrium".into()));
    }
    if comps.len() > 1 {
        return Err(Error::ReducibleSupport { components: comps });
    }
    let keep = &comps[0];
    let m = keep.len();
    let mut sub = Matrix::zeros(m);
    for (a, &i) in keep.iter().enumerate() {
        for (b, &j) in keep.iter().enumerate() {
            sub.set(a, b, t.matrix.get(i, j));
        }
    }
    let right = spectral_radius(&sub);
    let left = spectral_radius(&sub.transpose());
    let rho = right.rho;
    if rho <= R::zero() {
        return Err(Error::InvalidPotential("transfer operator has zero radius".into()));
    }
    if !right.converged || !left.converged {
        return Err(Error::Unsupported(
            "eigensolver did not converge on the restricted support".into(),
        ));
    }
    let log_pressure = t.scale + rho.ln();

    let r = &right.eigenvector;
    let l = &left.eigenvector;
    let mut stochastic = Matrix::zeros(m);
    for a in 0..m {
        let mut row = R::zero();
        for b in 0..m {
            let v = sub.get(a, b) * r[b] / (rho * r[a]);
            stochastic.set(a, b, v);
            row = row + v;
        }
        // renormalize away eigensolver residue
        for b in 0..m {
            stochastic.set(a, b, stochastic.get(a, b) / row);
        }
    }
    let mut stationary: Vec<R> = (0..m).map(|a| l[a] * r[a]).collect();
    let total: R = stationary.iter().fold(R::zero(), |s, &x| s + x);
    for x in stationary.iter_mut() {
        *x = *x / total;
    }
    let mut entropy = R::zero();
    for a in 0..m {
        for b in 0..m {
            let p = stochastic.get(a, b);
            if p > R::zero() {
                entropy = entropy - stationary[a] * p * p.ln();
            }
        }
    }
    let states: Vec<Vec<u8>> = keep.iter().map(|&i| t.blocks.states[i].clone()).collect();
    let mut state_index = std::collections::BTreeMap::new();
    for (a, w) in states.iter().enumerate() {
        state_index.insert(w.clone(), a);
    }
    Ok(MarkovMeasure {
        depth: states[0].len(),
        states,
        stochastic,
        stationary,
        entropy,
        log_pressure,
        state_index,
    })
}

pub fn rpf_equilibrium<R: Real>(
    system: &SymbolicSystem,
    potential: &Potential<R>,
    q: R,
) -> Result<MarkovMeasure<R>> {
    rpf_equilibrium_terms(system, &[(q, potential)])
}

/// Equilibrium of a glued system: the RPF measure of the dominant part
/// (lexicographically first on ties, tie reported).
pub fn glued_equilibrium<R: Real>(
    glued: &GluedSystem,
    potentials: &[Potential<R>],
    q: R,
) -> Result<(MarkovMeasure<R>, usize, bool)> {
    let mut best: Option<(R, usize)> = None;
    let mut tie = false;
    for (k, (part, pot)) in glued.parts().iter().zip(potentials.iter()).enumerate() {
        let p = pressure_exact_sft(part, pot, q)?;
        match best {
            None => best = Some((p, k)),
            Some((bp, _)) if p > bp + R::of(1e-12) => {
                best = Some((p, k));
                tie = false;
            }
            Some((bp, _)) if (p - bp).abs() <= R::of(1e-12) => tie = true,
            _ => {}
        }
    }
    let (_, k) = best.expect("glued system has parts");
    let measure = rpf_equilibrium(&glued.parts()[k], &potentials[k], q)?;
    Ok((measure, k, tie))
}

/// Ruelle-derivative check: central finite difference of the pressure against
/// `∫φ dν_q`. A subdifferential gap above `sqrt(step)` marks the point
/// non-differentiable and the one-sided slopes are reported instead.
#[derive(Debug, Clone)]
pub struct DerivativeReport<R> {
    pub q: R,
    pub step: R,
    pub fd_slope: R,
    pub integral: R,
    pub discrepancy: R,
    pub differentiable: bool,
    pub one_sided: Option<(R, R)>,
    pub tie: bool,
}

pub fn pressure_derivative_check<R: Real>(
    system: &SymbolicSystem,
    potential: &Potential<R>,
    q: R,
    step: R,
) -> Result<DerivativeReport<R>> {
    let p = |x: R| pressure_exact_sft(system, potential, x);
    let integral = rpf_equilibrium(system, potential, q)?.integral_of(potential)?;
    derivative_report(p, q, step, integral, false)
}

pub fn pressure_derivative_check_glued<R: Real>(
    glued: &GluedSystem,
    potentials: &[Potential<R>],
    q: R,
    step: R,
) -> Result<DerivativeReport<R>> {
    let p = |x: R| pressure_exact_glued(glued, potentials, x).map(|r| r.0);
    let (measure, k, tie) = glued_equilibrium(glued, potentials, q)?;
    let integral = measure.integral_of(&potentials[k])?;
    let mut rep = derivative_report(p, q, step, integral, tie)?;
    rep.tie = tie;
    Ok(rep)
}

fn derivative_report<R: Real, F: Fn(R) -> Result<R>>(
    pressure: F,
    q: R,
    step: R,
    integral: R,
    tie: bool,
) -> Result<DerivativeReport<R>> {
    let pm = pressure(q - step)?;
    let p0 = pressure(q)?;
    let pp = pressure(q + step)?;
    let d_minus = (p0 - pm) / step;
    let d_plus = (pp - p0) / step;
    let fd = (pp - pm) / (step + step);
    let gap = d_plus - d_minus;
    let differentiable = gap.abs() <= step.sqrt();
    Ok(DerivativeReport {
        q,
        step,
        fd_slope: fd,
        integral,
        discrepancy: (fd - integral).abs(),
        differentiable,
        one_sided: if differentiable { None } else { Some((d_minus, d_plus)) },
        tie,
    })
}

/// Exact pressure curve over a grid.
pub fn pressure_curve<R: Real>(
    system: &SymbolicSystem,
    potential: &Potential<R>,
    q_grid: &[R],
) -> Result<PressureCurve<R>> {
    let mut values = Vec::with_capacity(q_grid.len());
    let mut method = Vec::with_capacity(q_grid.len());
    for &q in q_grid {
        values.push(pressure_exact_sft(system, potential, q)?);
        method.push(Method::ExactSpectral);
    }
    Ok(PressureCurve {
        q_grid: q_grid.to_vec(),
        values,
        method,
        system_ref: system.label().to_string(),
        potential_ref: potential.label().to_string(),
    })
}

pub fn pressure_curve_glued<R: Real>(
    glued: &GluedSystem,
    potentials: &[Potential<R>],
    q_grid: &[R],
) -> Result<PressureCurve<R>> {
    let mut values = Vec::with_capacity(q_grid.len());
    let mut method = Vec::with_capacity(q_grid.len());
    for &q in q_grid {
        values.push(pressure_exact_glued(glued, potentials, q)?.0);
        method.push(Method::ExactSpectral);
    }
    Ok(PressureCurve {
        q_grid: q_grid.to_vec(),
        values,
        method,
        system_ref: "glued".to_string(),
        potential_ref: "per-part".to_string(),
    })
}

/// Evenly spaced grid, inclusive of both ends.
pub fn linspace<R: Real>(lo: R, hi: R, points: usize) -> Vec<R> {
    assert!(points >= 2);
    let step = (hi - lo) / R::of((points - 1) as f64);
    (0..points).map(|i| lo + step * R::of(i as f64)).collect()
}

/// Extend a grid symmetrically until the boundary secant slopes settle
/// (change below `1e-4`), so asymptotic-slope estimates are usable.
pub fn auto_extend_grid<R: Real, F: Fn(R) -> Result<R>>(
    pressure: F,
    mut q_min: R,
    mut q_max: R,
    step: R,
) -> Result<Vec<R>> {
    let tol = R::of(1e-4);
    let slope_at = |a: R, b: R| -> Result<R> { Ok((pressure(b)? - pressure(a)?) / (b - a)) };
    for _ in 0..16 {
        let s_end = slope_at(q_max - step, q_max)?;
        let s_far = slope_at(q_max + R::of(4.0) * step, q_max + R::of(5.0) * step)?;
        if (s_far - s_end).abs() < tol {
            break;
        }
        q_max = q_max + (q_max - q_min) / R::of(2.0);
    }
    for _ in 0..16 {
        let s_end = slope_at(q_min, q_min + step)?;
        let s_far = slope_at(q_min - R::of(5.0) * step, q_min - R::of(4.0) * step)?;
        if (s_far - s_end).abs() < tol {
            break;
        }
        q_min = q_min - (q_max - q_min) / R::of(2.0);
    }
    let points = ((q_max - q_min) / step).to_f64().unwrap().round() as usize + 1;
    Ok(linspace(q_min, q_max, points))
}
