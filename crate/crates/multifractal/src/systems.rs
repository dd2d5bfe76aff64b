//! The dynamical systems under analysis: one-sided subshifts of finite type,
//! piecewise-conformal Markov interval maps, and disjoint glued unions.
//!
//! Cylinder sets are the working currency everywhere: for shifts an
//! n-cylinder is an admissible word of length n, for interval maps it is a
//! branch itinerary. Cylinders stand in for Bowen balls at small radius, so
//! no ball radius parameter appears anywhere in the crate.

use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::linalg::{spectral_radius, Matrix};
use crate::scalar::{Bracket, Real};

pub const MAX_ALPHABET: usize = 64;

/// One-sided subshift of finite type on `m` symbols with a 0/1 transition
/// matrix (entry `(i, j)` allows symbol `j` to follow symbol `i`).
#[derive(Debug, Clone)]
pub struct SymbolicSystem {
    m: usize,
    transition: Vec<bool>,
    label: String,
    irreducible: bool,
    successors: Vec<Vec<u8>>,
    // block presentations are pure functions of the transition matrix;
    // clones share the cache
    blocks_cache: Arc<Mutex<std::collections::BTreeMap<usize, Arc<BlockSystem>>>>,
}

impl SymbolicSystem {
    pub fn new(label: impl Into<String>, rows: &[Vec<u8>]) -> Result<Self> {
        let m = rows.len();
        if m == 0 || m > MAX_ALPHABET {
            return Err(Error::InvalidSystem(format!(
                "alphabet size {m} outside 1..={MAX_ALPHABET}"
            )));
        }
        let mut transition = vec![false; m * m];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidSystem(format!(
                    "row {i} has {} entries, expected {m}",
                    row.len()
                )));
            }
            for (j, &e) in row.iter().enumerate() {
                if e > 1 {
                    return Err(Error::InvalidSystem(format!(
                        "transition entry ({i},{j}) = {e}, expected 0 or 1"
                    )));
                }
                transition[i * m + j] = e == 1;
            }
        }
        let mut sys = SymbolicSystem {
            m,
            transition,
            label: label.into(),
            irreducible: false,
            successors: Vec::new(),
            blocks_cache: Arc::new(Mutex::new(std::collections::BTreeMap::new())),
        };
        sys.successors = (0..m)
            .map(|i| (0..m).filter(|&j| sys.transition[i * m + j]).map(|j| j as u8).collect())
            .collect();
        sys.irreducible = sys.compute_irreducible();
        Ok(sys)
    }

    /// Full shift on `m` symbols: all-ones transition matrix.
    pub fn full_shift(m: usize) -> Self {
        let rows = vec![vec![1u8; m]; m];
        SymbolicSystem::new(format!("full-{m}"), &rows).expect("full shift is always valid")
    }

    /// Golden-mean shift: the word `11` is forbidden.
    pub fn golden_mean() -> Self {
        SymbolicSystem::new("golden-mean", &[vec![1, 1], vec![1, 0]]).unwrap()
    }

    pub fn alphabet_size(&self) -> usize {
        self.m
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn allows(&self, i: u8, j: u8) -> bool {
        self.transition[i as usize * self.m + j as usize]
    }

    pub fn successors(&self, i: u8) -> &[u8] {
        &self.successors[i as usize]
    }

    /// Cached reachability-closure irreducibility flag.
    pub fn is_irreducible(&self) -> bool {
        self.irreducible
    }

    fn compute_irreducible(&self) -> bool {
        let m = self.m;
        let mut reach = self.transition.clone();
        for k in 0..m {
            for i in 0..m {
                if reach[i * m + k] {
                    for j in 0..m {
                        if reach[k * m + j] {
                            reach[i * m + j] = true;
                        }
                    }
                }
            }
        }
        (0..m).all(|i| (0..m).all(|j| reach[i * m + j]))
    }

    /// Violated invariants, empty when the system is valid.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        for i in 0..self.m {
            if self.successors[i].is_empty() {
                out.push(format!("row {i} has no successor"));
            }
            if !(0..self.m).any(|k| self.transition[k * self.m + i]) {
                out.push(format!("column {i} has no predecessor"));
            }
        }
        out
    }

    pub fn is_admissible(&self, word: &[u8]) -> bool {
        if word.iter().any(|&s| s as usize >= self.m) {
            return false;
        }
        word.windows(2).all(|w| self.allows(w[0], w[1]))
    }

    /// Smallest `k` with all entries of `transition^k` positive, when one
    /// exists below the Wielandt bound. `None` for imprimitive matrices.
    pub fn primitivity_index(&self) -> Option<usize> {
        let m = self.m;
        let bound = (m - 1) * (m - 1) + 1;
        let mut pow = self.transition.clone();
        for k in 1..=bound {
            if pow.iter().all(|&b| b) {
                return Some(k);
            }
            let mut next = vec![false; m * m];
            for i in 0..m {
                for l in 0..m {
                    if pow[i * m + l] {
                        for j in 0..m {
                            if self.transition[l * m + j] {
                                next[i * m + j] = true;
                            }
                        }
                    }
                }
            }
            pow = next;
        }
        None
    }

    /// Strongly connected components of the transition digraph (Tarjan),
    /// in deterministic discovery order.
    pub fn components(&self) -> Vec<Vec<usize>> {
        components_of(self.m, |i, j| self.transition[i * self.m + j])
    }

    /// Lazy stream over admissible words of length `n`, lexicographic order.
    pub fn cylinders(&self, n: usize) -> Result<Cylinders<'_>> {
        if n == 0 {
            return Err(Error::ZeroCylinderLength);
        }
        Ok(Cylinders { sys: self, n, word: Vec::new(), cursor: Vec::new(), fresh: true, done: false })
    }

    /// Depth-first visit of all admissible words of length `n`; faster than
    /// the iterator for heavy enumeration (no per-item allocation).
    pub fn visit_cylinders<F: FnMut(&[u8])>(&self, n: usize, f: &mut F) -> Result<()> {
        if n == 0 {
            return Err(Error::ZeroCylinderLength);
        }
        let mut word = Vec::with_capacity(n);
        for s in 0..self.m as u8 {
            word.push(s);
            self.visit_rec(n, &mut word, f);
            word.pop();
        }
        Ok(())
    }

    /// Same visit restricted to words starting with `prefix` (admissibility of
    /// the prefix is required). Lets callers partition work by prefix.
    pub fn visit_cylinders_with_prefix<F: FnMut(&[u8])>(
        &self,
        prefix: &[u8],
        n: usize,
        f: &mut F,
    ) -> Result<()> {
        if n == 0 {
            return Err(Error::ZeroCylinderLength);
        }
        debug_assert!(self.is_admissible(prefix));
        if prefix.len() >= n {
            f(&prefix[..n]);
            return Ok(());
        }
        let mut word = prefix.to_vec();
        self.visit_rec(n, &mut word, f);
        Ok(())
    }

    fn visit_rec<F: FnMut(&[u8])>(&self, n: usize, word: &mut Vec<u8>, f: &mut F) {
        if word.len() == n {
            f(word);
            return;
        }
        let last = *word.last().expect("nonempty");
        // clone-free iteration over successor slice
        for idx in 0..self.successors[last as usize].len() {
            let s = self.successors[last as usize][idx];
            word.push(s);
            self.visit_rec(n, word, f);
            word.pop();
        }
    }

    /// Number of admissible words of length `n`: the total mass of
    /// `transition^(n-1)`. Falls back to log-scale counting on overflow.
    pub fn word_count<R: Real>(&self, n: usize) -> Result<WordCount<R>> {
        if n == 0 {
            return Err(Error::ZeroCylinderLength);
        }
        let m = self.m;
        let mut v: Vec<u128> = vec![1; m];
        let mut overflow = false;
        'exact: for _ in 1..n {
            let mut next = vec![0u128; m];
            for i in 0..m {
                let mut acc: u128 = 0;
                for &j in &self.successors[i] {
                    match acc.checked_add(v[j as usize]) {
                        Some(a) => acc = a,
                        None => {
                            overflow = true;
                            break 'exact;
                        }
                    }
                }
                next[i] = acc;
            }
            v = next;
        }
        if !overflow {
            let mut total: u128 = 0;
            for x in &v {
                match total.checked_add(*x) {
                    Some(t) => total = t,
                    None => {
                        overflow = true;
                        break;
                    }
                }
            }
            if !overflow {
                return Ok(WordCount::Exact(total));
            }
        }
        Ok(WordCount::Log(self.log_word_count(n)?))
    }

    /// `log` of the number of admissible words of length `n`, computed in
    /// log-space so it never overflows.
    pub fn log_word_count<R: Real>(&self, n: usize) -> Result<R> {
        if n == 0 {
            return Err(Error::ZeroCylinderLength);
        }
        let m = self.m;
        let mut logv: Vec<R> = vec![R::zero(); m];
        for _ in 1..n {
            let mut next = vec![R::neg_infinity(); m];
            for i in 0..m {
                let terms: Vec<R> = self.successors[i].iter().map(|&j| logv[j as usize]).collect();
                next[i] = log_sum_exp(&terms);
            }
            logv = next;
        }
        Ok(log_sum_exp(&logv))
    }

    /// Topological entropy in nats: log of the spectral radius of the
    /// transition matrix.
    pub fn topological_entropy<R: Real>(&self) -> R {
        let mut a = Matrix::zeros(self.m);
        for i in 0..self.m {
            for j in 0..self.m {
                if self.transition[i * self.m + j] {
                    a.set(i, j, R::one());
                }
            }
        }
        let r = spectral_radius(&a);
        r.rho.ln()
    }

    /// Block presentation: states are admissible words of length `d`, edges
    /// follow overlap. Locally constant potentials of depth `d` become
    /// functions of the source state, giving one transfer-operator code path
    /// for every depth.
    pub fn blocks(&self, d: usize) -> Result<Arc<BlockSystem>> {
        assert!(d >= 1, "block depth must be >= 1");
        if let Some(b) = self.blocks_cache.lock().unwrap().get(&d) {
            return Ok(Arc::clone(b));
        }
        let built = Arc::new(self.build_blocks(d)?);
        self.blocks_cache.lock().unwrap().insert(d, Arc::clone(&built));
        Ok(built)
    }

    fn build_blocks(&self, d: usize) -> Result<BlockSystem> {
        let mut states: Vec<Vec<u8>> = Vec::new();
        self.visit_cylinders(d, &mut |w| states.push(w.to_vec()))?;
        let n = states.len();
        let mut index = std::collections::BTreeMap::new();
        for (k, w) in states.iter().enumerate() {
            index.insert(w.clone(), k);
        }
        let mut succ = vec![Vec::new(); n];
        for (k, w) in states.iter().enumerate() {
            let last = *w.last().unwrap();
            for &s in self.successors(last) {
                let mut next = w[1..].to_vec();
                next.push(s);
                if d == 1 {
                    next = vec![s];
                }
                if let Some(&t) = index.get(&next) {
                    succ[k].push(t);
                }
            }
        }
        Ok(BlockSystem { states, succ })
    }
}

/// `d`-block presentation of a subshift (see [`SymbolicSystem::blocks`]).
#[derive(Debug, Clone)]
pub struct BlockSystem {
    /// Admissible `d`-words, lexicographic.
    pub states: Vec<Vec<u8>>,
    /// Successor state indices per state.
    pub succ: Vec<Vec<usize>>,
}

impl BlockSystem {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.states.len();
        let mut adj = vec![false; n * n];
        for (i, ss) in self.succ.iter().enumerate() {
            for &j in ss {
                adj[i * n + j] = true;
            }
        }
        components_of(n, |i, j| adj[i * n + j])
    }
}

/// Count of admissible words, exact while it fits in `u128`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WordCount<R> {
    Exact(u128),
    Log(R),
}

impl<R: Real> WordCount<R> {
    pub fn log(&self) -> R {
        match self {
            WordCount::Exact(c) => R::of(*c as f64).ln(),
            WordCount::Log(l) => *l,
        }
    }

    pub fn exact(&self) -> Option<u128> {
        match self {
            WordCount::Exact(c) => Some(*c),
            WordCount::Log(_) => None,
        }
    }

    pub fn approx(&self) -> f64 {
        match self {
            WordCount::Exact(c) => *c as f64,
            WordCount::Log(l) => l.to_f64().unwrap_or(f64::INFINITY).exp(),
        }
    }
}

/// Iterator over admissible words (see [`SymbolicSystem::cylinders`]).
pub struct Cylinders<'a> {
    sys: &'a SymbolicSystem,
    n: usize,
    word: Vec<u8>,
    cursor: Vec<usize>,
    fresh: bool,
    done: bool,
}

impl<'a> Cylinders<'a> {
    fn candidates(&self, depth: usize) -> &[u8] {
        if depth == 0 {
            // all symbols; represented implicitly
            &[]
        } else {
            self.sys.successors(self.word[depth - 1])
        }
    }

    fn candidate_count(&self, depth: usize) -> usize {
        if depth == 0 {
            self.sys.alphabet_size()
        } else {
            self.candidates(depth).len()
        }
    }

    fn candidate_at(&self, depth: usize, idx: usize) -> u8 {
        if depth == 0 {
            idx as u8
        } else {
            self.candidates(depth)[idx]
        }
    }

    /// Advance the DFS to the next complete word. `force` skips the current
    /// word (used after yielding it).
    fn step(&mut self, force: bool) -> bool {
        let mut need_advance = force;
        loop {
            if !need_advance {
                while self.word.len() < self.n {
                    let depth = self.word.len();
                    if self.candidate_count(depth) == 0 {
                        break;
                    }
                    let s = self.candidate_at(depth, 0);
                    self.word.push(s);
                    self.cursor.push(0);
                }
                if self.word.len() == self.n {
                    return true;
                }
            }
            // backtrack to a level with remaining candidates
            loop {
                if self.word.is_empty() {
                    return false;
                }
                let depth = self.word.len() - 1;
                let next = self.cursor[depth] + 1;
                if next < self.candidate_count(depth) {
                    self.word[depth] = self.candidate_at(depth, next);
                    self.cursor[depth] = next;
                    break;
                }
                self.word.pop();
                self.cursor.pop();
            }
            need_advance = false;
        }
    }
}

impl<'a> Iterator for Cylinders<'a> {
    type Item = Vec<u8>;

    fn next(&mut self) -> Option<Vec<u8>> {
        if self.done {
            return None;
        }
        let ok = if self.fresh {
            self.fresh = false;
            self.step(false)
        } else {
            self.step(true)
        };
        if ok {
            Some(self.word.clone())
        } else {
            self.done = true;
            None
        }
    }
}

fn log_sum_exp<R: Real>(terms: &[R]) -> R {
    let mut mx = R::neg_infinity();
    for &t in terms {
        mx = mx.max(t);
    }
    if !mx.is_finite() {
        return mx;
    }
    let mut acc = R::zero();
    for &t in terms {
        acc = acc + (t - mx).exp();
    }
    mx + acc.ln()
}

fn components_of<F: Fn(usize, usize) -> bool>(n: usize, edge: F) -> Vec<Vec<usize>> {
    // iterative Tarjan
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut comps: Vec<Vec<usize>> = Vec::new();
    let mut counter = 0usize;

    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut work: Vec<(usize, usize)> = vec![(root, 0)];
        while let Some(&mut (v, ref mut next)) = work.last_mut() {
            if index[v] == usize::MAX {
                index[v] = counter;
                low[v] = counter;
                counter += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            let mut descended = false;
            while *next < n {
                let w = *next;
                *next += 1;
                if !edge(v, w) {
                    continue;
                }
                if index[w] == usize::MAX {
                    work.push((w, 0));
                    descended = true;
                    break;
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            }
            if descended {
                continue;
            }
            work.pop();
            if let Some(&(parent, _)) = work.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                while let Some(w) = stack.pop() {
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                comps.push(comp);
            }
        }
    }
    comps.sort();
    comps
}

/// Disjoint union of subshifts with relabelled alphabets. The pressure of
/// the union is the maximum over the parts, and cylinder sets of distinct
/// parts never meet.
#[derive(Debug, Clone)]
pub struct GluedSystem {
    parts: Vec<SymbolicSystem>,
}

impl GluedSystem {
    pub fn new(parts: Vec<SymbolicSystem>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidSystem("glued system needs at least one part".into()));
        }
        Ok(GluedSystem { parts })
    }

    pub fn parts(&self) -> &[SymbolicSystem] {
        &self.parts
    }

    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (k, p) in self.parts.iter().enumerate() {
            for d in p.diagnostics() {
                out.push(format!("part {k}: {d}"));
            }
        }
        out
    }

    pub fn word_count<R: Real>(&self, n: usize) -> Result<WordCount<R>> {
        let mut exact: Option<u128> = Some(0);
        let mut logs: Vec<R> = Vec::new();
        for p in &self.parts {
            match p.word_count::<R>(n)? {
                WordCount::Exact(c) => {
                    exact = exact.and_then(|t| t.checked_add(c));
                    logs.push(R::of(c as f64).ln());
                }
                WordCount::Log(l) => {
                    exact = None;
                    logs.push(l);
                }
            }
        }
        Ok(match exact {
            Some(c) => WordCount::Exact(c),
            None => WordCount::Log(log_sum_exp(&logs)),
        })
    }

    /// Exactly the maximum over parts.
    pub fn topological_entropy<R: Real>(&self) -> R {
        let mut h = R::neg_infinity();
        for p in &self.parts {
            h = h.max(p.topological_entropy());
        }
        h
    }

    pub fn visit_cylinders<F: FnMut(usize, &[u8])>(&self, n: usize, f: &mut F) -> Result<()> {
        for (k, p) in self.parts.iter().enumerate() {
            p.visit_cylinders(n, &mut |w| f(k, w))?;
        }
        Ok(())
    }
}

/// One monotone branch of an interval map: domain `[l, r)`, the map formula,
/// and the conformal factor `a(x) > 0` on the branch.
#[derive(Debug, Clone)]
pub struct Branch<R> {
    pub domain: (R, R),
    pub map: Expr,
    pub factor: Expr,
}

/// Piecewise-conformal Markov map of the unit interval. Branch domains are
/// ordered and disjoint inside `[0,1]`; gaps are allowed so that Cantor
/// repellers (branches whose domains do not exhaust `[0,1]`) fit the same
/// type. Itineraries must biject with words of the derived subshift, which
/// is what the Markov diagnostic checks.
#[derive(Debug, Clone)]
pub struct PiecewiseConformalMap<R> {
    branches: Vec<Branch<R>>,
    markov_partition: bool,
    label: String,
}

impl<R: Real> PiecewiseConformalMap<R> {
    pub fn new(
        label: impl Into<String>,
        branches: Vec<Branch<R>>,
        markov_partition: bool,
    ) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::InvalidSystem("map needs at least one branch".into()));
        }
        if branches.len() > MAX_ALPHABET {
            return Err(Error::InvalidSystem(format!(
                "too many branches ({} > {MAX_ALPHABET})",
                branches.len()
            )));
        }
        let eps = R::of(1e-12);
        let mut prev_r = R::zero() - eps;
        for (i, b) in branches.iter().enumerate() {
            let (l, r) = b.domain;
            if !(l < r) {
                return Err(Error::InvalidSystem(format!("branch {i} domain is empty")));
            }
            if l < -eps || r > R::one() + eps {
                return Err(Error::InvalidSystem(format!("branch {i} domain leaves [0,1]")));
            }
            if l < prev_r {
                return Err(Error::InvalidSystem(format!("branch {i} overlaps branch {}", i - 1)));
            }
            prev_r = r;
        }
        Ok(PiecewiseConformalMap { branches, markov_partition, label: label.into() })
    }

    /// Full-branch piecewise-linear map: branch `i` has slope `slopes[i]` and
    /// maps its domain onto `[0,1)`. Branch domains are laid out from `0`,
    /// with total length `sum(1/slope)` (less than one gives a repeller).
    pub fn from_slopes(label: impl Into<String>, slopes: &[f64]) -> Result<Self> {
        let mut branches = Vec::new();
        let mut l = 0.0f64;
        for (i, &s) in slopes.iter().enumerate() {
            if s <= 1.0 {
                return Err(Error::InvalidSystem(format!("slope {s} of branch {i} must exceed 1")));
            }
            let r = l + 1.0 / s;
            let map = Expr::Sub(
                Box::new(Expr::Mul(Box::new(Expr::Const(s)), Box::new(Expr::Var))),
                Box::new(Expr::Const(s * l)),
            );
            branches.push(Branch {
                domain: (R::of(l), R::of(r)),
                map,
                factor: Expr::Const(s),
            });
            l = r;
        }
        if l > 1.0 + 1e-12 {
            return Err(Error::InvalidSystem("slopes sum to a domain longer than [0,1]".into()));
        }
        PiecewiseConformalMap::new(label, branches, true)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn branches(&self) -> &[Branch<R>] {
        &self.branches
    }

    pub fn markov_partition(&self) -> bool {
        self.markov_partition
    }

    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    /// Image interval of a branch (endpoints sorted, so decreasing branches
    /// are fine).
    pub fn branch_image(&self, i: usize) -> (R, R) {
        let b = &self.branches[i];
        let fl = b.map.eval(b.domain.0);
        let fr = b.map.eval(b.domain.1);
        if fl <= fr {
            (fl, fr)
        } else {
            (fr, fl)
        }
    }

    pub fn branch_of(&self, x: R) -> Option<usize> {
        self.branches.iter().position(|b| b.domain.0 <= x && x < b.domain.1)
    }

    pub fn apply(&self, x: R) -> Option<R> {
        self.branch_of(x).map(|i| self.branches[i].map.eval(x))
    }

    /// Certified lower bound on `a(x)` over all branches.
    pub fn min_factor(&self) -> R {
        let mut lo = R::infinity();
        for b in &self.branches {
            let enc = b.factor.eval_interval(Bracket::new(b.domain.0, b.domain.1));
            lo = lo.min(enc.lo);
        }
        lo
    }

    /// Bounded-contraction condition: `a(x) >= 1` everywhere.
    pub fn bounded_contraction(&self) -> bool {
        self.min_factor() >= R::one() - R::of(1e-12)
    }

    pub fn is_uniformly_expanding(&self) -> bool {
        self.min_factor() > R::one()
    }

    /// Violated invariants, empty when the map is valid.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, b) in self.branches.iter().enumerate() {
            let enc = b.factor.eval_interval(Bracket::new(b.domain.0, b.domain.1));
            if !(enc.lo > R::zero()) {
                out.push(format!("branch {i}: conformal factor not strictly positive"));
            }
            // monotonicity probe
            let (l, r) = b.domain;
            let step = (r - l) / R::of(64.0);
            let mut prev = b.map.eval(l);
            let increasing = b.map.eval(r) >= prev;
            let mut x = l + step;
            let mut monotone = true;
            while x < r {
                let v = b.map.eval(x);
                if (increasing && v < prev - R::of(1e-12)) || (!increasing && v > prev + R::of(1e-12)) {
                    monotone = false;
                    break;
                }
                prev = v;
                x = x + step;
            }
            if !monotone {
                out.push(format!("branch {i}: map is not monotone on its domain"));
            }
        }
        if self.markov_partition {
            if let Err(e) = self.symbolic() {
                out.push(format!("not Markov: {e}"));
            }
        }
        out
    }

    /// The subshift of branch itineraries: `j` may follow `i` when the image
    /// of branch `i` covers the domain of branch `j`. Rejects non-Markov maps
    /// (an image that cuts a branch domain properly).
    pub fn symbolic(&self) -> Result<SymbolicSystem> {
        let tol = R::of(1e-9);
        let k = self.branches.len();
        let mut rows = vec![vec![0u8; k]; k];
        for i in 0..k {
            let (lo, hi) = self.branch_image(i);
            for (j, bj) in self.branches.iter().enumerate() {
                let (l, r) = bj.domain;
                let covered = lo <= l + tol && r <= hi + tol;
                let disjoint = r <= lo + tol || hi <= l + tol;
                if covered {
                    rows[i][j] = 1;
                } else if !disjoint {
                    return Err(Error::InvalidSystem(format!(
                        "image of branch {i} cuts the domain of branch {j}: map is not Markov"
                    )));
                }
            }
        }
        SymbolicSystem::new(format!("{}-itineraries", self.label), &rows)
    }

    /// Enclosure of the cylinder `[w]` (points whose branch itinerary starts
    /// with `w`) as a subinterval of branch `w[0]`'s domain. Computed by
    /// backward preimages with bisection on each monotone branch, then
    /// outward widening.
    pub fn cylinder_interval(&self, word: &[u8]) -> Result<Bracket<R>> {
        if word.is_empty() {
            return Err(Error::ZeroCylinderLength);
        }
        let last = word[word.len() - 1] as usize;
        if last >= self.branches.len() {
            return Err(Error::InvalidSystem(format!("symbol {last} has no branch")));
        }
        let b = &self.branches[last];
        let mut k = Bracket::new(b.domain.0, b.domain.1);
        for &s in word[..word.len() - 1].iter().rev() {
            let i = s as usize;
            if i >= self.branches.len() {
                return Err(Error::InvalidSystem(format!("symbol {i} has no branch")));
            }
            k = self.branch_preimage(i, k);
        }
        Ok(k)
    }

    /// Preimage of the interval `k` under branch `i`, clipped to the branch
    /// domain.
    fn branch_preimage(&self, i: usize, k: Bracket<R>) -> Bracket<R> {
        let b = &self.branches[i];
        let (l, r) = b.domain;
        let fl = b.map.eval(l);
        let fr = b.map.eval(r);
        let increasing = fl <= fr;
        let solve = |target: R, round_down: bool| -> R {
            // f monotone on [l, r]; find x with f(x) = target (clamped)
            let (mut a, mut c) = (l, r);
            for _ in 0..100 {
                let mid = (a + c) / R::of(2.0);
                let v = b.map.eval(mid);
                let go_left = if increasing { v >= target } else { v < target };
                if go_left {
                    c = mid;
                } else {
                    a = mid;
                }
            }
            if round_down {
                a
            } else {
                c
            }
        };
        let (tlo, thi) = (k.lo, k.hi);
        let (xlo, xhi) = if increasing {
            (solve(tlo, true), solve(thi, false))
        } else {
            (solve(thi, true), solve(tlo, false))
        };
        let pad = R::of(1e-13);
        Bracket::new((xlo - pad).max(l), (xhi + pad).min(r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_shift_valid_and_counts() {
        let s = SymbolicSystem::full_shift(2);
        assert!(s.diagnostics().is_empty());
        assert!(s.is_irreducible());
        assert_eq!(s.word_count::<f64>(3).unwrap().exact(), Some(8));
        let m3 = SymbolicSystem::full_shift(3);
        assert_eq!(m3.word_count::<f64>(5).unwrap().exact(), Some(243));
    }

    #[test]
    fn stranded_symbol_diagnosed() {
        let s = SymbolicSystem::new("bad", &[vec![0, 0], vec![1, 1]]).unwrap();
        let d = s.diagnostics();
        assert!(d.iter().any(|x| x == "row 0 has no successor"), "{d:?}");
    }

    #[test]
    fn golden_mean_counts_and_entropy() {
        let g = SymbolicSystem::golden_mean();
        assert!(g.diagnostics().is_empty());
        assert!(g.is_irreducible());
        // Fibonacci: F6 = 8 words of length 4, F12 = 144 of length 10
        assert_eq!(g.word_count::<f64>(4).unwrap().exact(), Some(8));
        assert_eq!(g.word_count::<f64>(10).unwrap().exact(), Some(144));
        let h: f64 = g.topological_entropy();
        let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
        assert!((h - golden.ln()).abs() < 1e-11);
    }

    #[test]
    fn cylinders_enumerate_exactly_once() {
        let g = SymbolicSystem::golden_mean();
        let words: Vec<Vec<u8>> = g.cylinders(4).unwrap().collect();
        assert_eq!(words.len(), 8);
        let mut sorted = words.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 8);
        assert!(words.iter().all(|w| g.is_admissible(w)));
        // visitor agrees with iterator
        let mut visited = Vec::new();
        g.visit_cylinders(4, &mut |w| visited.push(w.to_vec())).unwrap();
        assert_eq!(words, visited);
    }

    #[test]
    fn cylinders_reject_n_zero() {
        let s = SymbolicSystem::full_shift(2);
        assert!(s.cylinders(0).is_err());
        assert!(s.word_count::<f64>(0).is_err());
    }

    #[test]
    fn word_count_submultiplicative() {
        for sys in [SymbolicSystem::full_shift(3), SymbolicSystem::golden_mean()] {
            let wc = |n: usize| sys.word_count::<f64>(n).unwrap().exact().unwrap();
            for n in 1..=8usize {
                for m in 1..=8usize {
                    assert!(wc(n + m) <= wc(n) * wc(m), "n={n} m={m}");
                }
            }
        }
    }

    #[test]
    fn log_word_count_matches_exact_and_converges() {
        let g = SymbolicSystem::golden_mean();
        for n in [1usize, 5, 10, 20] {
            let exact = g.word_count::<f64>(n).unwrap().exact().unwrap() as f64;
            let l: f64 = g.log_word_count(n).unwrap();
            assert!((l - exact.ln()).abs() < 1e-9);
        }
        // monotone from above, converging to the entropy
        let h: f64 = g.topological_entropy();
        let mut prev = f64::INFINITY;
        for n in 1..=30 {
            let v = g.log_word_count::<f64>(n).unwrap() / n as f64;
            assert!(v <= prev + 1e-12, "not monotone at n={n}");
            assert!(v >= h - 1e-12);
            prev = v;
        }
        // Perron correction decays like log(c)/n; within 1e-3 takes n ~ 160
        let v160 = g.log_word_count::<f64>(160).unwrap() / 160.0;
        assert!((v160 - h).abs() < 1e-3);
    }

    #[test]
    fn glued_counts_and_entropy() {
        let g = GluedSystem::new(vec![SymbolicSystem::full_shift(2), SymbolicSystem::full_shift(3)])
            .unwrap();
        assert_eq!(g.word_count::<f64>(2).unwrap().exact(), Some(13));
        let h: f64 = g.topological_entropy();
        assert!((h - 3.0f64.ln()).abs() < 1e-11);

        let gg = GluedSystem::new(vec![SymbolicSystem::full_shift(2), SymbolicSystem::full_shift(2)])
            .unwrap();
        assert_eq!(gg.word_count::<f64>(2).unwrap().exact(), Some(8));
        let mut total = 0usize;
        gg.visit_cylinders(2, &mut |_, _| total += 1).unwrap();
        assert_eq!(total, 8);
    }

    #[test]
    fn glued_entropy_is_exact_max() {
        let parts = vec![SymbolicSystem::golden_mean(), SymbolicSystem::full_shift(2)];
        let g = GluedSystem::new(parts.clone()).unwrap();
        let expect: f64 = parts.iter().map(|p| p.topological_entropy()).fold(f64::NEG_INFINITY, f64::max);
        let h: f64 = g.topological_entropy();
        assert_eq!(h, expect);
    }

    #[test]
    fn doubling_map_is_markov_full() {
        let m = PiecewiseConformalMap::<f64>::from_slopes("doubling", &[2.0, 2.0]).unwrap();
        assert!(m.diagnostics().is_empty());
        assert!(m.is_uniformly_expanding());
        assert!(m.bounded_contraction());
        let sft = m.symbolic().unwrap();
        assert_eq!(sft.alphabet_size(), 2);
        assert!(sft.allows(0, 1) && sft.allows(1, 0));
        // cylinder [0,1] = [1/4, 1/2)
        let iv = m.cylinder_interval(&[0, 1]).unwrap();
        assert!((iv.lo - 0.25).abs() < 1e-9 && (iv.hi - 0.5).abs() < 1e-9);
    }

    #[test]
    fn repeller_with_gap_is_accepted() {
        let m = PiecewiseConformalMap::<f64>::from_slopes("repeller-2-4", &[2.0, 4.0]).unwrap();
        assert!(m.diagnostics().is_empty());
        let sft = m.symbolic().unwrap();
        assert_eq!(sft.alphabet_size(), 2);
        assert!(sft.allows(0, 0) && sft.allows(1, 1));
    }

    #[test]
    fn non_markov_map_rejected() {
        // branch image [0, 0.7) cuts branch 1's domain [0.5, 1)
        let b0 = Branch {
            domain: (0.0f64, 0.5),
            map: Expr::parse("1.4*x").unwrap(),
            factor: Expr::Const(1.4),
        };
        let b1 = Branch {
            domain: (0.5f64, 1.0),
            map: Expr::parse("2*x - 1").unwrap(),
            factor: Expr::Const(2.0),
        };
        let m = PiecewiseConformalMap::new("bad", vec![b0, b1], true).unwrap();
        assert!(m.symbolic().is_err());
        assert!(!m.diagnostics().is_empty());
    }

    #[test]
    fn components_of_reducible_matrix() {
        let s = SymbolicSystem::new("red", &[vec![1, 1], vec![0, 1]]).unwrap();
        assert!(!s.is_irreducible());
        let comps = s.components();
        assert_eq!(comps.len(), 2);
    }
}
