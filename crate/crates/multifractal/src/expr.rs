//! A small expression grammar for map formulas, conformal factors, and
//! pointwise potentials on `[0,1]`.
//!
//! Grammar (infix, `^` binds tightest and is right-associative):
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | 'x' | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! ident := log | exp | abs | min | max | iflt
//! ```
//!
//! `iflt(a, b, t, f)` evaluates to `t` where `a < b` and `f` elsewhere; it is
//! the piecewise construct. Every expression can be evaluated at a point or
//! over an interval; interval results are outward-widened enclosures, so
//! brackets derived from them are conservative.

use crate::error::{Error, Result};
use crate::scalar::{Bracket, Real};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Log(Box<Expr>),
    Exp(Box<Expr>),
    Abs(Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
    /// iflt(a, b, t, f) = if a < b { t } else { f }
    IfLt(Box<Expr>, Box<Expr>, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        Parser::new(src).parse()
    }

    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    /// Shift the expression by a constant (used when centering potentials).
    pub fn shifted(&self, delta: f64) -> Expr {
        Expr::Add(Box::new(self.clone()), Box::new(Expr::Const(delta)))
    }

    /// Evaluate at a point.
    pub fn eval<R: Real>(&self, x: R) -> R {
        match self {
            Expr::Const(c) => R::of(*c),
            Expr::Var => x,
            Expr::Neg(a) => -a.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, b) => pow_point(a.eval(x), b.eval(x)),
            Expr::Log(a) => a.eval(x).ln(),
            Expr::Exp(a) => a.eval(x).exp(),
            Expr::Abs(a) => a.eval(x).abs(),
            Expr::Min(a, b) => a.eval(x).min(b.eval(x)),
            Expr::Max(a, b) => a.eval(x).max(b.eval(x)),
            Expr::IfLt(a, b, t, f) => {
                if a.eval(x) < b.eval(x) {
                    t.eval(x)
                } else {
                    f.eval(x)
                }
            }
        }
    }

    /// Evaluate over an interval, returning an enclosure of the range.
    pub fn eval_interval<R: Real>(&self, iv: Bracket<R>) -> Bracket<R> {
        let b = match self {
            Expr::Const(c) => Bracket::point(R::of(*c)),
            Expr::Var => iv,
            Expr::Neg(a) => {
                let r = a.eval_interval(iv);
                Bracket::new(-r.hi, -r.lo)
            }
            Expr::Add(a, b) => {
                let (p, q) = (a.eval_interval(iv), b.eval_interval(iv));
                Bracket::new(p.lo + q.lo, p.hi + q.hi)
            }
            Expr::Sub(a, b) => {
                let (p, q) = (a.eval_interval(iv), b.eval_interval(iv));
                Bracket::new(p.lo - q.hi, p.hi - q.lo)
            }
            Expr::Mul(a, b) => {
                let (p, q) = (a.eval_interval(iv), b.eval_interval(iv));
                let cands = [p.lo * q.lo, p.lo * q.hi, p.hi * q.lo, p.hi * q.hi];
                minmax(&cands)
            }
            Expr::Div(a, b) => {
                let (p, q) = (a.eval_interval(iv), b.eval_interval(iv));
                if q.lo <= R::zero() && q.hi >= R::zero() {
                    // division through zero: no useful enclosure
                    Bracket::new(R::neg_infinity(), R::infinity())
                } else {
                    let cands = [p.lo / q.lo, p.lo / q.hi, p.hi / q.lo, p.hi / q.hi];
                    minmax(&cands)
                }
            }
            Expr::Pow(a, b) => {
                let p = a.eval_interval(iv);
                let q = b.eval_interval(iv);
                pow_interval(p, q)
            }
            Expr::Log(a) => {
                let p = a.eval_interval(iv);
                Bracket::new(p.lo.max(R::zero()).ln(), p.hi.ln())
            }
            Expr::Exp(a) => {
                let p = a.eval_interval(iv);
                Bracket::new(p.lo.exp(), p.hi.exp())
            }
            Expr::Abs(a) => {
                let p = a.eval_interval(iv);
                if p.lo >= R::zero() {
                    p
                } else if p.hi <= R::zero() {
                    Bracket::new(-p.hi, -p.lo)
                } else {
                    Bracket::new(R::zero(), (-p.lo).max(p.hi))
                }
            }
            Expr::Min(a, b) => {
                let (p, q) = (a.eval_interval(iv), b.eval_interval(iv));
                Bracket::new(p.lo.min(q.lo), p.hi.min(q.hi))
            }
            Expr::Max(a, b) => {
                let (p, q) = (a.eval_interval(iv), b.eval_interval(iv));
                Bracket::new(p.lo.max(q.lo), p.hi.max(q.hi))
            }
            Expr::IfLt(a, b, t, f) => {
                let (p, q) = (a.eval_interval(iv), b.eval_interval(iv));
                if p.hi < q.lo {
                    t.eval_interval(iv)
                } else if p.lo >= q.hi {
                    f.eval_interval(iv)
                } else {
                    let (u, v) = (t.eval_interval(iv), f.eval_interval(iv));
                    Bracket::new(u.lo.min(v.lo), u.hi.max(v.hi))
                }
            }
        };
        // exact leaves need no outward rounding
        if matches!(self, Expr::Const(_) | Expr::Var) {
            b
        } else {
            widen(b)
        }
    }

    /// True when the expression's value is independent of `x`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Var => false,
            Expr::Neg(a) | Expr::Log(a) | Expr::Exp(a) | Expr::Abs(a) => a.is_constant(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b)
            | Expr::Min(a, b)
            | Expr::Max(a, b) => a.is_constant() && b.is_constant(),
            Expr::IfLt(a, b, t, f) => {
                a.is_constant() && b.is_constant() && t.is_constant() && f.is_constant()
            }
        }
    }
}

fn pow_point<R: Real>(base: R, ex: R) -> R {
    let rounded = ex.round();
    if (ex - rounded).abs() < R::of(1e-12) {
        if let Some(i) = rounded.to_i32() {
            return base.powi(i);
        }
    }
    base.powf(ex)
}

fn pow_interval<R: Real>(p: Bracket<R>, q: Bracket<R>) -> Bracket<R> {
    // only (numerically) constant exponents are supported in interval mode
    if q.width() > R::of(1e-9) * (R::one() + q.lo.abs()) {
        return Bracket::new(R::neg_infinity(), R::infinity());
    }
    let ex = (q.lo + q.hi) / R::of(2.0);
    let rounded = ex.round();
    let is_int = (ex - rounded).abs() < R::of(1e-12);
    if is_int {
        let k = rounded.to_i32().unwrap_or(0);
        let cands = [p.lo.powi(k), p.hi.powi(k)];
        let mut b = minmax(&cands);
        // even powers of an interval through zero attain zero
        if k % 2 == 0 && p.lo < R::zero() && p.hi > R::zero() && k > 0 {
            b.lo = R::zero();
        }
        if k < 0 && p.lo <= R::zero() && p.hi >= R::zero() {
            return Bracket::new(R::neg_infinity(), R::infinity());
        }
        b
    } else {
        // real exponent: monotone on positive base
        if p.lo < R::zero() {
            return Bracket::new(R::neg_infinity(), R::infinity());
        }
        let cands = [p.lo.powf(ex), p.hi.powf(ex)];
        minmax(&cands)
    }
}

fn minmax<R: Real>(xs: &[R]) -> Bracket<R> {
    let mut lo = R::infinity();
    let mut hi = R::neg_infinity();
    for &x in xs {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    Bracket::new(lo, hi)
}

/// Outward widening by a few ulps so naive interval arithmetic stays an
/// enclosure despite rounding.
fn widen<R: Real>(b: Bracket<R>) -> Bracket<R> {
    let eps = R::of(4.0 * f64::EPSILON);
    let pad = |x: R, up: bool| {
        if !x.is_finite() {
            return x;
        }
        let d = x.abs() * eps + R::of(1e-300);
        if up {
            x + d
        } else {
            x - d
        }
    };
    Bracket::new(pad(b.lo, false), pad(b.hi, true))
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, bytes: src.as_bytes(), pos: 0 }
    }

    fn parse(mut self) -> Result<Expr> {
        let e = self.expr()?;
        self.skip_ws();
        if self.pos != self.bytes.len() {
            return Err(self.err("trailing input"));
        }
        Ok(e)
    }

    fn err(&self, msg: &str) -> Error {
        Error::Formula(format!("{msg} at byte {} in {:?}", self.pos, self.src))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    // '^' binds tighter than unary minus and is right-associative; the
    // exponent may itself carry a sign.
    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let ex = self.unary()?;
            Ok(Expr::Pow(Box::new(base), Box::new(ex)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            _ => Err(self.err("expected number, 'x', function, or '('")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() {
            let c = self.bytes[self.pos];
            if c.is_ascii_digit() || c == b'.' {
                self.pos += 1;
            } else if (c == b'e' || c == b'E')
                && self.pos > start
                && self
                    .bytes
                    .get(self.pos + 1)
                    .is_some_and(|&d| d.is_ascii_digit() || d == b'+' || d == b'-')
            {
                self.pos += 2;
            } else {
                break;
            }
        }
        self.src[start..self.pos]
            .parse::<f64>()
            .map(Expr::Const)
            .map_err(|e| Error::Formula(format!("bad number: {e}")))
    }

    fn ident(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = &self.src[start..self.pos];
        if name == "x" {
            return Ok(Expr::Var);
        }
        if name == "pi" {
            return Ok(Expr::Const(std::f64::consts::PI));
        }
        if name == "e" {
            return Ok(Expr::Const(std::f64::consts::E));
        }
        if !self.eat(b'(') {
            return Err(self.err("expected '(' after function name"));
        }
        let mut args = vec![self.expr()?];
        while self.eat(b',') {
            args.push(self.expr()?);
        }
        if !self.eat(b')') {
            return Err(self.err("expected ')'"));
        }
        let nargs = args.len();
        let mut it = args.into_iter();
        let wrong = |want: usize| {
            Error::Formula(format!("{name} takes {want} argument(s), got {nargs}"))
        };
        match (name, nargs) {
            ("log", 1) => Ok(Expr::Log(Box::new(it.next().unwrap()))),
            ("exp", 1) => Ok(Expr::Exp(Box::new(it.next().unwrap()))),
            ("abs", 1) => Ok(Expr::Abs(Box::new(it.next().unwrap()))),
            ("min", 2) => Ok(Expr::Min(Box::new(it.next().unwrap()), Box::new(it.next().unwrap()))),
            ("max", 2) => Ok(Expr::Max(Box::new(it.next().unwrap()), Box::new(it.next().unwrap()))),
            ("iflt", 4) => Ok(Expr::IfLt(
                Box::new(it.next().unwrap()),
                Box::new(it.next().unwrap()),
                Box::new(it.next().unwrap()),
                Box::new(it.next().unwrap()),
            )),
            ("log", _) | ("exp", _) | ("abs", _) => Err(wrong(1)),
            ("min", _) | ("max", _) => Err(wrong(2)),
            ("iflt", _) => Err(wrong(4)),
            _ => Err(Error::Formula(format!("unknown function {name:?}"))),
        }
    }
}
