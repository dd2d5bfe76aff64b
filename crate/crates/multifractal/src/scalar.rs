//! Scalar abstraction: everything numeric in this crate is generic over a
//! floating-point type implementing [`Real`].
//!
//! Extended values are represented with the type's own `infinity()` /
//! `neg_infinity()`; potentials may take the value `+inf`, spectra use
//! `-inf` for empty level sets.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossless-enough conversion from an `f64` literal (tolerances, grid
    /// steps, table entries).
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant not representable in scalar type")
    }
}

impl<T> Real for T where
    T: Float + FromPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
}

/// Half of a two-sided bound: a closed interval `[lo, hi]` with extended
/// endpoints. Used for Birkhoff-average brackets and subdifferentials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket<R> {
    pub lo: R,
    pub hi: R,
}

impl<R: Real> Bracket<R> {
    pub fn new(lo: R, hi: R) -> Self {
        debug_assert!(!(lo > hi), "bracket lo {lo:?} > hi {hi:?}");
        Bracket { lo, hi }
    }

    pub fn point(x: R) -> Self {
        Bracket { lo: x, hi: x }
    }

    pub fn width(&self) -> R {
        self.hi - self.lo
    }

    pub fn contains(&self, x: R) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn intersects(&self, other: &Bracket<R>) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Scale by a constant, flipping endpoints for negative factors.
    pub fn scale(&self, c: R) -> Self {
        if c >= R::zero() {
            Bracket { lo: self.lo * c, hi: self.hi * c }
        } else {
            Bracket { lo: self.hi * c, hi: self.lo * c }
        }
    }

    pub fn shift(&self, c: R) -> Self {
        Bracket { lo: self.lo + c, hi: self.hi + c }
    }
}
