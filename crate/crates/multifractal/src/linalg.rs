//! Dense nonnegative-matrix helpers: spectral radius by power iteration and
//! Perron eigenvectors. Matrices here are tiny (block presentations of
//! subshifts, at most a few thousand states), so nothing sparse or fancy.

use crate::scalar::Real;

/// Row-major dense square matrix.
#[derive(Debug, Clone)]
pub struct Matrix<R> {
    pub n: usize,
    pub data: Vec<R>,
}

impl<R: Real> Matrix<R> {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![R::zero(); n * n] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> R {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: R) {
        self.data[i * self.n + j] = v;
    }

    pub fn transpose(&self) -> Matrix<R> {
        let mut t = Matrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matvec(&self, x: &[R], out: &mut [R]) {
        for i in 0..self.n {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            let mut acc = R::zero();
            for (a, v) in row.iter().zip(x.iter()) {
                acc = acc + *a * *v;
            }
            out[i] = acc;
        }
    }
}

/// Result of a spectral-radius computation.
#[derive(Debug, Clone)]
pub struct SpectralRadius<R> {
    pub rho: R,
    pub eigenvector: Vec<R>,
    pub converged: bool,
}

pub const POWER_TOL: f64 = 1e-12;
pub const POWER_MAX_ITERS: usize = 100_000;

/// Spectral radius of a nonnegative matrix by shifted power iteration.
///
/// Iterating on `A + cI` with the all-ones start vector keeps oscillatory
/// spectra in check; the Collatz–Wielandt ratios
/// `min_i (Bx)_i/x_i <= rho(B) <= max_i (Bx)_i/x_i` give a certified
/// stopping test. The unit shift handles periodic supports, but a weighted
/// matrix can carry a near `±rho` eigenvalue pair that the unit shift barely
/// separates, so a second phase re-shifts by the crude first-phase estimate
/// (which turns the pair ratio into `|λ2 + rho| / 2rho`, bounded well below
/// one). Reducible inputs may stall with an open bracket; that is reported
/// through `converged`.
pub fn spectral_radius<R: Real>(a: &Matrix<R>) -> SpectralRadius<R> {
    if a.n == 0 {
        return SpectralRadius { rho: R::zero(), eigenvector: vec![], converged: true };
    }
    let first = power_phase(a, R::one(), 256);
    if first.converged {
        return first;
    }
    let shift = first.rho.max(R::of(1e-300));
    power_phase(a, shift, POWER_MAX_ITERS - 256)
}

fn power_phase<R: Real>(a: &Matrix<R>, shift: R, max_iters: usize) -> SpectralRadius<R> {
    let n = a.n;
    let tol = R::of(POWER_TOL);
    let mut x = vec![R::one(); n];
    let mut y = vec![R::zero(); n];
    let mut last = (R::infinity(), false);
    for _ in 0..max_iters {
        a.matvec(&x, &mut y);
        let mut hi = R::neg_infinity();
        let mut lo = R::infinity();
        let mut norm = R::zero();
        for i in 0..n {
            y[i] = y[i] + shift * x[i];
            if x[i] > R::zero() {
                let ratio = y[i] / x[i];
                hi = hi.max(ratio);
                lo = lo.min(ratio);
            }
            norm = norm.max(y[i]);
        }
        if norm <= R::zero() {
            return SpectralRadius { rho: R::zero(), eigenvector: x, converged: true };
        }
        for v in y.iter_mut() {
            *v = *v / norm;
        }
        std::mem::swap(&mut x, &mut y);
        let gap = hi - lo;
        let scale = hi.abs().max(R::of(1e-300));
        last = (hi - shift, gap < tol * scale * R::of(16.0));
        if gap < tol * scale {
            return SpectralRadius { rho: hi - shift, eigenvector: x, converged: true };
        }
    }
    SpectralRadius { rho: last.0, eigenvector: x, converged: last.1 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_mean_radius() {
        let mut a = Matrix::zeros(2);
        a.set(0, 0, 1.0f64);
        a.set(0, 1, 1.0);
        a.set(1, 0, 1.0);
        let r = spectral_radius(&a);
        let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
        assert!(r.converged);
        assert!((r.rho - golden).abs() < 1e-11, "{}", r.rho);
    }

    #[test]
    fn periodic_matrix_does_not_oscillate() {
        // two-cycle with weights: eigenvalues +-sqrt(2)
        let mut a = Matrix::zeros(2);
        a.set(0, 1, 2.0f64);
        a.set(1, 0, 1.0);
        let r = spectral_radius(&a);
        assert!(r.converged);
        assert!((r.rho - 2.0f64.sqrt()).abs() < 1e-11, "{}", r.rho);
    }

    #[test]
    fn zero_row_matrix() {
        let mut a = Matrix::zeros(2);
        a.set(0, 0, 0.5f64);
        a.set(0, 1, 0.5);
        let r = spectral_radius(&a);
        assert!((r.rho - 0.5).abs() < 1e-10, "{}", r.rho);
    }
}
