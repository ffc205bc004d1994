use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Solves `T x = rhs` for a symmetric tridiagonal `T` given by its diagonal and
/// off-diagonal. `T` is assumed diagonally dominant (no pivoting).
pub(crate) fn solve_tridiagonal(diag: &[f64], off: &[f64], rhs: &[f64]) -> Vec<f64> {
    let m = diag.len();
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    let mut denom = diag[0];
    if m > 1 {
        c[0] = off[0] / denom;
    }
    d[0] = rhs[0] / denom;
    for i in 1..m {
        denom = diag[i] - off[i - 1] * c[i - 1];
        if i + 1 < m {
            c[i] = off[i] / denom;
        }
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / denom;
    }
    for i in (0..m - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    d
}

/// Solves a general tridiagonal system by Gaussian elimination with partial
/// pivoting. `sub[i]` couples row `i+1` to column `i`, `sup[i]` row `i` to
/// column `i+1`. Returns `None` on an exactly singular pivot.
pub(crate) fn solve_tridiagonal_pivoting(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut du = sup.to_vec();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut b = rhs.to_vec();
    for i in 0..n.saturating_sub(1) {
        let l = sub[i];
        if math::abs(d[i]) >= math::abs(l) {
            if d[i] == 0.0 {
                return None;
            }
            let f = l / d[i];
            d[i + 1] -= f * du[i];
            b[i + 1] -= f * b[i];
        } else {
            let f = d[i] / l;
            d[i] = l;
            let t = d[i + 1];
            d[i + 1] = du[i] - f * t;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -f * du2[i];
            }
            du[i] = t;
            let tb = b[i];
            b[i] = b[i + 1];
            b[i + 1] = tb - f * b[i];
        }
    }
    if d[n - 1] == 0.0 {
        return None;
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        if i + 1 < n {
            s -= du[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= du2[i] * x[i + 2];
        }
        x[i] = s / d[i];
    }
    Some(x)
}

/// Dense symmetric positive-definite matrix in row-major order.
#[derive(Debug, Clone)]
pub(crate) struct Cholesky {
    m: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factors `a`; returns `None` if a pivot is not positive.
    pub(crate) fn new(a: &[f64], m: usize) -> Option<Self> {
        let mut l = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..=i {
                let mut s = a[i * m + j];
                for k in 0..j {
                    s -= l[i * m + k] * l[j * m + k];
                }
                if i == j {
                    if !(s > 0.0) {
                        return None;
                    }
                    l[i * m + i] = math::sqrt(s);
                } else {
                    l[i * m + j] = s / l[j * m + j];
                }
            }
        }
        Some(Self { m, l })
    }

    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = b.to_vec();
        for i in 0..m {
            for k in 0..i {
                y[i] -= self.l[i * m + k] * y[k];
            }
            y[i] /= self.l[i * m + i];
        }
        for i in (0..m).rev() {
            for k in i + 1..m {
                y[i] -= self.l[k * m + i] * y[k];
            }
            y[i] /= self.l[i * m + i];
        }
        y
    }
}
