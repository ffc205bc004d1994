//! Newton–Krylov polish for the discrete Euler–Lagrange system
//! `F(u) = ½κ(u)·∂D(u) + W(V u − λ|u|^{p−1}u) = 0` on the free nodes.
//!
//! Jacobian products are exact. GMRES runs on the nodal (row-scaled) system,
//! right-preconditioned by the piecewise-linear stiffness plus the exact
//! diagonal and the rank-one Kirchhoff term.

use alloc::vec;
use alloc::vec::Vec;

use crate::functional::ProblemParams;
use crate::grid::{origin_value, RadialGrid};
use crate::linalg::solve_tridiagonal_pivoting;
use crate::math;

pub(crate) struct NewtonOutcome {
    pub u: Vec<f64>,
    pub steps: usize,
}

struct System<'a> {
    grid: &'a RadialGrid,
    pp: ProblemParams,
    v: &'a [f64],
    stiff_diag: Vec<f64>,
    stiff_off: Vec<f64>,
}

/// State at a linearization point.
struct Linearized {
    q: Vec<f64>,
    kappa: f64,
    diag: Vec<f64>,
}

impl<'a> System<'a> {
    fn residual(&self, u: &[f64]) -> (Vec<f64>, Linearized) {
        let g = self.grid;
        let n = u.len();
        let w = g.weights();
        let q = g.dirichlet_partials(u);
        let kappa = self.pp.a() + self.pp.b() * g.dirichlet(u);
        let (lam, p) = (self.pp.lambda(), self.pp.p());
        let mut f = vec![0.0; n];
        let mut diag = vec![0.0; n];
        for i in 1..n - 1 {
            let up = math::abs_pow(u[i], p - 1.0);
            f[i] = 0.5 * kappa * q[i] / w[i] + self.v[i] * u[i] - lam * up * u[i];
            diag[i] = w[i] * (self.v[i] - p * lam * up);
        }
        (f, Linearized { q, kappa, diag })
    }

    /// `J·x` in Euclidean partials; `x` lives on all nodes with `x₀ = x_{n−1} = 0`.
    fn jvp(&self, lin: &Linearized, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let mut xe = x.to_vec();
        xe[n - 1] = 0.0;
        xe[0] = origin_value(&xe);
        let dq = self.grid.dirichlet_partials(&xe);
        let qx: f64 = lin.q[1..n - 1].iter().zip(&x[1..n - 1]).map(|(a, b)| a * b).sum();
        let c = 0.5 * self.pp.b() * qx;
        let mut out = vec![0.0; n];
        for i in 1..n - 1 {
            out[i] = 0.5 * lin.kappa * dq[i] + c * lin.q[i] + lin.diag[i] * x[i];
        }
        out
    }

    /// Approximate `J⁻¹·y` for Euclidean `y`, tridiagonal plus rank one by Sherman–Morrison.
    fn precondition(&self, lin: &Linearized, y: &[f64]) -> Option<Vec<f64>> {
        let n = y.len();
        let m = n - 2;
        let diag: Vec<f64> = (0..m).map(|j| lin.kappa * self.stiff_diag[j] + lin.diag[j + 1]).collect();
        let off: Vec<f64> = self.stiff_off.iter().map(|o| lin.kappa * o).collect();
        let ty = solve_tridiagonal_pivoting(&off, &diag, &off, &y[1..n - 1])?;
        let tq = solve_tridiagonal_pivoting(&off, &diag, &off, &lin.q[1..n - 1])?;
        let c = 0.5 * self.pp.b();
        let qty: f64 = lin.q[1..n - 1].iter().zip(&ty).map(|(a, b)| a * b).sum();
        let qtq: f64 = lin.q[1..n - 1].iter().zip(&tq).map(|(a, b)| a * b).sum();
        let denom = 1.0 + c * qtq;
        if denom == 0.0 || !denom.is_finite() {
            return None;
        }
        let mut out = vec![0.0; n];
        for j in 0..m {
            out[j + 1] = ty[j] - c * qty / denom * tq[j];
        }
        Some(out)
    }

    /// Solves `W⁻¹J δ = rhs` (nodal) with right-preconditioned restarted GMRES.
    fn solve(&self, lin: &Linearized, rhs: &[f64], rtol: f64, max_iter: usize) -> Option<Vec<f64>> {
        let n = rhs.len();
        let w = self.grid.weights();
        // operator on the right-preconditioned variable z: W⁻¹ J P⁻¹ W z
        let apply_prec = |z: &[f64]| -> Option<Vec<f64>> {
            let wz: Vec<f64> = z.iter().zip(w).map(|(a, b)| a * b).collect();
            self.precondition(lin, &wz)
        };
        let apply = |z: &[f64]| -> Option<Vec<f64>> {
            let x = apply_prec(z)?;
            let jx = self.jvp(lin, &x);
            Some((0..n).map(|i| if i == 0 || i == n - 1 { 0.0 } else { jx[i] / w[i] }).collect())
        };
        let b_norm = norm(rhs);
        if b_norm == 0.0 {
            return Some(vec![0.0; n]);
        }
        let restart = 40;
        let mut z = vec![0.0; n];
        let mut total = 0;
        while total < max_iter {
            let az = apply(&z)?;
            let r: Vec<f64> = rhs.iter().zip(&az).map(|(a, b)| a - b).collect();
            let beta = norm(&r);
            if beta <= rtol * b_norm {
                break;
            }
            let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|x| x / beta).collect()];
            let mut h = vec![vec![0.0; restart]; restart + 1];
            let (mut cs, mut sn) = (vec![0.0; restart], vec![0.0; restart]);
            let mut g = vec![0.0; restart + 1];
            g[0] = beta;
            let mut k_used = 0;
            for k in 0..restart {
                total += 1;
                let mut v = apply(&basis[k])?;
                for (j, bj) in basis.iter().enumerate() {
                    let hj = dot(&v, bj);
                    h[j][k] = hj;
                    v.iter_mut().zip(bj).for_each(|(a, b)| *a -= hj * b);
                }
                let hn = norm(&v);
                h[k + 1][k] = hn;
                for j in 0..k {
                    let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                    h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                    h[j][k] = t;
                }
                let rho = math::sqrt(h[k][k] * h[k][k] + h[k + 1][k] * h[k + 1][k]);
                if rho == 0.0 {
                    return None;
                }
                cs[k] = h[k][k] / rho;
                sn[k] = h[k + 1][k] / rho;
                h[k][k] = rho;
                h[k + 1][k] = 0.0;
                g[k + 1] = -sn[k] * g[k];
                g[k] *= cs[k];
                k_used = k + 1;
                if math::abs(g[k + 1]) <= rtol * b_norm || hn == 0.0 || total >= max_iter {
                    break;
                }
                basis.push(v.iter().map(|x| x / hn).collect());
            }
            let mut y = vec![0.0; k_used];
            for i in (0..k_used).rev() {
                let s: f64 = (i + 1..k_used).map(|j| h[i][j] * y[j]).sum();
                y[i] = (g[i] - s) / h[i][i];
            }
            for (j, yj) in y.iter().enumerate() {
                z.iter_mut().zip(&basis[j]).for_each(|(a, b)| *a += yj * b);
            }
            if math::abs(g[k_used]) <= rtol * b_norm {
                break;
            }
        }
        apply_prec(&z)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    math::sqrt(dot(a, a))
}

/// Newton iteration from `u` until `done(u)` holds, no step reduces the
/// residual, or `max_steps` is reached. Returns the best iterate.
pub(crate) fn polish(
    grid: &RadialGrid,
    pp: &ProblemParams,
    v: &[f64],
    u: Vec<f64>,
    max_steps: usize,
    mut done: impl FnMut(&[f64]) -> bool,
) -> NewtonOutcome {
    let (stiff_diag, stiff_off) = grid.stiffness();
    let sys = System { grid, pp: *pp, v, stiff_diag, stiff_off };
    let n = u.len();
    let mut u = u;
    let mut steps = 0;
    let (mut f, mut lin) = sys.residual(&u);
    let mut fn0 = norm(&f);
    while steps < max_steps && !done(&u) {
        let rhs: Vec<f64> = f.iter().map(|x| -x).collect();
        let Some(delta) = sys.solve(&lin, &rhs, 1e-6, 400) else { break };
        let mut s = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let mut trial: Vec<f64> = u.iter().zip(&delta).map(|(a, b)| a + s * b).collect();
            trial[n - 1] = 0.0;
            trial[0] = origin_value(&trial);
            let (tf, tl) = sys.residual(&trial);
            let tn = norm(&tf);
            if tn.is_finite() && tn < (1.0 - 1e-4 * s) * fn0 {
                u = trial;
                f = tf;
                lin = tl;
                fn0 = tn;
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if !accepted {
            break;
        }
        steps += 1;
    }
    NewtonOutcome { u, steps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn jacobian_product_matches_finite_differences() {
        let g = make_grid(10.0, 200).unwrap();
        let pp = ProblemParams::new(1.0, 0.7, 3.0).unwrap();
        let v = vec![1.3; 200];
        let (stiff_diag, stiff_off) = g.stiffness();
        let sys = System { grid: &g, pp, v: &v, stiff_diag, stiff_off };
        let mut u = g.sample(|r| 2.0 * (-0.4 * r * r).exp());
        u[199] = 0.0;
        let mut x = g.sample(|r| (0.5 * r).sin() * (-0.1 * r * r).exp());
        x[0] = 0.0;
        x[199] = 0.0;
        let (_, lin) = sys.residual(&u);
        let jx = sys.jvp(&lin, &x);
        let eps = 1e-6;
        let shifted = |s: f64| {
            let mut t: Vec<f64> = u.iter().zip(&x).map(|(a, b)| a + s * b).collect();
            t[0] = origin_value(&t);
            sys.residual(&t).0
        };
        let (fp, fm) = (shifted(eps), shifted(-eps));
        let w = g.weights();
        for i in 1..199 {
            let fd = w[i] * (fp[i] - fm[i]) / (2.0 * eps);
            assert!((fd - jx[i]).abs() < 1e-6 * (1.0 + jx[i].abs()), "node {i}: {fd} vs {}", jx[i]);
        }
    }
}
