#![allow(dead_code)]

use std::f64::consts::PI;

use kirchhoff_core::algebra::Rational;
use num_traits::Zero;

/// Integrals of the radial ground state `Q` of `−ΔQ + Q = Q^p` in ℝ³.
#[derive(Debug, Clone, Copy)]
pub struct ScalarGroundState {
    pub q0: f64,
    /// `∫|∇Q|²`
    pub grad: f64,
    /// `∫Q²`
    pub mass: f64,
    /// `∫Q^{p+1}`
    pub pow: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shot {
    /// Crossed zero: the initial value was too large.
    Over,
    /// Turned upward while positive: the initial value was too small.
    Under,
    /// Fell below the cutoff while decreasing.
    Decayed,
}

const DIM: usize = 5;

/// `y = (Q, Q′, ∫r²Q′², ∫r²Q², ∫r²Q^{p+1})`.
fn rhs(r: f64, y: &[f64; DIM], p: f64) -> [f64; DIM] {
    let (q, dq) = (y[0], y[1]);
    let qp = q.abs().powf(p - 1.0) * q;
    [dq, -2.0 * dq / r + q - qp, r * r * dq * dq, r * r * q * q, r * r * q.abs().powf(p + 1.0)]
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

fn dp_step(r: f64, y: &[f64; DIM], h: f64, p: f64) -> ([f64; DIM], f64) {
    let mut k = [[0.0; DIM]; 7];
    for s in 0..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            for d in 0..DIM {
                ys[d] += h * A[s][j] * kj[d];
            }
        }
        k[s] = rhs(r + C[s] * h, &ys, p);
    }
    let mut y5 = *y;
    let mut err: f64 = 0.0;
    for d in 0..DIM {
        let (mut s5, mut s4) = (0.0, 0.0);
        for s in 0..7 {
            s5 += B5[s] * k[s][d];
            s4 += B4[s] * k[s][d];
        }
        y5[d] += h * s5;
        // Only Q and Q′ steer the step; the integrals ride along.
        if d < 2 {
            let scale = 1e-12 + 1e-12 * y5[d].abs().max(y[d].abs());
            err = err.max((h * (s5 - s4)).abs() / scale);
        }
    }
    (y5, err)
}

/// Integrates from the origin until the trajectory is classified.
fn shoot(q0: f64, p: f64, cutoff: f64) -> (Shot, [f64; DIM]) {
    let r0 = 1e-5;
    let curv = (q0 - q0.powf(p)) / 3.0;
    let mut y = [q0 + 0.5 * curv * r0 * r0, curv * r0, 0.0, 0.0, 0.0];
    let mut r = r0;
    let mut h = 1e-4;
    loop {
        let (next, err) = dp_step(r, &y, h, p);
        if err > 1.0 {
            h *= (0.9 * err.powf(-0.2)).max(0.1);
            continue;
        }
        r += h;
        y = next;
        h *= (0.9 * err.max(1e-10).powf(-0.2)).min(5.0);
        if y[0] < 0.0 {
            return (Shot::Over, y);
        }
        if y[1] > 0.0 {
            return (Shot::Under, y);
        }
        if y[0] < cutoff * q0 {
            return (Shot::Decayed, y);
        }
        if r > 200.0 {
            return (Shot::Under, y);
        }
    }
}

/// Ground state of `−ΔQ + Q = Q^p` by bisection on `Q(0)`.
pub fn scalar_ground_state(p: f64) -> ScalarGroundState {
    let (mut lo, mut hi) = (1.0 + 1e-9, 2.0);
    while shoot(hi, p, 0.0).0 != Shot::Over {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match shoot(mid, p, 0.0).0 {
            Shot::Over => hi = mid,
            _ => lo = mid,
        }
    }
    let q0 = 0.5 * (lo + hi);
    let (shot, y) = shoot(q0, p, 1e-9);
    assert_eq!(shot, Shot::Decayed, "shooting did not resolve the tail");
    let s = 4.0 * PI;
    ScalarGroundState { q0, grad: s * y[2], mass: s * y[3], pow: s * y[4] }
}

/// Ground-state level of the limit problem with constant potential `v`,
/// from `u = c·Q(x/ℓ)` and the positive root of the nonlocal coefficient equation.
pub fn limit_level(a: f64, b: f64, p: f64, lambda: f64, v: f64) -> f64 {
    let q = scalar_ground_state(p);
    let c2 = (v / lambda).powf(2.0 / (p - 1.0));
    let beta = b * c2 * q.grad / v.sqrt();
    let s = 0.5 * (beta + (beta * beta + 4.0 * a).sqrt());
    let ell = s / v.sqrt();
    let d = c2 * ell * q.grad;
    let ell3 = ell.powi(3);
    0.5 * a * d + 0.25 * b * d * d + 0.5 * v * c2 * ell3 * q.mass - lambda * c2.powf(0.5 * (p + 1.0)) * ell3 * q.pow / (p + 1.0)
}

/// Laplace expansion along the first row.
pub fn cofactor_det(m: &[Vec<Rational>]) -> Rational {
    if m.len() == 1 {
        return m[0][0].clone();
    }
    let mut acc = Rational::zero();
    for (j, entry) in m[0].iter().enumerate() {
        if entry.is_zero() {
            continue;
        }
        let minor: Vec<Vec<Rational>> = m[1..].iter().map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, x)| x.clone()).collect()).collect();
        let term = entry * cofactor_det(&minor);
        acc = if j % 2 == 0 { acc + term } else { acc - term };
    }
    acc
}

/// Cramer's rule over cofactor determinants; `None` when singular.
pub fn cramer(m: &[Vec<Rational>], rhs: &[Rational]) -> Option<Vec<Rational>> {
    let det = cofactor_det(m);
    if det.is_zero() {
        return None;
    }
    Some(
        (0..m.len())
            .map(|col| {
                let replaced: Vec<Vec<Rational>> = m.iter().zip(rhs).map(|(row, r)| {
                    let mut row = row.clone();
                    row[col] = r.clone();
                    row
                }).collect();
                cofactor_det(&replaced) / &det
            })
            .collect(),
    )
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
