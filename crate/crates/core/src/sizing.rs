//! Shape of the unit ground state `−Q″ − 2Q′/r + Q = Q^p`, used only to size grids.
//!
//! Bisection on `Q(0)`: a shot that crosses zero overshoots, one that turns
//! back up while positive undershoots.

use crate::math;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct UnitProfile {
    pub q0: f64,
    /// `∫_{ℝ³}|∇Q|²`.
    pub grad_sq: f64,
    /// Radius at which `Q` falls to `Q(0)/2`.
    pub half_width: f64,
}

enum Shot {
    Over,
    Under,
}

struct Trace {
    shot: Shot,
    grad_sq: f64,
    half_width: f64,
}

const R_END: f64 = 40.0;

fn shoot(q0: f64, p: f64) -> Trace {
    let f = |r: f64, q: f64, dq: f64| -> f64 {
        let nl = math::abs_pow(q, p - 1.0) * q;
        q - nl - 2.0 * dq / r
    };
    let dr = 0.02 * math::powf(q0, -(p - 1.0) / 2.0).min(1.0);
    let mut r = dr;
    // series start: Q ≈ Q(0) + (Q(0) − Q(0)^p)·r²/6
    let c = (q0 - math::powf(q0, p)) / 6.0;
    let mut q = q0 + c * r * r;
    let mut dq = 2.0 * c * r;
    let mut grad_sq = 0.0;
    let mut half_width = f64::NAN;
    while r < R_END {
        let (k1q, k1d) = (dq, f(r, q, dq));
        let (k2q, k2d) = (dq + 0.5 * dr * k1d, f(r + 0.5 * dr, q + 0.5 * dr * k1q, dq + 0.5 * dr * k1d));
        let (k3q, k3d) = (dq + 0.5 * dr * k2d, f(r + 0.5 * dr, q + 0.5 * dr * k2q, dq + 0.5 * dr * k2d));
        let (k4q, k4d) = (dq + dr * k3d, f(r + dr, q + dr * k3q, dq + dr * k3d));
        grad_sq += 4.0 * core::f64::consts::PI * r * r * dq * dq * dr;
        q += dr / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        dq += dr / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
        r += dr;
        if half_width.is_nan() && q <= 0.5 * q0 {
            half_width = r;
        }
        if q < 0.0 {
            return Trace { shot: Shot::Over, grad_sq, half_width };
        }
        if dq > 0.0 {
            return Trace { shot: Shot::Under, grad_sq, half_width };
        }
    }
    Trace { shot: Shot::Under, grad_sq, half_width }
}

/// Unit ground state for `1 < p < 5`.
pub(crate) fn unit_profile(p: f64) -> UnitProfile {
    let mut lo = 1.0;
    let mut hi = 2.0;
    while matches!(shoot(hi, p).shot, Shot::Under) && hi < 1e6 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match shoot(mid, p).shot {
            Shot::Over => hi = mid,
            Shot::Under => lo = mid,
        }
    }
    let t = shoot(lo, p);
    UnitProfile { q0: lo, grad_sq: t.grad_sq, half_width: t.half_width }
}
