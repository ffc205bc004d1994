//! Ray analysis for the nonlocal problem
//! `(a + bλ∫(|Du|² + V u²))(−Δu + V u) = |u|^{p−1}u`, `1 < p ≤ 2`.
//!
//! With `A = ∫|Du|² + V u²` and `P = ∫|u|^{p+1}`, the Nehari functional along
//! a ray is `N(s·u) = s²aA + s⁴bλA² − s^{p+1}P`. Every nontrivial solution has
//! `N(u) = 0`, so a ray on which `N > 0` carries none.

use crate::error::{Error, Result};
use crate::grid::RadialFunction;
use crate::math;
use crate::potential::PotentialSpec;

/// `A` and `P` of a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NehariTerms {
    pub norm_sq: f64,
    pub pow: f64,
}

pub fn nehari_terms(u: &RadialFunction, v: &PotentialSpec, p: f64) -> Result<NehariTerms> {
    let grid = u.grid();
    let nodal = v.nodal(grid, 1.0)?;
    let vals = u.values();
    let mass: f64 = grid.weights().iter().zip(vals).zip(&nodal.v).map(|((w, x), vv)| w * vv * x * x).sum();
    Ok(NehariTerms { norm_sq: grid.dirichlet(vals) + mass, pow: u.lq(p + 1.0)? })
}

/// Minimum of `N(s·u)/s²` over `s > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayMinimum {
    pub s_star: f64,
    /// `min_s N(s·u)/s²`; positive means `N > 0` on the whole open ray.
    pub value: f64,
}

/// `N(s·u)` in closed form.
pub fn ray_nehari(a: f64, b_lambda: f64, p: f64, t: NehariTerms, s: f64) -> f64 {
    let s2 = s * s;
    s2 * a * t.norm_sq + s2 * s2 * b_lambda * t.norm_sq * t.norm_sq - math::powf(s, p + 1.0) * t.pow
}

/// `N(s·u)/s² = aA + s²bλA² − s^{p−1}P` is convex in `s` for `p ≤ 2`
/// (strictly for `p < 2`, a parabola at `p = 2`), with its minimum at
/// `s^{3−p} = (p−1)P/(2bλA²)`.
pub fn ray_minimum(a: f64, b_lambda: f64, p: f64, t: NehariTerms) -> Result<RayMinimum> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::OutOfHypothesis("p must lie in (1, 2]"));
    }
    if !(a > 0.0 && b_lambda > 0.0) {
        return Err(Error::OutOfHypothesis("a and b·lambda must be positive"));
    }
    if !(t.norm_sq > 0.0) {
        return Err(Error::TrivialFunction);
    }
    let a2 = t.norm_sq * t.norm_sq;
    let s_star = math::powf((p - 1.0) * t.pow / (2.0 * b_lambda * a2), 1.0 / (3.0 - p));
    let value = a * t.norm_sq + s_star * s_star * b_lambda * a2 - math::powf(s_star, p - 1.0) * t.pow;
    Ok(RayMinimum { s_star, value })
}
