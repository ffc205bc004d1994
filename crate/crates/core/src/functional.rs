//! Energy functionals, constraints and identities on discrete profiles.
//!
//! For the scaling `u_t(r) = t·u(r/t)` the functional
//!
//! ```text
//! I(u) = ½a∫|Du|² + ½∫V u² + ¼b(∫|Du|²)² − λ/(p+1)∫|u|^{p+1}
//! ```
//!
//! expands as `γ(t) = C₁t³ + C₂t⁵ + C₃t⁶ − C₄t^{p+4}` when `V` is constant.
//! The constraint `G` equals `γ′(1)` and splits as `G = ⟨I′(u), u⟩ + P(u)`.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{RadialFunction, RadialGrid};
use crate::linalg::solve_tridiagonal;
use crate::math;
use crate::potential::{NodalPotential, PotentialSpec};

/// Coefficients `a, b`, exponent `p`, nonlinearity weight `λ` and the left end `δ` of `[δ, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    a: f64,
    b: f64,
    p: f64,
    lambda: f64,
    delta: f64,
}

impl ProblemParams {
    pub const DEFAULT_DELTA: f64 = 0.5;

    /// `λ = 1`, `δ = 1/2`.
    pub fn new(a: f64, b: f64, p: f64) -> Result<Self> {
        Self::with_all(a, b, p, 1.0, Self::DEFAULT_DELTA)
    }

    pub fn with_all(a: f64, b: f64, p: f64, lambda: f64, delta: f64) -> Result<Self> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.into()));
        if !(a > 0.0 && a.is_finite()) {
            return bad("a must be positive");
        }
        if !(b > 0.0 && b.is_finite()) {
            return bad("b must be positive");
        }
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidExponent(p));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return bad("delta must lie in (0, 1)");
        }
        if !(lambda >= delta && lambda <= 1.0) {
            return bad("lambda must lie in [delta, 1]");
        }
        Ok(Self { a, b, p, lambda, delta })
    }

    pub fn with_lambda(self, lambda: f64) -> Result<Self> {
        Self::with_all(self.a, self.b, self.p, lambda, self.delta.min(lambda))
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Checks `2 < p < 5`, the range of the manifold results.
    pub fn require_manifold_range(&self) -> Result<()> {
        if self.p > 2.0 && self.p < 5.0 {
            Ok(())
        } else {
            Err(Error::InvalidExponent(self.p))
        }
    }
}

/// The scalar ingredients of every functional.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBreakdown {
    /// `∫|Du|²`
    pub dirichlet: f64,
    /// `a∫|Du|²`
    pub grad_q: f64,
    /// `∫V u²`
    pub mass_q: f64,
    /// `∫(r·V′) u²`
    pub dv_q: f64,
    /// `b(∫|Du|²)²`
    pub kirch_q: f64,
    /// `∫|u|^{p+1}`
    pub pow_q: f64,
}

impl EnergyBreakdown {
    /// `I = gradQ/2 + massQ/2 + kirchQ/4 − λ powQ/(p+1)`.
    pub fn energy(&self, pp: &ProblemParams) -> f64 {
        0.5 * self.grad_q + 0.5 * self.mass_q + 0.25 * self.kirch_q - pp.lambda * self.pow_q / (pp.p + 1.0)
    }

    /// `G = (3/2)gradQ + (5/2)massQ + ½dvQ + (3/2)kirchQ − λ(p+4)/(p+1)·powQ`.
    pub fn constraint_g(&self, pp: &ProblemParams) -> f64 {
        1.5 * self.grad_q + 2.5 * self.mass_q + 0.5 * self.dv_q + 1.5 * self.kirch_q
            - pp.lambda * (pp.p + 4.0) / (pp.p + 1.0) * self.pow_q
    }

    /// `P = gradQ/2 + (3/2)massQ + ½dvQ + kirchQ/2 − 3λ/(p+1)·powQ`.
    pub fn pohozaev_p(&self, pp: &ProblemParams) -> f64 {
        0.5 * self.grad_q + 1.5 * self.mass_q + 0.5 * self.dv_q + 0.5 * self.kirch_q
            - 3.0 * pp.lambda / (pp.p + 1.0) * self.pow_q
    }

    /// Exact breakdown of `u_t` for a constant potential.
    pub fn rescaled(&self, t: f64, p: f64) -> Self {
        let t3 = t * t * t;
        let t5 = t3 * t * t;
        Self {
            dirichlet: self.dirichlet * t3,
            grad_q: self.grad_q * t3,
            mass_q: self.mass_q * t5,
            dv_q: self.dv_q * t5,
            kirch_q: self.kirch_q * t5 * t,
            pow_q: self.pow_q * math::powf(t, p + 4.0),
        }
    }

    /// `⟨I′(u), u⟩ = gradQ + massQ + kirchQ − λ powQ`.
    pub fn nehari(&self, pp: &ProblemParams) -> f64 {
        self.grad_q + self.mass_q + self.kirch_q - pp.lambda * self.pow_q
    }

    /// `Φ = gradQ/4 + massQ/12 − dvQ/12 + λ(p−2)/(6(p+1))·powQ`, so that `I = Φ + G/6`.
    pub fn phi(&self, pp: &ProblemParams) -> f64 {
        0.25 * self.grad_q + self.mass_q / 12.0 - self.dv_q / 12.0
            + pp.lambda * (pp.p - 2.0) / (6.0 * (pp.p + 1.0)) * self.pow_q
    }
}

pub fn energy_i(bd: &EnergyBreakdown, pp: &ProblemParams) -> f64 {
    bd.energy(pp)
}

pub fn constraint_g(bd: &EnergyBreakdown, pp: &ProblemParams) -> f64 {
    bd.constraint_g(pp)
}

pub fn pohozaev_p(bd: &EnergyBreakdown, pp: &ProblemParams) -> f64 {
    bd.pohozaev_p(pp)
}

pub fn phi(bd: &EnergyBreakdown, pp: &ProblemParams) -> f64 {
    bd.phi(pp)
}

pub fn breakdown(u: &RadialFunction, pp: &ProblemParams, v: &PotentialSpec) -> Result<EnergyBreakdown> {
    let grid = u.grid();
    let nodal = v.nodal(grid, 1.0)?;
    Ok(breakdown_nodal(grid, u.values(), pp, &nodal))
}

pub(crate) fn breakdown_nodal(grid: &RadialGrid, u: &[f64], pp: &ProblemParams, nodal: &NodalPotential) -> EnergyBreakdown {
    let dirichlet = grid.dirichlet(u);
    let w = grid.weights();
    let (mut mass_q, mut dv_q, mut pow_q) = (0.0, 0.0, 0.0);
    for i in 0..u.len() {
        let u2 = u[i] * u[i];
        mass_q += w[i] * nodal.v[i] * u2;
        dv_q += w[i] * nodal.r_dv[i] * u2;
        pow_q += w[i] * math::abs_pow(u[i], pp.p + 1.0);
    }
    EnergyBreakdown { dirichlet, grad_q: pp.a * dirichlet, mass_q, dv_q, kirch_q: pp.b * dirichlet * dirichlet, pow_q }
}

/// Euclidean partials of
/// `½ka∫|Du|² + ¼kb(∫|Du|²)² + ½Σwᵢmᵢuᵢ² − kp/(p+1)·Σwᵢ|uᵢ|^{p+1}`
/// with respect to the free samples.
pub(crate) fn weighted_partials(grid: &RadialGrid, u: &[f64], ka: f64, kb: f64, mass: &[f64], kp: f64, p: f64) -> Vec<f64> {
    let d = grid.dirichlet(u);
    let mut q = grid.dirichlet_partials(u);
    let kappa = 0.5 * (ka + kb * d);
    let w = grid.weights();
    let n = u.len();
    for i in 1..n - 1 {
        q[i] = kappa * q[i] + w[i] * (mass[i] * u[i] - kp * math::abs_pow(u[i], p - 1.0) * u[i]);
    }
    q
}

/// Nodal representative of `I′(u)` with respect to the quadrature inner product:
/// `⟨g, v⟩_quad` is the exact directional derivative of the discrete energy.
/// In the interior it approximates `(a + b∫|Du|²)·(−u″ − 2u′/r) + V u − λ|u|^{p−1}u`.
pub fn gradient_i(u: &RadialFunction, pp: &ProblemParams, v: &PotentialSpec) -> Result<Vec<f64>> {
    let grid = u.grid();
    let nodal = v.nodal(grid, 1.0)?;
    let q = weighted_partials(grid, u.values(), pp.a, pp.b, &nodal.v, pp.lambda, pp.p);
    Ok(grid.riesz(&q))
}

/// `(ka∫|Du|² + ∫V u²) / (∫|u|^q)^{2/q}`.
pub fn embedding_quotient(u: &RadialFunction, v: &PotentialSpec, ka: f64, q: f64) -> Result<f64> {
    let grid = u.grid();
    let nodal = v.nodal(grid, 1.0)?;
    let lq = u.lq(q)?;
    if lq == 0.0 {
        return Err(Error::TrivialFunction);
    }
    let num = ka * grid.dirichlet(u.values()) + grid.quad_prod(&quad_mass(&nodal.v, u.values()), u.values());
    Ok(num / math::powf(lq, 2.0 / q))
}

fn quad_mass(v: &[f64], u: &[f64]) -> Vec<f64> {
    v.iter().zip(u).map(|(a, b)| a * b).collect()
}

/// Result of minimizing an embedding quotient.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientMinimum {
    pub value: f64,
    pub minimizer: RadialFunction,
    pub iterations: usize,
}

/// Best constant of `H¹ ↪ L³`: `inf (∫|Du|² + V u²)/|u|₃²`, attained value on the grid.
pub fn sobolev_constant(grid: &Arc<RadialGrid>, v: &PotentialSpec) -> Result<f64> {
    embedding_constant(grid, v, 1.0, 3.0).map(|m| m.value)
}

/// Minimizes `(ka∫|Du|² + ∫V u²)/|u|_q²` by normalized, Sobolev-preconditioned
/// gradient descent from the best Gaussian.
pub fn embedding_constant(grid: &Arc<RadialGrid>, v: &PotentialSpec, ka: f64, q: f64) -> Result<QuotientMinimum> {
    const MAX_ITERS: usize = 20_000;
    if !(q > 2.0) || !q.is_finite() {
        return Err(Error::InvalidExponent(q));
    }
    if !(ka > 0.0) {
        return Err(Error::InvalidParameter("dirichlet coefficient must be positive".into()));
    }
    let nodal = v.nodal(grid, 1.0)?;
    let n = grid.n();
    let w = grid.weights();

    let normalize = |u: &mut Vec<f64>| {
        let b: f64 = (0..n).map(|i| w[i] * math::abs_pow(u[i], q)).sum();
        let s = math::powf(b, -1.0 / q);
        u.iter_mut().for_each(|x| *x *= s);
    };
    let quotient = |u: &[f64]| {
        let num = ka * grid.dirichlet(u) + grid.quad_prod(&quad_mass(&nodal.v, u), u);
        let b: f64 = (0..n).map(|i| w[i] * math::abs_pow(u[i], q)).sum();
        num / math::powf(b, 2.0 / q)
    };

    // Seed: the best Gaussian over a geometric family of widths.
    let mut best: Option<(f64, Vec<f64>)> = None;
    for sigma in geometric(4.0 * grid.h(), grid.r_max() / 6.0, 48) {
        let mut u = grid.sample(|r| math::exp(-(r * r) / (sigma * sigma)));
        u[n - 1] = 0.0;
        let val = quotient(&u);
        if val.is_finite() && best.as_ref().map_or(true, |(b, _)| val < *b) {
            best = Some((val, u));
        }
    }
    let (_, mut u) = best.ok_or(Error::InvalidInput("no admissible seed"))?;
    normalize(&mut u);

    let (mut sdiag, off) = grid.stiffness();
    let vmax = nodal.v.iter().fold(1.0f64, |m, x| m.max(math::abs(*x)));
    for (j, d) in sdiag.iter_mut().enumerate() {
        let i = j + 1;
        *d = 2.0 * (ka * *d + w[i] * nodal.v[i].max(1e-3 * vmax));
    }
    let soff: Vec<f64> = off.iter().map(|o| 2.0 * ka * o).collect();

    let mut value = quotient(&u);
    let mut stalls = 0;
    for it in 0..MAX_ITERS {
        let a = value;
        let mut g = grid.dirichlet_partials(&u);
        for i in 1..n - 1 {
            g[i] = ka * g[i] + 2.0 * w[i] * nodal.v[i] * u[i] - 2.0 * a * w[i] * math::abs_pow(u[i], q - 2.0) * u[i];
        }
        let dir = solve_tridiagonal(&sdiag, &soff, &g[1..n - 1]);
        let slope: f64 = -dir.iter().zip(&g[1..n - 1]).map(|(d, g)| d * g).sum::<f64>();
        if -slope <= 1e-22 * value * value {
            return Ok(QuotientMinimum { value, minimizer: RadialFunction::truncated(grid.clone(), u)?, iterations: it });
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let mut trial = u.clone();
            for j in 0..n - 2 {
                trial[j + 1] -= step * dir[j];
            }
            let tv = quotient(&trial);
            if tv <= value + 1e-4 * step * slope {
                accepted = Some((tv, trial));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some((tv, mut trial)) => {
                if value - tv <= 1e-15 * value {
                    stalls += 1;
                } else {
                    stalls = 0;
                }
                normalize(&mut trial);
                u = trial;
                value = quotient(&u);
            }
            None => stalls += 10,
        }
        if stalls >= 20 {
            return Ok(QuotientMinimum { value, minimizer: RadialFunction::truncated(grid.clone(), u)?, iterations: it });
        }
    }
    Err(Error::ConvergenceFailure { best: value, iterations: MAX_ITERS })
}

pub(crate) fn geometric(lo: f64, hi: f64, count: usize) -> impl Iterator<Item = f64> {
    let ratio = if count > 1 { math::powf(hi / lo, 1.0 / (count - 1) as f64) } else { 1.0 };
    (0..count).map(move |k| lo * math::powf(ratio, k as f64))
}

/// Sampled verdicts for the hypotheses on `V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisReport {
    /// `V − r·V′ ≥ 0` at every node.
    pub v1: bool,
    /// `V ≤ V_∞` at every node.
    pub v2_weak: bool,
    /// `V < V_∞` at some node.
    pub v2_strict: bool,
    /// Positive Rayleigh quotient over the probe set.
    pub v3: bool,
    pub min_v_minus_r_dv: f64,
    pub max_v_minus_v_inf: f64,
    pub min_quotient: f64,
}

impl HypothesisReport {
    pub fn v2(&self) -> bool {
        self.v2_weak && self.v2_strict
    }

    pub fn all(&self) -> bool {
        self.v1 && self.v2() && self.v3
    }
}

/// Checks sampled surrogates of the hypotheses on `V` on the nodes of `grid`.
/// The third uses `(∫|Du|² + V u²)/∫u²` over Gaussian probes of many widths.
pub fn check_v_hypotheses(v: &PotentialSpec, grid: &Arc<RadialGrid>) -> Result<HypothesisReport> {
    let nodal = v.nodal(grid, 1.0)?;
    let v_inf = v.v_inf();
    let min_v_minus_r_dv = nodal.v.iter().zip(&nodal.r_dv).map(|(a, b)| a - b).fold(f64::INFINITY, f64::min);
    let max_v_minus_v_inf = nodal.v.iter().map(|x| x - v_inf).fold(f64::NEG_INFINITY, f64::max);
    let v2_strict = nodal.v[..grid.n() - 1].iter().any(|&x| x < v_inf);
    let n = grid.n();
    let mut min_quotient = f64::INFINITY;
    for sigma in geometric(4.0 * grid.h(), grid.r_max() / 5.0, 32) {
        let mut u = grid.sample(|r| math::exp(-(r * r) / (sigma * sigma)));
        u[n - 1] = 0.0;
        let l2 = grid.quad_prod(&u, &u);
        let num = grid.dirichlet(&u) + grid.quad_prod(&quad_mass(&nodal.v, &u), &u);
        min_quotient = min_quotient.min(num / l2);
    }
    Ok(HypothesisReport {
        v1: min_v_minus_r_dv >= 0.0,
        v2_weak: max_v_minus_v_inf <= 0.0,
        v2_strict,
        v3: min_quotient > 0.0,
        min_v_minus_r_dv,
        max_v_minus_v_inf,
        min_quotient,
    })
}
