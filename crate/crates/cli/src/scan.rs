//! Random profiles and the falsification search for the nonlocal problem
//! above the nonexistence threshold.

use std::sync::Arc;

use kirchhoff_core::algebra::{self, Rational};
use kirchhoff_core::functional::sobolev_constant;
use kirchhoff_core::nonexistence::{nehari_terms, ray_minimum, NehariTerms};
use kirchhoff_core::{PotentialSpec, RadialFunction, RadialGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Generator for sample `index` of a scan seeded with `seed`, independent of thread scheduling.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A smooth, possibly sign-changing profile: one to four Gaussian bumps,
/// some modulated by a cosine, with log-uniform amplitudes and widths.
pub fn random_profile(grid: &Arc<RadialGrid>, rng: &mut impl Rng) -> Result<RadialFunction> {
    let r_max = grid.r_max();
    let bumps: Vec<(f64, f64, f64, f64)> = (0..rng.random_range(1..=4))
        .map(|_| {
            let sign = if rng.random_bool(0.8) { 1.0 } else { -1.0 };
            let amp = sign * 10f64.powf(rng.random_range(-2.0..2.0));
            let center = rng.random_range(0.0..0.4 * r_max);
            let width = (r_max / 4.0) * 10f64.powf(rng.random_range(-1.5..0.0));
            let freq = if rng.random_bool(0.3) { rng.random_range(0.0..3.0) / width } else { 0.0 };
            (amp, center, width, freq)
        })
        .collect();
    let u = RadialFunction::from_fn(grid.clone(), |r| {
        bumps.iter().map(|&(a, c, w, k)| a * (-((r - c) / w).powi(2)).exp() * (k * r).cos()).sum()
    })?;
    if u.is_zero() {
        return Err(Error::usage("degenerate random profile"));
    }
    Ok(u)
}

/// Problem data of a scan; `1 < p ≤ 2`, `a > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanParams {
    pub a: f64,
    pub b: f64,
    pub p: f64,
}

impl ScanParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 1.0 && self.a.is_finite()) {
            return Err(Error::usage("nonexist requires a > 1"));
        }
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::usage("nonexist requires b > 0"));
        }
        if !(self.p > 1.0 && self.p <= 2.0) {
            return Err(Error::usage("nonexist requires 1 < p <= 2"));
        }
        Ok(())
    }
}

/// Threshold `λ₀ = 1/(4b(a−1)C³)` from the discrete constant `C` of `H¹ ↪ L³`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Threshold {
    pub sobolev_constant: f64,
    pub lambda0: f64,
    /// Exact value from the rationals equal to the `f64` inputs.
    #[serde(skip)]
    pub lambda0_exact: Rational,
}

pub fn threshold(params: &ScanParams, grid: &Arc<RadialGrid>, v: &PotentialSpec) -> Result<Threshold> {
    params.validate()?;
    let c = sobolev_constant(grid, v)?;
    let q = |x: f64| algebra::from_f64(x).ok_or_else(|| Error::usage(format!("{x} is not finite")));
    let exact = algebra::nonexistence_threshold(&q(params.a)?, &q(params.b)?, &q(c)?)?;
    Ok(Threshold { sobolev_constant: c, lambda0: algebra::to_f64(&exact), lambda0_exact: exact })
}

/// Outcome at one `λ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanLevel {
    pub lambda: f64,
    pub samples: usize,
    /// Profiles with `N(s·u) ≤ 0` for some `s > 0`.
    pub violations: usize,
    /// Smallest `min_s N(s·u)/(s²·a·A)` over the samples; in `(0, 1]` when no ray fails.
    pub min_relative_margin: f64,
    /// Sample index of the first violation.
    pub first_violation: Option<usize>,
    /// Whether `(∫|u|³)² ≤ 4(a−1)bλA³` held for every sample (`p = 2` only).
    pub discriminant_always: Option<bool>,
}

#[derive(Debug)]
pub struct ScanOutcome {
    pub level: ScanLevel,
    pub counterexample: Option<RadialFunction>,
}

/// Draws `samples` random profiles and checks `N(s·u) > 0` on every ray in closed form.
pub fn scan_level(params: &ScanParams, lambda: f64, grid: &Arc<RadialGrid>, v: &PotentialSpec, samples: usize, seed: u64) -> Result<ScanOutcome> {
    params.validate()?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::usage("lambda must be positive"));
    }
    let b_lambda = params.b * lambda;
    let evaluated: Vec<(usize, NehariTerms, f64)> = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<_> {
            let u = random_profile(grid, &mut sample_rng(seed, i as u64))?;
            let terms = nehari_terms(&u, v, params.p)?;
            let m = ray_minimum(params.a, b_lambda, params.p, terms)?;
            Ok((i, terms, m.value / (params.a * terms.norm_sq)))
        })
        .collect::<Result<_>>()?;
    let mut level = ScanLevel {
        lambda,
        samples,
        violations: 0,
        min_relative_margin: f64::INFINITY,
        first_violation: None,
        discriminant_always: None,
    };
    let exact = |x: f64| algebra::from_f64(x).ok_or_else(|| Error::usage("non-finite value"));
    let mut disc = true;
    for &(i, terms, margin) in &evaluated {
        level.min_relative_margin = level.min_relative_margin.min(margin);
        if !(margin > 0.0) {
            level.violations += 1;
            level.first_violation.get_or_insert(i);
        }
        if params.p == 2.0 {
            disc &= algebra::g_nonneg_condition(&exact(params.a)?, &exact(params.b)?, &exact(lambda)?, &exact(terms.norm_sq)?, &exact(terms.pow)?)?;
        }
    }
    if params.p == 2.0 {
        level.discriminant_always = Some(disc);
    }
    let counterexample = match level.first_violation {
        Some(i) => Some(random_profile(grid, &mut sample_rng(seed, i as u64))?),
        None => None,
    };
    Ok(ScanOutcome { level, counterexample })
}
