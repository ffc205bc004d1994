//! Uniform radial mesh on `[0, r_max]`, quadrature for `∫_{ℝ³} f = ∫ f(r)·4πr² dr`,
//! differentiation, the scaling map `u_t(r) = t·u(r/t)` and basic norms.
//!
//! The value at `r = 0` is never an independent unknown: its quadrature weight
//! is zero, and the Dirichlet energy reads it from the even extrapolation
//! `1.5u₁ − 0.6u₂ + 0.1u₃`. The value at `r_max` is pinned to zero.
//!
//! The Dirichlet energy differentiates at cell midpoints. A centered nodal
//! stencil would not see the alternating mode `(−1)ⁱ`, and the discrete
//! energy would lose coercivity.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::math;

pub const DEFAULT_R_MAX: f64 = 20.0;
pub const DEFAULT_N: usize = 2048;
pub const MIN_NODES: usize = 16;

/// End-corrected trapezoid coefficients (exact for cubics).
const END_CORRECTION: [f64; 3] = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];

/// Extrapolation coefficients for the origin value of an even profile.
pub(crate) const ORIGIN_EXTRAP: [f64; 3] = [1.5, -0.6, 0.1];

// Fourth-order first-derivative stencils, all over 12h.
const ROW_NEAR_ORIGIN: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];
const ROW_INTERIOR: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
const ROW_NEAR_END: [f64; 5] = [-1.0, 6.0, -18.0, 10.0, 3.0];
const ROW_END: [f64; 5] = [3.0, -16.0, 36.0, -48.0, 25.0];

// Fourth-order midpoint derivative stencils, all over 24h.
const MID_INTERIOR: [f64; 4] = [1.0, -27.0, 27.0, -1.0];
const MID_ORIGIN: [f64; 3] = [-27.0, 28.0, -1.0];
const MID_END: [f64; 3] = [1.0, -26.0, 27.0];

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    r_max: f64,
    h: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    mid_weights: Vec<f64>,
}

/// Builds a shared uniform grid with `n` nodes on `[0, r_max]`.
pub fn make_grid(r_max: f64, n: usize) -> Result<Arc<RadialGrid>> {
    RadialGrid::new(r_max, n).map(Arc::new)
}

impl RadialGrid {
    pub fn new(r_max: f64, n: usize) -> Result<Self> {
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(Error::InvalidGrid("r_max must be positive and finite"));
        }
        if n < MIN_NODES {
            return Err(Error::InvalidGrid("at least 16 nodes are required"));
        }
        let h = r_max / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        nodes[n - 1] = r_max;
        let weights = nodes
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let c = if i < 3 {
                    END_CORRECTION[i]
                } else if i >= n - 3 {
                    END_CORRECTION[n - 1 - i]
                } else {
                    1.0
                };
                4.0 * PI * r * r * c * h
            })
            .collect();
        let mid_weights = (0..n - 1)
            .map(|k| {
                let r = (k as f64 + 0.5) * h;
                4.0 * PI * r * r * h
            })
            .collect();
        Ok(Self { r_max, h, nodes, weights, mid_weights })
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n() {
            return Err(Error::Shape { expected: self.n(), got: len });
        }
        Ok(())
    }

    /// `Σ wᵢ fᵢ`.
    pub fn quad(&self, f: &[f64]) -> Result<f64> {
        self.check_len(f.len())?;
        Ok(self.dot_w(f))
    }

    pub(crate) fn dot_w(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    pub(crate) fn quad_prod(&self, f: &[f64], g: &[f64]) -> f64 {
        self.weights.iter().zip(f).zip(g).map(|((w, a), b)| w * a * b).sum()
    }

    /// Samples `f` at every node.
    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.nodes.iter().map(|&r| f(r)).collect()
    }

    /// First derivative: fourth-order central differences in the interior,
    /// five-point one-sided stencils at the two nodes next to each end, and
    /// zero at the origin (even profile).
    pub fn d_dr(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_len(u.len())?;
        let mut du = vec![0.0; self.n()];
        self.apply_d(u, &mut du);
        Ok(du)
    }

    fn stencil(&self, i: usize) -> (usize, &'static [f64; 5]) {
        let n = self.n();
        match i {
            1 => (0, &ROW_NEAR_ORIGIN),
            _ if i == n - 2 => (n - 5, &ROW_NEAR_END),
            _ if i == n - 1 => (n - 5, &ROW_END),
            _ => (i - 2, &ROW_INTERIOR),
        }
    }

    pub(crate) fn apply_d(&self, u: &[f64], du: &mut [f64]) {
        let scale = 1.0 / (12.0 * self.h);
        du[0] = 0.0;
        for (i, out) in du.iter_mut().enumerate().skip(1) {
            let (s, c) = self.stencil(i);
            let acc: f64 = c.iter().zip(&u[s..s + 5]).map(|(c, v)| c * v).sum();
            *out = acc * scale;
        }
    }

    /// Copy of `u` with the origin value replaced by its even extrapolation.
    pub(crate) fn effective(&self, u: &[f64]) -> Vec<f64> {
        let mut v = u.to_vec();
        v[0] = origin_value(u);
        v
    }

    /// `∫|Du|²` on effective values, by fourth-order differences at cell
    /// midpoints and the midpoint rule.
    pub(crate) fn dirichlet(&self, u: &[f64]) -> f64 {
        let v = self.effective(u);
        let mut du = vec![0.0; self.n() - 1];
        self.apply_s(&v, &mut du);
        du.iter().zip(&self.mid_weights).map(|(d, m)| m * d * d).sum()
    }

    /// Euclidean partial derivatives of `∫|Du|²` with respect to the free
    /// samples `u₁ … u_{n−2}`; the entries at both ends are zero.
    pub(crate) fn dirichlet_partials(&self, u: &[f64]) -> Vec<f64> {
        let n = self.n();
        let v = self.effective(u);
        let mut du = vec![0.0; n - 1];
        self.apply_s(&v, &mut du);
        for (d, m) in du.iter_mut().zip(&self.mid_weights) {
            *d *= 2.0 * m;
        }
        let mut q = vec![0.0; n];
        self.apply_st(&du, &mut q);
        chain_origin(&mut q);
        q[n - 1] = 0.0;
        q
    }

    /// Staggered derivative at the midpoints `(k + ½)h`, with the even
    /// reflection `u₋₁ = u₁` and the odd reflection `u_n = −u_{n−2}`.
    pub(crate) fn apply_s(&self, u: &[f64], du: &mut [f64]) {
        let n = self.n();
        let scale = 1.0 / (24.0 * self.h);
        for (k, out) in du.iter_mut().enumerate() {
            let (s, c) = self.staggered(k);
            let acc: f64 = c.iter().zip(&u[s..]).map(|(c, v)| c * v).sum();
            *out = acc * scale;
        }
        debug_assert_eq!(du.len(), n - 1);
    }

    /// `out = Sᵀ y` for the operator of [`Self::apply_s`].
    pub(crate) fn apply_st(&self, y: &[f64], out: &mut [f64]) {
        let scale = 1.0 / (24.0 * self.h);
        out.iter_mut().for_each(|v| *v = 0.0);
        for (k, &yk) in y.iter().enumerate() {
            let (s, c) = self.staggered(k);
            for (j, cj) in c.iter().enumerate() {
                out[s + j] += cj * yk * scale;
            }
        }
    }

    fn staggered(&self, k: usize) -> (usize, &'static [f64]) {
        let n = self.n();
        match k {
            0 => (0, &MID_ORIGIN),
            _ if k == n - 2 => (n - 3, &MID_END),
            _ => (k - 1, &MID_INTERIOR),
        }
    }

    /// Converts Euclidean partials on free nodes into nodal values `gᵢ = ∂ᵢ/wᵢ`,
    /// extending to the origin by even extrapolation and to `r_max` by zero.
    pub(crate) fn riesz(&self, partials: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut g = vec![0.0; n];
        for i in 1..n - 1 {
            g[i] = partials[i] / self.weights[i];
        }
        g[0] = origin_value(&g);
        g
    }

    /// Free-node stiffness of the piecewise-linear Dirichlet form,
    /// returned as (diagonal, super-diagonal) over nodes `1 … n−2`.
    pub(crate) fn stiffness(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n();
        let m = n - 2;
        let mut diag = vec![0.0; m];
        let mut off = vec![0.0; m.saturating_sub(1)];
        let h2 = self.h * self.h;
        // cell between nodes i and i+1, for i = 1 .. n-2
        for i in 1..n - 1 {
            let (r0, r1) = (self.nodes[i], self.nodes[i + 1]);
            let c = 4.0 * PI * (r1 * r1 * r1 - r0 * r0 * r0) / (3.0 * h2);
            diag[i - 1] += c;
            if i + 1 < n - 1 {
                diag[i] += c;
                off[i - 1] -= c;
            }
        }
        (diag, off)
    }
}

pub(crate) fn origin_value(u: &[f64]) -> f64 {
    ORIGIN_EXTRAP[0] * u[1] + ORIGIN_EXTRAP[1] * u[2] + ORIGIN_EXTRAP[2] * u[3]
}

/// Folds a partial with respect to the origin value into the nodes it is extrapolated from.
pub(crate) fn chain_origin(q: &mut [f64]) {
    let q0 = q[0];
    q[0] = 0.0;
    for (k, c) in ORIGIN_EXTRAP.iter().enumerate() {
        q[k + 1] += c * q0;
    }
}

/// Dirichlet and `L²` energies of a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    /// `∫|Du|²`
    pub dirichlet: f64,
    /// `∫u²`
    pub l2sq: f64,
}

/// A sampled radial profile with `u(r_max) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFunction {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        grid.check_len(values.len())?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let last = values[values.len() - 1];
        if last != 0.0 {
            return Err(Error::Dirichlet(last));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` and truncates it to zero at `r_max`.
    pub fn from_fn<F: Fn(f64) -> f64>(grid: Arc<RadialGrid>, f: F) -> Result<Self> {
        let mut values = grid.sample(f);
        let n = values.len();
        values[n - 1] = 0.0;
        Self::new(grid, values)
    }

    /// Like [`Self::new`] but forces the last sample to zero.
    pub fn truncated(grid: Arc<RadialGrid>, mut values: Vec<f64>) -> Result<Self> {
        grid.check_len(values.len())?;
        let n = values.len();
        values[n - 1] = 0.0;
        Self::new(grid, values)
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.n();
        Self { grid, values: vec![0.0; n] }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Pointwise absolute value.
    pub fn abs(&self) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| math::abs(*v)).collect() }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| v * s).collect() }
    }

    pub fn d_dr(&self) -> Vec<f64> {
        let mut du = vec![0.0; self.values.len()];
        self.grid.apply_d(&self.grid.effective(&self.values), &mut du);
        du
    }

    /// `u_t(r) = t·u(r/t)` by linear interpolation, zero beyond the original support.
    pub fn rescale(&self, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidScale(t));
        }
        if t == 1.0 {
            return Ok(self.clone());
        }
        let g = &self.grid;
        let n = g.n();
        let mut out = vec![0.0; n];
        for (i, o) in out.iter_mut().enumerate().take(n - 1) {
            let s = g.nodes[i] / t / g.h;
            let k = s as usize;
            if k >= n - 1 {
                break;
            }
            let frac = s - k as f64;
            *o = t * ((1.0 - frac) * self.values[k] + frac * self.values[k + 1]);
        }
        Ok(Self { grid: g.clone(), values: out })
    }

    pub fn norms(&self) -> Norms {
        Norms {
            dirichlet: self.grid.dirichlet(&self.values),
            l2sq: self.grid.quad_prod(&self.values, &self.values),
        }
    }

    /// `∫|u|^q`.
    pub fn lq(&self, q: f64) -> Result<f64> {
        if !(q >= 1.0) || !q.is_finite() {
            return Err(Error::InvalidExponent(q));
        }
        Ok(self.grid.dot_w(&self.values.iter().map(|&v| math::abs_pow(v, q)).collect::<Vec<_>>()))
    }
}
