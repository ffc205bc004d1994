//! The scaling fiber `t ↦ I(u_t)`, its unique maximum and the projection onto
//! `M = {u ≠ 0 : G(u) = 0}`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::functional::{breakdown, breakdown_nodal, EnergyBreakdown, ProblemParams};
use crate::grid::{RadialFunction, RadialGrid};
use crate::math;
use crate::potential::PotentialSpec;

pub const AUDIT_POINTS: usize = 64;

/// `γ(t) = c1·t³ + c2·t⁵ + c3·t⁶ − c4·t^{p+4}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberPolynomial {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub p: f64,
}

/// Location and value of the maximum of a fiber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberMax {
    pub t_star: f64,
    pub value: f64,
}

pub fn fiber_poly(bd: &EnergyBreakdown, pp: &ProblemParams) -> Result<FiberPolynomial> {
    pp.require_manifold_range()?;
    if !(bd.pow_q > 0.0) {
        return Err(Error::TrivialFunction);
    }
    Ok(FiberPolynomial {
        c1: 0.5 * bd.grad_q,
        c2: 0.5 * bd.mass_q,
        c3: 0.25 * bd.kirch_q,
        c4: pp.lambda() * bd.pow_q / (pp.p() + 1.0),
        p: pp.p(),
    })
}

impl FiberPolynomial {
    pub fn value(&self, t: f64) -> f64 {
        let t3 = t * t * t;
        t3 * (self.c1 + t * t * self.c2 + t3 * self.c3) - self.c4 * math::powf(t, self.p + 4.0)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        t * t * self.reduced_derivative(t)
    }

    /// `γ′(t)/t²`, which has the same sign as `γ′` and no spurious zero at the origin.
    pub fn reduced_derivative(&self, t: f64) -> f64 {
        3.0 * self.c1 + t * t * (5.0 * self.c2 + 6.0 * t * self.c3) - (self.p + 4.0) * self.c4 * math::powf(t, self.p + 1.0)
    }

    /// Number of sign changes of `γ′` on `count` log-spaced points of `[lo, hi]`.
    pub fn sign_changes(&self, lo: f64, hi: f64, count: usize) -> usize {
        let mut changes = 0;
        let mut prev: Option<bool> = None;
        for t in crate::functional::geometric(lo, hi, count) {
            let d = self.reduced_derivative(t);
            if d == 0.0 {
                continue;
            }
            let pos = d > 0.0;
            if prev.is_some_and(|q| q != pos) {
                changes += 1;
            }
            prev = Some(pos);
        }
        changes
    }
}

/// Unique positive critical point of `γ`, bracketed by doubling/halving and
/// bisected to full precision, then audited on a log grid around it.
pub fn fiber_max(fp: &FiberPolynomial) -> Result<FiberMax> {
    let coeffs = [fp.c1, fp.c2, fp.c3, fp.c4];
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidInput("non-finite fiber coefficient"));
    }
    if fp.c1 <= 0.0 && fp.c2 <= 0.0 && fp.c3 <= 0.0 {
        return Err(Error::DegenerateFiber);
    }
    if !(fp.c4 > 0.0) {
        return Err(Error::TrivialFunction);
    }
    if !(fp.p > 2.0) {
        return Err(Error::InvalidExponent(fp.p));
    }
    let f = |t: f64| fp.reduced_derivative(t);
    let (mut lo, mut hi) = (1.0, 1.0);
    if f(1.0) > 0.0 {
        while f(hi) > 0.0 {
            lo = hi;
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::FlatFiber);
            }
        }
    } else {
        while f(lo) <= 0.0 {
            hi = lo;
            lo *= 0.5;
            if lo < 1e-300 {
                return Err(Error::FlatFiber);
            }
        }
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t_star = if f(hi).abs() < f(lo).abs() { hi } else { lo };
    audit(fp, t_star)?;
    Ok(FiberMax { t_star, value: fp.value(t_star) })
}

fn audit(fp: &FiberPolynomial, t_star: f64) -> Result<()> {
    let mut bad = 0;
    for k in 0..AUDIT_POINTS {
        let e = -3.0 + 6.0 * k as f64 / (AUDIT_POINTS - 1) as f64;
        let t = t_star * math::powf(10.0, e);
        if math::abs(t / t_star - 1.0) < 1e-9 {
            continue;
        }
        let d = fp.reduced_derivative(t);
        if (t < t_star && d <= 0.0) || (t > t_star && d >= 0.0) {
            bad += 1;
        }
    }
    if bad > 0 {
        return Err(Error::MultipleCriticalPoints(bad));
    }
    Ok(())
}

/// Result of projecting a profile onto `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub t_star: f64,
    /// `γ(t_star) = max_t I(u_t)`.
    pub value: f64,
    /// The grid realization `u_{t_star}`.
    pub profile: RadialFunction,
    /// Breakdown of `u_{t_star}` obtained by exact scaling (no interpolation).
    pub breakdown: EnergyBreakdown,
}

/// Projects `u` onto `M` along its fiber (constant potentials only).
pub fn project_to_m(u: &RadialFunction, pp: &ProblemParams, v: &PotentialSpec) -> Result<Projection> {
    if !v.is_constant() {
        return Err(Error::InvalidPotential("closed-form projection requires a constant potential".into()));
    }
    let bd = breakdown(u, pp, v)?;
    let fm = fiber_max(&fiber_poly(&bd, pp)?)?;
    Ok(Projection {
        t_star: fm.t_star,
        value: fm.value,
        profile: u.rescale(fm.t_star)?,
        breakdown: bd.rescaled(fm.t_star, pp.p()),
    })
}

/// Maximum of a fiber of a general potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralFiberMax {
    pub t_star: f64,
    pub value: f64,
    /// Number of local maxima seen on the audit grid; more than one is reported, not hidden.
    pub audit_maxima: usize,
}

impl GeneralFiberMax {
    pub fn multimodal(&self) -> bool {
        self.audit_maxima > 1
    }
}

/// `t ↦ I(u_t)` for an arbitrary radial potential, evaluated by the change of
/// variables `∫V(x)u_t² = t⁵∫V(t·y)u(y)² dy`, so `u` is never interpolated.
#[derive(Debug, Clone)]
pub struct GeneralFiber<'a> {
    grid: &'a RadialGrid,
    potential: &'a PotentialSpec,
    w_u2: Vec<f64>,
    c1: f64,
    c3: f64,
    c4: f64,
    p: f64,
}

impl<'a> GeneralFiber<'a> {
    pub fn new(u: &'a RadialFunction, pp: &ProblemParams, v: &'a PotentialSpec) -> Result<Self> {
        Self::from_values(u.grid(), u.values(), pp, v)
    }

    pub(crate) fn from_values(grid: &'a RadialGrid, u: &[f64], pp: &ProblemParams, v: &'a PotentialSpec) -> Result<Self> {
        let nodal = v.nodal(grid, 1.0)?;
        let bd = breakdown_nodal(grid, u, pp, &nodal);
        if !(bd.pow_q > 0.0) {
            return Err(Error::TrivialFunction);
        }
        let w_u2 = grid.weights().iter().zip(u).map(|(w, x)| w * x * x).collect();
        Ok(Self {
            grid,
            potential: v,
            w_u2,
            c1: 0.5 * bd.grad_q,
            c3: 0.25 * bd.kirch_q,
            c4: pp.lambda() * bd.pow_q / (pp.p() + 1.0),
            p: pp.p(),
        })
    }

    fn pulled_back(&self, t: f64) -> (f64, f64) {
        let (mut m, mut d) = (0.0, 0.0);
        for (&r, &wu) in self.grid.nodes().iter().zip(&self.w_u2) {
            if wu == 0.0 {
                continue;
            }
            m += wu * self.potential.value(t * r);
            d += wu * self.potential.r_dv_at(t * r).unwrap_or(0.0);
        }
        (m, d)
    }

    pub fn value(&self, t: f64) -> f64 {
        let (m, _) = self.pulled_back(t);
        let t3 = t * t * t;
        t3 * (self.c1 + 0.5 * t * t * m + t3 * self.c3) - self.c4 * math::powf(t, self.p + 4.0)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let (m, d) = self.pulled_back(t);
        let t2 = t * t;
        let t4 = t2 * t2;
        3.0 * t2 * self.c1 + 2.5 * t4 * m + 0.5 * t4 * d + 6.0 * t4 * t * self.c3
            - (self.p + 4.0) * self.c4 * math::powf(t, self.p + 3.0)
    }

    /// Refines a maximum inside `[lo, hi]`: golden section on the value, then
    /// bisection on the derivative when it changes sign.
    pub(crate) fn refine(&self, mut lo: f64, mut hi: f64) -> (f64, f64) {
        const INV_PHI: f64 = 0.618_033_988_749_894_9;
        let mut x1 = hi - INV_PHI * (hi - lo);
        let mut x2 = lo + INV_PHI * (hi - lo);
        let (mut f1, mut f2) = (self.value(x1), self.value(x2));
        while hi - lo > 1e-8 * hi {
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + INV_PHI * (hi - lo);
                f2 = self.value(x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - INV_PHI * (hi - lo);
                f1 = self.value(x1);
            }
        }
        // widen slightly so the derivative bracket contains the root
        let (mut a, mut b) = (lo * (1.0 - 1e-7), hi * (1.0 + 1e-7));
        let (da, db) = (self.derivative(a), self.derivative(b));
        if da > 0.0 && db < 0.0 {
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if self.derivative(mid) > 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
        }
        let t = 0.5 * (a + b);
        (t, self.value(t))
    }

    /// Fast path when the maximizer is known to be near `guess`; falls back to
    /// the full search when the local bracket does not hold.
    pub(crate) fn max_near(&self, guess: f64) -> Result<GeneralFiberMax> {
        let (lo, hi) = (guess * 0.98, guess * 1.02);
        if self.derivative(lo) > 0.0 && self.derivative(hi) < 0.0 {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if self.derivative(mid) > 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            let t = 0.5 * (a + b);
            return Ok(GeneralFiberMax { t_star: t, value: self.value(t), audit_maxima: 1 });
        }
        self.maximize()
    }

    /// Full search: bracket by doubling until three consecutive decreases,
    /// audit on a log grid, then refine around the best audit point.
    pub fn maximize(&self) -> Result<GeneralFiberMax> {
        let mut t_hi = 1.0;
        let mut prev = self.value(t_hi);
        let mut decreases = 0;
        while decreases < 3 {
            t_hi *= 2.0;
            let v = self.value(t_hi);
            if !v.is_finite() || t_hi > 1e12 {
                return Err(Error::FlatFiber);
            }
            decreases = if v < prev { decreases + 1 } else { 0 };
            prev = v;
        }
        let ts: Vec<f64> = (0..AUDIT_POINTS)
            .map(|k| t_hi * math::powf(10.0, -8.0 + 8.0 * k as f64 / (AUDIT_POINTS - 1) as f64))
            .collect();
        let vals: Vec<f64> = ts.iter().map(|&t| self.value(t)).collect();
        let (best, _) = vals
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
        if best == 0 || best == AUDIT_POINTS - 1 {
            return Err(Error::FlatFiber);
        }
        let audit_maxima = (1..AUDIT_POINTS - 1).filter(|&i| vals[i] > vals[i - 1] && vals[i] >= vals[i + 1]).count();
        let (t_star, value) = self.refine(ts[best - 1], ts[best + 1]);
        Ok(GeneralFiberMax { t_star, value, audit_maxima })
    }
}

/// `max_t I(u_t)` for any potential, without interpolating `u`.
pub fn fiber_max_general(u: &RadialFunction, pp: &ProblemParams, v: &PotentialSpec) -> Result<GeneralFiberMax> {
    GeneralFiber::new(u, pp, v)?.maximize()
}

/// Samples `(t, γ(t))` on `count` evenly spaced points of `[t_lo, t_hi]`.
pub fn fiber_curve(fp: &FiberPolynomial, t_lo: f64, t_hi: f64, count: usize) -> Vec<(f64, f64)> {
    let step = if count > 1 { (t_hi - t_lo) / (count - 1) as f64 } else { 0.0 };
    (0..count).map(|k| t_lo + step * k as f64).map(|t| (t, fp.value(t))).collect()
}
