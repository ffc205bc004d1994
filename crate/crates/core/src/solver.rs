//! Ground states by descent on the reduced functional `E(u) = max_t I(u_t)`,
//! mountain-pass estimates and the λ-sweep.
//!
//! `E` is invariant under the scaling `u ↦ u_t`, so the descent lets the fiber
//! maximum `t*` drift and only rescales (by interpolation) when it leaves a
//! narrow band around 1. Once the residual is small, Newton's method on the
//! discrete Euler–Lagrange system finishes the solve.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fiber::{fiber_max, fiber_poly, FiberPolynomial, GeneralFiber};
use crate::functional::{breakdown_nodal, check_v_hypotheses, geometric, weighted_partials, EnergyBreakdown, ProblemParams};
use crate::grid::{make_grid, origin_value, RadialFunction, RadialGrid, DEFAULT_N};
use crate::linalg::{solve_tridiagonal, Cholesky};
use crate::math;
use crate::newton::polish;
use crate::potential::PotentialSpec;
use crate::sizing::unit_profile;

/// Initial profile of a descent.
#[derive(Debug, Clone, PartialEq)]
pub enum Seed {
    /// The Gaussian with the lowest fiber maximum, scaled onto the manifold.
    Gaussian,
    Custom(RadialFunction),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub max_iters: usize,
    /// Target for the normalized PDE residual.
    pub grad_tol: f64,
    pub step_init: f64,
    pub armijo_c: f64,
    pub seed: Seed,
    pub enforce_positivity: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_iters: 50_000, grad_tol: 1e-8, step_init: 1.0, armijo_c: 1e-4, seed: Seed::Gaussian, enforce_positivity: true }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        if !(self.grad_tol > 0.0) {
            return Err(Error::InvalidParameter("grad_tol must be positive".into()));
        }
        if !(self.step_init > 0.0) {
            return Err(Error::InvalidParameter("step_init must be positive".into()));
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return Err(Error::InvalidParameter("armijo_c must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// The three identities that vanish on true solutions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    /// `|G| / (1 + gradQ + massQ)`.
    pub g_residual: f64,
    /// `|P| / (1 + gradQ + massQ)`.
    pub pohozaev_residual: f64,
    /// `max|I′(u)| / (max|κLu| + max|Vu| + max|λ|u|^p|)`.
    pub pde_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub profile: RadialFunction,
    pub energy: f64,
    pub breakdown: EnergyBreakdown,
    pub residuals: ResidualReport,
    /// Fiber maximizer of the final iterate (1 on the manifold).
    pub t_star: f64,
    pub t_history: Vec<f64>,
    pub energy_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// The energy is an upper bound for the ground-state level, not an estimate of it from both sides.
    pub upper_bound_only: bool,
    /// Fibers on which the audit grid saw more than one local maximum.
    pub multimodal_fibers: usize,
}

impl SolveReport {
    pub fn g_residual(&self) -> f64 {
        self.residuals.g_residual
    }
    pub fn pohozaev_residual(&self) -> f64 {
        self.residuals.pohozaev_residual
    }
    pub fn pde_residual(&self) -> f64 {
        self.residuals.pde_residual
    }
}

pub fn residual_report(u: &RadialFunction, pp: &ProblemParams, v: &PotentialSpec) -> Result<ResidualReport> {
    let grid = u.grid();
    let nodal = v.nodal(grid, 1.0)?;
    Ok(residuals_nodal(grid, u.values(), pp, &nodal.v, &breakdown_nodal(grid, u.values(), pp, &nodal)))
}

fn residuals_nodal(grid: &RadialGrid, u: &[f64], pp: &ProblemParams, vn: &[f64], bd: &EnergyBreakdown) -> ResidualReport {
    let scale = 1.0 + bd.grad_q + bd.mass_q;
    let n = u.len();
    let kappa = pp.a() + pp.b() * bd.dirichlet;
    let lap = grid.dirichlet_partials(u);
    let w = grid.weights();
    let (mut lmax, mut vmax, mut nmax, mut gmax) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 1..n - 1 {
        let l = 0.5 * kappa * lap[i] / w[i];
        let vu = vn[i] * u[i];
        let nl = pp.lambda() * math::abs_pow(u[i], pp.p() - 1.0) * u[i];
        lmax = lmax.max(math::abs(l));
        vmax = vmax.max(math::abs(vu));
        nmax = nmax.max(math::abs(nl));
        gmax = gmax.max(math::abs(l + vu - nl));
    }
    let denom = lmax + vmax + nmax;
    ResidualReport {
        g_residual: math::abs(bd.constraint_g(pp)) / scale,
        pohozaev_residual: math::abs(bd.pohozaev_p(pp)) / scale,
        pde_residual: if denom > 0.0 { gmax / denom } else { 0.0 },
    }
}

// ---------------------------------------------------------------------------
// Gaussian ansatz

/// Fiber of `A·e^{−r²}` in closed form (continuum integrals).
fn gaussian_fiber(pp: &ProblemParams, v_inf: f64, amp: f64) -> FiberPolynomial {
    use core::f64::consts::PI;
    let m1 = math::powf(PI / 2.0, 1.5);
    let d1 = 3.0 * m1;
    let n1 = math::powf(PI / (pp.p() + 1.0), 1.5);
    let a2 = amp * amp;
    FiberPolynomial {
        c1: 0.5 * pp.a() * a2 * d1,
        c2: 0.5 * v_inf * a2 * m1,
        c3: 0.25 * pp.b() * a2 * a2 * d1 * d1,
        c4: pp.lambda() * math::powf(amp, pp.p() + 1.0) * n1 / (pp.p() + 1.0),
        p: pp.p(),
    }
}

/// Amplitude and width of the Gaussian `A·e^{−r²/σ²}` on the manifold with the
/// lowest fiber maximum, and that maximum.
pub fn best_gaussian(pp: &ProblemParams, v_inf: f64) -> Result<(f64, f64, f64)> {
    pp.require_manifold_range()?;
    if !(v_inf > 0.0) {
        return Err(Error::InvalidPotential(format!("v_inf = {v_inf} must be positive")));
    }
    let level = |log_a: f64| fiber_max(&gaussian_fiber(pp, v_inf, math::exp(log_a))).map(|m| m.value).unwrap_or(f64::INFINITY);
    // coarse scan then golden section in log-amplitude
    let grid: Vec<f64> = (0..=240).map(|k| -30.0 + 0.25 * k as f64).collect();
    let (k, _) = grid.iter().enumerate().fold((0, f64::INFINITY), |(bk, bv), (k, &x)| {
        let v = level(x);
        if v < bv {
            (k, v)
        } else {
            (bk, bv)
        }
    });
    let (mut lo, mut hi) = (grid[k.saturating_sub(1)], grid[(k + 1).min(grid.len() - 1)]);
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (level(x1), level(x2));
    for _ in 0..200 {
        if hi - lo < 1e-12 {
            break;
        }
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = level(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = level(x2);
        }
    }
    let amp = math::exp(0.5 * (lo + hi));
    let fm = fiber_max(&gaussian_fiber(pp, v_inf, amp))?;
    Ok((amp * fm.t_star, fm.t_star, fm.value))
}

/// Grid for the limit problem: `r_max` spans `TAIL_LENGTHS` decay lengths and
/// the spacing resolves the core of the profile; returns `(r_max, n)`.
pub fn auto_grid(pp: &ProblemParams, v_inf: f64) -> Result<(f64, usize)> {
    let ell = length_scale(pp, v_inf)?;
    let q = unit_profile(pp.p());
    let r_max = TAIL_LENGTHS * ell;
    let h = q.half_width * ell / CORE_POINTS;
    let n = ((r_max / h) as usize + 2).clamp(DEFAULT_N, MAX_AUTO_N);
    Ok((r_max, n))
}

/// Decay length `ℓ = √(κ/v)` of the limit ground state, from the exact
/// scaling `u = c·Q(x/ℓ)` with `Q` the unit state, `c^{p−1} = v/λ` and
/// `κ = a + b·c²·ℓ·∫|∇Q|²`.
pub fn length_scale(pp: &ProblemParams, v_inf: f64) -> Result<f64> {
    pp.require_manifold_range()?;
    if !(v_inf > 0.0) || !v_inf.is_finite() {
        return Err(Error::InvalidPotential(format!("v_inf = {v_inf} must be positive")));
    }
    let q = unit_profile(pp.p());
    let c2 = math::powf(v_inf / pp.lambda(), 2.0 / (pp.p() - 1.0));
    let beta = pp.b() * c2 * q.grad_sq / math::sqrt(v_inf);
    let s = 0.5 * (beta + math::sqrt(beta * beta + 4.0 * pp.a()));
    Ok(s / math::sqrt(v_inf))
}

pub fn auto_grid_for(pp: &ProblemParams, v_inf: f64) -> Result<Arc<RadialGrid>> {
    let (r_max, n) = auto_grid(pp, v_inf)?;
    make_grid(r_max, n)
}

fn gaussian_seed(grid: &Arc<RadialGrid>, pp: &ProblemParams, v_inf: f64) -> Result<Vec<f64>> {
    let (amp, sigma, _) = best_gaussian(pp, v_inf)?;
    let mut u = grid.sample(|r| amp * math::exp(-(r * r) / (sigma * sigma)));
    let n = u.len();
    u[n - 1] = 0.0;
    Ok(u)
}

// ---------------------------------------------------------------------------
// Reduced functional

struct FiberEval {
    t_star: f64,
    value: f64,
    multimodal: bool,
}

enum Model<'a> {
    Constant { v: f64, nodal_v: Vec<f64> },
    General { spec: &'a PotentialSpec },
}

struct Reduced<'a> {
    grid: &'a RadialGrid,
    pp: ProblemParams,
    model: Model<'a>,
    stiff_diag: Vec<f64>,
    stiff_off: Vec<f64>,
    v_floor: f64,
}

impl<'a> Reduced<'a> {
    fn new(grid: &'a RadialGrid, pp: ProblemParams, spec: &'a PotentialSpec) -> Self {
        let model = match spec {
            PotentialSpec::Constant(v) => Model::Constant { v: *v, nodal_v: vec![*v; grid.n()] },
            _ => Model::General { spec },
        };
        let (stiff_diag, stiff_off) = grid.stiffness();
        Self { grid, pp, model, stiff_diag, stiff_off, v_floor: 1e-3 * math::abs(spec.v_inf()).max(1e-12) }
    }

    fn breakdown(&self, u: &[f64]) -> Result<EnergyBreakdown> {
        match &self.model {
            Model::Constant { nodal_v, .. } => {
                let zero = vec![0.0; u.len()];
                Ok(breakdown_nodal(self.grid, u, &self.pp, &crate::potential::NodalPotential { v: nodal_v.clone(), r_dv: zero }))
            }
            Model::General { spec } => Ok(breakdown_nodal(self.grid, u, &self.pp, &spec.nodal(self.grid, 1.0)?)),
        }
    }

    fn fiber(&self, u: &[f64], guess: f64) -> Result<FiberEval> {
        match &self.model {
            Model::Constant { .. } => {
                let bd = self.breakdown(u)?;
                let fm = fiber_max(&fiber_poly(&bd, &self.pp)?)?;
                Ok(FiberEval { t_star: fm.t_star, value: fm.value, multimodal: false })
            }
            Model::General { spec } => {
                let gf = GeneralFiber::from_values(self.grid, u, &self.pp, spec)?;
                let m = gf.max_near(guess)?;
                Ok(FiberEval { t_star: m.t_star, value: m.value, multimodal: m.multimodal() })
            }
        }
    }

    /// Mass coefficients `t⁵·V(t·rᵢ)` along the fiber at `t`.
    fn mass(&self, t: f64) -> Result<Vec<f64>> {
        let t5 = math::powf(t, 5.0);
        Ok(match &self.model {
            Model::Constant { v, .. } => vec![t5 * v; self.grid.n()],
            Model::General { spec } => spec.nodal(self.grid, t)?.v.into_iter().map(|x| t5 * x).collect(),
        })
    }

    /// Gradient of `E` (envelope theorem) and the Sobolev preconditioner at `t`.
    fn gradient(&self, u: &[f64], t: f64) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let (a, b, lam, p) = (self.pp.a(), self.pp.b(), self.pp.lambda(), self.pp.p());
        let t3 = t * t * t;
        let mass = self.mass(t)?;
        let ka = a * t3;
        let kb = b * t3 * t3;
        let kp = lam * math::powf(t, p + 4.0);
        let partials = weighted_partials(self.grid, u, ka, kb, &mass, kp, p);
        let kappa = ka + kb * self.grid.dirichlet(u);
        let w = self.grid.weights();
        let diag = self
            .stiff_diag
            .iter()
            .enumerate()
            .map(|(j, d)| kappa * d + w[j + 1] * mass[j + 1].max(self.v_floor * math::powf(t, 5.0)))
            .collect();
        let off = self.stiff_off.iter().map(|o| kappa * o).collect();
        Ok((partials, diag, off))
    }

    fn direction(&self, partials: &[f64], diag: &[f64], off: &[f64]) -> (Vec<f64>, f64) {
        let n = partials.len();
        let x = solve_tridiagonal(diag, off, &partials[1..n - 1]);
        let dual: f64 = x.iter().zip(&partials[1..n - 1]).map(|(a, b)| a * b).sum();
        let mut d = vec![0.0; n];
        for j in 0..n - 2 {
            d[j + 1] = -x[j];
        }
        (d, dual)
    }
}

fn tidy(u: &mut [f64], positive: bool) {
    let n = u.len();
    if positive {
        u.iter_mut().for_each(|x| *x = math::abs(*x));
    }
    u[n - 1] = 0.0;
    u[0] = origin_value(u);
}

/// Moves `u` along its fiber by interpolation once the fiber maximum leaves
/// `[1 − band, 1 + band]`.
fn project(red: &Reduced, grid: &Arc<RadialGrid>, u: &mut Vec<f64>, fe: &mut FiberEval, positive: bool, band: f64) -> Result<()> {
    for _ in 0..8 {
        if math::abs(fe.t_star - 1.0) <= band {
            break;
        }
        *u = RadialFunction::new(grid.clone(), core::mem::take(u))?.rescale(fe.t_star)?.into_values();
        tidy(u, positive);
        *fe = red.fiber(u, 1.0)?;
    }
    Ok(())
}

/// Domain radius in decay lengths; the tail is then below `e^{−TAIL_LENGTHS}`.
const TAIL_LENGTHS: f64 = 32.0;
/// Nodes across the half-width of the profile.
const CORE_POINTS: f64 = 50.0;
const MAX_AUTO_N: usize = 1 << 15;

/// Tolerated drift of the fiber maximum during descent.
const SCALE_BAND: f64 = 0.05;
/// Newton is attempted every `NEWTON_EVERY` descent steps and once the
/// normalized residual first drops below `NEWTON_SWITCH`.
const NEWTON_EVERY: usize = 50;
const NEWTON_SWITCH: f64 = 1e-3;
const NEWTON_STEPS: usize = 25;
/// Relative rise of the level tolerated when Newton replaces the descent
/// iterate; the minimizer of the reduced functional and the critical point
/// of the discrete energy differ at the discretization level.
const LEVEL_SLACK: f64 = 1e-6;

/// Newton polish from the rescaled iterate. The result is kept only if it
/// meets the tolerance, stays nontrivial and sign-definite, and does not
/// raise the level: descent approaches the ground state from above, so a
/// higher critical point is a different solution.
#[allow(clippy::too_many_arguments)]
fn try_newton(
    red: &Reduced,
    grid: &Arc<RadialGrid>,
    pp: &ProblemParams,
    nodal_v: &[f64],
    u: &[f64],
    fe: &FiberEval,
    positive: bool,
    tol: f64,
    max_steps: usize,
) -> Result<Option<(Vec<f64>, FiberEval, usize)>> {
    let pde = |w: &[f64]| red.breakdown(w).map(|bd| residuals_nodal(grid, w, pp, nodal_v, &bd).pde_residual).unwrap_or(f64::INFINITY);
    let mut start = u.to_vec();
    let mut start_fe = FiberEval { t_star: fe.t_star, value: fe.value, multimodal: fe.multimodal };
    project(red, grid, &mut start, &mut start_fe, positive, 0.0)?;
    let out = polish(grid, pp, nodal_v, start, max_steps, |w| pde(w) <= tol);
    let mut cand = out.u;
    let n = cand.len();
    let peak = cand.iter().fold(0.0f64, |m, x| m.max(math::abs(*x)));
    if positive && cand[1..n - 1].iter().any(|&x| x < -1e-10 * peak) {
        return Ok(None);
    }
    tidy(&mut cand, positive);
    if pde(&cand) > tol || red.breakdown(&cand)?.pow_q < 1e-14 {
        return Ok(None);
    }
    let Ok(cf) = red.fiber(&cand, 1.0) else { return Ok(None) };
    if cf.value > fe.value * (1.0 + LEVEL_SLACK) {
        return Ok(None);
    }
    Ok(Some((cand, cf, out.steps)))
}

fn descend(
    grid: &Arc<RadialGrid>,
    pp: &ProblemParams,
    spec: &PotentialSpec,
    seed: Vec<f64>,
    opts: &SolverOptions,
) -> Result<SolveReport> {
    opts.validate()?;
    let red = Reduced::new(grid, *pp, spec);
    let positive = opts.enforce_positivity;
    let mut u = seed;
    tidy(&mut u, positive);
    let mut fe = red.fiber(&u, 1.0)?;
    project(&red, grid, &mut u, &mut fe, positive, SCALE_BAND)?;

    let mut t_history = Vec::new();
    let mut energy_history = vec![fe.value];
    let mut multimodal_fibers = usize::from(fe.multimodal);
    let mut step = opts.step_init;
    let mut stalled = 0usize;
    let mut converged = false;
    let mut switched = false;
    let mut iterations = 0;
    let nodal_v = spec.nodal(grid, 1.0)?.v;

    for it in 0..opts.max_iters {
        iterations = it;
        let bd = red.breakdown(&u)?;
        if bd.pow_q < 1e-14 {
            return Err(Error::Collapse);
        }
        let res = residuals_nodal(grid, &u, pp, &nodal_v, &bd);
        if res.pde_residual <= opts.grad_tol {
            converged = true;
            break;
        }
        if it % NEWTON_EVERY == 0 || (res.pde_residual <= NEWTON_SWITCH && !switched) {
            switched |= res.pde_residual <= NEWTON_SWITCH;
            if let Some((cand, cf, steps)) = try_newton(&red, grid, pp, &nodal_v, &u, &fe, positive, opts.grad_tol, NEWTON_STEPS)? {
                iterations += steps;
                u = cand;
                fe = cf;
                t_history.push(fe.t_star);
                energy_history.push(fe.value);
                converged = true;
                break;
            }
        }
        let (partials, diag, off) = red.gradient(&u, fe.t_star)?;
        let (d, dual) = red.direction(&partials, &diag, &off);
        let slope = -dual;
        if !(dual > 0.0) {
            break;
        }

        let mut s = (2.0 * step).min(4.0 * opts.step_init);
        let mut accepted: Option<(Vec<f64>, FiberEval)> = None;
        for _ in 0..50 {
            let mut trial: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a + s * b).collect();
            tidy(&mut trial, positive);
            if let Ok(tf) = red.fiber(&trial, fe.t_star) {
                if tf.value <= fe.value + opts.armijo_c * s * slope {
                    accepted = Some((trial, tf));
                    break;
                }
                // round-off regime: the predicted decrease is below what E can resolve
                if math::abs(s * slope) < 1e-13 * math::abs(fe.value) {
                    let (tp, tdg, tof) = red.gradient(&trial, tf.t_star)?;
                    let (_, tdual) = red.direction(&tp, &tdg, &tof);
                    if tdual < dual && tf.value <= fe.value * (1.0 + 1e-14) {
                        accepted = Some((trial, tf));
                    }
                    break;
                }
            }
            s *= 0.5;
        }
        match accepted {
            Some((trial, tf)) => {
                step = s;
                stalled = 0;
                u = trial;
                fe = tf;
            }
            None => {
                stalled += 1;
                step = opts.step_init;
                if stalled > 3 {
                    break;
                }
                continue;
            }
        }
        t_history.push(fe.t_star);
        project(&red, grid, &mut u, &mut fe, positive, SCALE_BAND)?;
        multimodal_fibers += usize::from(fe.multimodal);
        energy_history.push(fe.value);
    }

    if !converged {
        if let Some((cand, cf, steps)) = try_newton(&red, grid, pp, &nodal_v, &u, &fe, positive, opts.grad_tol, NEWTON_STEPS)? {
            iterations += steps;
            u = cand;
            fe = cf;
            t_history.push(fe.t_star);
            energy_history.push(fe.value);
        }
    }
    let bd = red.breakdown(&u)?;
    let residuals = residuals_nodal(grid, &u, pp, &nodal_v, &bd);
    let converged = converged && residuals.pde_residual <= opts.grad_tol;
    Ok(SolveReport {
        profile: RadialFunction::new(grid.clone(), u)?,
        energy: fe.value,
        breakdown: bd,
        residuals,
        t_star: fe.t_star,
        t_history,
        energy_history,
        iterations,
        converged,
        upper_bound_only: !spec.is_constant(),
        multimodal_fibers,
    })
}

fn seed_values(grid: &Arc<RadialGrid>, opts: &SolverOptions, pp: &ProblemParams, v_inf: f64) -> Result<Vec<f64>> {
    match &opts.seed {
        Seed::Gaussian => gaussian_seed(grid, pp, v_inf),
        Seed::Custom(f) => {
            if f.grid().n() != grid.n() || f.grid().r_max() != grid.r_max() {
                return Err(Error::InvalidInput("custom seed lives on a different grid"));
            }
            Ok(f.values().to_vec())
        }
    }
}

/// Ground state of the autonomous problem with `V ≡ v_inf`.
pub fn solve_limit_ground_state(pp: &ProblemParams, v_inf: f64, grid: &Arc<RadialGrid>, opts: &SolverOptions) -> Result<SolveReport> {
    pp.require_manifold_range()?;
    if !(v_inf > 0.0) || !v_inf.is_finite() {
        return Err(Error::InvalidPotential(format!("v_inf = {v_inf} must be positive")));
    }
    let spec = PotentialSpec::Constant(v_inf);
    let seed = seed_values(grid, opts, pp, v_inf)?;
    descend(grid, pp, &spec, seed, opts)
}

/// Upper bound for the ground-state level with a radial potential, by descent
/// from the limit-problem ground state.
pub fn solve_v_ground_state(pp: &ProblemParams, v: &PotentialSpec, grid: &Arc<RadialGrid>, opts: &SolverOptions) -> Result<SolveReport> {
    pp.require_manifold_range()?;
    let hyp = check_v_hypotheses(v, grid)?;
    if !(hyp.v1 && hyp.v2_weak && hyp.v3) {
        return Err(Error::OutOfHypothesis("potential fails the sampled hypotheses"));
    }
    let seed = match &opts.seed {
        Seed::Custom(_) => seed_values(grid, opts, pp, v.v_inf())?,
        Seed::Gaussian => solve_limit_ground_state(pp, v.v_inf(), grid, opts)?.profile.into_values(),
    };
    descend(grid, pp, v, seed, opts)
}

// ---------------------------------------------------------------------------
// Mountain-pass estimates

/// Minimum of the fiber maxima over a probe family.
#[derive(Debug, Clone, PartialEq)]
pub struct MountainPass {
    pub value: f64,
    pub argmin: usize,
    /// Fiber maximum of every probe, in input order.
    pub fiber_maxima: Vec<f64>,
}

/// `min over probes of max_t I(u_t)` for `V ≡ v_inf`.
pub fn mountain_pass_value(pp: &ProblemParams, v_inf: f64, probes: &[RadialFunction]) -> Result<MountainPass> {
    if probes.is_empty() {
        return Err(Error::InvalidInput("empty probe family"));
    }
    let spec = PotentialSpec::Constant(v_inf);
    let mut fiber_maxima = Vec::with_capacity(probes.len());
    for u in probes {
        let bd = crate::functional::breakdown(u, pp, &spec)?;
        fiber_maxima.push(fiber_max(&fiber_poly(&bd, pp)?)?.value);
    }
    let (argmin, value) = fiber_maxima
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) });
    Ok(MountainPass { value, argmin, fiber_maxima })
}

/// Unit-amplitude Gaussians `e^{−r²/σ²}` for each width.
pub fn gaussian_probes(grid: &Arc<RadialGrid>, widths: &[f64]) -> Result<Vec<RadialFunction>> {
    widths
        .iter()
        .map(|&s| {
            if !(s > 0.0) {
                return Err(Error::InvalidInput("Gaussian width must be positive"));
            }
            RadialFunction::from_fn(grid.clone(), |r| math::exp(-(r * r) / (s * s)))
        })
        .collect()
}

/// `count` geometric widths spanning `[ℓ/30, 4ℓ]` with `ℓ` from [`length_scale`].
pub fn default_probe_widths(pp: &ProblemParams, v_inf: f64, count: usize) -> Result<Vec<f64>> {
    let length = length_scale(pp, v_inf)?;
    Ok(geometric(length / 30.0, 4.0 * length, count).collect())
}

/// Infimum of the fiber maximum over the linear span of the given probes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanLevel {
    pub value: f64,
    pub coefficients: Vec<f64>,
    pub profile: RadialFunction,
    pub iterations: usize,
    /// Best fiber maximum among the individual probes.
    pub best_single: f64,
}

/// Minimizes `max_t I(u_t)` over `u = Σ cₖ gₖ` by descent on the coefficients,
/// preconditioned with the Gram matrix of the Sobolev metric.
pub fn span_level(pp: &ProblemParams, v_inf: f64, probes: &[RadialFunction], max_iters: usize) -> Result<SpanLevel> {
    let single = mountain_pass_value(pp, v_inf, probes)?;
    let grid = probes[0].grid().clone();
    if probes.iter().any(|p| !Arc::ptr_eq(p.grid(), &grid) && **p.grid() != *grid) {
        return Err(Error::InvalidInput("probes live on different grids"));
    }
    let spec = PotentialSpec::Constant(v_inf);
    let red = Reduced::new(&grid, *pp, &spec);
    let m = probes.len();
    let n = grid.n();
    let combine = |c: &[f64]| {
        let mut u = vec![0.0; n];
        for (ck, g) in c.iter().zip(probes) {
            for (x, y) in u.iter_mut().zip(g.values()) {
                *x += ck * y;
            }
        }
        u
    };
    // Gram matrix of the H¹-type metric κK + wV, with a small ridge.
    let (pdg, pof) = {
        let (_, d, o) = red.gradient(probes[single.argmin].values(), 1.0)?;
        (d, o)
    };
    let apply_m = |x: &[f64]| -> Vec<f64> {
        let mut y = vec![0.0; n];
        for j in 0..n - 2 {
            let mut s = pdg[j] * x[j + 1];
            if j > 0 {
                s += pof[j - 1] * x[j];
            }
            if j + 1 < n - 2 {
                s += pof[j] * x[j + 2];
            }
            y[j + 1] = s;
        }
        y
    };
    let mg: Vec<Vec<f64>> = probes.iter().map(|g| apply_m(g.values())).collect();
    let mut gram = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..=i {
            let v: f64 = probes[i].values().iter().zip(&mg[j]).map(|(a, b)| a * b).sum();
            gram[i * m + j] = v;
            gram[j * m + i] = v;
        }
    }
    let trace: f64 = (0..m).map(|i| gram[i * m + i]).sum::<f64>() / m as f64;
    let mut ridge = 1e-12 * trace;
    let chol = loop {
        let mut g = gram.clone();
        for i in 0..m {
            g[i * m + i] += ridge;
        }
        if let Some(c) = Cholesky::new(&g, m) {
            break c;
        }
        ridge *= 10.0;
        if ridge > trace {
            return Err(Error::SingularSystem);
        }
    };

    let mut c = vec![0.0; m];
    c[single.argmin] = 1.0;
    let mut u = combine(&c);
    let mut fe = red.fiber(&u, 1.0)?;
    let mut step = 1.0;
    let mut iterations = 0;
    let mut quiet = 0;
    for it in 0..max_iters {
        iterations = it + 1;
        let (partials, _, _) = red.gradient(&u, fe.t_star)?;
        let gc: Vec<f64> = probes.iter().map(|g| g.values().iter().zip(&partials).map(|(a, b)| a * b).sum()).collect();
        let dc: Vec<f64> = chol.solve(&gc).into_iter().map(|x| -x).collect();
        let slope: f64 = dc.iter().zip(&gc).map(|(a, b)| a * b).sum();
        if !(slope < 0.0) {
            break;
        }
        let mut s: f64 = (2.0 * step as f64).min(16.0);
        let mut accepted = None;
        for _ in 0..60 {
            let trial_c: Vec<f64> = c.iter().zip(&dc).map(|(a, b)| a + s * b).collect();
            let trial = combine(&trial_c);
            if let Ok(tf) = red.fiber(&trial, fe.t_star) {
                if tf.value <= fe.value + 1e-4 * s * slope {
                    accepted = Some((trial_c, trial, tf));
                    break;
                }
            }
            s *= 0.5;
        }
        let Some((nc, nu, nf)) = accepted else { break };
        let gain = (fe.value - nf.value) / fe.value;
        c = nc;
        u = nu;
        fe = nf;
        step = s;
        quiet = if gain < 1e-12 { quiet + 1 } else { 0 };
        if quiet >= 20 {
            break;
        }
    }
    let mut profile = u;
    profile[n - 1] = 0.0;
    Ok(SpanLevel {
        value: fe.value,
        coefficients: c,
        profile: RadialFunction::new(grid.clone(), profile)?,
        iterations,
        best_single: single.value,
    })
}

// ---------------------------------------------------------------------------
// λ-sweep

/// One row of the λ-sweep. Values are `None` when the corresponding solve failed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    /// Upper bound for the level with the radial potential.
    pub c_lambda: Option<f64>,
    /// Ground-state level of the limit problem.
    pub m_inf: Option<f64>,
    pub gap: Option<f64>,
    pub c_converged: bool,
    pub m_converged: bool,
    pub c_residuals: Option<ResidualReport>,
    pub m_residuals: Option<ResidualReport>,
    pub r_max: f64,
    pub n: usize,
    pub flag: Option<String>,
}

/// Grid used by a sweep row.
#[derive(Debug, Clone, PartialEq)]
pub enum GridChoice {
    /// Sized from the length scale of each row's limit problem.
    Auto,
    Fixed(Arc<RadialGrid>),
}

pub fn sweep_row(template: &ProblemParams, lambda: f64, v: &PotentialSpec, grid: &GridChoice, opts: &SolverOptions) -> SweepRow {
    let mut row = SweepRow {
        lambda,
        c_lambda: None,
        m_inf: None,
        gap: None,
        c_converged: false,
        m_converged: false,
        c_residuals: None,
        m_residuals: None,
        r_max: f64::NAN,
        n: 0,
        flag: None,
    };
    let pp = match template.with_lambda(lambda) {
        Ok(pp) => pp,
        Err(e) => {
            row.flag = Some(format!("{e}"));
            return row;
        }
    };
    let grid = match grid {
        GridChoice::Fixed(g) => Ok(g.clone()),
        GridChoice::Auto => auto_grid_for(&pp, v.v_inf()),
    };
    let grid = match grid {
        Ok(g) => g,
        Err(e) => {
            row.flag = Some(format!("{e}"));
            return row;
        }
    };
    row.r_max = grid.r_max();
    row.n = grid.n();
    let limit = match solve_limit_ground_state(&pp, v.v_inf(), &grid, opts) {
        Ok(r) => r,
        Err(e) => {
            row.flag = Some(format!("limit solve: {e}"));
            return row;
        }
    };
    row.m_inf = Some(limit.energy);
    row.m_converged = limit.converged;
    row.m_residuals = Some(limit.residuals);
    let vopts = SolverOptions { seed: Seed::Custom(limit.profile.clone()), ..opts.clone() };
    match solve_v_ground_state(&pp, v, &grid, &vopts) {
        Ok(r) => {
            row.c_lambda = Some(r.energy);
            row.c_converged = r.converged;
            row.c_residuals = Some(r.residuals);
            row.gap = Some(limit.energy - r.energy);
        }
        Err(e) => row.flag = Some(format!("potential solve: {e}")),
    }
    if row.flag.is_none() && !(row.c_converged && row.m_converged) {
        row.flag = Some("not converged".into());
    }
    row
}

/// Checks that `λ` values are sorted ascending and lie in `[δ, 1]`.
pub fn validate_lambdas(template: &ProblemParams, lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::InvalidInput("no lambda values"));
    }
    if lambdas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("lambda values must be strictly ascending"));
    }
    if lambdas.iter().any(|&l| !(l >= template.delta() && l <= 1.0)) {
        return Err(Error::InvalidInput("lambda values must lie in [delta, 1]"));
    }
    Ok(())
}

/// Sequential λ-sweep; failed rows are flagged and the sweep continues.
pub fn lambda_sweep(template: &ProblemParams, lambdas: &[f64], v: &PotentialSpec, grid: &GridChoice, opts: &SolverOptions) -> Result<Vec<SweepRow>> {
    validate_lambdas(template, lambdas)?;
    Ok(lambdas.iter().map(|&l| sweep_row(template, l, v, grid, opts)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::breakdown;
    use crate::grid::DEFAULT_R_MAX;

    fn cubic() -> ProblemParams {
        ProblemParams::new(1.0, 1.0, 3.0).unwrap()
    }

    #[test]
    fn options_are_validated() {
        let ok = SolverOptions::default();
        assert!(ok.validate().is_ok());
        assert!(SolverOptions { max_iters: 0, ..ok.clone() }.validate().is_err());
        assert!(SolverOptions { grad_tol: 0.0, ..ok.clone() }.validate().is_err());
        assert!(SolverOptions { armijo_c: 1.0, ..ok.clone() }.validate().is_err());
        assert!(SolverOptions { step_init: -1.0, ..ok }.validate().is_err());
    }

    #[test]
    fn length_scale_follows_exact_scaling() {
        let pp = cubic();
        let ell = length_scale(&pp, 1.0).unwrap();
        // √κ solves s² − 56.69·s − 1 = 0 for the cubic unit state
        assert!((ell - 56.71).abs() < 0.02, "{ell}");
        // b → 0 leaves κ = a
        let soft = ProblemParams::new(4.0, 1e-12, 3.0).unwrap();
        assert!((length_scale(&soft, 1.0).unwrap() - 2.0).abs() < 1e-6);
        let (r_max, n) = auto_grid(&pp, 1.0).unwrap();
        assert!((r_max / ell - TAIL_LENGTHS).abs() < 1e-12);
        assert!((DEFAULT_N..=MAX_AUTO_N).contains(&n));
        assert!(length_scale(&pp, -1.0).is_err());
    }

    #[test]
    fn limit_ground_state_converges() {
        let pp = cubic();
        let g = auto_grid_for(&pp, 1.0).unwrap();
        let rep = solve_limit_ground_state(&pp, 1.0, &g, &SolverOptions::default()).unwrap();
        assert!(rep.converged);
        assert!(rep.pde_residual() <= 1e-8);
        assert!(rep.g_residual() <= 1e-6 && rep.pohozaev_residual() <= 1e-4);
        assert!((rep.t_star - 1.0).abs() < 1e-6);
        let n = g.n();
        assert!(rep.profile.values()[..n - 1].iter().all(|&x| x > 0.0));
        assert!(rep.energy > 0.0 && !rep.upper_bound_only);
        let bd = breakdown(&rep.profile, &pp, &PotentialSpec::Constant(1.0)).unwrap();
        assert!((bd.energy(&pp) / rep.energy - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ground_state_is_its_own_mountain_pass_probe() {
        let pp = cubic();
        let g = auto_grid_for(&pp, 1.0).unwrap();
        let rep = solve_limit_ground_state(&pp, 1.0, &g, &SolverOptions::default()).unwrap();
        let mp = mountain_pass_value(&pp, 1.0, core::slice::from_ref(&rep.profile)).unwrap();
        assert!((mp.value / rep.energy - 1.0).abs() < 1e-14);
    }

    #[test]
    fn span_never_exceeds_its_best_member() {
        let pp = cubic();
        let g = auto_grid_for(&pp, 1.0).unwrap();
        let probes = gaussian_probes(&g, &default_probe_widths(&pp, 1.0, 8).unwrap()).unwrap();
        let span = span_level(&pp, 1.0, &probes, 200).unwrap();
        assert!(span.value <= span.best_single);
        assert_eq!(span.coefficients.len(), 8);
        assert!(mountain_pass_value(&pp, 1.0, &[]).is_err());
    }

    #[test]
    fn custom_seed_must_share_the_grid() {
        let pp = cubic();
        let g = auto_grid_for(&pp, 1.0).unwrap();
        let other = make_grid(DEFAULT_R_MAX, DEFAULT_N).unwrap();
        let seed = RadialFunction::from_fn(other, |r| math::exp(-r * r)).unwrap();
        let opts = SolverOptions { seed: Seed::Custom(seed), ..SolverOptions::default() };
        assert!(matches!(solve_limit_ground_state(&pp, 1.0, &g, &opts), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn lambda_lists_are_checked() {
        let pp = cubic().with_lambda(0.5).unwrap();
        assert!(validate_lambdas(&pp, &[0.5, 0.75, 1.0]).is_ok());
        assert!(validate_lambdas(&pp, &[]).is_err());
        assert!(validate_lambdas(&pp, &[0.7, 0.6]).is_err());
        assert!(validate_lambdas(&pp, &[0.4]).is_err());
        assert!(validate_lambdas(&pp, &[1.1]).is_err());
    }

    #[test]
    fn sweep_row_on_a_well_below_infinity() {
        let pp = cubic().with_lambda(0.5).unwrap();
        let v = PotentialSpec::shifted_coulomb(2.0, 1e5, 4096).unwrap();
        let row = sweep_row(&pp, 1.0, &v, &GridChoice::Auto, &SolverOptions::default());
        assert!(row.flag.is_none(), "{:?}", row.flag);
        assert!(row.gap.unwrap() > 0.0);
        assert!(row.c_converged && row.m_converged);
    }
}
