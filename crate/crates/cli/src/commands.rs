//! The subcommands behind [`run`].

use std::path::{Path, PathBuf};
use std::sync::Arc;

use kirchhoff_core::algebra::{self, Rational, Step4Case};
use kirchhoff_core::fiber::{fiber_curve, fiber_max, fiber_poly, GeneralFiber};
use kirchhoff_core::functional::{breakdown, check_v_hypotheses, EnergyBreakdown};
use kirchhoff_core::solver::{
    auto_grid_for, default_probe_widths, gaussian_probes, mountain_pass_value, solve_limit_ground_state, solve_v_ground_state, sweep_row,
    validate_lambdas, GridChoice, ResidualReport, SolveReport,
};
use kirchhoff_core::{RadialFunction, RadialGrid};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{parse_rational, CommandKind, RunConfig};
use crate::error::{Error, Result};
use crate::io;
use crate::report::{now_ms, Gate, OutputRecord, Status, Timing};
use crate::scan::{scan_level, threshold, ScanParams};

/// Reporting gates on normalized residuals.
pub const PDE_GATE: f64 = 1e-4;
pub const POHOZAEV_GATE: f64 = 1e-4;
pub const G_GATE: f64 = 1e-6;
/// Sweep monotonicity slack, relative.
pub const MONOTONE_SLACK: f64 = 1e-4;
/// Relative slack when comparing probe fiber maxima against the solve energy.
pub const LEVEL_SLACK: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub status: Status,
    pub output_dir: PathBuf,
    /// One-line human summary.
    pub summary: String,
    pub gates: Vec<Gate>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Pass => 0,
            _ => 1,
        }
    }
}

struct Body {
    gates: Vec<Gate>,
    result: Value,
    summary: String,
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    dir: &'a Path,
    artifacts: Vec<String>,
}

impl Ctx<'_> {
    fn profile(&mut self, name: &str, u: &RadialFunction) -> Result<()> {
        io::write_profile(&self.dir.join(name), u)?;
        self.artifacts.push(name.into());
        Ok(())
    }

    fn table<const K: usize>(&mut self, name: &str, header: [&str; K], rows: impl IntoIterator<Item = [f64; K]>) -> Result<()> {
        io::write_table(&self.dir.join(name), header, rows)?;
        self.artifacts.push(name.into());
        Ok(())
    }
}

/// Runs one subcommand and writes `report.json`, also on failure.
pub fn run(kind: CommandKind, cfg: &RunConfig) -> Result<RunOutcome> {
    let started = now_ms();
    let dir = cfg.output_dir.clone();
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut ctx = Ctx { cfg, dir: &dir, artifacts: Vec::new() };
    let body = match kind {
        CommandKind::Solve => solve(&mut ctx),
        CommandKind::Sweep => sweep(&mut ctx),
        CommandKind::Fiber => fiber(&mut ctx),
        CommandKind::VerifyAlgebra => verify_algebra(&mut ctx),
        CommandKind::Nonexist => nonexist(&mut ctx),
    };
    let mut record = OutputRecord {
        version: crate::report::VERSION,
        command: kind,
        status: Status::Error,
        config: cfg.clone(),
        gates: Vec::new(),
        result: Value::Null,
        error: None,
        artifacts: std::mem::take(&mut ctx.artifacts),
        timing: Timing { started_unix_ms: started, finished_unix_ms: 0 },
    };
    match body {
        Ok(body) => {
            record.status = if body.gates.iter().all(|g| g.passed) { Status::Pass } else { Status::Fail };
            record.gates = body.gates;
            record.result = body.result;
            record.timing.finished_unix_ms = now_ms();
            record.write(&dir)?;
            Ok(RunOutcome { status: record.status, output_dir: dir, summary: body.summary, gates: record.gates })
        }
        Err(e) => {
            record.error = Some(e.to_string());
            record.timing.finished_unix_ms = now_ms();
            record.write(&dir)?;
            Err(e)
        }
    }
}

fn breakdown_json(bd: &EnergyBreakdown) -> Value {
    json!({
        "dirichlet": bd.dirichlet,
        "grad_q": bd.grad_q,
        "mass_q": bd.mass_q,
        "dv_q": bd.dv_q,
        "kirch_q": bd.kirch_q,
        "pow_q": bd.pow_q,
    })
}

fn residuals_json(r: &ResidualReport) -> Value {
    json!({ "pde": r.pde_residual, "pohozaev": r.pohozaev_residual, "g": r.g_residual })
}

fn residual_gates(prefix: &str, r: &ResidualReport, converged: bool) -> Vec<Gate> {
    vec![
        Gate::check(&format!("{prefix}converged"), converged),
        Gate::at_most(&format!("{prefix}pde_residual"), r.pde_residual, PDE_GATE),
        Gate::at_most(&format!("{prefix}pohozaev_residual"), r.pohozaev_residual, POHOZAEV_GATE),
        Gate::at_most(&format!("{prefix}g_residual"), r.g_residual, G_GATE),
    ]
}

fn min_interior(u: &RadialFunction) -> f64 {
    let v = u.values();
    v[..v.len() - 1].iter().copied().fold(f64::INFINITY, f64::min)
}

fn grid_json(grid: &RadialGrid, auto: bool) -> Value {
    json!({ "r_max": grid.r_max(), "n": grid.n(), "auto": auto })
}

fn solve_json(rep: &SolveReport) -> Value {
    json!({
        "energy": rep.energy,
        "breakdown": breakdown_json(&rep.breakdown),
        "residuals": residuals_json(&rep.residuals),
        "t_star": rep.t_star,
        "iterations": rep.iterations,
        "converged": rep.converged,
        "upper_bound_only": rep.upper_bound_only,
        "multimodal_fibers": rep.multimodal_fibers,
        "peak": rep.profile.values()[0],
        "min_interior": min_interior(&rep.profile),
    })
}

fn solve(ctx: &mut Ctx) -> Result<Body> {
    let cfg = ctx.cfg;
    let pp = cfg.params.problem()?;
    let v = cfg.potential.load()?;
    let opts = cfg.solver.options()?;
    let auto = cfg.grid.is_auto();
    let grid = if auto { auto_grid_for(&pp, v.v_inf())? } else { cfg.grid.fixed()? };
    let rep = if v.is_constant() { solve_limit_ground_state(&pp, v.v_inf(), &grid, &opts)? } else { solve_v_ground_state(&pp, &v, &grid, &opts)? };
    ctx.profile("profile.csv", &rep.profile)?;
    ctx.table("history.csv", ["iteration", "t_star", "energy"], rep.t_history.iter().zip(&rep.energy_history).enumerate().map(|(i, (&t, &e))| [i as f64, t, e]))?;
    let mut gates = residual_gates("", &rep.residuals, rep.converged);
    gates.push(Gate::at_least("min_interior_value", min_interior(&rep.profile), f64::MIN_POSITIVE));
    let mut result = solve_json(&rep);
    result["grid"] = grid_json(&grid, auto);
    if v.is_constant() {
        let widths = default_probe_widths(&pp, v.v_inf(), 32)?;
        let mp = mountain_pass_value(&pp, v.v_inf(), &gaussian_probes(&grid, &widths)?)?;
        gates.push(Gate::at_least("gaussian_probe_level_above_energy", mp.value, rep.energy * (1.0 - LEVEL_SLACK)));
        result["gaussian_probes"] = json!({ "widths": widths, "fiber_maxima": mp.fiber_maxima, "min": mp.value, "argmin": mp.argmin });
    } else {
        let h = check_v_hypotheses(&v, &grid)?;
        result["potential_hypotheses"] = json!({
            "v1": h.v1, "v2_weak": h.v2_weak, "v2_strict": h.v2_strict, "v3": h.v3,
            "min_v_minus_r_dv": h.min_v_minus_r_dv, "max_v_minus_v_inf": h.max_v_minus_v_inf, "min_quotient": h.min_quotient,
        });
    }
    let summary = format!(
        "energy {} (pde {:.2e}, pohozaev {:.2e}, G {:.2e}) on r_max={} n={}",
        rep.energy,
        rep.residuals.pde_residual,
        rep.residuals.pohozaev_residual,
        rep.residuals.g_residual,
        grid.r_max(),
        grid.n()
    );
    Ok(Body { gates, result, summary })
}

fn sweep(ctx: &mut Ctx) -> Result<Body> {
    let cfg = ctx.cfg;
    let template = cfg.params.problem()?;
    template.require_manifold_range()?;
    let v = cfg.potential.load()?;
    let opts = cfg.solver.options()?;
    let lambdas = &cfg.sweep.lambdas;
    validate_lambdas(&template, lambdas)?;
    let choice = if cfg.grid.is_auto() { GridChoice::Auto } else { GridChoice::Fixed(cfg.grid.fixed()?) };
    let rows: Vec<_> = lambdas.par_iter().map(|&l| sweep_row(&template, l, &v, &choice, &opts)).collect();
    let nan = f64::NAN;
    ctx.table(
        "sweep.csv",
        ["lambda", "c_lambda", "m_inf", "gap"],
        rows.iter().map(|r| [r.lambda, r.c_lambda.unwrap_or(nan), r.m_inf.unwrap_or(nan), r.gap.unwrap_or(nan)]),
    )?;
    let mut gates = Vec::new();
    for r in &rows {
        let tag = format!("lambda={}:", r.lambda);
        match (&r.c_residuals, &r.m_residuals) {
            (Some(c), Some(m)) => {
                gates.extend(residual_gates(&format!("{tag}c_"), c, r.c_converged));
                gates.extend(residual_gates(&format!("{tag}m_"), m, r.m_converged));
            }
            _ => gates.push(Gate::check(&format!("{tag}solved"), false)),
        }
        gates.push(Gate::at_least(&format!("{tag}gap"), r.gap.unwrap_or(nan), f64::MIN_POSITIVE));
    }
    for w in rows.windows(2) {
        if let (Some(lo), Some(hi)) = (w[0].c_lambda, w[1].c_lambda) {
            gates.push(Gate::at_most(&format!("lambda={}:c_non_increasing", w[1].lambda), hi, lo * (1.0 + MONOTONE_SLACK)));
        }
    }
    let result = json!({
        "rows": rows.iter().map(|r| json!({
            "lambda": r.lambda,
            "c_lambda": r.c_lambda,
            "m_inf": r.m_inf,
            "gap": r.gap,
            "c_converged": r.c_converged,
            "m_converged": r.m_converged,
            "c_residuals": r.c_residuals.as_ref().map(residuals_json),
            "m_residuals": r.m_residuals.as_ref().map(residuals_json),
            "r_max": r.r_max,
            "n": r.n,
            "flag": r.flag,
        })).collect::<Vec<_>>(),
    });
    let min_gap = rows.iter().filter_map(|r| r.gap).fold(f64::INFINITY, f64::min);
    let summary = format!("{} rows, smallest gap {min_gap}", rows.len());
    Ok(Body { gates, result, summary })
}

fn fiber(ctx: &mut Ctx) -> Result<Body> {
    let cfg = ctx.cfg;
    let pp = cfg.params.problem()?;
    let v = cfg.potential.load()?;
    let fc = &cfg.fiber;
    if fc.points < 2 {
        return Err(Error::usage("fiber needs at least two points"));
    }
    let u = match &fc.profile {
        Some(path) => io::read_profile(path)?,
        None => {
            if !(fc.width > 0.0) {
                return Err(Error::usage("Gaussian width must be positive"));
            }
            let grid: Arc<RadialGrid> = cfg.grid.fixed()?;
            let w = fc.width;
            RadialFunction::from_fn(grid, |r| (-(r * r) / (w * w)).exp())?
        }
    };
    let bd = breakdown(&u, &pp, &v)?;
    let (t_star, value, critical_points, curve, multimodal);
    if v.is_constant() {
        let fp = fiber_poly(&bd, &pp)?;
        let fm = fiber_max(&fp)?;
        t_star = fm.t_star;
        value = fm.value;
        critical_points = fp.sign_changes(t_star * 1e-4, t_star * 1e4, 4001);
        multimodal = false;
        let t_max = fc.t_max.unwrap_or(3.0 * t_star);
        check_range(fc.t_min, t_max)?;
        curve = fiber_curve(&fp, fc.t_min, t_max, fc.points);
    } else {
        let gf = GeneralFiber::new(&u, &pp, &v)?;
        let fm = gf.maximize()?;
        t_star = fm.t_star;
        value = fm.value;
        critical_points = fm.audit_maxima;
        multimodal = fm.multimodal();
        let t_max = fc.t_max.unwrap_or(3.0 * t_star);
        check_range(fc.t_min, t_max)?;
        let step = (t_max - fc.t_min) / (fc.points - 1) as f64;
        curve = (0..fc.points).map(|k| fc.t_min + step * k as f64).map(|t| (t, gf.value(t))).collect();
    }
    ctx.table("fiber.csv", ["t", "gamma"], curve.iter().map(|&(t, g)| [t, g]))?;
    ctx.profile("profile.csv", &u.rescale(t_star)?)?;
    let gates = vec![Gate::check("single_critical_point", critical_points == 1 && !multimodal)];
    let result = json!({
        "t_star": t_star,
        "max_value": value,
        "critical_points": critical_points,
        "energy_at_1": bd.energy(&pp),
        "g_at_1": bd.constraint_g(&pp),
        "breakdown": breakdown_json(&bd),
        "grid": grid_json(u.grid(), false),
    });
    Ok(Body { gates, result, summary: format!("t* = {t_star}, max = {value}") })
}

fn check_range(lo: f64, hi: f64) -> Result<()> {
    if lo >= 0.0 && hi > lo && hi.is_finite() {
        Ok(())
    } else {
        Err(Error::usage(format!("invalid t range [{lo}, {hi}]")))
    }
}

fn rational_json(x: &Rational) -> Value {
    json!({ "num": x.numer().to_string(), "den": x.denom().to_string() })
}

fn quad_json(x: &[Rational; 4]) -> Value {
    json!({ "alpha": rational_json(&x[0]), "beta": rational_json(&x[1]), "mu": rational_json(&x[2]), "delta": rational_json(&x[3]) })
}

fn verify_algebra(ctx: &mut Ctx) -> Result<Body> {
    let al = &ctx.cfg.algebra;
    let ps = al.p.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>()?;
    let lambdas = al.lambda.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>()?;
    let k = parse_rational(&al.k)?;
    if ps.is_empty() || (lambdas.is_empty() && !al.include_critical) {
        return Err(Error::usage("empty (p, lambda) lattice"));
    }
    let mut gates = Vec::new();
    let mut rows = Vec::new();
    let mut per_p = Vec::new();
    let mut table = vec![format!("{:>8} {:>10} {:>26} {:>6} {:>12} {:>6}", "p", "lambda", "det A", "det=", "case", "pass")];
    for p in &ps {
        let s3 = algebra::step3_solve(&k, p)?;
        // Step 2 at α = 2k/5, β = k/5: the solved (μ, δ) must satisfy both equations exactly
        let (alpha, beta) = (&k * algebra::rat(2, 5), &k * algebra::rat(1, 5));
        let s2 = algebra::step2_solve(&k, &alpha, &beta, p)?;
        let x = [alpha.clone(), beta.clone(), s2.mu.clone(), s2.delta.clone()];
        let a1 = algebra::matrix_a(&algebra::rat(1, 1), p)?;
        let dot = |row: &[Rational; 4]| row.iter().zip(&x).fold(algebra::rat(0, 1), |acc, (c, v)| acc + c * v);
        let step2_ok = dot(&a1[0]) == k && dot(&a1[1]) == algebra::rat(0, 1);
        let bracket = algebra::rat(1, 6) < algebra::critical_lambda(p) && algebra::critical_lambda(p) < algebra::rat(1, 5);
        let tag = format!("p={p}:");
        gates.push(Gate::check(&format!("{tag}step2_substitution"), step2_ok));
        gates.push(Gate::check(&format!("{tag}step3_closed_form"), s3.closed_form_match));
        gates.push(Gate::check(&format!("{tag}step3_contradiction"), s3.contradiction.is_some()));
        gates.push(Gate::check(&format!("{tag}critical_bracket"), bracket));
        per_p.push(json!({
            "p": rational_json(p),
            "critical_lambda": rational_json(&algebra::critical_lambda(p)),
            "bracket": bracket,
            "step2": { "alpha": rational_json(&alpha), "beta": rational_json(&beta), "mu": rational_json(&s2.mu), "delta": rational_json(&s2.delta), "substitution": step2_ok, "implication": s2.implication },
            "step3": { "det": rational_json(&s3.det), "solution": s3.solution.as_ref().map(quad_json), "closed_form_match": s3.closed_form_match, "contradiction": s3.contradiction },
        }));
        let mut lams = lambdas.clone();
        if al.include_critical && !lams.contains(&algebra::critical_lambda(p)) {
            lams.push(algebra::critical_lambda(p));
        }
        for lambda in &lams {
            let v = algebra::step4_case_analysis(lambda, p, &k)?;
            let excluded = lambda == &algebra::rat(0, 1) || v.contradiction.is_some();
            let pass = v.checks_pass() && excluded;
            let case = match &v.case {
                Step4Case::ZeroMultiplier => "zero",
                Step4Case::Regular { .. } => "regular",
                Step4Case::Degenerate { .. } => "degenerate",
            };
            gates.push(Gate::check(&format!("{tag}lambda={lambda}:step4"), pass));
            table.push(format!(
                "{:>8} {:>10} {:>26} {:>6} {:>12} {:>6}",
                p.to_string(),
                lambda.to_string(),
                v.det.eliminated.to_string(),
                if v.det.consistent() { "yes" } else { "NO" },
                case,
                if pass { "PASS" } else { "FAIL" }
            ));
            let detail = match &v.case {
                Step4Case::ZeroMultiplier => json!({}),
                Step4Case::Regular { solution, closed_form_match, sign_claim } => {
                    json!({ "solution": quad_json(solution), "closed_form_match": closed_form_match, "sign_claim": sign_claim })
                }
                Step4Case::Degenerate { reduced_rows_match, relation_derived } => {
                    json!({ "reduced_rows_match": reduced_rows_match, "relation_derived": relation_derived })
                }
            };
            rows.push(json!({
                "p": rational_json(p),
                "lambda": rational_json(lambda),
                "det_eliminated": rational_json(&v.det.eliminated),
                "det_closed_form": rational_json(&v.det.closed_form),
                "det_consistent": v.det.consistent(),
                "case": case,
                "detail": detail,
                "contradiction": v.contradiction,
                "pass": pass,
            }));
        }
    }
    let result = json!({ "k": rational_json(&k), "per_p": per_p, "lattice": rows, "table": table });
    let failed = gates.iter().filter(|g| !g.passed).count();
    let summary = format!("{}\n{} checks, {failed} failed", table.join("\n"), gates.len());
    Ok(Body { gates, result, summary })
}

fn nonexist(ctx: &mut Ctx) -> Result<Body> {
    let cfg = ctx.cfg;
    let params = ScanParams { a: cfg.params.a, b: cfg.params.b, p: cfg.params.p };
    params.validate()?;
    let v = cfg.potential.load()?;
    let ne = &cfg.nonexist;
    if ne.samples == 0 || ne.lambda_factors.is_empty() || ne.lambda_factors.iter().any(|f| !(*f > 0.0 && f.is_finite())) {
        return Err(Error::usage("nonexist needs samples > 0 and positive lambda factors"));
    }
    let grid = cfg.grid.fixed()?;
    let th = threshold(&params, &grid, &v)?;
    let mut gates = Vec::new();
    let mut levels = Vec::new();
    let mut lines = vec![format!("C = {}  lambda0 = {}", th.sobolev_constant, th.lambda0)];
    for (i, &factor) in ne.lambda_factors.iter().enumerate() {
        let out = scan_level(&params, factor * th.lambda0, &grid, &v, ne.samples, cfg.seed)?;
        let lv = out.level;
        let gated = factor >= 1.0;
        if gated {
            gates.push(Gate::at_most(&format!("factor={factor}:violations"), lv.violations as f64, 0.0));
        }
        if let Some(u) = &out.counterexample {
            ctx.profile(&format!("counterexample_{i}.csv"), u)?;
        }
        lines.push(format!(
            "lambda = {factor} x lambda0: {} / {} violations, min margin {:.3e}{}",
            lv.violations,
            lv.samples,
            lv.min_relative_margin,
            if gated { "" } else { " (below the threshold; informative only)" }
        ));
        levels.push(json!({ "factor": factor, "gated": gated, "scan": lv }));
    }
    let result = json!({
        "params": params,
        "sobolev_constant": th.sobolev_constant,
        "lambda0": th.lambda0,
        "lambda0_exact": rational_json(&th.lambda0_exact),
        "grid": grid_json(&grid, false),
        "levels": levels,
    });
    Ok(Body { gates, result, summary: lines.join("\n") })
}
