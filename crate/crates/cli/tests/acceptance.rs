//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::{cofactor_det, cramer, limit_level, rel};
use kirchhoff::scan::{scan_level, threshold, ScanParams};
use kirchhoff_core::algebra::{self, rat, Rational};
use kirchhoff_core::fiber::{fiber_max, FiberPolynomial};
use kirchhoff_core::functional::{breakdown, embedding_constant, gradient_i};
use kirchhoff_core::grid::{make_grid, DEFAULT_N, DEFAULT_R_MAX};
use kirchhoff_core::solver::{
    auto_grid, auto_grid_for, default_probe_widths, gaussian_probes, solve_limit_ground_state, span_level, sweep_row, GridChoice,
    SolverOptions,
};
use kirchhoff_core::{PotentialSpec, ProblemParams, RadialFunction, RadialGrid};
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg()) }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

// 1. exact algebra

fn random_rational(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Rational {
    let d = rng.random_range(1..200i64);
    rat(rng.random_range(lo * d..=hi * d), d)
}

fn random_p(rng: &mut ChaCha8Rng) -> Rational {
    let d = rng.random_range(2..500i64);
    rat(2 * d + rng.random_range(1..3 * d), d)
}

fn rows(m: &algebra::Matrix4) -> Vec<Vec<Rational>> {
    m.iter().map(|r| r.to_vec()).collect()
}

fn exact_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let one = rat(1, 1);
    let zero = Rational::zero();
    for _ in 0..200 {
        let lambda = random_rational(&mut rng, -3, 3);
        let mut p = random_rational(&mut rng, -6, 8);
        if p == rat(-1, 1) {
            p = rat(3, 1);
        }
        let m = algebra::matrix_a(&lambda, &p).map_err(err)?;
        let laplace = cofactor_det(&rows(&m));
        let closed = algebra::det_a_closed_form(&lambda, &p).map_err(err)?;
        let elim = algebra::det_a(&lambda, &p).map_err(err)?.eliminated;
        ensure(laplace == closed && laplace == elim, || format!("det A mismatch at lambda = {lambda}, p = {p}"))?;
    }
    let mut systems = 0;
    for _ in 0..200 {
        let p = random_p(&mut rng);
        let k = rat(rng.random_range(1..500), rng.random_range(1..50));
        let alpha = rat(rng.random_range(1..500), rng.random_range(1..50));
        let beta = rat(rng.random_range(1..500), rng.random_range(1..50));

        // Step 2: the first two rows solved for (mu, delta) by Cramer's rule.
        let s2 = algebra::step2_solve(&k, &alpha, &beta, &p).map_err(err)?;
        let a1 = algebra::matrix_a(&one, &p).map_err(err)?;
        let m2 = vec![vec![a1[0][2].clone(), a1[0][3].clone()], vec![a1[1][2].clone(), a1[1][3].clone()]];
        let rhs2 = [&k - &a1[0][0] * &alpha - &a1[0][1] * &beta, -(&a1[1][0] * &alpha) - &a1[1][1] * &beta];
        let x2 = cramer(&m2, &rhs2).ok_or("step 2 system is singular")?;
        ensure(x2[0] == s2.mu && x2[1] == s2.delta, || format!("step 2 closed form differs at p = {p}"))?;

        // Step 3: the four equations of the system.
        let p1 = &p + &one;
        let p4 = &p + rat(4, 1);
        let m3 = vec![
            a1[0].to_vec(),
            a1[1].to_vec(),
            vec![rat(3, 1), rat(5, 1), rat(6, 1), -p4.clone()],
            vec![rat(3, 2), rat(15, 2), rat(3, 1), -(&p4 * rat(3, 1) / &p1)],
        ];
        let rhs = [k.clone(), zero.clone(), zero.clone(), zero.clone()];
        let x3 = cramer(&m3, &rhs).ok_or("step 3 system is singular")?;
        ensure(x3 == algebra::step3_closed_form(&k, &p), || format!("step 3 closed form differs at p = {p}"))?;
        let v3 = algebra::step3_solve(&k, &p).map_err(err)?;
        ensure(x3[2].is_negative() && v3.contradiction.is_some() && v3.closed_form_match, || format!("step 3 contradiction missing at p = {p}"))?;

        // Step 4: a random lambda and the degenerate one.
        let mut lambda = random_rational(&mut rng, -3, 3);
        if lambda.is_zero() {
            lambda = rat(1, 7);
        }
        for lam in [lambda, algebra::critical_lambda(&p)] {
            let v4 = algebra::step4_case_analysis(&lam, &p, &k).map_err(err)?;
            ensure(v4.checks_pass() && v4.contradiction.is_some(), || format!("step 4 failed at lambda = {lam}, p = {p}: {v4:?}"))?;
            let m4 = rows(&algebra::matrix_a(&lam, &p).map_err(err)?);
            match cramer(&m4, &rhs) {
                Some(x4) => {
                    let (beta_cf, delta_cf) = algebra::step4_closed_form(&lam, &p, &k);
                    ensure(x4[1] == beta_cf && x4[3] == delta_cf, || format!("step 4 closed form differs at lambda = {lam}, p = {p}"))?;
                    ensure(!x4[1].is_positive() || !x4[3].is_positive(), || format!("step 4 signs allow a solution at lambda = {lam}"))?;
                }
                None => ensure(lam == algebra::critical_lambda(&p), || format!("unexpected singular system at lambda = {lam}"))?,
            }
            systems += 1;
        }
    }
    Ok(format!("200 determinants, 200 step 2/3 systems, {systems} step 4 systems"))
}

// 2. identities

fn random_bumps(rng: &mut ChaCha8Rng) -> Vec<(f64, f64, f64)> {
    (0..rng.random_range(1..=3))
        .map(|_| {
            let amp = if rng.random_bool(0.75) { rng.random_range(0.2..3.0) } else { -rng.random_range(0.2..1.0) };
            (amp, rng.random_range(0.0..1.5), rng.random_range(0.4..1.0))
        })
        .collect()
}

fn bump_profile(grid: &Arc<RadialGrid>, bumps: &[(f64, f64, f64)]) -> Result<RadialFunction, String> {
    RadialFunction::from_fn(grid.clone(), |r| bumps.iter().map(|&(a, c, w)| a * (-((r - c) / w).powi(2)).exp()).sum()).map_err(err)
}

fn identities() -> Outcome {
    let grid = make_grid(DEFAULT_R_MAX, DEFAULT_N).map_err(err)?;
    let coulomb = PotentialSpec::shifted_coulomb(2.0, 1e5, 65536).map_err(err)?;
    let (mut worst_chain, mut worst_split, mut worst_scale) = (0f64, 0f64, 0f64);
    for i in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i);
        let bumps = random_bumps(&mut rng);
        let u = bump_profile(&grid, &bumps)?;
        let pp = ProblemParams::new(rng.random_range(0.2..3.0), rng.random_range(0.05..2.0), rng.random_range(2.05..4.95))
            .and_then(|pp| pp.with_lambda(rng.random_range(0.5..1.0)))
            .map_err(err)?;
        let v = if i % 2 == 0 { PotentialSpec::Constant(rng.random_range(0.2..3.0)) } else { coulomb.clone() };

        let bd = breakdown(&u, &pp, &v).map_err(err)?;
        let scale = bd.grad_q + bd.mass_q + bd.dv_q.abs() + bd.kirch_q + pp.lambda() * bd.pow_q;
        let g = gradient_i(&u, &pp, &v).map_err(err)?;
        let pairing = grid.quad(&g.iter().zip(u.values()).map(|(a, b)| a * b).collect::<Vec<_>>()).map_err(err)?;
        let chain = (bd.constraint_g(&pp) - (pairing + bd.pohozaev_p(&pp))).abs() / scale;
        let split = (bd.energy(&pp) - bd.phi(&pp) - bd.constraint_g(&pp) / 6.0).abs() / scale;
        ensure(chain <= 1e-8, || format!("profile {i}: G identity off by {chain:e}"))?;
        ensure(split <= 1e-10, || format!("profile {i}: I - Phi - G/6 off by {split:e}"))?;
        worst_chain = worst_chain.max(chain);
        worst_split = worst_split.max(split);

        if let PotentialSpec::Constant(_) = v {
            let p = pp.p();
            for t in [0.25, 0.5, 2.0, 4.0, rng.random_range(0.25..4.0)] {
                let bt = breakdown(&u.rescale(t).map_err(err)?, &pp, &v).map_err(err)?;
                let errs = [
                    rel(bt.grad_q, bd.grad_q * t.powi(3)),
                    rel(bt.mass_q, bd.mass_q * t.powi(5)),
                    rel(bt.pow_q, bd.pow_q * t.powf(p + 4.0)),
                ];
                let e = errs.iter().copied().fold(0.0, f64::max);
                ensure(e <= 1e-3, || format!("profile {i}: scaling law off by {e:e} at t = {t}"))?;
                worst_scale = worst_scale.max(e);
            }
        }
    }
    Ok(format!("G identity {worst_chain:.1e}, decomposition {worst_split:.1e}, scaling {worst_scale:.1e}"))
}

// 3. fibers

fn fibers() -> Outcome {
    let ps: [f64; 5] = [2.1, 2.5, 3.0, 4.0, 4.9];
    let checked: Vec<f64> = ps
        .par_iter()
        .map(|&p| -> Result<f64, String> {
            let mut rng = ChaCha8Rng::seed_from_u64(p.to_bits());
            let mut worst = 0f64;
            for i in 0..10_000 {
                let mut c = || 10f64.powf(rng.random_range(-2.0..2.0));
                let fp = FiberPolynomial { c1: c(), c2: c(), c3: c(), c4: c(), p };
                let fm = fiber_max(&fp).map_err(|e| format!("p = {p}, sample {i}: {e}"))?;
                let changes = fp.sign_changes(fm.t_star * 1e-4, fm.t_star * 1e4, 601);
                ensure(changes == 1, || format!("p = {p}, sample {i}: {changes} sign changes"))?;
                let t = fm.t_star;
                let moved = FiberPolynomial { c1: fp.c1 * t.powi(3), c2: fp.c2 * t.powi(5), c3: fp.c3 * t.powi(6), c4: fp.c4 * t.powf(p + 4.0), p };
                let again = fiber_max(&moved).map_err(err)?;
                let d = (again.t_star - 1.0).abs();
                ensure(d <= 1e-10, || format!("p = {p}, sample {i}: reprojection moved t by {d:e}"))?;
                worst = worst.max(d);
            }
            Ok(worst)
        })
        .collect::<Result<_, _>>()?;
    let worst = checked.iter().copied().fold(0.0, f64::max);
    Ok(format!("50000 fibers, one critical point each, reprojection drift {worst:.1e}"))
}

// 4. ground state

fn cubic() -> Result<ProblemParams, String> {
    ProblemParams::new(1.0, 1.0, 3.0).map_err(err)
}

fn ground_state() -> Outcome {
    let pp = cubic()?;
    let v = PotentialSpec::Constant(1.0);
    let grid = auto_grid_for(&pp, 1.0).map_err(err)?;
    let rep = solve_limit_ground_state(&pp, 1.0, &grid, &SolverOptions::default()).map_err(err)?;
    ensure(rep.converged, || "solver did not converge".into())?;
    let r = rep.residuals;
    ensure(r.pde_residual <= 1e-4, || format!("PDE residual {:e}", r.pde_residual))?;
    ensure(r.pohozaev_residual <= 1e-4, || format!("Pohozaev residual {:e}", r.pohozaev_residual))?;
    ensure(r.g_residual <= 1e-6, || format!("G residual {:e}", r.g_residual))?;
    let exact = limit_level(1.0, 1.0, 3.0, 1.0, 1.0);
    let dev = rel(rep.energy, exact);
    ensure(dev <= 1e-3, || format!("energy {} vs oracle {exact}: {dev:e}", rep.energy))?;
    let vals = rep.profile.values();
    ensure(vals[..vals.len() - 1].iter().all(|&x| x > 0.0), || "profile is not strictly positive".into())?;
    let p = pp.p();
    let c = embedding_constant(&grid, &v, pp.a(), p + 1.0).map_err(err)?.value;
    let bound = (3.0 * c * (p + 1.0) / (2.0 * (p + 4.0))).powf(1.0 / (p - 1.0));
    let norm = rep.profile.lq(p + 1.0).map_err(err)?.powf(1.0 / (p + 1.0));
    ensure(norm >= bound, || format!("|u|_4 = {norm} below the bound {bound}"))?;
    Ok(format!(
        "E = {:.6} (oracle {exact:.6}, {dev:.1e}), pde {:.1e}, P {:.1e}, G {:.1e}, |u|_4 = {norm:.3} >= {bound:.3}",
        rep.energy, r.pde_residual, r.pohozaev_residual, r.g_residual
    ))
}

// 5. level equivalence

fn level_equivalence() -> Outcome {
    let cases: [(f64, f64, f64); 3] = [(1.0, 1.0, 3.0), (1.0, 1.0, 2.5), (2.0, 0.5, 4.0)];
    let lines: Vec<String> = cases
        .par_iter()
        .map(|&(a, b, p)| -> Outcome {
            let pp = ProblemParams::new(a, b, p).map_err(err)?;
            let grid = auto_grid_for(&pp, 1.0).map_err(err)?;
            let rep = solve_limit_ground_state(&pp, 1.0, &grid, &SolverOptions::default()).map_err(err)?;
            let probes = gaussian_probes(&grid, &default_probe_widths(&pp, 1.0, 32).map_err(err)?).map_err(err)?;
            let span = span_level(&pp, 1.0, &probes, 2000).map_err(err)?;
            let dev = rel(span.value, rep.energy);
            ensure(dev <= 0.02, || format!("({a},{b},{p}): span level {} vs energy {}: {dev:e}", span.value, rep.energy))?;
            ensure(span.best_single >= rep.energy, || format!("({a},{b},{p}): a single probe lies below the ground state"))?;
            Ok(format!("({a},{b},{p}) {dev:.1e}"))
        })
        .collect::<Result<_, _>>()?;
    Ok(lines.join(", "))
}

// 6. sweep

fn sweep() -> Outcome {
    let template = ProblemParams::with_all(1.0, 1.0, 3.0, 1.0, 0.5).map_err(err)?;
    let v = PotentialSpec::shifted_coulomb(2.0, 1e5, 65536).map_err(err)?;
    let lambdas = [0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
    let opts = SolverOptions::default();
    let rows: Vec<_> = lambdas.par_iter().map(|&l| sweep_row(&template, l, &v, &GridChoice::Auto, &opts)).collect();
    let mut prev: Option<f64> = None;
    let mut min_gap = f64::INFINITY;
    for row in &rows {
        ensure(row.c_converged && row.m_converged, || format!("lambda = {}: {:?}", row.lambda, row.flag))?;
        let (c, gap) = (row.c_lambda.ok_or("missing c")?, row.gap.ok_or("missing gap")?);
        ensure(gap > 0.0, || format!("lambda = {}: gap {gap}", row.lambda))?;
        if let Some(p) = prev {
            ensure(c <= p + 1e-4 * p.abs(), || format!("lambda = {}: c rose from {p} to {c}", row.lambda))?;
        }
        prev = Some(c);
        min_gap = min_gap.min(gap);
    }
    Ok(format!("6 levels non-increasing, smallest gap {min_gap:.4e}"))
}

// 7. nonexistence

fn nonexistence() -> Outcome {
    let params = ScanParams { a: 2.0, b: 1.0, p: 2.0 };
    let grid = make_grid(DEFAULT_R_MAX, DEFAULT_N).map_err(err)?;
    let v = PotentialSpec::Constant(1.0);
    let th = threshold(&params, &grid, &v).map_err(err)?;
    let mut parts = vec![format!("C = {:.4}, lambda0 = {:.4e}", th.sobolev_constant, th.lambda0)];
    for factor in [1.0, 2.0] {
        let out = scan_level(&params, factor * th.lambda0, &grid, &v, 1000, 0).map_err(err)?;
        let lv = out.level;
        ensure(lv.violations == 0, || format!("{} violations at {factor} x lambda0 (first sample {:?})", lv.violations, lv.first_violation))?;
        parts.push(format!("{factor}x: 0/1000, margin {:.3}", lv.min_relative_margin));
    }
    Ok(parts.join(", "))
}

// 8. refinement

fn refinement() -> Outcome {
    let pp = cubic()?;
    let (r_max, n) = auto_grid(&pp, 1.0).map_err(err)?;
    let opts = SolverOptions::default();
    let energy = |r: f64, n: usize| -> Result<f64, String> {
        let g = make_grid(r, n).map_err(err)?;
        Ok(solve_limit_ground_state(&pp, 1.0, &g, &opts).map_err(err)?.energy)
    };
    let base = energy(r_max, n)?;
    let finer = rel(energy(r_max, 2 * n)?, base);
    let wider = rel(energy(2.0 * r_max, 2 * n)?, base);
    ensure(finer <= 1e-3, || format!("doubling n moved the energy by {finer:e}"))?;
    ensure(wider <= 1e-3, || format!("doubling r_max moved the energy by {wider:e}"))?;
    Ok(format!("n x2: {finer:.1e}, r_max x2: {wider:.1e}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, Option<Duration>, fn() -> Outcome); 8] = [
        ("1 exact algebra", Some(Duration::from_secs(5)), exact_algebra),
        ("2 identities", Some(Duration::from_secs(30)), identities),
        ("3 fiber uniqueness", Some(Duration::from_secs(10)), fibers),
        ("4 ground state", Some(Duration::from_secs(120)), ground_state),
        ("5 level equivalence", Some(Duration::from_secs(300)), level_equivalence),
        ("6 lambda sweep", Some(Duration::from_secs(600)), sweep),
        ("7 nonexistence", Some(Duration::from_secs(60)), nonexistence),
        ("8 refinement", None, refinement),
    ];
    let mut failed = 0;
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(l)) if elapsed > l => Err(format!("took {elapsed:.2?}, limit {l:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS  {name:<20} {elapsed:>9.2?}  {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name:<20} {elapsed:>9.2?}  {why}");
            }
        }
    }
    println!("{} of 8 criteria passed", 8 - failed);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
