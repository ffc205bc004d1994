mod common;

use common::{bumps, default_grid, positive_bumps, profile, rel};
use kirchhoff_core::fiber::fiber_poly;
use kirchhoff_core::functional::{breakdown, gradient_i};
use kirchhoff_core::{PotentialSpec, ProblemParams};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = ProblemParams> {
    (0.2..3.0, 0.05..2.0, 2.05..4.95, 0.5..1.0).prop_map(|(a, b, p, l)| ProblemParams::new(a, b, p).unwrap().with_lambda(l).unwrap())
}

fn potentials() -> impl Strategy<Value = PotentialSpec> {
    prop_oneof![
        (0.2..3.0).prop_map(PotentialSpec::Constant),
        (1.5..3.0).prop_map(|v1| PotentialSpec::shifted_coulomb(v1, 100.0, 4096).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quad_is_linear(f in bumps(), g in bumps(), alpha in -3.0..3.0f64, beta in -3.0..3.0f64) {
        let grid = default_grid();
        let (u, v) = (profile(&grid, &f), profile(&grid, &g));
        let combo: Vec<f64> = u.values().iter().zip(v.values()).map(|(x, y)| alpha * x + beta * y).collect();
        let lhs = grid.quad(&combo).unwrap();
        let rhs = alpha * grid.quad(u.values()).unwrap() + beta * grid.quad(v.values()).unwrap();
        let scale = alpha.abs() * grid.quad(&u.values().iter().map(|x| x.abs()).collect::<Vec<_>>()).unwrap()
            + beta.abs() * grid.quad(&v.values().iter().map(|x| x.abs()).collect::<Vec<_>>()).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-13 * (1.0 + scale));
    }

    #[test]
    fn identity_chain(f in bumps(), pp in params(), v in potentials()) {
        let grid = default_grid();
        let u = profile(&grid, &f);
        let bd = breakdown(&u, &pp, &v).unwrap();
        let g = gradient_i(&u, &pp, &v).unwrap();
        let pairing = grid.quad(&g.iter().zip(u.values()).map(|(a, b)| a * b).collect::<Vec<_>>()).unwrap();
        let big_g = bd.constraint_g(&pp);
        prop_assert!((big_g - (pairing + bd.pohozaev_p(&pp))).abs() <= 1e-8 * (1.0 + big_g.abs()),
            "G = {big_g}, pairing = {pairing}, P = {}", bd.pohozaev_p(&pp));
        prop_assert!((pairing - bd.nehari(&pp)).abs() <= 1e-8 * (1.0 + bd.nehari(&pp).abs()));
    }

    #[test]
    fn decomposition(f in bumps(), pp in params(), v in potentials()) {
        let u = profile(&default_grid(), &f);
        let bd = breakdown(&u, &pp, &v).unwrap();
        let terms = bd.grad_q + bd.mass_q + bd.dv_q.abs() + bd.kirch_q + bd.pow_q;
        prop_assert!((bd.energy(&pp) - bd.phi(&pp) - bd.constraint_g(&pp) / 6.0).abs() <= 1e-14 * terms);
    }

    #[test]
    fn scaling_laws(f in bumps(), pp in params(), v_inf in 0.2..3.0f64, t in prop_oneof![0.25..1.0f64, 1.0..4.0f64]) {
        let grid = default_grid();
        let v = PotentialSpec::Constant(v_inf);
        let u = profile(&grid, &f);
        let bd = breakdown(&u, &pp, &v).unwrap();
        let bt = breakdown(&u.rescale(t).unwrap(), &pp, &v).unwrap();
        let p = pp.p();
        prop_assert!(rel(bt.grad_q, bd.grad_q * t.powi(3)) <= 1e-3, "t^3 law at t = {t}");
        prop_assert!(rel(bt.mass_q, bd.mass_q * t.powi(5)) <= 1e-3, "t^5 law at t = {t}");
        prop_assert!(rel(bt.kirch_q, bd.kirch_q * t.powi(6)) <= 1e-3, "t^6 law at t = {t}");
        prop_assert!(rel(bt.pow_q, bd.pow_q * t.powf(p + 4.0)) <= 1e-3, "t^(p+4) law at t = {t}");
        let fp = fiber_poly(&bd, &pp).unwrap();
        let scale = fp.c1 * t.powi(3) + fp.c2 * t.powi(5) + fp.c3 * t.powi(6) + fp.c4 * t.powf(p + 4.0);
        prop_assert!((bt.energy(&pp) - fp.value(t)).abs() <= 1e-3 * scale);
    }

    #[test]
    fn energy_is_non_increasing_in_lambda(f in bumps(), pp in params(), l1 in 0.5..1.0f64, l2 in 0.5..1.0f64) {
        let u = profile(&default_grid(), &f);
        let v = PotentialSpec::Constant(1.0);
        let (lo, hi) = (l1.min(l2), l1.max(l2));
        let e_lo = breakdown(&u, &pp.with_lambda(lo).unwrap(), &v).unwrap().energy(&pp.with_lambda(lo).unwrap());
        let e_hi = breakdown(&u, &pp.with_lambda(hi).unwrap(), &v).unwrap().energy(&pp.with_lambda(hi).unwrap());
        prop_assert!(e_hi <= e_lo);
    }

    #[test]
    fn sign_symmetry(f in positive_bumps(), pp in params()) {
        let u = profile(&default_grid(), &f);
        let v = PotentialSpec::Constant(1.0);
        let a = breakdown(&u, &pp, &v).unwrap();
        let b = breakdown(&u.scaled(-1.0), &pp, &v).unwrap();
        prop_assert_eq!(a, b);
    }
}
