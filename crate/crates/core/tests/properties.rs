use fhs_core::{
    dilate, frac_power, integrate_radial, make_log_grid, qij, weighted_lp_norm, Params, RadialFn, RadialGrid,
};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

fn grid() -> RadialGrid {
    make_log_grid(1e-16, 1e16, 4097).unwrap()
}

fn bump(g: &RadialGrid, c: f64, w: f64) -> RadialFn {
    RadialFn::from_fn(g, |r| (-(r.ln() - c).powi(2) / (2.0 * w * w)).exp())
}

fn planar() -> Params {
    Params::new(2, 0.75, 0.5).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, rng_seed: RngSeed::Fixed(20261018), ..ProptestConfig::default() })]

    #[test]
    fn qij_symmetric_scale_free_and_bounded(a in -8.0f64..8.0, b in -8.0f64..8.0, c in -8.0f64..8.0) {
        let (x, y, k) = (10f64.powf(a), 10f64.powf(b), 10f64.powf(c));
        let q = qij(x, y).unwrap();
        prop_assert_eq!(q, qij(y, x).unwrap());
        prop_assert!(q > 0.0 && q <= 1.0);
        prop_assert!((qij(k * x, k * y).unwrap() / q - 1.0).abs() < 1e-12);
    }

    #[test]
    fn integration_is_linear(c1 in -3.0f64..3.0, c2 in -3.0f64..3.0, w in 0.3f64..2.0, a in -5.0f64..5.0) {
        let g = grid();
        let p = planar();
        let (f, h) = (bump(&g, c1, w), bump(&g, c2, 1.0));
        let sum = integrate_radial(&f.axpy(a, &h).unwrap(), -p.t(), &p).unwrap();
        let parts = integrate_radial(&f, -p.t(), &p).unwrap() + a * integrate_radial(&h, -p.t(), &p).unwrap();
        prop_assert!((sum - parts).abs() <= 1e-13 * (sum.abs() + parts.abs()));
    }

    #[test]
    fn node_shift_dilation_preserves_norms_and_composes(k1 in -200i32..200, k2 in -200i32..200, c in -2.0f64..2.0) {
        let g = grid();
        let p = planar();
        let f = bump(&g, c, 0.7);
        let ratio = g.node_ratio();
        let (l1, l2) = (ratio.powi(k1), ratio.powi(k2));
        let once = dilate(&f, l1, &p).unwrap();
        let a = weighted_lp_norm(&f, p.crit(), -p.t(), &p).unwrap();
        let b = weighted_lp_norm(&once, p.crit(), -p.t(), &p).unwrap();
        prop_assert!((a / b - 1.0).abs() < 1e-12);
        let twice = dilate(&once, l2, &p).unwrap();
        let direct = dilate(&f, l1 * l2, &p).unwrap();
        let scale = direct.values().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (x, y) in twice.values().iter().zip(direct.values()) {
            prop_assert!((x - y).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn frac_power_is_linear(c1 in -2.0f64..2.0, c2 in -2.0f64..2.0, a in -3.0f64..3.0, beta in 0.2f64..2.0) {
        let g = grid();
        let p = planar();
        let (f, h) = (bump(&g, c1, 0.8), bump(&g, c2, 1.2));
        let lhs = frac_power(&f.axpy(a, &h).unwrap(), beta, &p).unwrap();
        let rhs = frac_power(&f, beta, &p).unwrap().axpy(a, &frac_power(&h, beta, &p).unwrap()).unwrap();
        let diff = lhs.sub(&rhs).unwrap();
        let gap = weighted_lp_norm(&diff, 2.0, 0.0, &p).unwrap();
        let size = weighted_lp_norm(&rhs, 2.0, 0.0, &p).unwrap();
        prop_assert!(gap <= 1e-8 * size, "{} {}", gap, size);
        let band = |u: &RadialFn| u.map_r(|r, x| if (1e-2..=1e2).contains(&r) { x } else { 0.0 });
        let gap = weighted_lp_norm(&band(&diff), 2.0, 0.0, &p).unwrap();
        let size = weighted_lp_norm(&band(&rhs), 2.0, 0.0, &p).unwrap();
        prop_assert!(gap <= 1e-11 * size, "{} {}", gap, size);
    }
}
