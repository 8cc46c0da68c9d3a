use std::f64::consts::PI;
use std::sync::OnceLock;

use fhs_core::{
    default_grid, frac_inverse, hs_inner, integrate_radial, inverse_radial_fourier, radial_fourier, random_bump,
    solve_bubble, Bubble, Params, RadialFn, RadialGrid,
};
use quadrature::double_exponential;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn planar() -> &'static Bubble {
    static B: OnceLock<Bubble> = OnceLock::new();
    B.get_or_init(|| solve_bubble(&Params::new(2, 0.75, 0.5).unwrap(), &default_grid(), 1e-10).unwrap())
}

fn mid_third(g: &RadialGrid) -> std::ops::Range<usize> {
    g.len() / 6..g.len() - g.len() / 6
}

/// `∫_0^∞ e^{-r} r sin(ρ r) dr` by panels of a half period.
fn sine_form(rho: f64) -> f64 {
    let width = (PI / rho).min(1.0);
    let mut total = 0.0;
    let mut a = 0.0;
    while a < 60.0 {
        let b = a + width;
        total += double_exponential::integrate(|r| (-r).exp() * r * (rho * r).sin(), a, b, 1e-16).integral;
        a = b;
    }
    total
}

#[test]
fn exponential_in_three_dimensions_against_sine_quadrature() {
    let g = default_grid();
    let p = Params::new(3, 0.9, 0.4).unwrap();
    let f = radial_fourier(&RadialFn::from_fn(&g, |r| (-r).exp()), &p).unwrap();
    let mut ratios = Vec::new();
    for rho in [1e-2, 0.1, 0.5, 1.0, 3.0, 10.0, 30.0, 100.0] {
        let j = f.grid.nearest(rho);
        let rho = f.grid.nodes()[j];
        let oracle = (2.0 / PI).sqrt() * sine_form(rho) / rho;
        assert!(
            (f.values[j] / oracle - 1.0).abs() < 1e-5,
            "ρ = {rho}: {} {oracle}",
            f.values[j]
        );
        ratios.push(f.values[j] * (1.0 + rho * rho).powi(2));
    }
    for r in &ratios {
        assert!((r / ratios[0] - 1.0).abs() < 1e-5, "{ratios:?}");
    }
}

#[test]
fn bubble_round_trip() {
    let v = planar();
    let p = v.params();
    let back = inverse_radial_fourier(&radial_fourier(v.profile(), p).unwrap(), p).unwrap();
    for j in mid_third(v.grid()) {
        let (a, b) = (back.values()[j], v.profile().values()[j]);
        assert!((a / b - 1.0).abs() < 1e-7, "r = {}: {a} {b}", v.grid().nodes()[j]);
    }
}

#[test]
fn riesz_potential_of_nonlinearity_returns_bubble() {
    let v = planar();
    let p = v.params();
    let rhs = v.profile().map_r(|r, x| x.powf(p.p()) * r.powf(-p.t()));
    let back = frac_inverse(&rhs, 2.0 * p.s(), p).unwrap();
    for j in mid_third(v.grid()) {
        let (a, b) = (back.values()[j], v.profile().values()[j]);
        assert!((a / b - 1.0).abs() < 1e-5, "r = {}: {a} {b}", v.grid().nodes()[j]);
    }
}

/// Cubic Lagrange interpolation of `log V` in `log r`.
fn log_interp(v: &RadialFn, r: f64) -> f64 {
    let g = v.grid();
    let x = (r / g.r_min()).ln() / g.log_step();
    let j = (x.floor() as usize).clamp(1, g.len() - 3);
    let t = x - j as f64;
    let y: Vec<f64> = (j - 1..j + 3).map(|i| v.values()[i].ln()).collect();
    let w = [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ];
    w.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>().exp()
}

#[test]
fn nonlinearity_integral_against_adaptive_quadrature() {
    let v = planar();
    let p = v.params();
    let grid_value = integrate_radial(&v.profile().abs_pow(p.p()), -p.t(), p).unwrap();
    let fine_grid = v.grid().refined().refined();
    let fine = solve_bubble(p, &fine_grid, 1e-10).unwrap();
    let prof = fine.profile();
    let integrand = |u: f64| {
        let r = u.exp();
        log_interp(prof, r).powf(p.p()) * r.powf(p.n() - p.t())
    };
    // Decade panels in log r over the grid interior.
    let mut total = 0.0;
    let step = 10f64.ln();
    let (lo, hi) = (
        (fine_grid.r_min().ln() / step).ceil() + 1.0,
        (fine_grid.r_max().ln() / step).floor() - 1.0,
    );
    let mut d = lo;
    while d < hi {
        total += double_exponential::integrate(integrand, d * step, (d + 1.0) * step, 1e-15).integral;
        d += 1.0;
    }
    let oracle = 2.0 * PI * total;
    assert!((grid_value / oracle - 1.0).abs() < 1e-6, "{grid_value} {oracle}");
}

#[test]
fn cauchy_schwarz_and_positivity() {
    let g = default_grid();
    let p = Params::new(2, 0.75, 0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let u = random_bump(&g, &mut rng);
        let w = random_bump(&g, &mut rng);
        let uu = hs_inner(&u, &u, &p).unwrap();
        let ww = hs_inner(&w, &w, &p).unwrap();
        let uw = hs_inner(&u, &w, &p).unwrap();
        assert!(uu >= 0.0 && ww >= 0.0);
        assert!(uw.abs() <= (uu * ww).sqrt() * (1.0 + 1e-12));
    }
}
