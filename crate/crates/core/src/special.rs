//! Log-gamma on the complex plane and related constants.

use num_complex::Complex64;
use std::f64::consts::PI;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

// B_{2k} / (2k (2k - 1))
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// A branch of `ln Γ(z)`. Only `exp` of sums of these values is meaningful.
/// At the poles the real part is `+∞`.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    let mut w = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while w.re < 15.0 {
        shift += w.ln();
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut pow = inv;
    let mut series = Complex64::new(0.0, 0.0);
    for c in STIRLING {
        series += pow * c;
        pow *= inv2;
    }
    (w - 0.5) * w.ln() - w + LN_SQRT_2PI + series - shift
}

pub fn gamma(x: f64) -> f64 {
    ln_gamma(Complex64::new(x, 0.0)).exp().re
}

/// Surface measure of the unit sphere in `ℝᴺ`.
pub fn sphere_area(dim: u32) -> f64 {
    let n = f64::from(dim);
    2.0 * PI.powf(0.5 * n) / gamma(0.5 * n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_values() {
        assert!((gamma(5.0) - 24.0).abs() < 1e-12);
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(-0.5) + 2.0 * PI.sqrt()).abs() < 1e-13);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-13);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn reflection_on_imaginary_lines() {
        // |Γ(1/2 + iy)|² = π / cosh(πy)
        for y in [0.3, 2.0, 17.0, 80.0] {
            let g = ln_gamma(Complex64::new(0.5, y));
            let expect = PI.ln() - (PI * y).cosh().ln();
            assert!((2.0 * g.re - expect).abs() < 1e-12 * expect.abs().max(1.0), "y = {y}");
        }
    }

    #[test]
    fn recurrence() {
        let z = Complex64::new(-0.3, 4.2);
        let lhs = (ln_gamma(z + 1.0) - ln_gamma(z)).exp();
        assert!((lhs - z).norm() < 1e-13);
    }

    #[test]
    fn pole_gives_zero_reciprocal() {
        let g = ln_gamma(Complex64::new(0.0, 0.0));
        assert!((-g).exp().norm() == 0.0);
    }
}
