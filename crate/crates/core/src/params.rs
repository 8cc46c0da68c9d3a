//! Problem parameters `(N, s, t)` and the exponents derived from them.

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    dim: u32,
    s: f64,
    t: f64,
}

impl Params {
    /// Validated constructor: `s ∈ (0, 1)`, `t ∈ (0, 2s)`, `N > 2s`.
    pub fn new(dim: u32, s: f64, t: f64) -> Result<Self> {
        let p = Self::unchecked_t(dim, s, t)?;
        if !(t > 0.0 && t < 2.0 * s) {
            return Err(invalid(format!("t = {t} violates t ∈ (0, 2s) with 2s = {}", 2.0 * s)));
        }
        Ok(p)
    }

    /// Sobolev case `t = 0`, used to validate the solver against the closed-form extremal.
    pub fn sobolev(dim: u32, s: f64) -> Result<Self> {
        Self::unchecked_t(dim, s, 0.0)
    }

    fn unchecked_t(dim: u32, s: f64, t: f64) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("N must be a positive integer"));
        }
        if !(s > 0.0 && s < 1.0) {
            return Err(invalid(format!("s = {s} violates s ∈ (0, 1)")));
        }
        if !t.is_finite() {
            return Err(invalid("t must be finite"));
        }
        if f64::from(dim) <= 2.0 * s {
            return Err(invalid(format!("N = {dim} violates N > 2s")));
        }
        Ok(Self { dim, s, t })
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn n(&self) -> f64 {
        f64::from(self.dim)
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Critical exponent `2(N - t)/(N - 2s)`.
    pub fn crit(&self) -> f64 {
        2.0 * (self.n() - self.t) / (self.n() - 2.0 * self.s)
    }

    /// Nonlinearity power `crit - 1`.
    pub fn p(&self) -> f64 {
        self.crit() - 1.0
    }

    /// Conjugate exponent with `2/q = 1 - 2/crit`.
    pub fn q(&self) -> f64 {
        let c = self.crit();
        2.0 * c / (c - 2.0)
    }

    pub fn low_dim(&self) -> bool {
        self.n() < 6.0 * self.s - 2.0 * self.t
    }

    /// Dilation weight `(N - 2s)/2`.
    pub fn scaling_exponent(&self) -> f64 {
        0.5 * (self.n() - 2.0 * self.s)
    }

    /// Exponent in `‖V‖² = μ^{(N-t)/(2s-t)}`.
    pub fn energy_exponent(&self) -> f64 {
        (self.n() - self.t) / (2.0 * self.s - self.t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_exponents() {
        let p = Params::new(2, 0.75, 0.5).unwrap();
        assert!((p.crit() - 6.0).abs() < 1e-14);
        assert!((p.p() - 5.0).abs() < 1e-14);
        assert!((p.q() - 3.0).abs() < 1e-14);
        assert!((2.0 / p.q() - (1.0 - 2.0 / p.crit())).abs() < 1e-15);
        assert!(p.low_dim());
        let p3 = Params::new(3, 0.9, 0.4).unwrap();
        assert!(p3.low_dim() && p3.p() > 2.0);
        assert!(p3.crit() > 2.0 && p3.crit() < 2.0 * 3.0 / (3.0 - 1.8));
    }

    #[test]
    fn rejects_out_of_range() {
        let e = Params::new(2, 0.75, 1.5).unwrap_err();
        assert!(e.to_string().contains("t ∈ (0, 2s)"));
        assert!(Params::new(2, 0.75, 0.0).is_err());
        assert!(Params::new(1, 0.75, 0.5).is_err());
        assert!(Params::new(2, 1.0, 0.5).is_err());
        assert!(Params::sobolev(2, 0.75).is_ok());
    }
}
