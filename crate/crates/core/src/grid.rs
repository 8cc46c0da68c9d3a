//! Geometric radial grids, sampled radial functions, and log-radius quadrature.

use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::params::Params;
use crate::special::sphere_area;

// End corrections of the Gregory rule, applied to k-th differences.
const GREGORY: [f64; 6] = [
    1.0 / 12.0,
    1.0 / 24.0,
    19.0 / 720.0,
    3.0 / 160.0,
    863.0 / 60480.0,
    275.0 / 24192.0,
];

/// Tail contributions above this fraction of the total are flagged.
pub const TAIL_WARNING: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct RadialGrid {
    r_min: f64,
    r_max: f64,
    log_step: f64,
    nodes: Arc<[f64]>,
    weights: Arc<[f64]>,
}

impl PartialEq for RadialGrid {
    fn eq(&self, other: &Self) -> bool {
        self.r_min == other.r_min && self.r_max == other.r_max && self.len() == other.len()
    }
}

/// Nodes `r_j = r_min (r_max/r_min)^{j/(n-1)}`.
/// Default grid: `[1e-48, 1e48]` at 128 nodes per decade.
pub fn default_grid() -> RadialGrid {
    make_log_grid(DEFAULT_R_MIN, DEFAULT_R_MAX, DEFAULT_NODES).expect("valid default grid")
}

pub const DEFAULT_R_MIN: f64 = 1e-48;
pub const DEFAULT_R_MAX: f64 = 1e48;
pub const DEFAULT_NODES: usize = 12289;

pub fn make_log_grid(r_min: f64, r_max: f64, n: usize) -> Result<RadialGrid> {
    if n < 8 {
        return Err(invalid(format!("grid needs n ≥ 8, got {n}")));
    }
    RadialGrid::build(r_min, r_max, n)
}

impl RadialGrid {
    pub(crate) fn build(r_min: f64, r_max: f64, n: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_min.is_finite()) {
            return Err(invalid(format!("r_min = {r_min} must be positive")));
        }
        if !(r_max > r_min && r_max.is_finite()) {
            return Err(invalid(format!("need r_min < r_max, got {r_min} ≥ {r_max}")));
        }
        if n < 2 {
            return Err(invalid("grid needs at least two nodes"));
        }
        let lo = r_min.ln();
        let log_step = (r_max.ln() - lo) / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|j| (lo + j as f64 * log_step).exp()).collect();
        nodes[0] = r_min;
        nodes[n - 1] = r_max;
        Ok(Self {
            r_min,
            r_max,
            log_step,
            nodes: nodes.into(),
            weights: gregory_weights(n).into(),
        })
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Spacing `h` in `log r`.
    pub fn log_step(&self) -> f64 {
        self.log_step
    }

    pub fn node_ratio(&self) -> f64 {
        self.log_step.exp()
    }

    pub fn log_node(&self, j: usize) -> f64 {
        self.r_min.ln() + j as f64 * self.log_step
    }

    /// Quadrature weights in units of `h` for `∫ g d(log r)`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Index of the node closest to `r` in log distance.
    pub fn nearest(&self, r: f64) -> usize {
        let x = (r.ln() - self.r_min.ln()) / self.log_step;
        x.round().clamp(0.0, (self.len() - 1) as f64) as usize
    }

    /// `λ` expressed in node steps; integral when `λ` is a power of the node ratio.
    pub fn steps_of(&self, lambda: f64) -> f64 {
        lambda.ln() / self.log_step
    }

    /// Grid with nodes `1/r` in ascending order.
    pub fn reciprocal(&self) -> RadialGrid {
        let mut g =
            Self::build(1.0 / self.r_max, 1.0 / self.r_min, self.len()).expect("reciprocal of a valid grid is valid");
        let nodes: Vec<f64> = self.nodes.iter().rev().map(|r| 1.0 / r).collect();
        g.nodes = nodes.into();
        g
    }

    /// Same range with `2n - 1` nodes, so every original node is kept.
    pub fn refined(&self) -> RadialGrid {
        Self::build(self.r_min, self.r_max, 2 * self.len() - 1).expect("refinement of a valid grid")
    }
}

fn gregory_weights(n: usize) -> Vec<f64> {
    let mut w = vec![1.0; n];
    w[0] = 0.5;
    w[n - 1] = 0.5;
    let order = GREGORY.len().min((n / 2).saturating_sub(1));
    for (k, c) in GREGORY.iter().enumerate().take(order) {
        let k = k + 1;
        let mut binom = 1.0;
        for i in 0..=k {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            w[i] -= c * sign * binom;
            w[n - 1 - i] -= c * sign * binom;
            binom = binom * (k - i) as f64 / (i + 1) as f64;
        }
    }
    w
}

/// Samples of a radial function at the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFn {
    grid: RadialGrid,
    values: Vec<f64>,
}

impl RadialFn {
    pub fn new(grid: &RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!("non-finite sample at node {j}")));
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub(crate) fn from_parts(grid: &RadialGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn from_fn(grid: &RadialGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn zeros(grid: &RadialGrid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    fn check_grid(&self, other: &RadialFn) -> Result<()> {
        if self.grid != other.grid {
            return Err(invalid("radial functions live on different grids"));
        }
        Ok(())
    }

    fn zip(&self, other: &RadialFn, op: impl Fn(f64, f64) -> f64) -> Result<RadialFn> {
        self.check_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| op(a, b)).collect();
        Ok(RadialFn {
            grid: self.grid.clone(),
            values,
        })
    }

    pub fn add(&self, other: &RadialFn) -> Result<RadialFn> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &RadialFn) -> Result<RadialFn> {
        self.zip(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &RadialFn) -> Result<RadialFn> {
        self.zip(other, |a, b| a * b)
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &RadialFn) -> Result<RadialFn> {
        self.zip(other, |a, b| a + c * b)
    }

    pub fn scale(&self, c: f64) -> RadialFn {
        self.map(|v| c * v)
    }

    /// Odd power `|f|^{e-1} f`.
    pub fn signed_pow(&self, e: f64) -> RadialFn {
        self.map(|v| v.abs().powf(e - 1.0) * v)
    }

    pub fn abs_pow(&self, e: f64) -> RadialFn {
        self.map(|v| v.abs().powf(e))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> RadialFn {
        RadialFn {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise `f(r, value)`.
    pub fn map_r(&self, f: impl Fn(f64, f64) -> f64) -> RadialFn {
        let values = self
            .grid
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(&r, &v)| f(r, v))
            .collect();
        RadialFn {
            grid: self.grid.clone(),
            values,
        }
    }

    /// Samples of `r^c f(r)`.
    pub fn biased(&self, c: f64) -> Vec<f64> {
        self.grid
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(&r, &v)| r.powf(c) * v)
            .collect()
    }
}

fn weight_exponent(a: f64, params: &Params) -> Result<f64> {
    let e = params.n() + a;
    if !(e > 0.0) {
        return Err(Error::NonIntegrableWeight(e));
    }
    Ok(e)
}

fn check_samples(f: &RadialFn) -> Result<()> {
    match f.values.iter().position(|v| v.is_nan()) {
        Some(j) => Err(Error::InvalidData(format!("NaN at node {j}"))),
        None => Ok(()),
    }
}

/// `ω_{N-1} h Σ w_j g_j` for an integrand already expressed per unit `log r`.
pub(crate) fn log_quadrature(grid: &RadialGrid, dim: u32, g: &[f64]) -> f64 {
    let sum: f64 = grid.weights().iter().zip(g).map(|(w, v)| w * v).sum();
    sphere_area(dim) * grid.log_step() * sum
}

/// `ω_{N-1} ∫ f(r) r^{N-1+a} dr`, computed as `∫ f r^{N+a} d(log r)`.
pub fn integrate_radial(f: &RadialFn, a: f64, params: &Params) -> Result<f64> {
    let e = weight_exponent(a, params)?;
    check_samples(f)?;
    Ok(log_quadrature(&f.grid, params.dim(), &f.biased(e)))
}

/// Integral over the ball `|x| ≤ radius`.
pub fn integrate_radial_ball(f: &RadialFn, a: f64, radius: f64, params: &Params) -> Result<f64> {
    let e = weight_exponent(a, params)?;
    check_samples(f)?;
    let g = f.biased(e);
    Ok(partial_log_integral(&f.grid, params.dim(), &g, radius))
}

pub(crate) fn partial_log_integral(grid: &RadialGrid, dim: u32, g: &[f64], radius: f64) -> f64 {
    if radius <= grid.r_min() {
        return 0.0;
    }
    if radius >= grid.r_max() {
        return log_quadrature(grid, dim, g);
    }
    let x = (radius.ln() - grid.r_min().ln()) / grid.log_step();
    let k = x.floor() as usize;
    let frac = x - k as f64;
    let head = if k >= 7 {
        let sub = RadialGrid::build(grid.r_min(), grid.nodes()[k], k + 1).expect("sub-grid");
        log_quadrature(&sub, dim, &g[..=k])
    } else {
        let h = grid.log_step();
        sphere_area(dim) * h * (0..k).map(|j| 0.5 * (g[j] + g[j + 1])).sum::<f64>()
    };
    if frac < 1e-9 || k + 2 >= grid.len() || k == 0 {
        let gk = g[k];
        let gx = gk + frac * (g[(k + 1).min(grid.len() - 1)] - gk);
        return head + sphere_area(dim) * grid.log_step() * frac * 0.5 * (gk + gx);
    }
    head + sphere_area(dim) * grid.log_step() * cubic_cell(&g[k - 1..k + 3], frac)
}

/// `∫_0^x P(y) dy` for the cubic `P` through samples at `y = -1, 0, 1, 2`.
fn cubic_cell(v: &[f64], x: f64) -> f64 {
    const GL: [(f64, f64); 4] = [
        (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
        (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
        (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
        (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    ];
    let nodes = [-1.0, 0.0, 1.0, 2.0];
    let p = |y: f64| -> f64 {
        (0..4)
            .map(|m| {
                let mut l = v[m];
                for k in 0..4 {
                    if k != m {
                        l *= (y - nodes[k]) / (nodes[m] - nodes[k]);
                    }
                }
                l
            })
            .sum()
    };
    GL.iter().map(|(t, w)| w * p(0.5 * x * (t + 1.0))).sum::<f64>() * 0.5 * x
}

/// Integral together with the share carried by the outermost decade at either end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralReport {
    pub value: f64,
    pub tail_fraction: f64,
}

impl IntegralReport {
    pub fn tail_warning(&self) -> bool {
        self.tail_fraction > TAIL_WARNING
    }
}

pub fn integrate_radial_report(f: &RadialFn, a: f64, params: &Params) -> Result<IntegralReport> {
    let e = weight_exponent(a, params)?;
    check_samples(f)?;
    let g = f.biased(e);
    let grid = &f.grid;
    let value = log_quadrature(grid, params.dim(), &g);
    let decade = ((std::f64::consts::LN_10 / grid.log_step()).round() as usize).clamp(1, grid.len());
    let h = grid.log_step() * sphere_area(params.dim());
    let low: f64 = g[..decade].iter().map(|v| v.abs()).sum::<f64>() * h;
    let high: f64 = g[grid.len() - decade..].iter().map(|v| v.abs()).sum::<f64>() * h;
    let scale = g.iter().map(|v| v.abs()).sum::<f64>() * h;
    let tail_fraction = if scale > 0.0 { low.max(high) / scale } else { 0.0 };
    Ok(IntegralReport { value, tail_fraction })
}

/// `(∫ |f|^{p} |x|^a dx)^{1/p}`.
pub fn weighted_lp_norm(f: &RadialFn, p_exp: f64, a: f64, params: &Params) -> Result<f64> {
    if !(p_exp >= 1.0) {
        return Err(invalid(format!("Lebesgue exponent {p_exp} must be ≥ 1")));
    }
    let v = integrate_radial(&f.abs_pow(p_exp), a, params)?;
    Ok(v.max(0.0).powf(1.0 / p_exp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(dim: u32) -> Params {
        Params::new(dim, 0.75, 0.5).unwrap()
    }

    #[test]
    fn three_node_grid() {
        let g = RadialGrid::build(1e-6, 1e6, 3).unwrap();
        assert!((g.nodes()[1] - 1.0).abs() < 1e-14);
        assert!(make_log_grid(1e-6, 1e6, 3).is_err());
    }

    #[test]
    fn constant_ratio() {
        let g = make_log_grid(1.0, 2.0, 8).unwrap();
        let want = 2f64.powf(1.0 / 7.0);
        for w in g.nodes().windows(2) {
            assert!((w[1] / w[0] - want).abs() < 1e-15);
        }
        assert!(make_log_grid(2.0, 1.0, 64).is_err());
        assert!(make_log_grid(0.0, 1.0, 64).is_err());
    }

    #[test]
    fn analytic_integrals() {
        let g = make_log_grid(1e-12, 1e3, 4096).unwrap();
        let f = RadialFn::from_fn(&g, |r| (-r).exp());
        let v = integrate_radial(&f, 0.0, &params(2)).unwrap();
        assert!((v - 2.0 * PI).abs() < 1e-10 * 2.0 * PI);
        let f = RadialFn::from_fn(&g, |r| (-r * r).exp());
        let v = integrate_radial(&f, 0.0, &params(3)).unwrap();
        assert!((v - PI.powf(1.5)).abs() < 1e-10 * PI.powf(1.5));
    }

    #[test]
    fn truncated_power_exactness() {
        let g = make_log_grid(1e-6, 1e6, 4096).unwrap();
        let p = params(2);
        for (a, b) in [(0.0, 0.5), (-0.5, 1.0), (0.3, 2.1), (-0.5, -0.2)] {
            let f = RadialFn::from_fn(&g, |r| r.powf(-b));
            let k: f64 = p.n() + a - b;
            let exact = 2.0 * PI * (1e6f64.powf(k) - 1e-6f64.powf(k)) / k;
            let v = integrate_radial(&f, a, &p).unwrap();
            assert!(((v - exact) / exact).abs() < 1e-10, "a={a} b={b}");
        }
    }

    #[test]
    fn weight_and_data_errors() {
        let g = make_log_grid(1e-3, 1e3, 64).unwrap();
        let f = RadialFn::from_fn(&g, |r| r);
        assert!(matches!(
            integrate_radial(&f, -2.0, &params(2)),
            Err(Error::NonIntegrableWeight(_))
        ));
        let mut v = f.values().to_vec();
        v[3] = f64::NAN;
        assert!(RadialFn::new(&g, v).is_err());
        let other = make_log_grid(1e-3, 1e3, 65).unwrap();
        assert!(f.add(&RadialFn::zeros(&other)).is_err());
    }

    #[test]
    fn ball_integral() {
        let g = make_log_grid(1e-8, 1e4, 2048).unwrap();
        let p = params(3);
        let f = RadialFn::from_fn(&g, |r| (-r * r).exp());
        // ∫_{|x|<1} e^{-|x|²} dx = π^{3/2} erf(1) - 2π/e
        let erf1 = 0.842_700_792_949_714_9;
        let exact = PI.powf(1.5) * erf1 - 2.0 * PI / std::f64::consts::E;
        let v = integrate_radial_ball(&f, 0.0, 1.0, &p).unwrap();
        assert!(((v - exact) / exact).abs() < 1e-8);
        let v2 = integrate_radial_ball(&f, 0.0, 1.3, &p).unwrap();
        assert!(v2 > v);
    }

    #[test]
    fn norm_basics() {
        let g = make_log_grid(1e-6, 1e6, 512).unwrap();
        let p = params(2);
        assert_eq!(weighted_lp_norm(&RadialFn::zeros(&g), 3.0, -0.5, &p).unwrap(), 0.0);
        let f = RadialFn::from_fn(&g, |r| (-r).exp());
        let n1 = weighted_lp_norm(&f, 3.0, -0.5, &p).unwrap();
        let n2 = weighted_lp_norm(&f.scale(-3.0), 3.0, -0.5, &p).unwrap();
        assert!((n2 - 3.0 * n1).abs() < 1e-13 * n2);
        let rep = integrate_radial_report(&f, 0.0, &p).unwrap();
        assert!(!rep.tail_warning());
    }
}
