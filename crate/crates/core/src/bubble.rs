//! The bubble: positive radial solution of `(-Δ)^s V = V^p |x|^{-t}`, its dilations,
//! scale derivative and optimal constant.
//!
//! Internally profiles are carried as `U = r^b V` with `b = (N-2s)/2`. In this frame the
//! dilation is a translation in `log r`, the nonlinearity is `U ↦ |U|^{p-1}U`, and the
//! weighted `L^{crit}` norm is the plain `L^{crit}` norm in `log r`.

use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::grid::{RadialFn, RadialGrid};
use crate::logshift::Extended;
use crate::params::Params;
use crate::transform::{engine, hs_form, riesz_operator, unbias_on, Engine};

const MAX_ITER: usize = 600;
const TAIL_SPAN: usize = 32;
pub const MIN_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
struct Shape {
    biased: Vec<f64>,
    derivative: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Bubble {
    params: Params,
    profile: RadialFn,
    mu: f64,
    rayleigh_mu: f64,
    residual: f64,
    iterations: usize,
    history: Vec<f64>,
    shape: Arc<Shape>,
}

impl Bubble {
    /// Rebuilds a bubble from stored data, e.g. a profile file.
    pub fn from_parts(params: Params, profile: RadialFn, mu: f64, rayleigh_mu: f64, residual: f64) -> Result<Self> {
        if !(mu > 0.0 && rayleigh_mu > 0.0 && residual >= 0.0) {
            return Err(invalid("bubble constants must be positive"));
        }
        if profile.values().iter().any(|&v| !(v > 0.0)) {
            return Err(Error::InvalidData("bubble profile must be positive".into()));
        }
        let shape = Arc::new(shape_of(&profile, &params));
        Ok(Self {
            params,
            profile,
            mu,
            rayleigh_mu,
            residual,
            iterations: 0,
            history: Vec::new(),
            shape,
        })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn grid(&self) -> &RadialGrid {
        self.profile.grid()
    }

    pub fn profile(&self) -> &RadialFn {
        &self.profile
    }

    /// `μ` from `‖V‖²_{Ḣ^s} = μ^{(N-t)/(2s-t)}`.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `μ` as the Rayleigh quotient of the normalized iterate.
    pub fn rayleigh_mu(&self) -> f64 {
        self.rayleigh_mu
    }

    /// Deficit `Γ(V)` of the stored profile.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Relative change between successive iterates.
    pub fn history(&self) -> &[f64] {
        &self.history
    }

    /// `‖V‖²_{Ḣ^s}` predicted by `μ`.
    pub fn energy(&self) -> f64 {
        self.mu.powf(self.params.energy_exponent())
    }

    fn steps(&self, lambda: f64) -> Result<f64> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(invalid(format!("dilation λ = {lambda} must be positive")));
        }
        Ok(self.grid().steps_of(lambda))
    }

    /// `r^b V^λ(r)`.
    pub(crate) fn biased_at(&self, lambda: f64) -> Result<Vec<f64>> {
        let x = self.steps(lambda)?;
        let h = self.grid().log_step();
        Ok(Extended::fitted(&self.shape.biased, TAIL_SPAN, h).shifted(x))
    }

    /// `r^b λ ∂_λ V^λ(r)`.
    pub(crate) fn biased_log_derivative_at(&self, lambda: f64) -> Result<Vec<f64>> {
        let x = self.steps(lambda)?;
        let h = self.grid().log_step();
        Ok(Extended::fitted(&self.shape.derivative, TAIL_SPAN, h).shifted(x))
    }

    /// `V^λ(x) = λ^{(N-2s)/2} V(λx)`.
    pub fn dilate(&self, lambda: f64) -> Result<RadialFn> {
        self.steps(lambda)?;
        Ok(dilate_with(
            &self.profile,
            &self.shape.biased,
            lambda,
            self.params.scaling_exponent(),
        ))
    }

    /// `∂_λ V^λ`.
    pub fn derivative(&self, lambda: f64) -> Result<RadialFn> {
        let b = self.params.scaling_exponent();
        let g = self.biased_log_derivative_at(lambda)?;
        Ok(from_biased(self.grid(), &g, b).scale(1.0 / lambda))
    }

    /// Least-squares slope of `log V` against `log r` on `[r_lo, r_hi]`.
    pub fn tail_slope(&self, r_lo: f64, r_hi: f64) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .grid()
            .nodes()
            .iter()
            .zip(self.profile.values())
            .filter(|(r, _)| **r >= r_lo && **r <= r_hi)
            .map(|(r, v)| (r.ln(), v.ln()))
            .collect();
        crate::fit::line(&pts).map(|(slope, _)| slope).unwrap_or(f64::NAN)
    }
}

fn from_biased(grid: &RadialGrid, g: &[f64], b: f64) -> RadialFn {
    let values = g.iter().zip(grid.nodes()).map(|(v, r)| v * r.powf(-b)).collect();
    RadialFn::from_parts(grid, values)
}

fn shape_of(profile: &RadialFn, params: &Params) -> Shape {
    let biased = profile.biased(params.scaling_exponent());
    let h = profile.grid().log_step();
    let derivative = Extended::fitted(&biased, TAIL_SPAN, h).derivative(h);
    Shape { biased, derivative }
}

/// `λ^{(N-2s)/2} f(λ·)`; an index shift when `λ` is a power of the node ratio, otherwise
/// twelve-point Lagrange interpolation in `log r` of `r^{(N-2s)/2} f`.
pub fn dilate(f: &RadialFn, lambda: f64, params: &Params) -> Result<RadialFn> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid(format!("dilation λ = {lambda} must be positive")));
    }
    let b = params.scaling_exponent();
    Ok(dilate_with(f, &f.biased(b), lambda, b))
}

fn dilate_with(f: &RadialFn, biased: &[f64], lambda: f64, b: f64) -> RadialFn {
    let g = f.grid();
    let x = g.steps_of(lambda);
    let ext = Extended::fitted(biased, TAIL_SPAN, g.log_step());
    if (x - x.round()).abs() < 1e-9 {
        let k = x.round() as isize;
        let gain = lambda.powf(b);
        let n = g.len() as isize;
        let values = (0..n)
            .map(|j| {
                let i = j + k;
                if (0..n).contains(&i) {
                    gain * f.values()[i as usize]
                } else {
                    ext.get(i) * g.nodes()[j as usize].powf(-b)
                }
            })
            .collect();
        return RadialFn::from_parts(g, values);
    }
    from_biased(g, &ext.shifted(x), b)
}

/// `∂_λ V^λ` at scale `λ`.
pub fn bubble_derivative(v: &Bubble, lambda: f64) -> Result<RadialFn> {
    v.derivative(lambda)
}

/// Odd power `|U|^{p-1} U`, the nonlinearity in the biased frame.
pub(crate) fn nonlinearity(u: &[f64], p: f64) -> Vec<f64> {
    u.iter().map(|&x| x.abs().powf(p - 1.0) * x).collect()
}

/// `‖U‖_{L^{crit}}` in the biased frame, equal to the weighted norm of `u`.
fn crit_norm(eng: &Engine, params: &Params, u: &[f64]) -> f64 {
    let crit = params.crit();
    let g: Vec<f64> = u.iter().map(|x| x.abs().powf(crit)).collect();
    crate::grid::log_quadrature(eng.grid(), params.dim(), &g).powf(1.0 / crit)
}

/// Deficit `‖U - (-Δ)^{-s} N(U)‖_{Ḣ^s}` for a biased profile.
pub(crate) fn deficit_biased(eng: &Engine, params: &Params, u: &[f64]) -> f64 {
    let image = riesz_operator(eng, params, &nonlinearity(u, params.p()));
    let w: Vec<f64> = u.iter().zip(&image).map(|(a, b)| a - b).collect();
    hs_form(eng, params, &w, &w).max(0.0).sqrt()
}

/// Fixed-point iteration `w ← normalize((-Δ)^{-s}(w^p |x|^{-t}))` from `(1+r²)^{-(N-2s)/2}`.
pub fn solve_bubble(params: &Params, grid: &RadialGrid, tol: f64) -> Result<Bubble> {
    if !(tol >= MIN_TOL) {
        return Err(invalid(format!("solver tolerance {tol} below {MIN_TOL}")));
    }
    let eng = engine(grid, params.dim());
    let b = params.scaling_exponent();
    let p = params.p();
    let start = RadialFn::from_fn(grid, |r| (1.0 + r * r).powf(-b)).biased(b);
    let mut w = normalized(&eng, params, start);
    let mut history = Vec::new();
    let mut theta = 1.0;
    let mut state = iterate(&eng, params, &w, tol, &mut theta, &mut history)?;
    // Fix the free scale: put the peak of r^b V at r = 1, then re-converge.
    let peak = peak_position(&state.next) + grid.r_min().ln() / grid.log_step();
    theta = 1.0;
    let shifted = Extended::fitted(&state.next, TAIL_SPAN, grid.log_step()).shifted(peak);
    w = normalized(&eng, params, shifted);
    state = iterate(&eng, params, &w, tol, &mut theta, &mut history)?;

    let rayleigh_mu = 1.0 / state.lambda;
    let u: Vec<f64> = state
        .next
        .iter()
        .map(|x| x * rayleigh_mu.powf(1.0 / (p - 1.0)))
        .collect();
    let profile = RadialFn::from_parts(grid, flatten_core(unbias_on(grid, &u, b), grid.nearest(1.0)));
    if let Some(j) = profile.values().iter().position(|&v| !(v > 0.0)) {
        return Err(Error::NumericalInstability(format!("profile not positive at node {j}")));
    }
    let shape = shape_of(&profile, params);
    let energy = hs_form(&eng, params, &shape.biased, &shape.biased);
    let mu = energy.powf(1.0 / params.energy_exponent());
    if ((mu - rayleigh_mu) / rayleigh_mu).abs() > 1e-4 {
        return Err(Error::ConsistencyFailure(format!(
            "μ from the Ḣ^s norm ({mu}) and from the Rayleigh quotient ({rayleigh_mu}) disagree"
        )));
    }
    let residual = deficit_biased(&eng, params, &shape.biased);
    Ok(Bubble {
        params: *params,
        profile,
        mu,
        rayleigh_mu,
        residual,
        iterations: history.len(),
        history,
        shape: Arc::new(shape),
    })
}

struct IterState {
    next: Vec<f64>,
    lambda: f64,
}

fn normalized(eng: &Engine, params: &Params, mut u: Vec<f64>) -> Vec<f64> {
    let n = crit_norm(eng, params, &u);
    u.iter_mut().for_each(|x| *x /= n);
    u
}

fn iterate(
    eng: &Engine,
    params: &Params,
    start: &[f64],
    tol: f64,
    theta: &mut f64,
    history: &mut Vec<f64>,
) -> Result<IterState> {
    let mut w = start.to_vec();
    let mut prev = f64::INFINITY;
    let budget = MAX_ITER.saturating_sub(history.len());
    for _ in 0..budget {
        let image = riesz_operator(eng, params, &nonlinearity(&w, params.p()));
        let lambda = crit_norm(eng, params, &image);
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::NumericalInstability("iterate lost its norm".into()));
        }
        let next: Vec<f64> = image.iter().map(|x| x / lambda).collect();
        let diff: Vec<f64> = next.iter().zip(&w).map(|(a, b)| a - b).collect();
        let size = hs_form(eng, params, &next, &next).sqrt();
        let change = hs_form(eng, params, &diff, &diff).max(0.0).sqrt() / size;
        history.push(change);
        if !change.is_finite() {
            return Err(Error::NumericalInstability("iterate is not finite".into()));
        }
        check_sign(eng.grid(), &next)?;
        if change < tol {
            return Ok(IterState { next, lambda });
        }
        if change > prev {
            *theta = 0.5;
        }
        prev = change;
        let mixed: Vec<f64> = w
            .iter()
            .zip(&next)
            .map(|(a, b)| (1.0 - *theta) * a + *theta * b)
            .collect();
        w = normalized(eng, params, mixed);
    }
    Err(Error::SolverFailure {
        message: format!("no convergence to {tol} within {MAX_ITER} iterations"),
        history: history.clone(),
    })
}

/// Near the origin the profile is flat below round-off; hold it constant left of the first
/// sample that stops increasing toward `r = 0`.
fn flatten_core(mut v: Vec<f64>, start: usize) -> Vec<f64> {
    let mut j = start;
    while j > 0 && v[j - 1] > v[j] {
        j -= 1;
    }
    let hold = v[j];
    v[..j].iter_mut().for_each(|x| *x = hold);
    v
}

/// Negative values above round-off mean the iteration has lost positivity.
fn check_sign(grid: &RadialGrid, u: &[f64]) -> Result<()> {
    let peak = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if let Some(j) = u.iter().position(|&v| v < -1e-12 * peak) {
        return Err(Error::NumericalInstability(format!(
            "iterate negative at r = {:e}",
            grid.nodes()[j]
        )));
    }
    Ok(())
}

/// Position of the maximum of `u` in node units, refined by a parabola.
fn peak_position(u: &[f64]) -> f64 {
    let j = u
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(j, _)| j)
        .unwrap_or(0);
    if j == 0 || j + 1 == u.len() {
        return j as f64;
    }
    let (a, b, c) = (u[j - 1], u[j], u[j + 1]);
    let denom = a - 2.0 * b + c;
    let off = if denom < 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    j as f64 + off
}

/// `μ` from the `Ḣ^s` norm of the profile, cross-checked against the Rayleigh quotient.
pub fn mu_constant(v: &Bubble) -> Result<f64> {
    let eng = engine(v.grid(), v.params.dim());
    let energy = hs_form(&eng, &v.params, &v.shape.biased, &v.shape.biased);
    let mu = energy.powf(1.0 / v.params.energy_exponent());
    if ((mu - v.rayleigh_mu) / v.rayleigh_mu).abs() > 1e-4 {
        return Err(Error::ConsistencyFailure(format!(
            "μ = {mu} from the norm against {} from the Rayleigh quotient",
            v.rayleigh_mu
        )));
    }
    Ok(mu)
}

/// Which power of `μ` reproduces `∫ V^{p+1} |x|^{-t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentCheck {
    pub integral: f64,
    /// `μ^{crit/(crit-2)}`.
    pub with_crit_minus_two: f64,
    /// `μ^{crit/(crit-1)}`.
    pub with_crit_minus_one: f64,
}

impl ExponentCheck {
    pub fn rel_error_crit_minus_two(&self) -> f64 {
        (self.integral / self.with_crit_minus_two - 1.0).abs()
    }

    pub fn rel_error_crit_minus_one(&self) -> f64 {
        (self.integral / self.with_crit_minus_one - 1.0).abs()
    }

    /// `true` when `crit/(crit-2)` is the closer exponent.
    pub fn crit_minus_two_matches(&self) -> bool {
        self.rel_error_crit_minus_two() < self.rel_error_crit_minus_one()
    }
}

pub fn normalization_exponent_check(v: &Bubble) -> Result<ExponentCheck> {
    let p = &v.params;
    let integral = crate::grid::integrate_radial(&v.profile.abs_pow(p.crit()), -p.t(), p)?;
    let crit = p.crit();
    Ok(ExponentCheck {
        integral,
        with_crit_minus_two: v.mu.powf(crit / (crit - 2.0)),
        with_crit_minus_one: v.mu.powf(crit / (crit - 1.0)),
    })
}

/// Order law: `∫ V^p |x|^{-t}` divided by `(N+2s-2t)/((N-t)(2s-t))`.
pub fn order_law_ratio(v: &Bubble) -> Result<f64> {
    let p = &v.params;
    let integral = crate::grid::integrate_radial(&v.profile.abs_pow(p.p()), -p.t(), p)?;
    let (n, s, t) = (p.n(), p.s(), p.t());
    Ok(integral / ((n + 2.0 * s - 2.0 * t) / ((n - t) * (2.0 * s - t))))
}

/// Two-column `radius value` text with a `#` header carrying the parameters and constants.
/// Floats print in shortest round-trip form, so parsing restores the profile bit for bit.
pub fn profile_to_text(v: &Bubble) -> String {
    use std::fmt::Write;
    let p = &v.params;
    let g = v.grid();
    let mut out = String::new();
    let _ = writeln!(out, "# N = {}", p.dim());
    let _ = writeln!(out, "# s = {:?}", p.s());
    let _ = writeln!(out, "# t = {:?}", p.t());
    let _ = writeln!(out, "# mu = {:?}", v.mu);
    let _ = writeln!(out, "# rayleigh_mu = {:?}", v.rayleigh_mu);
    let _ = writeln!(out, "# residual = {:?}", v.residual);
    let _ = writeln!(out, "# r_min = {:?}", g.r_min());
    let _ = writeln!(out, "# r_max = {:?}", g.r_max());
    let _ = writeln!(out, "# n = {}", g.len());
    for (r, x) in g.nodes().iter().zip(v.profile.values()) {
        let _ = writeln!(out, "{r:?} {x:?}");
    }
    out
}

/// Inverse of [`profile_to_text`].
pub fn profile_from_text(text: &str) -> Result<Bubble> {
    let mut header = std::collections::HashMap::new();
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let bad = |what: &str| Error::InvalidData(format!("line {}: {what}", i + 1));
        if let Some(rest) = line.strip_prefix('#') {
            let (k, val) = rest.split_once('=').ok_or_else(|| bad("header without '='"))?;
            let val: f64 = val.trim().parse().map_err(|_| bad("unparsable header value"))?;
            header.insert(k.trim().to_string(), val);
        } else if !line.trim().is_empty() {
            let mut it = line.split_whitespace();
            let mut next = || -> Result<f64> {
                it.next()
                    .ok_or_else(|| bad("expected two columns"))?
                    .parse()
                    .map_err(|_| bad("unparsable number"))
            };
            rows.push((next()?, next()?));
        }
    }
    let get = |k: &str| {
        header
            .get(k)
            .copied()
            .ok_or_else(|| Error::InvalidData(format!("missing header field {k}")))
    };
    let dim = get("N")?;
    if dim.fract() != 0.0 || dim < 1.0 {
        return Err(Error::InvalidData(format!("dimension {dim} is not a positive integer")));
    }
    let params = Params::new(dim as u32, get("s")?, get("t")?)?;
    let n = get("n")? as usize;
    if rows.len() != n {
        return Err(Error::InvalidData(format!("expected {n} rows, found {}", rows.len())));
    }
    let grid = crate::grid::make_log_grid(get("r_min")?, get("r_max")?, n)?;
    let values: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let profile = RadialFn::new(&grid, values)?;
    Bubble::from_parts(params, profile, get("mu")?, get("rayleigh_mu")?, get("residual")?)
}
