//! Logarithmic cutoff, fractional commutator and weighted Kato-Ponce ratios.

use rand::Rng;

use crate::bubble::{dilate, Bubble};
use crate::error::{invalid, Result};
use crate::grid::{weighted_lp_norm, RadialFn, RadialGrid};
use crate::params::Params;
use crate::transform::frac_power;

/// `φ_{r,R}`: one below `r`, zero above `R`, linear in `log |x|` between.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffSpec {
    inner: f64,
    outer: f64,
}

impl CutoffSpec {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(inner > 0.0 && outer > inner && outer.is_finite()) {
            return Err(invalid(format!("cutoff radii need 0 < r = {inner} < R = {outer}")));
        }
        Ok(Self { inner, outer })
    }

    pub fn inner(&self) -> f64 {
        self.inner
    }

    pub fn outer(&self) -> f64 {
        self.outer
    }

    pub fn ratio(&self) -> f64 {
        self.outer / self.inner
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < self.inner {
            1.0
        } else if x > self.outer {
            0.0
        } else {
            (self.outer / x).ln() / self.ratio().ln()
        }
    }

    /// Both radii multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(c * self.inner, c * self.outer)
    }
}

pub fn log_cutoff(spec: &CutoffSpec, grid: &RadialGrid) -> Result<RadialFn> {
    if spec.inner < 10.0 * grid.r_min() || spec.outer > 0.1 * grid.r_max() {
        return Err(invalid(format!(
            "cutoff [{:e}, {:e}] needs a decade of margin inside [{:e}, {:e}]",
            spec.inner,
            spec.outer,
            grid.r_min(),
            grid.r_max()
        )));
    }
    Ok(RadialFn::from_fn(grid, |r| spec.eval(r)))
}

/// `‖ |x|^{t/crit} (-Δ)^{s/2} φ_{r,R} ‖_{L^q}` with `q = 2 crit/(crit-2)`.
pub fn cutoff_weighted_norm(spec: &CutoffSpec, grid: &RadialGrid, params: &Params) -> Result<f64> {
    let d = cutoff_power(spec, grid, params.s(), params)?;
    let q = params.q();
    weighted_lp_norm(&d, q, q * params.t() / params.crit(), params)
}

/// `(-Δ)^{β/2} φ_{r,R}`, summed over cutoffs of at most two decades each:
/// `φ_{r,R} = Σ_k log(r_{k+1}/r_k)/log(R/r) · φ_{r_k,r_{k+1}}`.
pub fn cutoff_power(spec: &CutoffSpec, grid: &RadialGrid, beta: f64, params: &Params) -> Result<RadialFn> {
    log_cutoff(spec, grid)?;
    let pieces = (spec.ratio().log10() / 2.0).ceil().max(1.0) as usize;
    let step = spec.ratio().powf(1.0 / pieces as f64);
    let mut total = RadialFn::zeros(grid);
    for k in 0..pieces {
        let inner = spec.inner * step.powi(k as i32);
        let piece = CutoffSpec::new(inner, if k + 1 == pieces { spec.outer } else { inner * step })?;
        let d = frac_power(&log_cutoff(&piece, grid)?, beta, params)?;
        total = total.axpy(1.0 / pieces as f64, &d)?;
    }
    Ok(total)
}

/// `(-Δ)^α` with the convention that `α = 0` is the identity.
fn lap_power(f: &RadialFn, alpha: f64, params: &Params) -> Result<RadialFn> {
    if alpha == 0.0 {
        Ok(f.clone())
    } else {
        frac_power(f, 2.0 * alpha, params)
    }
}

/// `(-Δ)^α(fg) - g(-Δ)^α f - f(-Δ)^α g`.
pub fn commutator(f: &RadialFn, g: &RadialFn, alpha: f64, params: &Params) -> Result<RadialFn> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(invalid(format!("commutator order α = {alpha} must lie in (0, 1/2)")));
    }
    let fg = f.mul(g)?;
    let a = lap_power(&fg, alpha, params)?;
    let df = lap_power(f, alpha, params)?;
    let dg = lap_power(g, alpha, params)?;
    let values = a
        .values()
        .iter()
        .zip(f.values().iter().zip(g.values()))
        .zip(df.values().iter().zip(dg.values()))
        .map(|((c, (fv, gv)), (dfv, dgv))| c - (gv * dfv + fv * dgv))
        .collect();
    RadialFn::new(f.grid(), values)
}

/// `|x|^a ∈ A_p` on `ℝ^N`, i.e. `-N < a < N(p-1)`.
pub fn ap_power_weight_check(a: f64, p_exp: f64, dim: u32) -> Result<bool> {
    if !(p_exp > 1.0) {
        return Err(invalid(format!("A_p needs p > 1, got {p_exp}")));
    }
    let n = dim as f64;
    Ok(a > -n && a < n * (p_exp - 1.0))
}

/// Exponents of the weighted Kato-Ponce estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KpvExponents {
    pub alpha1: f64,
    pub alpha2: f64,
    pub p: f64,
    pub p1: f64,
    pub p2: f64,
    pub a: f64,
    pub a1: f64,
    pub a2: f64,
}

impl KpvExponents {
    /// `α₁ = 0, α₂ = s/2, p₁ = crit, p₂ = q, a₁ = -t, a₂ = qt/crit`, which gives `p = 2, a = 0`.
    pub fn standard(params: &Params) -> Self {
        let (crit, q, t) = (params.crit(), params.q(), params.t());
        let p = 1.0 / (1.0 / crit + 1.0 / q);
        let a1 = -t;
        let a2 = q * t / crit;
        Self {
            alpha1: 0.0,
            alpha2: params.s() / 2.0,
            p,
            p1: crit,
            p2: q,
            a: p * (a1 / crit + a2 / q),
            a1,
            a2,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha1 + self.alpha2
    }

    pub fn validate(&self, dim: u32) -> Result<()> {
        let tol = 1e-10;
        if !(self.alpha1 >= 0.0 && self.alpha2 >= 0.0 && self.alpha() > 0.0 && self.alpha() < 0.5) {
            return Err(invalid(format!(
                "orders α₁ = {}, α₂ = {} must be nonnegative with sum in (0, 1/2)",
                self.alpha1, self.alpha2
            )));
        }
        if (1.0 / self.p - 1.0 / self.p1 - 1.0 / self.p2).abs() > tol {
            return Err(invalid(format!("1/{} ≠ 1/{} + 1/{}", self.p, self.p1, self.p2)));
        }
        if (self.a / self.p - self.a1 / self.p1 - self.a2 / self.p2).abs() > tol {
            return Err(invalid("weights violate a/p = a₁/p₁ + a₂/p₂"));
        }
        for (a, p) in [(self.a1, self.p1), (self.a2, self.p2)] {
            if !ap_power_weight_check(a, p, dim)? {
                return Err(invalid(format!("|x|^{a} is not an A_{p} weight")));
            }
        }
        Ok(())
    }
}

/// `‖C[f,g]‖_{L^p_{|x|^a}} / (‖(-Δ)^{α₁} f‖_{L^{p₁}_{|x|^{a₁}}} ‖(-Δ)^{α₂} g‖_{L^{p₂}_{|x|^{a₂}}})`.
pub fn kpv_ratio(f: &RadialFn, g: &RadialFn, e: &KpvExponents, params: &Params) -> Result<f64> {
    e.validate(params.dim())?;
    let c = commutator(f, g, e.alpha(), params)?;
    let num = weighted_lp_norm(&c, e.p, e.a, params)?;
    let nf = weighted_lp_norm(&lap_power(f, e.alpha1, params)?, e.p1, e.a1, params)?;
    let ng = weighted_lp_norm(&lap_power(g, e.alpha2, params)?, e.p2, e.a2, params)?;
    Ok(num / (nf * ng))
}

/// Random smooth radial test functions: dilated Gaussians, Gaussian products, log-bumps
/// and, when given, dilated bubbles.
pub fn kpv_family(
    grid: &RadialGrid,
    bubble: Option<&Bubble>,
    count: usize,
    rng: &mut impl Rng,
) -> Result<Vec<RadialFn>> {
    let kinds = if bubble.is_some() { 4 } else { 3 };
    (0..count)
        .map(|_| {
            let w = 10f64.powf(rng.random_range(-1.0..1.0));
            match rng.random_range(0..kinds) {
                0 => Ok(RadialFn::from_fn(grid, |r| (-(r / w).powi(2)).exp())),
                1 => {
                    let (a, w2) = (rng.random_range(0.0..2.0) * w, w * rng.random_range(0.5..2.0));
                    Ok(RadialFn::from_fn(grid, |r| {
                        (-(r / w).powi(2) - ((r - a) / w2).powi(2)).exp()
                    }))
                }
                2 => {
                    let (m, sd) = (w.ln(), rng.random_range(0.5..1.5));
                    Ok(RadialFn::from_fn(grid, |r| {
                        (-(r.ln() - m).powi(2) / (2.0 * sd * sd)).exp()
                    }))
                }
                _ => {
                    let b = bubble.expect("bubble kind drawn without a bubble");
                    dilate(b.profile(), w, b.params())
                }
            }
        })
        .collect()
}
