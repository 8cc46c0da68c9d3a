//! Deficit, projection onto the multi-bubble manifold, and the sharpness experiments.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bubble::{deficit_biased, Bubble};
use crate::error::{invalid, Error, Result};
use crate::fit;
use crate::grid::{RadialFn, RadialGrid};
use crate::interaction::{hs_cross_inner, BubbleFamily};
use crate::params::Params;
use crate::transform::{engine, hs_form, hs_operator, Engine};

/// Relative size of `r^b u` at the grid ends beyond which the deficit is refused.
const END_TOL: f64 = 1e-6;

fn check_ends(u: &[f64], what: &str) -> Result<()> {
    let peak = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let end = u[0].abs().max(u[u.len() - 1].abs());
    if end > END_TOL * peak {
        return Err(Error::InsufficientDecay(format!(
            "{what}: r^b u at the grid ends is {:e} of its peak",
            end / peak
        )));
    }
    Ok(())
}

/// `Γ(u) = ‖(-Δ)^s u - |u|^{p-1} u |x|^{-t}‖_{(Ḣ^s)'}`.
pub fn deficit(u: &RadialFn, params: &Params) -> Result<f64> {
    let g = u.biased(params.scaling_exponent());
    if g.iter().all(|&x| x == 0.0) {
        return Ok(0.0);
    }
    check_ends(&g, "deficit")?;
    Ok(deficit_biased(&engine(u.grid(), params.dim()), params, &g))
}

#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub gamma: f64,
    pub distance: f64,
    pub family: BubbleFamily,
    /// `⟨ρ,V_i⟩/‖V_i‖` for each bubble, then `⟨ρ,V̇_i⟩/‖V̇_i‖`.
    pub ortho_residuals: Vec<f64>,
    pub interactions: Vec<f64>,
    pub energy: f64,
    pub energy_window_ok: bool,
    /// Objective `‖u - σ‖²` after each accepted step.
    pub objective_trace: Vec<f64>,
    pub warnings: Vec<String>,
}

impl StabilityReport {
    pub fn max_ortho_residual(&self) -> f64 {
        self.ortho_residuals.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ProjectOptions {
    /// Distance above which the input is reported as outside the tubular neighbourhood,
    /// relative to `‖u‖_{Ḣ^s}`.
    pub tube: f64,
    pub max_iter: usize,
}

impl Default for ProjectOptions {
    fn default() -> Self {
        Self {
            tube: 0.1,
            max_iter: 200,
        }
    }
}

struct Model {
    sigma: Vec<f64>,
    columns: Vec<Vec<f64>>,
}

fn model(v: &Bubble, coeffs: &[f64], logs: &[f64]) -> Result<Model> {
    let n = v.grid().len();
    let mut sigma = vec![0.0; n];
    let mut values = Vec::new();
    let mut tangents = Vec::new();
    for (a, l) in coeffs.iter().zip(logs) {
        let f = v.biased_at(l.exp())?;
        let d = v.biased_log_derivative_at(l.exp())?;
        sigma.iter_mut().zip(&f).for_each(|(s, x)| *s += a * x);
        tangents.push(d.iter().map(|x| a * x).collect());
        values.push(f);
    }
    values.extend(tangents);
    Ok(Model { sigma, columns: values })
}

fn check_collisions(grid: &RadialGrid, logs: &[f64]) -> Result<()> {
    for (i, a) in logs.iter().enumerate() {
        for b in &logs[i + 1..] {
            if (a - b).abs() < grid.log_step() {
                return Err(Error::DegenerateConfiguration(format!(
                    "scales {:e} and {:e} are within one grid step",
                    a.exp(),
                    b.exp()
                )));
            }
        }
    }
    Ok(())
}

/// Local maxima of `r^b u` as initial scales and coefficients, largest first.
fn seed_family(v: &Bubble, u: &[f64], nu: usize, warnings: &mut Vec<String>) -> (Vec<f64>, Vec<f64>) {
    let grid = v.grid();
    let top = v
        .biased_at(1.0)
        .map(|f| f.iter().fold(0.0f64, |m, x| m.max(*x)))
        .unwrap_or(1.0);
    let peak = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut maxima: Vec<(usize, f64)> = (1..u.len() - 1)
        .filter(|&j| u[j].abs() > 1e-3 * peak && u[j].abs() >= u[j - 1].abs() && u[j].abs() > u[j + 1].abs())
        .map(|j| (j, u[j]))
        .collect();
    maxima.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
    if maxima.len() < nu {
        warnings.push(format!(
            "found {} separated peaks for ν = {nu}; merged scales reduce ν",
            maxima.len()
        ));
    }
    maxima.truncate(nu);
    maxima.sort_by_key(|m| m.0);
    let logs = maxima.iter().map(|&(j, _)| -grid.log_node(j)).collect();
    let coeffs = maxima.iter().map(|&(_, x)| x / top).collect();
    (coeffs, logs)
}

/// Gauss-Newton minimization of `‖u - Σ α_i V^{λ_i}‖²_{Ḣ^s}` over `(α_i, log λ_i)`.
pub fn project_multibubble(
    u: &RadialFn,
    v: &Bubble,
    nu: usize,
    init: Option<&BubbleFamily>,
    options: ProjectOptions,
) -> Result<StabilityReport> {
    if nu == 0 {
        return Err(invalid("ν must be at least 1"));
    }
    if u.grid() != v.grid() {
        return Err(invalid("input and bubble live on different grids"));
    }
    let params = *v.params();
    let grid = v.grid();
    let eng = engine(grid, params.dim());
    let target = u.biased(params.scaling_exponent());
    check_ends(&target, "projection input")?;
    let mut warnings = Vec::new();
    let (mut coeffs, mut logs) = match init {
        Some(f) => {
            if f.len() != nu {
                return Err(invalid(format!("initial family has {} bubbles, ν = {nu}", f.len())));
            }
            let logs: Vec<f64> = f.scales.iter().map(|l| l.ln()).collect();
            check_collisions(grid, &logs)?;
            (f.coeffs.clone(), logs)
        }
        None => seed_family(v, &target, nu, &mut warnings),
    };
    if coeffs.is_empty() {
        return Err(Error::DegenerateInput("no bubble-like peak in the input".into()));
    }
    let k = coeffs.len();
    let objective = |m: &Model| {
        let r: Vec<f64> = target.iter().zip(&m.sigma).map(|(a, b)| a - b).collect();
        (hs_form(&eng, &params, &r, &r), r)
    };
    let mut current = model(v, &coeffs, &logs)?;
    let (mut f, mut rho) = objective(&current);
    let mut trace = vec![f];
    let mut converged = false;
    for _ in 0..options.max_iter {
        let lj: Vec<Vec<f64>> = current.columns.iter().map(|c| hs_operator(&eng, &params, c)).collect();
        let m = 2 * k;
        let mut gram = DMatrix::zeros(m, m);
        let mut grad = DVector::zeros(m);
        for i in 0..m {
            grad[i] = eng.pair(&lj[i], &rho);
            for j in 0..=i {
                let g = 0.5 * (eng.pair(&current.columns[i], &lj[j]) + eng.pair(&current.columns[j], &lj[i]));
                gram[(i, j)] = g;
                gram[(j, i)] = g;
            }
        }
        let scale = (0..m).map(|i| gram[(i, i)]).fold(0.0f64, f64::max);
        let stationary = (0..m).all(|i| grad[i].abs() <= 1e-13 * (gram[(i, i)] * f).sqrt().max(1e-300));
        if f <= 1e-30 * scale || stationary {
            converged = true;
            break;
        }
        let step = gram
            .clone()
            .cholesky()
            .map(|c| c.solve(&grad))
            .or_else(|| {
                let mut g = gram.clone();
                for i in 0..m {
                    g[(i, i)] += 1e-12 * scale;
                }
                g.lu().solve(&grad)
            })
            .ok_or_else(|| Error::SolverFailure {
                message: "singular Gauss-Newton system".into(),
                history: trace.clone(),
            })?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let c2: Vec<f64> = (0..k).map(|i| coeffs[i] + t * step[i]).collect();
            let l2: Vec<f64> = (0..k).map(|i| logs[i] + t * step[k + i]).collect();
            let trial = model(v, &c2, &l2)?;
            let (f2, r2) = objective(&trial);
            if f2 < f {
                coeffs = c2;
                logs = l2;
                current = trial;
                f = f2;
                rho = r2;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            converged = true;
            break;
        }
        trace.push(f);
        check_collisions(grid, &logs)?;
    }
    if !converged {
        return Err(Error::SolverFailure {
            message: format!("projection not converged in {} steps", options.max_iter),
            history: trace,
        });
    }
    if k < nu {
        warnings.push(format!("projected onto {k} bubbles instead of {nu}"));
    }
    let distance = f.max(0.0).sqrt();
    let energy = hs_form(&eng, &params, &target, &target);
    if distance > options.tube * energy.sqrt() {
        warnings.push(format!("distance {distance:e} lies outside the tubular neighbourhood"));
    }
    let ortho_residuals = ortho_residuals(&eng, v, &logs, &rho)?;
    let scales: Vec<f64> = logs.iter().map(|l| l.exp()).collect();
    let family = BubbleFamily::new(v.clone(), scales, coeffs)?;
    let gamma = deficit_biased(&eng, &params, &target);
    let bound = v.energy();
    let energy_window_ok = energy >= (nu as f64 - 0.5) * bound && energy <= (nu as f64 + 0.5) * bound;
    Ok(StabilityReport {
        gamma,
        distance,
        interactions: family.interactions(),
        family,
        ortho_residuals,
        energy,
        energy_window_ok,
        objective_trace: trace,
        warnings,
    })
}

/// `⟨ρ,V_i⟩_{Ḣ^s} = ∫ V_i^p ρ |x|^{-t}` and `⟨ρ,V̇_i⟩_{Ḣ^s} = p ∫ V_i^{p-1} V̇_i ρ |x|^{-t}`,
/// each divided by the `Ḣ^s` norm of the tangent vector.
fn ortho_residuals(eng: &Engine, v: &Bubble, logs: &[f64], rho: &[f64]) -> Result<Vec<f64>> {
    let params = v.params();
    let p = params.p();
    let mut first = Vec::new();
    let mut second = Vec::new();
    for l in logs {
        let f = v.biased_at(l.exp())?;
        let d = v.biased_log_derivative_at(l.exp())?;
        let fp: Vec<f64> = f.iter().map(|x| x.abs().powf(p)).collect();
        let fd: Vec<f64> = f.iter().zip(&d).map(|(x, y)| p * x.abs().powf(p - 1.0) * y).collect();
        first.push(eng.pair(&fp, rho) / hs_form(eng, params, &f, &f).sqrt());
        second.push(eng.pair(&fd, rho) / hs_form(eng, params, &d, &d).sqrt());
    }
    first.extend(second);
    Ok(first)
}

/// `φ(r) = exp(-1/(1-(r-2)²))` on `|r-2| < 1`, zero elsewhere.
pub fn default_bump(grid: &RadialGrid) -> RadialFn {
    RadialFn::from_fn(grid, |r| {
        let x = r - 2.0;
        if x.abs() < 1.0 {
            (-1.0 / (1.0 - x * x)).exp()
        } else {
            0.0
        }
    })
}

/// Scales `δ^{i-(ν-1)/2}` with `δ = κ^{2/(N-2s)}`, symmetric about 1 in `log λ`.
pub fn sweep_scales(nu: usize, kappa: f64, params: &Params) -> Result<Vec<f64>> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(invalid(format!("κ = {kappa} must lie in (0, 1)")));
    }
    let delta = kappa.powf(2.0 / (params.n() - 2.0 * params.s()));
    Ok((0..nu)
        .map(|i| delta.powf(i as f64 - (nu as f64 - 1.0) / 2.0))
        .collect())
}

/// `Σ V^{λ_i} + κ φ`.
pub fn sharpness_family(v: &Bubble, scales: &[f64], phi: &RadialFn, kappa: f64) -> Result<RadialFn> {
    if phi.grid() != v.grid() {
        return Err(invalid("bump and bubble live on different grids"));
    }
    let vals = phi.values();
    if vals[0] != 0.0 || vals[vals.len() - 1] != 0.0 {
        return Err(invalid("bump support reaches the grid ends"));
    }
    let mut u = phi.scale(kappa);
    for &l in scales {
        u = u.add(&v.dilate(l)?)?;
    }
    Ok(u)
}

/// `(ν-1/2) μ^{(N-t)/(2s-t)} ≤ ‖u‖²_{Ḣ^s} ≤ (ν+1/2) μ^{(N-t)/(2s-t)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyWindow {
    pub energy: f64,
    pub lower: f64,
    pub upper: f64,
    pub inside: bool,
}

pub fn energy_window_check(u: &RadialFn, nu: usize, v: &Bubble) -> Result<EnergyWindow> {
    let params = v.params();
    let g = u.biased(params.scaling_exponent());
    let energy = hs_form(&engine(u.grid(), params.dim()), params, &g, &g);
    let unit = v.energy();
    let lower = (nu as f64 - 0.5) * unit;
    let upper = (nu as f64 + 0.5) * unit;
    Ok(EnergyWindow {
        energy,
        lower,
        upper,
        inside: energy >= lower && energy <= upper,
    })
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub kappa: f64,
    pub gamma: f64,
    pub distance: f64,
    pub ratio: f64,
    pub max_ortho_residual: f64,
    pub rho_norm: f64,
    pub min_q: f64,
    /// Largest `⟨V_i, V_j⟩_{Ḣ^s}` over pairs of the fitted family.
    pub max_cross: f64,
    pub energy: f64,
    pub energy_window_ok: bool,
    pub scales: Vec<f64>,
}

/// One sharpness point: build `u_κ`, project it, measure.
pub fn stability_point(v: &Bubble, nu: usize, phi: &RadialFn, kappa: f64) -> Result<SweepRow> {
    let scales = sweep_scales(nu, kappa, v.params())?;
    let u = sharpness_family(v, &scales, phi, kappa)?;
    let init = BubbleFamily::unit(v.clone(), scales)?;
    let rep = project_multibubble(&u, v, nu, Some(&init), ProjectOptions::default())?;
    let mut max_cross = 0.0f64;
    for (i, &a) in rep.family.scales.iter().enumerate() {
        for &b in &rep.family.scales[i + 1..] {
            max_cross = max_cross.max(hs_cross_inner(v, a, b)?);
        }
    }
    Ok(SweepRow {
        kappa,
        gamma: rep.gamma,
        distance: rep.distance,
        ratio: rep.distance / rep.gamma,
        max_ortho_residual: rep.max_ortho_residual(),
        rho_norm: rep.distance,
        min_q: rep.interactions.iter().fold(1.0, |m: f64, &q| m.min(q)),
        max_cross,
        energy: rep.energy,
        energy_window_ok: rep.energy_window_ok,
        scales: rep.family.scales,
    })
}

#[derive(Debug, Clone)]
pub struct SweepSummary {
    pub slope_gamma: f64,
    pub slope_distance: f64,
    /// `max ratio / min ratio`.
    pub ratio_spread: f64,
}

pub fn summarize_sweep(rows: &[SweepRow]) -> Result<SweepSummary> {
    if rows.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: rows.len(),
        });
    }
    let slope = |pick: fn(&SweepRow) -> f64| {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.kappa.ln(), pick(r).ln())).collect();
        fit::line(&pts).map(|l| l.0).unwrap_or(f64::NAN)
    };
    let (lo, hi) = rows
        .iter()
        .fold((f64::MAX, 0.0f64), |(a, b), r| (a.min(r.ratio), b.max(r.ratio)));
    Ok(SweepSummary {
        slope_gamma: slope(|r| r.gamma),
        slope_distance: slope(|r| r.distance),
        ratio_spread: hi / lo,
    })
}

/// Sequential sweep over `κ`; callers may parallelize over [`stability_point`] instead.
pub fn stability_sweep(v: &Bubble, nu: usize, phi: &RadialFn, kappas: &[f64]) -> Result<Vec<SweepRow>> {
    kappas.iter().map(|&k| stability_point(v, nu, phi, k)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementaryConstants {
    pub max_ratio_a: f64,
    pub max_ratio_b: f64,
}

fn odd_pow(x: f64, p: f64) -> f64 {
    x * x.abs().powf(p - 1.0)
}

/// Signed log-uniform draw with magnitude in `[1e-3, 1e3]`.
fn signed_log_uniform(rng: &mut impl Rng) -> f64 {
    let m = 10f64.powf(rng.random_range(-3.0..3.0));
    if rng.random_bool(0.5) {
        m
    } else {
        -m
    }
}

/// `[|(a+b)|a+b|^{p-1} - a|a|^{p-1}| - p|a|^{p-1}|b|]⁺ / (χ_{p>2}|a|^{p-2}b² + |b|^p)`.
pub fn inequality_a_ratio(a: f64, b: f64, p: f64) -> f64 {
    let lhs = (odd_pow(a + b, p) - odd_pow(a, p)).abs();
    let excess = (lhs - p * a.abs().powf(p - 1.0) * b.abs()).max(0.0);
    let chi = if p > 2.0 { a.abs().powf(p - 2.0) * b * b } else { 0.0 };
    let denom = chi + b.abs().powf(p);
    if denom == 0.0 {
        0.0
    } else {
        excess / denom
    }
}

/// `|Σa_i |Σa_i|^{p-1} - Σ a_i|a_i|^{p-1}| / Σ_{i≠j} |a_i|^{p-1}|a_j|`.
pub fn inequality_b_ratio(a: &[f64], p: f64) -> f64 {
    let s: f64 = a.iter().sum();
    let lhs = (odd_pow(s, p) - a.iter().map(|&x| odd_pow(x, p)).sum::<f64>()).abs();
    let mut rhs = 0.0;
    for (i, x) in a.iter().enumerate() {
        for (j, y) in a.iter().enumerate() {
            if i != j {
                rhs += x.abs().powf(p - 1.0) * y.abs();
            }
        }
    }
    if rhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

/// Empirical constants of both elementary inequalities, three summands for the second.
pub fn check_elementary_inequalities(p: f64, samples: usize, seed: u64) -> Result<ElementaryConstants> {
    if !(p > 1.0) {
        return Err(invalid(format!("exponent {p} must exceed 1")));
    }
    if samples == 0 {
        return Err(invalid("need at least one sample"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_a = 0.0f64;
    let mut max_b = 0.0f64;
    for _ in 0..samples {
        let (a, b) = (signed_log_uniform(&mut rng), signed_log_uniform(&mut rng));
        max_a = max_a.max(inequality_a_ratio(a, b, p));
        let xs = [
            signed_log_uniform(&mut rng),
            signed_log_uniform(&mut rng),
            signed_log_uniform(&mut rng),
        ];
        max_b = max_b.max(inequality_b_ratio(&xs, p));
    }
    Ok(ElementaryConstants {
        max_ratio_a: max_a,
        max_ratio_b: max_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interaction::tests::planar;

    #[test]
    fn deficit_vanishes_on_bubbles() {
        let v = planar();
        let p = v.params();
        assert_eq!(deficit(&RadialFn::zeros(v.grid()), p).unwrap(), 0.0);
        let norm = v.energy().sqrt();
        for l in [1e-2, 1.0, 37.0] {
            let g = deficit(&v.dilate(l).unwrap(), p).unwrap();
            assert!(g <= 1e-9 * norm, "{l}: {g}");
        }
    }

    #[test]
    fn deficit_is_scale_invariant() {
        let v = planar();
        let p = v.params();
        let u = v.profile().add(&default_bump(v.grid()).scale(0.1)).unwrap();
        let a = deficit(&u, p).unwrap();
        let ratio = v.grid().node_ratio();
        let b = deficit(&crate::bubble::dilate(&u, ratio.powi(300), p).unwrap(), p).unwrap();
        assert!((a / b - 1.0).abs() < 1e-6, "{a} {b}");
    }

    #[test]
    fn on_manifold_input_is_recovered() {
        let v = planar();
        let scales = [1e-2, 1.0, 1e2];
        let u = sharpness_family(v, &scales, &RadialFn::zeros(v.grid()), 0.0).unwrap();
        let init = BubbleFamily::new(v.clone(), vec![1.3e-2, 0.8, 1.1e2], vec![0.9, 1.1, 1.05]).unwrap();
        let rep = project_multibubble(&u, v, 3, Some(&init), ProjectOptions::default()).unwrap();
        assert!(rep.distance <= 1e-8, "{}", rep.distance);
        for (got, want) in rep.family.scales.iter().zip(scales) {
            assert!((got / want - 1.0).abs() < 1e-6);
        }
        for a in &rep.family.coeffs {
            assert!((a - 1.0).abs() < 1e-6);
        }
        assert!(rep.objective_trace.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn seeded_projection_finds_bubbles() {
        let v = planar();
        let u = sharpness_family(v, &[1e-3, 1e3], &RadialFn::zeros(v.grid()), 0.0).unwrap();
        let rep = project_multibubble(&u, v, 2, None, ProjectOptions::default()).unwrap();
        assert!(rep.distance <= 1e-8, "{}", rep.distance);
        let rep = project_multibubble(&v.profile().clone(), v, 2, None, ProjectOptions::default()).unwrap();
        assert_eq!(rep.family.len(), 1);
        assert!(!rep.warnings.is_empty());
    }

    #[test]
    fn collisions_are_rejected() {
        let v = planar();
        let init = BubbleFamily::unit(v.clone(), vec![1.0, 1.0001]).unwrap();
        let r = project_multibubble(v.profile(), v, 2, Some(&init), ProjectOptions::default());
        assert!(matches!(r, Err(Error::DegenerateConfiguration(_))));
    }

    #[test]
    fn sharpness_point() {
        let v = planar();
        let phi = default_bump(v.grid());
        let row = stability_point(v, 2, &phi, 1e-3).unwrap();
        let pn = {
            let g = phi.biased(v.params().scaling_exponent());
            hs_form(&engine(v.grid(), 2), v.params(), &g, &g).sqrt()
        };
        assert!((row.distance / (1e-3 * pn) - 1.0).abs() < 0.05, "{row:?}");
        assert!(row.max_ortho_residual <= 1e-8 * row.rho_norm, "{row:?}");
        assert!(row.energy_window_ok);
    }

    #[test]
    fn projection_is_idempotent() {
        let v = planar();
        let phi = default_bump(v.grid());
        let scales = sweep_scales(2, 1e-3, v.params()).unwrap();
        let u = sharpness_family(v, &scales, &phi, 1e-3).unwrap();
        let rep = project_multibubble(
            &u,
            v,
            2,
            Some(&BubbleFamily::unit(v.clone(), scales).unwrap()),
            ProjectOptions::default(),
        )
        .unwrap();
        let mut sigma = RadialFn::zeros(v.grid());
        for (a, l) in rep.family.coeffs.iter().zip(&rep.family.scales) {
            sigma = sigma.axpy(*a, &v.dilate(*l).unwrap()).unwrap();
        }
        let again = project_multibubble(&sigma, v, 2, Some(&rep.family), ProjectOptions::default()).unwrap();
        assert!(again.distance <= 1e-10, "{}", again.distance);
    }

    #[test]
    fn energy_window() {
        let v = planar();
        let two = sharpness_family(v, &[1e-4, 1e4], &RadialFn::zeros(v.grid()), 0.0).unwrap();
        assert!(energy_window_check(&two, 2, v).unwrap().inside);
        assert!(!energy_window_check(&RadialFn::zeros(v.grid()), 1, v).unwrap().inside);
        assert!(!energy_window_check(v.profile(), 2, v).unwrap().inside);
    }

    #[test]
    fn sharpness_rejects_wide_bumps() {
        let v = planar();
        let phi = RadialFn::from_fn(v.grid(), |r| (-r).exp());
        assert!(sharpness_family(v, &[1.0], &phi, 1e-3).is_err());
    }

    #[test]
    fn elementary_trivia() {
        assert_eq!(inequality_a_ratio(1.7, 0.0, 5.0), 0.0);
        assert!(inequality_a_ratio(0.0, 2.3, 5.0) <= 1.0);
        let c = check_elementary_inequalities(5.0, 10_000, 1).unwrap();
        assert!(c.max_ratio_a.is_finite() && c.max_ratio_b.is_finite());
        assert!(c.max_ratio_a > 0.0 && c.max_ratio_b > 0.0);
    }
}
