//! Linearized eigenproblem `(-Δ)^s ψ = μ V^{p-1} |x|^{-t} ψ` on radial functions and the
//! spectral-gap inequality.
//!
//! With `Ψ = r^b ψ` and `D = (r^b V)^{(p-1)/2}` the problem becomes `Ψ = μ C D² Ψ`, where `C`
//! is the Riesz potential acting on samples biased by `r^{(N+2s)/2}`. The symmetric compact
//! operator `K = D C D` has eigenvalues `1/μ`, found by Lanczos with full reorthogonalization.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::bubble::Bubble;
use crate::error::{invalid, Error, Result};
use crate::grid::{RadialFn, RadialGrid};
use crate::params::Params;
use crate::transform::{engine, hs_form, riesz_operator, unbias_on, Engine};

const MAX_LANCZOS: usize = 400;
const RITZ_TOL: f64 = 1e-12;
const UNDERFLOW: f64 = 1e-300;

#[derive(Debug, Clone)]
pub struct SpectralReport {
    /// `μ_1 ≤ μ_2 ≤ …`.
    pub eigenvalues: Vec<f64>,
    /// Eigenfunctions with `∫ ψ² V^{p-1} |x|^{-t} = 1`.
    pub eigenfunctions: Vec<RadialFn>,
    /// `μ_3 - p`.
    pub gap_margin: f64,
    pub params: Params,
    pub scale: f64,
    /// Nodes where the weight underflows and which therefore drop out of the problem.
    pub trimmed_nodes: usize,
    pub lanczos_steps: usize,
    biased: Vec<Vec<f64>>,
    weight: Vec<f64>,
}

impl SpectralReport {
    /// `(N, s, t, lambda, k, mu_1..mu_k, gap_margin, trimmed_nodes)` as `key = value` lines.
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let p = &self.params;
        let mut out = String::new();
        let _ = writeln!(out, "N = {}", p.dim());
        let _ = writeln!(out, "s = {:?}", p.s());
        let _ = writeln!(out, "t = {:?}", p.t());
        let _ = writeln!(out, "lambda = {:?}", self.scale);
        let _ = writeln!(out, "k = {}", self.eigenvalues.len());
        for (i, mu) in self.eigenvalues.iter().enumerate() {
            let _ = writeln!(out, "mu_{} = {:?}", i + 1, mu);
        }
        let _ = writeln!(out, "gap_margin = {:?}", self.gap_margin);
        let _ = writeln!(out, "trimmed_nodes = {}", self.trimmed_nodes);
        out
    }

    /// Weighted pairing `∫ f g V^{p-1} |x|^{-t}` on biased samples.
    fn b_form(&self, eng: &Engine, x: &[f64], y: &[f64]) -> f64 {
        let xy: Vec<f64> = x.iter().zip(&self.weight).map(|(a, w)| a * w).collect();
        eng.pair(&xy, y)
    }

    /// Cosine similarity in the weighted pairing between eigenfunction `k` and `f`.
    pub fn cosine(&self, k: usize, f: &RadialFn) -> Result<f64> {
        let eng = engine(f.grid(), self.params.dim());
        let g = f.biased(self.params.scaling_exponent());
        let psi = self
            .biased
            .get(k)
            .ok_or_else(|| invalid(format!("no eigenfunction {k}")))?;
        let num = self.b_form(&eng, psi, &g);
        Ok(num / (self.b_form(&eng, psi, psi) * self.b_form(&eng, &g, &g)).sqrt())
    }

    /// `⟨ψ_k, ψ_k⟩_{Ḣ^s} / ∫ ψ_k² V^{p-1} |x|^{-t}`.
    pub fn rayleigh_quotient(&self, k: usize) -> Result<f64> {
        let grid = self.eigenfunctions[0].grid();
        let eng = engine(grid, self.params.dim());
        let psi = self
            .biased
            .get(k)
            .ok_or_else(|| invalid(format!("no eigenfunction {k}")))?;
        Ok(hs_form(&eng, &self.params, psi, psi) / self.b_form(&eng, psi, psi))
    }

    /// Weighted pairing between eigenfunctions `i` and `j`.
    pub fn b_inner(&self, i: usize, j: usize) -> f64 {
        let eng = engine(self.eigenfunctions[0].grid(), self.params.dim());
        self.b_form(&eng, &self.biased[i], &self.biased[j])
    }
}

/// The `k` smallest eigenpairs of the linearization at `V^λ`.
pub fn linearized_eigs(v: &Bubble, k: usize, lambda: f64) -> Result<SpectralReport> {
    if k < 3 {
        return Err(invalid(format!("k = {k}; at least three eigenpairs are needed")));
    }
    let params = *v.params();
    let grid = v.grid().clone();
    let eng = engine(&grid, params.dim());
    let u = v.biased_at(lambda)?;
    let p = params.p();
    let weight: Vec<f64> = u.iter().map(|x| x.abs().powf(p - 1.0)).collect();
    let wmax = weight.iter().fold(0.0f64, |m, &w| m.max(w));
    let trimmed_nodes = weight.iter().filter(|&&w| w < UNDERFLOW * wmax).count();
    let d: Vec<f64> = weight
        .iter()
        .map(|&w| if w < UNDERFLOW * wmax { 0.0 } else { w.sqrt() })
        .collect();
    let apply = |x: &[f64]| -> Vec<f64> {
        let dx: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a * b).collect();
        let cx = riesz_operator(&eng, &params, &dx);
        cx.iter().zip(&d).map(|(a, b)| a * b).collect()
    };
    let start: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(&d)
        .map(|(r, w)| w * (1.0 + 0.3 * (r * lambda).ln().tanh()))
        .collect();
    let (kappas, vectors, steps) = lanczos_top(apply, start, k)?;

    let b = params.scaling_exponent();
    let mut eigenvalues = Vec::with_capacity(k);
    let mut eigenfunctions = Vec::with_capacity(k);
    let mut biased = Vec::with_capacity(k);
    for (kappa, phi) in kappas.iter().zip(&vectors) {
        if !(*kappa > 0.0) {
            return Err(Error::SolverFailure {
                message: format!("non-positive Ritz value {kappa}"),
                history: kappas.clone(),
            });
        }
        let mu = 1.0 / kappa;
        let dphi: Vec<f64> = phi.iter().zip(&d).map(|(a, b)| a * b).collect();
        let mut psi: Vec<f64> = riesz_operator(&eng, &params, &dphi).iter().map(|x| mu * x).collect();
        let wx: Vec<f64> = psi.iter().zip(&weight).map(|(a, w)| a * w).collect();
        let mut norm = eng.pair(&wx, &psi).sqrt();
        // Fix the sign by the value at the peak of the weight.
        let peak = weight
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(j, _)| j)
            .unwrap_or(0);
        if psi[peak] < 0.0 {
            norm = -norm;
        }
        psi.iter_mut().for_each(|x| *x /= norm);
        eigenfunctions.push(RadialFn::from_parts(&grid, unbias_on(&grid, &psi, b)));
        eigenvalues.push(mu);
        biased.push(psi);
    }
    let gap_margin = eigenvalues[2] - p;
    Ok(SpectralReport {
        eigenvalues,
        eigenfunctions,
        gap_margin,
        params,
        scale: lambda,
        trimmed_nodes,
        lanczos_steps: steps,
        biased,
        weight,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Largest `k` eigenpairs of a symmetric operator, in descending order.
fn lanczos_top(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    start: Vec<f64>,
    k: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>, usize)> {
    let norm = dot(&start, &start).sqrt();
    if !(norm > 0.0) {
        return Err(Error::DegenerateInput("zero Lanczos start vector".into()));
    }
    let mut basis: Vec<Vec<f64>> = vec![start.iter().map(|x| x / norm).collect()];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut history = Vec::new();
    for m in 1..=MAX_LANCZOS {
        let q = &basis[m - 1];
        let mut w = apply(q);
        alpha.push(dot(q, &w));
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let bnext = dot(&w, &w).sqrt();
        let check = m >= 2 * k && (m % 8 == 0 || bnext < 1e-14);
        if check || m == MAX_LANCZOS {
            let t = tridiagonal(&alpha, &beta);
            let eig = SymmetricEigen::new(t);
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
            let top = &order[..k.min(m)];
            let scale = eig.eigenvalues[order[0]].abs();
            let worst = top
                .iter()
                .map(|&i| (bnext * eig.eigenvectors[(m - 1, i)]).abs())
                .fold(0.0f64, f64::max);
            history.push(worst / scale);
            if worst <= RITZ_TOL * scale || bnext < 1e-14 {
                let values = top.iter().map(|&i| eig.eigenvalues[i]).collect();
                let vectors = top
                    .iter()
                    .map(|&i| {
                        let mut x = vec![0.0; basis[0].len()];
                        for (j, b) in basis.iter().enumerate() {
                            let c = eig.eigenvectors[(j, i)];
                            x.iter_mut().zip(b).for_each(|(a, y)| *a += c * y);
                        }
                        x
                    })
                    .collect();
                return Ok((values, vectors, m));
            }
        }
        beta.push(bnext);
        basis.push(w.iter().map(|x| x / bnext).collect());
    }
    Err(Error::SolverFailure {
        message: "Lanczos did not converge".into(),
        history,
    })
}

fn tridiagonal(alpha: &[f64], beta: &[f64]) -> DMatrix<f64> {
    let m = alpha.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// `∫ f² V^{p-1}|x|^{-t}` against `⟨f,f⟩_{Ḣ^s}/μ_3` after removing the `V` and `V̇` components.
pub fn spectral_gap_check(v: &Bubble, f: &RadialFn, report: &SpectralReport) -> Result<GapCheck> {
    gap_check(v, f, report, true)
}

/// As [`spectral_gap_check`] without the projection; diagnostic only.
pub fn spectral_gap_check_unprojected(v: &Bubble, f: &RadialFn, report: &SpectralReport) -> Result<GapCheck> {
    gap_check(v, f, report, false)
}

fn gap_check(v: &Bubble, f: &RadialFn, report: &SpectralReport, project: bool) -> Result<GapCheck> {
    if f.grid() != v.grid() {
        return Err(invalid("test function and bubble live on different grids"));
    }
    let params = v.params();
    let eng = engine(v.grid(), params.dim());
    let mut g = f.biased(params.scaling_exponent());
    if project {
        // Gram-Schmidt in the weighted pairing; V and V̇ are orthogonal there only up to
        // discretization, so the pair is orthonormalized first.
        let a = v.biased_at(report.scale)?;
        let b = v.biased_log_derivative_at(report.scale)?;
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for mut x in [a, b] {
            for e in &basis {
                let c = report.b_form(&eng, e, &x);
                x.iter_mut().zip(e).for_each(|(y, z)| *y -= c * z);
            }
            let n = report.b_form(&eng, &x, &x).sqrt();
            x.iter_mut().for_each(|y| *y /= n);
            basis.push(x);
        }
        let size = report.b_form(&eng, &g, &g).sqrt();
        for e in &basis {
            let c = report.b_form(&eng, e, &g);
            g.iter_mut().zip(e).for_each(|(y, z)| *y -= c * z);
        }
        if report.b_form(&eng, &g, &g).sqrt() <= 1e-12 * size {
            return Err(Error::DegenerateInput("test function lies in span{V, V̇}".into()));
        }
    }
    let lhs = report.b_form(&eng, &g, &g);
    if !(lhs > 0.0) {
        return Err(Error::DegenerateInput("test function vanishes on the weight".into()));
    }
    let rhs = hs_form(&eng, params, &g, &g) / report.eigenvalues[2];
    Ok(GapCheck {
        lhs,
        rhs,
        ratio: lhs / rhs,
    })
}

/// Random smooth radial test function: a few Gaussians in `log r` near the unit scale.
pub fn random_bump(grid: &RadialGrid, rng: &mut impl Rng) -> RadialFn {
    let terms: Vec<(f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.random_range(-1.0..1.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(0.3..2.0),
            )
        })
        .collect();
    RadialFn::from_fn(grid, |r| {
        let u = r.ln();
        terms
            .iter()
            .map(|(a, c, w)| a * (-(u - c).powi(2) / (2.0 * w * w)).exp())
            .sum()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interaction::tests::planar;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::OnceLock;

    fn report() -> &'static SpectralReport {
        static R: OnceLock<SpectralReport> = OnceLock::new();
        R.get_or_init(|| linearized_eigs(planar(), 5, 1.0).unwrap())
    }

    #[test]
    fn first_two_eigenpairs() {
        let v = planar();
        let r = report();
        let p = v.params().p();
        assert!((r.eigenvalues[0] - 1.0).abs() < 1e-3, "{:?}", r.eigenvalues);
        assert!((r.eigenvalues[1] - p).abs() < 1e-2, "{:?}", r.eigenvalues);
        assert!(r.gap_margin > 0.0);
        assert!(r.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        assert!(r.cosine(0, v.profile()).unwrap().abs() >= 0.999);
        let vd = v.derivative(1.0).unwrap();
        assert!(r.cosine(1, &vd).unwrap().abs() >= 0.995);
    }

    #[test]
    fn eigenfunctions_orthonormal_and_rayleigh() {
        let r = report();
        for i in 0..r.eigenvalues.len() {
            assert!((r.b_inner(i, i) - 1.0).abs() < 1e-12);
            for j in 0..i {
                assert!(r.b_inner(i, j).abs() < 1e-8, "{i} {j}: {}", r.b_inner(i, j));
            }
            let q = r.rayleigh_quotient(i).unwrap();
            assert!(
                (q / r.eigenvalues[i] - 1.0).abs() < 1e-6,
                "{i}: {q} {}",
                r.eigenvalues[i]
            );
        }
    }

    #[test]
    fn eigenvalues_do_not_depend_on_scale() {
        let a = report();
        let b = linearized_eigs(planar(), 5, 100.0).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues).take(3) {
            assert!((x / y - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn gap_inequality() {
        let v = planar();
        let r = report();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let f = random_bump(v.grid(), &mut rng);
            let c = spectral_gap_check(v, &f, r).unwrap();
            assert!(c.ratio <= 1.0 + 1e-3, "{c:?}");
        }
        let c = spectral_gap_check(v, &r.eigenfunctions[2], r).unwrap();
        assert!((c.ratio - 1.0).abs() < 1e-3, "{c:?}");
        let c = spectral_gap_check_unprojected(v, v.profile(), r).unwrap();
        assert!((c.ratio / r.eigenvalues[2] - 1.0).abs() < 1e-3, "{c:?}");
        assert!(matches!(
            spectral_gap_check(v, v.profile(), r),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn rejects_small_k() {
        assert!(linearized_eigs(planar(), 2, 1.0).is_err());
    }

    #[test]
    fn report_text_lists_eigenvalues() {
        let t = report().to_text();
        assert!(t.contains("mu_3 = ") && t.contains("trimmed_nodes = "));
    }
}
