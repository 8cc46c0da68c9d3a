//! Two-bubble integrals, the interaction parameter and power-law regressions.

use crate::bubble::Bubble;
use crate::error::{invalid, Error, Result};
use crate::fit;
use crate::grid::partial_log_integral;
use crate::transform::{engine, hs_form, scale_free_integral};

/// Default interaction sweep.
pub const DEFAULT_QS: [f64; 7] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4];

/// `min(λ_i/λ_j, λ_j/λ_i)`.
pub fn qij(lambda_i: f64, lambda_j: f64) -> Result<f64> {
    if !(lambda_i > 0.0 && lambda_j > 0.0 && lambda_i.is_finite() && lambda_j.is_finite()) {
        return Err(invalid(format!("scales ({lambda_i}, {lambda_j}) must be positive")));
    }
    Ok((lambda_i / lambda_j).min(lambda_j / lambda_i))
}

/// Coefficients and scales of `Σ α_i V^{λ_i}`.
#[derive(Debug, Clone)]
pub struct BubbleFamily {
    pub scales: Vec<f64>,
    pub coeffs: Vec<f64>,
    pub base: Bubble,
}

impl BubbleFamily {
    pub fn new(base: Bubble, scales: Vec<f64>, coeffs: Vec<f64>) -> Result<Self> {
        if scales.is_empty() {
            return Err(invalid("a family needs at least one bubble"));
        }
        if scales.len() != coeffs.len() {
            return Err(invalid(format!(
                "{} scales but {} coefficients",
                scales.len(),
                coeffs.len()
            )));
        }
        if scales.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(invalid("scales must be positive"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(invalid("coefficients must be finite"));
        }
        Ok(Self { scales, coeffs, base })
    }

    /// Unit coefficients.
    pub fn unit(base: Bubble, scales: Vec<f64>) -> Result<Self> {
        let coeffs = vec![1.0; scales.len()];
        Self::new(base, scales, coeffs)
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    /// Largest pairwise `Q_{ij}` joined with `max |α_i - 1|`.
    pub fn delta(&self) -> f64 {
        let mut d = self.coeffs.iter().map(|a| (a - 1.0).abs()).fold(0.0, f64::max);
        for (i, &a) in self.scales.iter().enumerate() {
            for &b in &self.scales[i + 1..] {
                d = d.max((a / b).min(b / a));
            }
        }
        d
    }

    /// All `Q_{ij}` with `i < j`.
    pub fn interactions(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (i, &a) in self.scales.iter().enumerate() {
            for &b in &self.scales[i + 1..] {
                out.push((a / b).min(b / a));
            }
        }
        out
    }
}

fn check_split(v: &Bubble, alpha: f64, beta: f64) -> Result<()> {
    let crit = v.params().crit();
    if !(alpha >= 0.0 && beta >= 0.0) || ((alpha + beta) - crit).abs() > 1e-12 * crit {
        return Err(invalid(format!("exponents {alpha} + {beta} must sum to {crit}")));
    }
    Ok(())
}

/// Integrand `r^{N-t} V^α V_Q^β` per unit `log r` after reducing the scale pair.
fn reduced_integrand(v: &Bubble, lambda_i: f64, lambda_j: f64, alpha: f64, beta: f64) -> Result<Vec<f64>> {
    let q = qij(lambda_i, lambda_j)?;
    // Dilating by 1/λ_i (or 1/λ_j) leaves the integral unchanged because α + β = crit.
    let (x, y) = if lambda_j <= lambda_i {
        (v.biased_at(1.0)?, v.biased_at(q)?)
    } else {
        (v.biased_at(q)?, v.biased_at(1.0)?)
    };
    Ok(x.iter()
        .zip(&y)
        .map(|(a, b)| a.abs().powf(alpha) * b.abs().powf(beta))
        .collect())
}

/// `∫ V_{λ_i}^α V_{λ_j}^β |x|^{-t} dx` with `α + β = crit`.
pub fn two_bubble_integral(v: &Bubble, lambda_i: f64, lambda_j: f64, alpha: f64, beta: f64) -> Result<f64> {
    check_split(v, alpha, beta)?;
    let g = reduced_integrand(v, lambda_i, lambda_j, alpha, beta)?;
    Ok(scale_free_integral(v.grid(), v.params(), &g))
}

/// `⟨V^{λ_i}, V^{λ_j}⟩_{Ḣ^s}`, cross-checked against `∫ V_i^p V_j |x|^{-t}`.
pub fn hs_cross_inner(v: &Bubble, lambda_i: f64, lambda_j: f64) -> Result<f64> {
    let q = qij(lambda_i, lambda_j)?;
    let eng = engine(v.grid(), v.params().dim());
    let value = hs_form(&eng, v.params(), &v.biased_at(1.0)?, &v.biased_at(q)?);
    let p = v.params().p();
    let check = two_bubble_integral(v, lambda_i, lambda_j, p, 1.0)?;
    if ((value - check) / check).abs() > 1e-2 {
        return Err(Error::ConsistencyFailure(format!(
            "Ḣ^s cross product {value} disagrees with the weighted integral {check}"
        )));
    }
    Ok(value)
}

/// Fraction of `∫ V_i^p V_j |x|^{-t}` carried by the ball `|x| ≤ 1/λ_i`, for `λ_i ≥ λ_j`.
pub fn localized_interaction_check(v: &Bubble, lambda_i: f64, lambda_j: f64) -> Result<f64> {
    let q = qij(lambda_i, lambda_j)?;
    if lambda_i < lambda_j {
        return Err(invalid(format!("expected λ_i = {lambda_i} ≥ λ_j = {lambda_j}")));
    }
    let p = v.params().p();
    let x = v.biased_at(1.0)?;
    let y = v.biased_at(q)?;
    let g: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a.abs().powf(p) * b).collect();
    let dim = v.params().dim();
    let inside = partial_log_integral(v.grid(), dim, &g, 1.0);
    let total = scale_free_integral(v.grid(), v.params(), &g);
    Ok(inside / total)
}

/// Model for [`scaling_regression`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalingModel {
    /// `value = C Q^e` with `e` fitted.
    Power,
    /// `value = C Q^e (1 + log(1/Q))` with `e` fixed.
    PowerLog { exponent: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub exponent: f64,
    pub prefactor: f64,
    /// Root mean square of the residuals in `log value`.
    pub residual: f64,
}

/// Least-squares fit of `points = (Q, value)` in log coordinates.
pub fn scaling_regression(points: &[(f64, f64)], model: ScalingModel) -> Result<ScalingFit> {
    if points.len() < 4 {
        return Err(Error::InsufficientData {
            needed: 4,
            got: points.len(),
        });
    }
    if points.iter().any(|&(q, v)| !(q > 0.0 && v > 0.0)) {
        return Err(invalid("regression needs positive Q and values"));
    }
    let mut qs: Vec<f64> = points.iter().map(|p| p.0).collect();
    qs.sort_by(f64::total_cmp);
    if qs.windows(2).any(|w| w[0] == w[1]) {
        return Err(invalid("Q values must be distinct"));
    }
    let (exponent, log_c, resid): (f64, f64, Vec<f64>) = match model {
        ScalingModel::Power => {
            let pts: Vec<(f64, f64)> = points.iter().map(|&(q, v)| (q.ln(), v.ln())).collect();
            let (e, c) = fit::line(&pts).ok_or_else(|| invalid("degenerate regression"))?;
            let r = pts.iter().map(|&(x, y)| y - (c + e * x)).collect();
            (e, c, r)
        }
        ScalingModel::PowerLog { exponent } => {
            let ys: Vec<f64> = points
                .iter()
                .map(|&(q, v)| v.ln() - exponent * q.ln() - (1.0 - q.ln()).ln())
                .collect();
            let c = ys.iter().sum::<f64>() / ys.len() as f64;
            (exponent, c, ys.iter().map(|y| y - c).collect())
        }
    };
    let residual = (resid.iter().map(|r| r * r).sum::<f64>() / resid.len() as f64).sqrt();
    Ok(ScalingFit {
        exponent,
        prefactor: log_c.exp(),
        residual,
    })
}

/// `(Q, ∫ V^α V_Q^β |x|^{-t})` over a list of `Q`.
pub fn interaction_sweep(v: &Bubble, alpha: f64, beta: f64, qs: &[f64]) -> Result<Vec<(f64, f64)>> {
    qs.iter()
        .map(|&q| two_bubble_integral(v, 1.0, q, alpha, beta).map(|x| (q, x)))
        .collect()
}
