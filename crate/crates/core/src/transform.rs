//! Radial Fourier transform, fractional powers of the Laplacian and Sobolev pairings.
//!
//! A radial function is sampled as `F(u) = e^{cu} f(e^u)` on the uniform `u = log r`
//! lattice. Every operator used here maps `r^{-z}` to a multiple of another power, so it
//! acts on `F` as a Fourier multiplier `m(c + iω)` in `u`. The product is evaluated on a
//! zero-padded FFT of length at least `3n`.

use std::collections::HashMap;
use std::f64::consts::{LN_2, PI};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};
use crate::grid::{log_quadrature, RadialFn, RadialGrid};
use crate::logshift::Tail;
use crate::params::Params;
use crate::special::ln_gamma;

/// Below this fraction of the peak, biased outputs that follow a power law are continued by it.
const RESOLVED_FLOOR: f64 = 1e-7;
/// Below this fraction of the peak, biased outputs are treated as round-off.
const NOISE_FLOOR: f64 = 1e-13;
const SLOPE_SPAN: usize = 32;
const SCAN_FLOOR: f64 = 1e-11;
const DECAY_SPAN: usize = 16;
const MIN_STRIP: f64 = 0.02;
/// Target size of biased samples at the grid ends, relative to their peak.
const TRUNCATION_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Kernel {
    /// Multiplier `|ξ|^β`; negative `β` gives the Riesz potential.
    Power(f64),
    /// Unitary radial Fourier transform.
    Fourier,
}

impl Kernel {
    fn strip(self, n: f64) -> (f64, f64) {
        match self {
            Kernel::Power(b) => (-b, n),
            Kernel::Fourier => (0.0, n),
        }
    }

    fn eval(self, n: f64, z: Complex64) -> Complex64 {
        let lg = match self {
            Kernel::Power(b) => {
                Complex64::new(b * LN_2, 0.0) + ln_gamma((z + b) * 0.5) + ln_gamma((n - z) * 0.5)
                    - ln_gamma(z * 0.5)
                    - ln_gamma((n - z - b) * 0.5)
            }
            Kernel::Fourier => (Complex64::new(0.5 * n, 0.0) - z) * LN_2 + ln_gamma((n - z) * 0.5) - ln_gamma(z * 0.5),
        };
        lg.exp()
    }

    /// Roll-off over the upper half of the lattice band for amplifying kernels; `x = |ω|/ω_Nyquist`.
    fn taper(self, x: f64) -> f64 {
        match self {
            Kernel::Power(b) if b > 0.0 => smooth_step(2.0 - 2.0 * x),
            _ => 1.0,
        }
    }

    fn key(self) -> (u8, u64) {
        match self {
            Kernel::Power(b) => (0, b.to_bits()),
            Kernel::Fourier => (1, 0),
        }
    }
}

type MultKey = (u8, u64, u64);

/// FFT plans and multiplier tables for one `(grid, N)` pair.
pub(crate) struct Engine {
    grid: RadialGrid,
    dim: u32,
    size: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    cache: Mutex<HashMap<MultKey, Arc<[Complex64]>>>,
}

type EngineKey = (u64, u64, usize, u32);

pub(crate) fn engine(grid: &RadialGrid, dim: u32) -> Arc<Engine> {
    static ENGINES: OnceLock<Mutex<HashMap<EngineKey, Arc<Engine>>>> = OnceLock::new();
    let key = (grid.r_min().to_bits(), grid.r_max().to_bits(), grid.len(), dim);
    let map = ENGINES.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = map.lock().expect("engine registry poisoned");
    map.entry(key)
        .or_insert_with(|| Arc::new(Engine::new(grid, dim)))
        .clone()
}

impl Engine {
    fn new(grid: &RadialGrid, dim: u32) -> Self {
        let size = (3 * grid.len()).next_power_of_two();
        let mut planner = FftPlanner::new();
        Self {
            grid: grid.clone(),
            dim,
            size,
            fwd: planner.plan_fft_forward(size),
            inv: planner.plan_fft_inverse(size),
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    fn multiplier(&self, kernel: Kernel, c: f64) -> Arc<[Complex64]> {
        let (tag, bits) = kernel.key();
        let key = (tag, bits, c.to_bits());
        if let Some(m) = self.cache.lock().expect("multiplier cache poisoned").get(&key) {
            return m.clone();
        }
        let n = f64::from(self.dim);
        let m = self.size;
        let dw = 2.0 * PI / (m as f64 * self.grid.log_step());
        let table: Arc<[Complex64]> = (0..m)
            .map(|k| {
                let kk = if k <= m / 2 { k as f64 } else { k as f64 - m as f64 };
                let v = kernel.eval(n, Complex64::new(c, -kk * dw)) * kernel.taper(2.0 * kk.abs() / m as f64);
                if k == m / 2 {
                    Complex64::new(v.re, 0.0)
                } else {
                    v
                }
            })
            .collect();
        self.cache
            .lock()
            .expect("multiplier cache poisoned")
            .insert(key, table.clone());
        table
    }

    /// Applies the kernel to samples biased by `r^c`; the result is biased by `r^{c+γ}`
    /// (power kernels) or is `r^{N-c} û(1/r)` (Fourier).
    pub fn apply(&self, biased: &[f64], kernel: Kernel, c: f64) -> Vec<f64> {
        let n = self.grid.len();
        debug_assert_eq!(biased.len(), n);
        let mult = self.multiplier(kernel, c);
        let mut buf = vec![Complex64::new(0.0, 0.0); self.size];
        for (b, &x) in buf.iter_mut().zip(biased) {
            b.re = x;
        }
        self.fwd.process(&mut buf);
        for (b, m) in buf.iter_mut().zip(mult.iter()) {
            *b *= m;
        }
        self.inv.process(&mut buf);
        let scale = 1.0 / self.size as f64;
        buf[..n].iter().map(|z| z.re * scale).collect()
    }

    /// Converts a biased output back to point values, continuing the unresolved ends.
    pub fn unbias(&self, g: &[f64], e: f64) -> Vec<f64> {
        unbias_on(&self.grid, g, e)
    }

    /// `ω h Σ X_j Y_j` between samples whose biases add up to `N`.
    pub fn pair(&self, x: &[f64], y: &[f64]) -> f64 {
        let sum: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        crate::special::sphere_area(self.dim) * self.grid.log_step() * sum
    }
}

/// `C^∞` step: 0 for `x ≤ 0`, 1 for `x ≥ 1`.
fn smooth_step(x: f64) -> f64 {
    let psi = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    let (a, b) = (psi(x), psi(1.0 - x));
    a / (a + b)
}

/// `level + excess · ratio^{-k}` at `k` spans inward, fitted to three samples one span apart.
struct Plateau {
    level: f64,
    excess: f64,
    ratio: f64,
}

impl Plateau {
    fn fit(a: f64, b: f64, c: f64, max_excess: f64) -> Option<Self> {
        let (d1, d2) = (b - a, c - b);
        let ratio = d2 / d1;
        let excess = d1 / (ratio - 1.0);
        (ratio.is_finite() && ratio > 1.0 && excess.abs() <= max_excess * a.abs()).then_some(Self {
            level: a - excess,
            excess,
            ratio,
        })
    }

    fn at(&self, spans: f64) -> f64 {
        self.level + self.excess * self.ratio.powf(-spans)
    }
}

pub(crate) fn unbias_on(grid: &RadialGrid, g: &[f64], e: f64) -> Vec<f64> {
    let nodes = grid.nodes();
    let mut out: Vec<f64> = g.iter().zip(nodes).map(|(v, r)| v * r.powf(-e)).collect();
    let peak = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return out;
    }
    let n = g.len();
    let h = grid.log_step();
    let first = |floor: f64| g.iter().position(|v| v.abs() >= floor * peak).unwrap_or(0);
    let last = |floor: f64| g.iter().rposition(|v| v.abs() >= floor * peak).unwrap_or(n - 1);
    let (lo, hi) = (first(RESOLVED_FLOOR), last(RESOLVED_FLOOR));
    if hi < lo + 4 * SLOPE_SPAN {
        return out;
    }
    // Left end, walking outward from index `from` towards 0.
    let slope = |o: &[f64], a: usize, b: usize| (o[a].abs().ln() - o[b].abs().ln()) / (b as f64 - a as f64);
    let steady = |s1: f64, s2: f64| (s1 - s2).abs() <= 1e-3 * s1.abs().max(h);
    if lo > 0 {
        let ok = |k: usize| {
            let s: Vec<f64> = (0..3)
                .map(|i| slope(&out, k + (i + 1) * SLOPE_SPAN, k + i * SLOPE_SPAN))
                .collect();
            steady(s[0], s[1]) && steady(s[1], s[2])
        };
        let deepest = first(SCAN_FLOOR);
        let found = (deepest..=lo).rev().step_by(SLOPE_SPAN / 4).find(|&k| ok(k));
        let from = found.unwrap_or(deepest);
        let tail = Tail::fit_free(out[from], out[from + SLOPE_SPAN], SLOPE_SPAN, h);
        let (a, b, c) = (out[from], out[from + SLOPE_SPAN], out[from + 2 * SLOPE_SPAN]);
        let plateau = match found {
            Some(_) if tail.rate == 0.0 => Some(Plateau::fit(a, b, c, 1e-2).unwrap_or(Plateau {
                level: a,
                excess: 0.0,
                ratio: 2.0,
            })),
            Some(_) => None,
            None => None,
        };
        for j in 0..from {
            out[j] = match &plateau {
                Some(p) => p.at((from - j) as f64 / SLOPE_SPAN as f64),
                None => tail.at((from - j) as f64),
            };
        }
    }
    if hi + 1 < n {
        let ok = |k: usize| {
            let s: Vec<f64> = (0..3)
                .map(|i| slope(&out, k - (i + 1) * SLOPE_SPAN, k - i * SLOPE_SPAN))
                .collect();
            steady(s[0], s[1]) && steady(s[1], s[2])
        };
        let deepest = last(SCAN_FLOOR);
        let from = (hi..=deepest)
            .step_by(SLOPE_SPAN / 4)
            .find(|&k| ok(k))
            .unwrap_or_else(|| last(NOISE_FLOOR));
        let tail = Tail::fit_free(out[from], out[from - SLOPE_SPAN], SLOPE_SPAN, h);
        for j in from + 1..n {
            out[j] = tail.at((j - from) as f64);
        }
    }
    out
}

/// Power-law behaviour `f ~ r^{left}` at the origin and `f ~ r^{-right}` at infinity;
/// `+∞` where the samples vanish.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Decay {
    pub left: f64,
    pub right: f64,
}

pub(crate) fn decay_of(values: &[f64], grid: &RadialGrid) -> Decay {
    let n = values.len();
    let span = DECAY_SPAN.min(n / 2);
    let h = grid.log_step() * span as f64;
    let slope = |end: f64, inner: f64| -> Option<f64> {
        if end == 0.0 || inner == 0.0 || end.signum() != inner.signum() {
            None
        } else {
            Some((inner.abs().ln() - end.abs().ln()) / h)
        }
    };
    let left = slope(values[0], values[span]).unwrap_or(f64::INFINITY);
    let right = slope(values[n - 1], values[n - 1 - span]).unwrap_or(f64::INFINITY);
    Decay { left, right }
}

/// A sampled function entering an operator with bias `offset + slope · c`.
struct Biased<'a> {
    values: &'a [f64],
    offset: f64,
    slope: f64,
}

impl Biased<'_> {
    /// Largest end sample relative to the peak, after biasing.
    fn end_ratio(&self, grid: &RadialGrid, c: f64) -> f64 {
        let e = self.offset + self.slope * c;
        let n = self.values.len();
        let log_at = |j: usize| {
            let v = self.values[j].abs();
            if v == 0.0 {
                f64::NEG_INFINITY
            } else {
                e * grid.log_node(j) + v.ln()
            }
        };
        let peak = (0..n).map(log_at).fold(f64::NEG_INFINITY, f64::max);
        if peak == f64::NEG_INFINITY {
            return 0.0;
        }
        (log_at(0).max(log_at(n - 1)) - peak).exp()
    }
}

/// Chooses the bias `c ∈ (lo, hi)` closest to `preferred` for which every input is
/// negligible at the truncation points, or the least-truncated one otherwise.
fn pick_bias(grid: &RadialGrid, inputs: &[Biased<'_>], lo: f64, hi: f64, preferred: f64, what: &str) -> Result<f64> {
    if !(hi - lo > MIN_STRIP) {
        return Err(Error::InsufficientDecay(format!(
            "{what}: admissible exponent window ({lo:.4}, {hi:.4}) is empty"
        )));
    }
    let margin = 0.1 * (hi - lo);
    let (a, b) = (lo + margin, hi - margin);
    let mut candidates: Vec<f64> = (0..=64).map(|k| a + (b - a) * k as f64 / 64.0).collect();
    if preferred > a && preferred < b {
        candidates.push(preferred);
    }
    let ratio = |c: f64| inputs.iter().map(|x| x.end_ratio(grid, c)).fold(0.0, f64::max);
    let scored: Vec<(f64, f64)> = candidates.iter().map(|&c| (c, ratio(c))).collect();
    let best = scored
        .iter()
        .filter(|(_, r)| *r <= TRUNCATION_TOL)
        .min_by(|x, y| (x.0 - preferred).abs().total_cmp(&(y.0 - preferred).abs()))
        .or_else(|| scored.iter().min_by(|x, y| x.1.total_cmp(&y.1)))
        .expect("candidate list is non-empty");
    Ok(best.0)
}

fn input_bias(f: &RadialFn, kernel: Kernel, n: f64, preferred: f64, what: &str) -> Result<f64> {
    let d = decay_of(f.values(), f.grid());
    let (s_lo, s_hi) = kernel.strip(n);
    let input = Biased {
        values: f.values(),
        offset: 0.0,
        slope: 1.0,
    };
    pick_bias(
        f.grid(),
        &[input],
        s_lo.max(-d.left),
        s_hi.min(d.right),
        preferred,
        what,
    )
}

fn check_nan(f: &RadialFn) -> Result<()> {
    match f.values().iter().position(|v| v.is_nan()) {
        Some(j) => Err(Error::InvalidData(format!("NaN at node {j}"))),
        None => Ok(()),
    }
}

/// Size of the input at the truncation points, relative to its peak, in the biased frame
/// used by a transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailCheck {
    pub left: f64,
    pub right: f64,
}

impl TailCheck {
    fn of(biased: &[f64]) -> Self {
        let peak = biased.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if peak == 0.0 {
            return Self { left: 0.0, right: 0.0 };
        }
        Self {
            left: biased[0].abs() / peak,
            right: biased[biased.len() - 1].abs() / peak,
        }
    }

    pub fn warning(&self) -> bool {
        self.left.max(self.right) > crate::grid::TAIL_WARNING
    }
}

/// Samples `û(ρ)` of a radial Fourier transform on the reciprocal grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqFn {
    pub grid: RadialGrid,
    pub values: Vec<f64>,
    pub tail: TailCheck,
}

fn fourier_on(f: &RadialFn, params: &Params) -> Result<(RadialGrid, Vec<f64>, TailCheck)> {
    check_nan(f)?;
    let n = params.n();
    let eng = engine(f.grid(), params.dim());
    let c = input_bias(f, Kernel::Fourier, n, 0.5 * n, "radial Fourier transform")?;
    let x = f.biased(c);
    let tail = TailCheck::of(&x);
    let g = eng.apply(&x, Kernel::Fourier, c);
    // û(1/r_j) = r_j^{N-c} G_j; reverse so frequencies ascend.
    let reversed: Vec<f64> = g.into_iter().rev().collect();
    let rgrid = f.grid().reciprocal();
    let values = unbias_on(&rgrid, &reversed, n - c);
    Ok((rgrid, values, tail))
}

/// Unitary radial Fourier transform `û(ρ) = (2π)^{-N/2} ∫ u(x) e^{-ix·ξ} dx`, `|ξ| = ρ`.
pub fn radial_fourier(f: &RadialFn, params: &Params) -> Result<FreqFn> {
    let (grid, values, tail) = fourier_on(f, params)?;
    Ok(FreqFn { grid, values, tail })
}

/// Inverse of [`radial_fourier`]; returns samples on the grid reciprocal to `f.grid`.
pub fn inverse_radial_fourier(f: &FreqFn, params: &Params) -> Result<RadialFn> {
    let g = RadialFn::new(&f.grid, f.values.clone())?;
    let (grid, values, _) = fourier_on(&g, params)?;
    Ok(RadialFn::from_parts(&grid, values))
}

/// `(-Δ)^{β/2} f` for `β ∈ (0, 2]`.
pub fn frac_power(f: &RadialFn, beta: f64, params: &Params) -> Result<RadialFn> {
    if !(beta > 0.0 && beta <= 2.0) {
        return Err(invalid(format!("β = {beta} outside (0, 2]")));
    }
    apply_power(f, beta, params)
}

/// Riesz potential `(-Δ)^{-β/2} f` for `β ∈ (0, 2]`, `β < N`.
pub fn frac_inverse(f: &RadialFn, beta: f64, params: &Params) -> Result<RadialFn> {
    if !(beta > 0.0 && beta <= 2.0) {
        return Err(invalid(format!("β = {beta} outside (0, 2]")));
    }
    if params.n() <= beta {
        return Err(invalid(format!(
            "Riesz potential needs N > β, got N = {}",
            params.dim()
        )));
    }
    apply_power(f, -beta, params)
}

fn apply_power(f: &RadialFn, beta: f64, params: &Params) -> Result<RadialFn> {
    check_nan(f)?;
    if f.values().iter().all(|&v| v == 0.0) {
        return Ok(RadialFn::zeros(f.grid()));
    }
    let n = params.n();
    let kernel = Kernel::Power(beta);
    let preferred = 0.5 * (n - beta);
    let c = input_bias(f, kernel, n, preferred, "fractional power")?;
    let eng = engine(f.grid(), params.dim());
    let g = eng.apply(&f.biased(c), kernel, c);
    Ok(RadialFn::from_parts(f.grid(), eng.unbias(&g, c + beta)))
}

/// `∫ u · (-Δ)^{β/2} v dx` with the bias split chosen from the decay of both factors.
pub(crate) fn pairing(u: &RadialFn, v: &RadialFn, beta: f64, params: &Params) -> Result<f64> {
    if u.grid() != v.grid() {
        return Err(invalid("radial functions live on different grids"));
    }
    check_nan(u)?;
    check_nan(v)?;
    if u.values().iter().all(|&x| x == 0.0) || v.values().iter().all(|&x| x == 0.0) {
        return Ok(0.0);
    }
    let n = params.n();
    let du = decay_of(u.values(), u.grid());
    let dv = decay_of(v.values(), v.grid());
    // v carries bias c, its image c + β, and u the complement N - c - β.
    let lo = (-beta).max(-dv.left).max(n - beta - du.right);
    let hi = n.min(dv.right).min(n - beta + du.left);
    let inputs = [
        Biased {
            values: v.values(),
            offset: 0.0,
            slope: 1.0,
        },
        Biased {
            values: u.values(),
            offset: n - beta,
            slope: -1.0,
        },
    ];
    let c = pick_bias(u.grid(), &inputs, lo, hi, 0.5 * (n - beta), "Sobolev pairing")?;
    let eng = engine(u.grid(), params.dim());
    let lv = eng.apply(&v.biased(c), Kernel::Power(beta), c);
    Ok(eng.pair(&u.biased(n - c - beta), &lv))
}

/// `⟨(-Δ)^{γ/2} u, (-Δ)^{γ/2} v⟩_{L²}` for `γ ∈ [0, 1)`.
pub fn sobolev_inner(u: &RadialFn, v: &RadialFn, order: f64, params: &Params) -> Result<f64> {
    if !(0.0..1.0).contains(&order) {
        return Err(invalid(format!("Sobolev order {order} outside [0, 1)")));
    }
    pairing(u, v, 2.0 * order, params)
}

/// Homogeneous `Ḣ^s` inner product.
pub fn hs_inner(u: &RadialFn, v: &RadialFn, params: &Params) -> Result<f64> {
    pairing(u, v, 2.0 * params.s(), params)
}

/// `‖(-Δ)^{-s/2} f‖_{L²}`, the norm of `f` in the dual of `Ḣ^s`.
pub fn dual_norm(f: &RadialFn, params: &Params) -> Result<f64> {
    Ok(pairing(f, f, -2.0 * params.s(), params)?.max(0.0).sqrt())
}

/// Forward `(-Δ)^s` on samples biased by `r^{(N-2s)/2}`; output biased by `r^{(N+2s)/2}`.
pub(crate) fn hs_operator(eng: &Engine, params: &Params, biased: &[f64]) -> Vec<f64> {
    eng.apply(biased, Kernel::Power(2.0 * params.s()), params.scaling_exponent())
}

/// `(-Δ)^{-s}` on samples biased by `r^{(N+2s)/2}`; output biased by `r^{(N-2s)/2}`.
pub(crate) fn riesz_operator(eng: &Engine, params: &Params, biased: &[f64]) -> Vec<f64> {
    let c = 0.5 * (params.n() + 2.0 * params.s());
    eng.apply(biased, Kernel::Power(-2.0 * params.s()), c)
}

/// `Ḣ^s` form between samples both biased by `r^{(N-2s)/2}`.
pub(crate) fn hs_form(eng: &Engine, params: &Params, x: &[f64], y: &[f64]) -> f64 {
    eng.pair(x, &hs_operator(eng, params, y))
}

/// Quadrature of a scale-free integrand per unit `log r`.
pub(crate) fn scale_free_integral(grid: &RadialGrid, params: &Params, g: &[f64]) -> f64 {
    log_quadrature(grid, params.dim(), g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_log_grid;

    fn grid() -> RadialGrid {
        make_log_grid(1e-16, 1e16, 4097).unwrap()
    }

    fn params(dim: u32) -> Params {
        Params::new(dim, 0.75, 0.5).unwrap()
    }

    fn gauss(g: &RadialGrid) -> RadialFn {
        RadialFn::from_fn(g, |r| (-0.5 * r * r).exp())
    }

    fn window(g: &RadialGrid, lo: f64, hi: f64) -> impl Iterator<Item = (usize, f64)> + '_ {
        g.nodes()
            .iter()
            .copied()
            .enumerate()
            .filter(move |&(_, r)| r >= lo && r <= hi)
    }

    #[test]
    fn gaussian_is_self_dual() {
        let g = grid();
        for dim in [2, 3] {
            let f = radial_fourier(&gauss(&g), &params(dim)).unwrap();
            assert!(!f.tail.warning());
            for (j, rho) in window(&f.grid, 1e-2, 1e2) {
                let want = (-0.5 * rho * rho).exp();
                if want > 1e-8 {
                    assert!(((f.values[j] - want) / want).abs() < 1e-6, "N={dim} ρ={rho}");
                }
            }
        }
    }

    #[test]
    fn round_trip() {
        let g = grid();
        let p = params(3);
        let f = RadialFn::from_fn(&g, |r| (1.0 + r * r).powf(-1.5) * (1.0 + 0.3 * r.ln().sin()));
        let back = inverse_radial_fourier(&radial_fourier(&f, &p).unwrap(), &p).unwrap();
        for (j, _) in window(&g, 1e-5, 1e5) {
            let (a, b) = (back.values()[j], f.values()[j]);
            assert!(((a - b) / b).abs() < 1e-9, "{} {a} {b}", g.nodes()[j]);
        }
    }

    #[test]
    fn laplacian_of_gaussian() {
        let g = grid();
        for dim in [2, 3] {
            let p = params(dim);
            let out = frac_power(&gauss(&g), 2.0, &p).unwrap();
            let n = p.n();
            for (j, r) in window(&g, 1e-2, 1e2) {
                let want = (n - r * r) * (-0.5 * r * r).exp();
                if out.values()[j].abs() > 1e-8 && (r * r - n).abs() > 1e-2 {
                    assert!(
                        ((out.values()[j] - want) / want).abs() < 1e-5,
                        "N={dim} r={r} {} {want}",
                        out.values()[j]
                    );
                }
            }
        }
    }

    #[test]
    fn semigroup_and_inverse() {
        let g = grid();
        let p = params(2);
        let f = gauss(&g);
        let a = frac_power(&frac_power(&f, 0.6, &p).unwrap(), 0.9, &p).unwrap();
        let b = frac_power(&f, 1.5, &p).unwrap();
        for (j, _) in window(&g, 1e-3, 1e2) {
            let (x, y) = (a.values()[j], b.values()[j]);
            if y.abs() > 1e-8 {
                assert!(((x - y) / y).abs() < 1e-6);
            }
        }
        let back = frac_inverse(&frac_power(&f, 1.2, &p).unwrap(), 1.2, &p).unwrap();
        for (j, _) in window(&g, 1e-4, 5.0) {
            let (x, y) = (back.values()[j], f.values()[j]);
            assert!(((x - y) / y).abs() < 1e-6);
        }
        assert!(frac_power(&f, 2.5, &p).is_err());
        assert!(frac_inverse(&f, 0.0, &p).is_err());
        let zero = frac_inverse(&RadialFn::zeros(&g), 1.0, &p).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn multiplier_is_linear_in_the_biased_frame() {
        let g = grid();
        let eng = engine(&g, 2);
        let f = RadialFn::from_fn(&g, |r| (-(r.ln() - 1.0).powi(2)).exp()).biased(0.5);
        let h = RadialFn::from_fn(&g, |r| (1.0 + r * r).powi(-3)).biased(0.5);
        let a = -2.3;
        let mixed: Vec<f64> = f.iter().zip(&h).map(|(x, y)| x + a * y).collect();
        let lhs = eng.apply(&mixed, Kernel::Power(1.3), 0.5);
        let (pf, ph) = (
            eng.apply(&f, Kernel::Power(1.3), 0.5),
            eng.apply(&h, Kernel::Power(1.3), 0.5),
        );
        let peak = lhs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for ((x, y), z) in lhs.iter().zip(&pf).zip(&ph) {
            assert!((x - (y + a * z)).abs() <= 1e-12 * peak);
        }
    }

    #[test]
    fn plancherel_and_isometry() {
        let g = grid();
        let p = params(3);
        let u = gauss(&g);
        let v = RadialFn::from_fn(&g, |r| (1.0 + r * r).powf(-2.0));
        let direct = crate::grid::integrate_radial(&u.mul(&v).unwrap(), 0.0, &p).unwrap();
        let spectral = sobolev_inner(&u, &v, 0.0, &p).unwrap();
        assert!(((direct - spectral) / direct).abs() < 1e-8);
        let hs = hs_inner(&u, &u, &p).unwrap();
        let d = dual_norm(&frac_power(&u, 2.0 * p.s(), &p).unwrap(), &p).unwrap();
        assert!((d - hs.sqrt()).abs() < 1e-6 * hs.sqrt());
        assert_eq!(dual_norm(&RadialFn::zeros(&g), &p).unwrap(), 0.0);
    }

    #[test]
    fn scale_equivariance_on_node_shifts() {
        let g = grid();
        let p = params(2);
        let f = RadialFn::from_fn(&g, |r| (-r).exp() * (1.0 + r));
        let k = 128;
        let lambda = g.nodes()[2048 + k] / g.nodes()[2048];
        // f(λ r) is an index shift by k.
        let mut shifted = vec![0.0; g.len()];
        for j in 0..g.len() - k {
            shifted[j] = f.values()[j + k];
        }
        let fs = RadialFn::new(&g, shifted).unwrap();
        let a = frac_power(&fs, 0.8, &p).unwrap();
        let b = frac_power(&f, 0.8, &p).unwrap();
        for (j, _) in window(&g, 1e-3, 1e1) {
            let want = lambda.powf(0.8) * b.values()[j + k];
            assert!(((a.values()[j] - want) / want).abs() < 1e-8);
        }
    }
}
