//! Translation and differentiation of samples on a uniform `log r` lattice,
//! with power-law continuation beyond the sampled range.

const HALF_WIDTH: isize = 6;
const CENTRAL_D1: [f64; 5] = [5.0 / 6.0, -5.0 / 21.0, 5.0 / 84.0, -5.0 / 504.0, 1.0 / 1260.0];
const SNAP_RATE: f64 = 1e-3;

/// Exponential continuation past one end: `value · exp(rate · steps_outward)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Tail {
    pub value: f64,
    pub rate: f64,
}

impl Tail {
    /// Continuation matching the last `span` samples; never grows outward.
    pub fn fit(end: f64, inner: f64, span: usize, log_step: f64) -> Tail {
        let mut t = Self::fit_free(end, inner, span, log_step);
        if t.rate > 0.0 {
            t.rate = 0.0;
        }
        t
    }

    /// As [`Tail::fit`], but the continuation may grow outward.
    pub fn fit_free(end: f64, inner: f64, span: usize, log_step: f64) -> Tail {
        if end == 0.0 || inner == 0.0 || end.signum() != inner.signum() {
            return Tail {
                value: end,
                rate: if end == 0.0 { 0.0 } else { f64::NEG_INFINITY },
            };
        }
        let mut rate = (end / inner).ln() / span as f64;
        if (rate / log_step).abs() < SNAP_RATE {
            rate = 0.0;
        }
        Tail { value: end, rate }
    }

    pub fn at(&self, steps: f64) -> f64 {
        if self.rate == 0.0 {
            self.value
        } else if self.rate == f64::NEG_INFINITY {
            0.0
        } else {
            self.value * (self.rate * steps).exp()
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Extended<'a> {
    values: &'a [f64],
    left: Tail,
    right: Tail,
}

impl<'a> Extended<'a> {
    /// Continuation fitted over `span` nodes at each end.
    pub fn fitted(values: &'a [f64], span: usize, log_step: f64) -> Self {
        let n = values.len();
        let span = span.min(n - 1).max(1);
        let left = Tail::fit(values[0], values[span], span, log_step);
        let right = Tail::fit(values[n - 1], values[n - 1 - span], span, log_step);
        Self { values, left, right }
    }

    pub fn get(&self, i: isize) -> f64 {
        let n = self.values.len() as isize;
        if i < 0 {
            self.left.at((-i) as f64)
        } else if i >= n {
            self.right.at((i - n + 1) as f64)
        } else {
            self.values[i as usize]
        }
    }

    /// Samples of `F(u_j + x h)`; exact index shift when `x` is an integer.
    pub fn shifted(&self, x: f64) -> Vec<f64> {
        let n = self.values.len();
        let base = x.floor();
        let frac = x - base;
        let base = base as isize;
        if frac < 1e-12 || frac > 1.0 - 1e-12 {
            let k = base + if frac > 0.5 { 1 } else { 0 };
            return (0..n as isize).map(|j| self.get(j + k)).collect();
        }
        let w = lagrange_weights(frac);
        (0..n as isize)
            .map(|j| {
                let c = j + base;
                w.iter()
                    .enumerate()
                    .map(|(m, wm)| wm * self.get(c + m as isize - HALF_WIDTH + 1))
                    .sum()
            })
            .collect()
    }

    /// Tenth-order centered derivative with respect to `u = log r`.
    pub fn derivative(&self, log_step: f64) -> Vec<f64> {
        let n = self.values.len() as isize;
        (0..n)
            .map(|j| {
                CENTRAL_D1
                    .iter()
                    .enumerate()
                    .map(|(k, c)| {
                        let k = k as isize + 1;
                        c * (self.get(j + k) - self.get(j - k))
                    })
                    .sum::<f64>()
                    / log_step
            })
            .collect()
    }
}

/// Lagrange weights on offsets `-5..=6` evaluated at `frac ∈ (0, 1)`.
fn lagrange_weights(frac: f64) -> [f64; 12] {
    let mut w = [0.0; 12];
    for (m, wm) in w.iter_mut().enumerate() {
        let xm = m as f64 - (HALF_WIDTH - 1) as f64;
        let mut acc = 1.0;
        for k in 0..12 {
            if k != m {
                let xk = k as f64 - (HALF_WIDTH - 1) as f64;
                acc *= (frac - xk) / (xm - xk);
            }
        }
        *wm = acc;
    }
    w
}
