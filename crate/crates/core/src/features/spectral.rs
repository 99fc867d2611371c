use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANS: RefCell<(FftPlanner<f64>, HashMap<usize, Arc<dyn Fft<f64>>>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn fft(buf: &mut [Complex64]) {
    let plan = PLANS.with(|cell| {
        let mut guard = cell.borrow_mut();
        let (planner, cache) = &mut *guard;
        cache
            .entry(buf.len())
            .or_insert_with(|| planner.plan_fft_forward(buf.len()))
            .clone()
    });
    plan.process(buf);
}

/// Periodic Hann taper of length `n`.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// One-sided power spectral density estimate.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Bin spacing in Hz.
    pub df: f64,
    /// Density for bins `0..=n/2`.
    pub power: Vec<f64>,
}

impl Spectrum {
    pub fn freq(&self, k: usize) -> f64 {
        k as f64 * self.df
    }

    /// Indices of bins with `lo <= f < hi` (or `<= hi` when `inclusive_hi`).
    pub fn bins(&self, lo: f64, hi: f64, inclusive_hi: bool) -> std::ops::Range<usize> {
        let eps = self.df * 1e-9;
        let first = ((lo - eps) / self.df).ceil().max(0.0) as usize;
        let last = if inclusive_hi {
            ((hi + eps) / self.df).floor() as usize + 1
        } else {
            ((hi - eps) / self.df).ceil() as usize
        };
        first.min(self.power.len())..last.min(self.power.len())
    }

    pub fn sum(&self, bins: std::ops::Range<usize>) -> f64 {
        self.power[bins].iter().sum()
    }
}

/// Hann-windowed periodogram scaled as a one-sided density.
pub fn periodogram(x: &[f64], fs: f64) -> Spectrum {
    let n = x.len();
    let w = hann(n);
    let norm: f64 = w.iter().map(|v| v * v).sum::<f64>() * fs;
    let mut buf: Vec<Complex64> = x
        .iter()
        .zip(&w)
        .map(|(v, w)| Complex64::new(v * w, 0.0))
        .collect();
    fft(&mut buf);
    let half = n / 2;
    let power = (0..=half)
        .map(|k| {
            let p = buf[k].norm_sqr() / norm;
            if k == 0 || (n % 2 == 0 && k == half) {
                p
            } else {
                2.0 * p
            }
        })
        .collect();
    Spectrum {
        df: fs / n as f64,
        power,
    }
}

/// Mean signal power from the untapered spectrum, `sum |X_k|² / N²`.
pub fn total_average_power(x: &[f64]) -> f64 {
    let n = x.len();
    if n == 0 {
        return 0.0;
    }
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft(&mut buf);
    buf.iter().map(|c| c.norm_sqr()).sum::<f64>() / (n * n) as f64
}

/// Shannon entropy (nats) of a non-negative weight vector after normalizing
/// it to probabilities. Zero total weight gives 0.
pub fn shannon_of_weights(weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    -weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| {
            let p = w / total;
            p * p.ln()
        })
        .sum::<f64>()
}
