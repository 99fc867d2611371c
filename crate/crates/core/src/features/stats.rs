//! Small descriptive statistics shared by the extractors. Degenerate
//! inputs (zero variance) yield 0 rather than NaN.

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population variance.
pub fn variance(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}

pub fn std_dev(x: &[f64]) -> f64 {
    variance(x).sqrt()
}

/// Population standard deviation, reported as exactly 0 when the spread is
/// rounding noise relative to the level of `x`.
pub fn std_dev_exact(x: &[f64]) -> f64 {
    let v = variance(x);
    if negligible_spread(x, v) {
        0.0
    } else {
        v.sqrt()
    }
}

fn central_moments(x: &[f64]) -> (f64, f64, f64) {
    let m = mean(x);
    let n = x.len() as f64;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in x {
        let d = v - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    (m2 / n, m3 / n, m4 / n)
}

/// Whether the spread is too small relative to the level to be meaningful.
fn negligible_spread(x: &[f64], m2: f64) -> bool {
    let level = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
    m2 <= (level * 1e-12).powi(2)
}

/// Biased sample skewness `m3 / m2^1.5`.
pub fn skewness(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let (m2, m3, _) = central_moments(x);
    if negligible_spread(x, m2) {
        0.0
    } else {
        m3 / m2.powf(1.5)
    }
}

/// Pearson (non-excess) kurtosis `m4 / m2²`.
pub fn kurtosis(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let (m2, _, m4) = central_moments(x);
    if negligible_spread(x, m2) {
        0.0
    } else {
        m4 / (m2 * m2)
    }
}

pub fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

pub fn sorted(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Linear-interpolation quantile on already sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => 0.0,
        1 => sorted[0],
        n => {
            let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            let frac = pos - lo as f64;
            sorted[lo] + (sorted[hi] - sorted[lo]) * frac
        }
    }
}

pub fn median(x: &[f64]) -> f64 {
    quantile_sorted(&sorted(x), 0.5)
}

/// Strict sign changes of the mean-removed sequence.
pub fn zero_crossings(x: &[f64]) -> usize {
    let m = mean(x);
    x.windows(2)
        .filter(|w| (w[0] - m) * (w[1] - m) < 0.0)
        .count()
}

/// Strict local maxima and minima (`x[i-1] < x[i] > x[i+1]` and the reverse).
pub fn local_extrema(x: &[f64]) -> (usize, usize) {
    let mut maxima = 0;
    let mut minima = 0;
    for w in x.windows(3) {
        if w[1] > w[0] && w[1] > w[2] {
            maxima += 1;
        } else if w[1] < w[0] && w[1] < w[2] {
            minima += 1;
        }
    }
    (maxima, minima)
}
