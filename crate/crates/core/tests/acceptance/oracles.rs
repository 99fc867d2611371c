//! Feature definitions written out directly: quadratic loops, a plain DFT,
//! no shared helpers with the library.

use std::f64::consts::PI;

pub fn mean(x: &[f64]) -> f64 {
    let mut s = 0.0;
    for v in x {
        s += v;
    }
    s / x.len() as f64
}

/// `(1/n) Σ (x - mean)^p`.
pub fn central(x: &[f64], p: i32) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(p)).sum::<f64>() / x.len() as f64
}

pub fn pop_std(x: &[f64]) -> f64 {
    central(x, 2).sqrt()
}

pub fn skewness(x: &[f64]) -> f64 {
    central(x, 3) / central(x, 2).powf(1.5)
}

pub fn kurtosis(x: &[f64]) -> f64 {
    central(x, 4) / central(x, 2).powi(2)
}

pub fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

pub fn zero_crossings(x: &[f64]) -> usize {
    let m = mean(x);
    let mut count = 0;
    for i in 1..x.len() {
        let (a, b) = (x[i - 1] - m, x[i] - m);
        if (a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0) {
            count += 1;
        }
    }
    count
}

pub fn maxima_minima(x: &[f64]) -> (usize, usize) {
    let (mut hi, mut lo) = (0, 0);
    for i in 1..x.len().saturating_sub(1) {
        if x[i] > x[i - 1] && x[i] > x[i + 1] {
            hi += 1;
        }
        if x[i] < x[i - 1] && x[i] < x[i + 1] {
            lo += 1;
        }
    }
    (hi, lo)
}

/// Quantile by linear interpolation between closest ranks.
pub fn quantile(x: &[f64], q: f64) -> f64 {
    let mut s = x.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let h = q * (s.len() - 1) as f64;
    let i = h.floor() as usize;
    if i + 1 >= s.len() {
        return s[s.len() - 1];
    }
    s[i] + (h - i as f64) * (s[i + 1] - s[i])
}

/// One-sided density from a plain DFT of the `sin²`-tapered window, with
/// bin frequencies.
pub fn periodogram(x: &[f64], fs: f64) -> Vec<(f64, f64)> {
    let n = x.len();
    let w: Vec<f64> = (0..n).map(|t| (PI * t as f64 / n as f64).sin().powi(2)).collect();
    let energy: f64 = w.iter().map(|v| v * v).sum();
    (0..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for t in 0..n {
                let phase = 2.0 * PI * ((k * t) % n) as f64 / n as f64;
                re += x[t] * w[t] * phase.cos();
                im -= x[t] * w[t] * phase.sin();
            }
            let mirrored = k != 0 && 2 * k != n;
            let p = (re * re + im * im) / (energy * fs);
            (k as f64 * fs / n as f64, if mirrored { 2.0 * p } else { p })
        })
        .collect()
}

fn in_band(f: f64, lo: f64, hi: f64, inclusive: bool) -> bool {
    const EPS: f64 = 1e-9;
    f >= lo - EPS && if inclusive { f <= hi + EPS } else { f < hi - EPS }
}

pub fn band_power(spec: &[(f64, f64)], lo: f64, hi: f64, inclusive: bool) -> (f64, usize) {
    let bins: Vec<f64> = spec.iter().filter(|(f, _)| in_band(*f, lo, hi, inclusive)).map(|b| b.1).collect();
    (bins.iter().sum(), bins.len())
}

/// `-Σ p ln p` of a histogram; bins are located by comparing against edges.
pub fn histogram_entropy(x: &[f64], bins: usize) -> f64 {
    let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return 0.0;
    }
    let mut counts = vec![0usize; bins];
    for &v in x {
        let mut b = 0;
        while b + 1 < bins && v >= lo + (hi - lo) * (b + 1) as f64 / bins as f64 {
            b += 1;
        }
        counts[b] += 1;
    }
    shannon(&counts.iter().map(|&c| c as f64).collect::<Vec<_>>())
}

pub fn shannon(weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    let mut h = 0.0;
    for &w in weights {
        if w > 0.0 {
            h -= (w / total) * (w / total).ln();
        }
    }
    h
}

/// Exhaustive template-pair count over the first `n - m` starts.
pub fn sample_entropy(x: &[f64], m: usize, r: f64) -> f64 {
    let starts = x.len() - m;
    let (mut a, mut b) = (0u64, 0u64);
    for i in 0..starts {
        for j in i + 1..starts {
            let dm = (0..m).map(|k| (x[i + k] - x[j + k]).abs()).fold(0.0, f64::max);
            if dm <= r {
                b += 1;
                if (x[i + m] - x[j + m]).abs() <= r {
                    a += 1;
                }
            }
        }
    }
    if a == 0 || b == 0 {
        (x.len() as f64).ln()
    } else {
        -((a as f64) / (b as f64)).ln()
    }
}

/// Mean exp(-(d/r)²) over all pairs of mean-removed templates, at `m` and
/// `m + 1`, both over the first `n - m` starts.
pub fn fuzzy_entropy(x: &[f64], m: usize, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let starts = x.len() - m;
    let phi = |len: usize| {
        let t: Vec<Vec<f64>> = (0..starts)
            .map(|i| {
                let mu = mean(&x[i..i + len]);
                x[i..i + len].iter().map(|v| v - mu).collect()
            })
            .collect();
        let mut total = 0.0;
        let mut pairs = 0.0;
        for i in 0..starts {
            for j in i + 1..starts {
                let d = (0..len).map(|k| (t[i][k] - t[j][k]).abs()).fold(0.0, f64::max);
                total += (-(d / r).powi(2)).exp();
                pairs += 1.0;
            }
        }
        total / pairs
    };
    phi(m).ln() - phi(m + 1).ln()
}

/// `∫ S(t) ln S(t) dt` negated, with `S(t)` the fraction of `|x|` above `t`,
/// integrated piecewise between consecutive distinct magnitudes.
pub fn cumulative_residual_entropy(x: &[f64]) -> f64 {
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
    mags.dedup();
    let n = x.len() as f64;
    let mut total = 0.0;
    for w in mags.windows(2) {
        let above = x.iter().filter(|v| v.abs() > w[0]).count() as f64;
        let s = above / n;
        total -= s * s.ln() * (w[1] - w[0]);
    }
    total
}

/// `(SD1, SD2, ratio, CCM)` via `SD1² = var(x_n - x_n+1) / 2`,
/// `SD2² = var(x_n + x_n+1) / 2`, and triangle areas from determinants.
pub fn poincare(x: &[f64]) -> (f64, f64, f64, f64) {
    let d: Vec<f64> = x.windows(2).map(|w| w[0] - w[1]).collect();
    let s: Vec<f64> = x.windows(2).map(|w| w[0] + w[1]).collect();
    let sd1 = (central(&d, 2) / 2.0).sqrt();
    let sd2 = (central(&s, 2) / 2.0).sqrt();
    let ratio = if sd2 > 0.0 { sd1 / sd2 } else { 0.0 };
    let n = x.len();
    let mut area = 0.0;
    for i in 0..n - 3 {
        let p = [(x[i], x[i + 1]), (x[i + 1], x[i + 2]), (x[i + 2], x[i + 3])];
        let det = p[0].0 * (p[1].1 - p[2].1) + p[1].0 * (p[2].1 - p[0].1) + p[2].0 * (p[0].1 - p[1].1);
        area += det.abs() / 2.0;
    }
    let ccm = if sd1 > 0.0 && sd2 > 0.0 {
        area / ((n - 2) as f64 * PI * sd1 * sd2)
    } else {
        0.0
    };
    (sd1, sd2, ratio, ccm)
}

pub fn median(x: &[f64]) -> f64 {
    let mut s = x.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

pub fn eeg(bp: &[f64], hp: &[f64], fs: f64) -> Vec<f64> {
    let (maxima, minima) = maxima_minima(bp);
    let mut out = vec![
        zero_crossings(bp) as f64,
        maxima as f64,
        minima as f64,
        skewness(bp),
        kurtosis(bp),
        rms(bp),
    ];
    let spec = periodogram(bp, fs);
    let passband: Vec<(f64, f64)> = spec.iter().copied().filter(|(f, _)| in_band(*f, 1.0, 25.0, true)).collect();
    let total: f64 = passband.iter().map(|b| b.1).sum();
    let mut peak = passband[0];
    for &b in &passband {
        if b.1 > peak.1 {
            peak = b;
        }
    }
    out.push(total);
    out.push(peak.0);
    for (lo, hi, inclusive) in [(1.0, 4.0, false), (4.0, 8.0, false), (8.0, 13.0, false), (13.0, 25.0, true)] {
        let (p, count) = band_power(&spec, lo, hi, inclusive);
        out.push(p / count as f64);
        out.push(p / total);
    }
    let hspec = periodogram(hp, fs);
    let (hf, count) = band_power(&hspec, 40.0, 80.0, true);
    let (above, _) = band_power(&hspec, 1.0, fs / 2.0, true);
    out.push(hf / count as f64);
    out.push(hf / above);
    out.push(sample_entropy(bp, 2, 0.2 * pop_std(bp)));
    out.push(histogram_entropy(bp, 64));
    let weights: Vec<f64> = passband.iter().map(|b| b.1).collect();
    out.push(shannon(&weights) / (weights.len() as f64).ln());
    out
}

pub fn emg(x: &[f64]) -> Vec<f64> {
    let abs: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    let wilson = x.windows(2).filter(|w| (w[1] - w[0]).abs() > 50.0).count();
    vec![
        zero_crossings(x) as f64 / (x.len() - 1) as f64,
        wilson as f64,
        mean(&abs),
        median(&abs),
        pop_std(x),
        cumulative_residual_entropy(x),
        fuzzy_entropy(x, 2, 0.2 * pop_std(x)),
    ]
}

pub fn acc(x: &[f64]) -> Vec<f64> {
    let (sd1, sd2, ratio, ccm) = poincare(x);
    vec![
        quantile(x, 0.75) - quantile(x, 0.25),
        pop_std(x),
        kurtosis(x),
        skewness(x),
        zero_crossings(x) as f64 / (x.len() - 1) as f64,
        x.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        mean(x),
        median(x),
        // Parseval: the mean of |X_k|² / N equals the mean square.
        x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64,
        sd1,
        sd2,
        ratio,
        ccm,
    ]
}

/// Heart-rate features over the 60 s of R peaks ending at `end_s`.
/// `None` when the context has fewer than 10 RR intervals.
pub fn ecg(peaks: &[f64], end_s: f64, seconds_of_day: f64) -> Option<Vec<f64>> {
    const FS: f64 = 4.0;
    let ctx: Vec<f64> = peaks.iter().copied().filter(|&p| p >= end_s - 60.0 && p <= end_s).collect();
    if ctx.len() < 11 {
        return None;
    }
    let times = &ctx[1..];
    let rr: Vec<f64> = ctx.windows(2).map(|w| w[1] - w[0]).collect();
    let hr: Vec<f64> = rr.iter().map(|r| 60.0 / r).collect();

    let t0 = times[0];
    let last = times[times.len() - 1];
    let count = ((last - t0) * FS).floor() as usize + 1;
    let interp = |v: &[f64], t: f64| {
        let mut j = 0;
        while j + 2 < times.len() && times[j + 1] < t {
            j += 1;
        }
        let frac = ((t - times[j]) / (times[j + 1] - times[j])).clamp(0.0, 1.0);
        v[j] + frac * (v[j + 1] - v[j])
    };
    let grid_t: Vec<f64> = (0..count).map(|k| t0 + k as f64 / FS).collect();
    let hr_grid: Vec<f64> = grid_t.iter().map(|&t| interp(&hr, t)).collect();
    let rr_grid: Vec<f64> = grid_t.iter().map(|&t| interp(&rr, t)).collect();

    // 3 s centered average (6 samples either side), truncated at the edges.
    let smooth: Vec<f64> = (0..count)
        .map(|i| {
            let lo = i.saturating_sub(6);
            let hi = (i + 6).min(count - 1);
            mean(&hr_grid[lo..=hi])
        })
        .collect();
    let baseline = quantile(&smooth, 0.25);
    let mut episode = None;
    let mut i = 0;
    while i < count {
        if smooth[i] > 1.25 * baseline {
            let start = i;
            while i < count && smooth[i] > 1.25 * baseline {
                i += 1;
            }
            if i - start >= 40 {
                episode = Some((start, i - start));
            }
        } else {
            i += 1;
        }
    }
    let (duration, after, before) = match episode {
        Some((onset, len)) => {
            let pre = &hr_grid[onset.saturating_sub(40)..onset];
            let post = &hr_grid[onset..(onset + 40).min(count)];
            let before = if pre.is_empty() { hr_grid[onset] } else { median(pre) };
            (len as f64 / FS, median(post), before)
        }
        None => (0.0, median(&hr_grid), median(&hr_grid)),
    };

    let mu = mean(&rr_grid);
    let centered: Vec<f64> = rr_grid.iter().map(|v| v - mu).collect();
    let spec = periodogram(&centered, FS);
    let (vlf, _) = band_power(&spec, 0.003, 0.04, false);
    let (lf, _) = band_power(&spec, 0.04, 0.15, false);
    let (sd1, sd2, _, _) = poincare(&rr);
    let csi = if sd1 > 0.0 { (4.0 * sd2).powi(2) / (4.0 * sd1) } else { 0.0 };
    let phase = 2.0 * PI * seconds_of_day / 86_400.0;
    Some(vec![duration, after, before, vlf, lf, csi, phase.sin(), phase.cos()])
}
