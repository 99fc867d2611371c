//! Entropy estimators.
//!
//! Template-matching entropies are quadratic in the window length and
//! dominate extraction time, so both use specialised inner loops: sample
//! entropy prunes candidate pairs by sorting on the first template element,
//! fuzzy entropy uses a branch-free exponential that the compiler can
//! vectorize.

use super::stats;
use super::FeatureError;

/// Embedding dimension used by the extractors.
pub const TEMPLATE_LEN: usize = 2;
/// Tolerance as a fraction of the window standard deviation.
pub const TOLERANCE_FACTOR: f64 = 0.2;
/// Histogram resolution for amplitude Shannon entropy.
pub const SHANNON_BINS: usize = 64;

/// Value reported when no template pairs match (`ln(len)`).
fn no_match_sentinel(len: usize) -> f64 {
    (len as f64).ln()
}

/// `-ln(A/B)`: `B` counts template pairs of length `m` within Chebyshev
/// distance `r`, `A` the pairs that still match at length `m + 1`. Both
/// use the same `len - m` template starts. `A = 0` or `B = 0` yields
/// `ln(len)`.
pub fn sample_entropy(x: &[f64], m: usize, r: f64) -> Result<f64, FeatureError> {
    let n = x.len();
    if m == 0 || n < m + 2 {
        return Err(FeatureError::TooShort {
            what: "sample entropy",
            len: n,
            required: m.max(1) + 2,
        });
    }
    let templates = n - m;
    let mut order: Vec<usize> = (0..templates).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));

    let mut b_count: u64 = 0;
    let mut a_count: u64 = 0;
    for (pos, &i) in order.iter().enumerate() {
        let xi = x[i];
        for &j in &order[pos + 1..] {
            if x[j] - xi > r {
                break;
            }
            if (1..m).all(|k| (x[i + k] - x[j + k]).abs() <= r) {
                b_count += 1;
                if (x[i + m] - x[j + m]).abs() <= r {
                    a_count += 1;
                }
            }
        }
    }
    if a_count == 0 || b_count == 0 {
        return Ok(no_match_sentinel(n));
    }
    Ok(-(a_count as f64 / b_count as f64).ln())
}

/// Sample entropy with the extractor defaults (`m = 2`, `r = 0.2·std`).
pub fn sample_entropy_default(x: &[f64]) -> Result<f64, FeatureError> {
    sample_entropy(x, TEMPLATE_LEN, TOLERANCE_FACTOR * stats::std_dev(x))
}

const LOG2_E: f64 = std::f64::consts::LOG2_E;
const LN2_HI: f64 = 6.931_471_803_691_238_16e-1;
const LN2_LO: f64 = 1.908_214_929_270_587_7e-10;
// Adding and subtracting 1.5·2^52 rounds to the nearest integer and leaves
// that integer in the low mantissa bits.
const ROUND_MAGIC: f64 = 6_755_399_441_055_744.0;

/// `exp(-t)` for `t >= 0`, accurate to a few ulp, written without branches
/// or library calls so loops over it vectorize. Saturates to `exp(-700)`.
#[inline(always)]
pub fn exp_neg(t: f64) -> f64 {
    let t = if t < 700.0 { t } else { 700.0 };
    let shifted = t * LOG2_E + ROUND_MAGIC;
    let k = shifted - ROUND_MAGIC;
    let k_bits = shifted.to_bits() & 0xFFFF_FFFF;
    // exp(-t) = 2^-k · exp(-f), |f| <= ln2/2
    let f = (t - k * LN2_HI) - k * LN2_LO;
    let g = -f;
    let mut p = 1.0 / 6_227_020_800.0;
    p = p * g + 1.0 / 479_001_600.0;
    p = p * g + 1.0 / 39_916_800.0;
    p = p * g + 1.0 / 3_628_800.0;
    p = p * g + 1.0 / 362_880.0;
    p = p * g + 1.0 / 40_320.0;
    p = p * g + 1.0 / 5_040.0;
    p = p * g + 1.0 / 720.0;
    p = p * g + 1.0 / 120.0;
    p = p * g + 1.0 / 24.0;
    p = p * g + 1.0 / 6.0;
    p = p * g + 0.5;
    p = p * g + 1.0;
    p = p * g + 1.0;
    p * f64::from_bits((1023 - k_bits) << 52)
}

/// Mean-removed template coordinates, stored coordinate-major.
fn centered_templates(x: &[f64], len: usize, count: usize) -> Vec<Vec<f64>> {
    let mut coords = vec![Vec::with_capacity(count); len];
    for i in 0..count {
        let seg = &x[i..i + len];
        let mu = seg.iter().sum::<f64>() / len as f64;
        for (k, v) in seg.iter().enumerate() {
            coords[k].push(v - mu);
        }
    }
    coords
}

/// Sum over pairs `i < j` of `exp(-(d_ij / r)²)` with `d` the Chebyshev
/// distance between centered templates.
fn membership_sum(coords: &[Vec<f64>], inv_r2: f64) -> f64 {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx2") {
            // SAFETY: the CPU supports AVX2, checked just above.
            return unsafe { membership_sum_avx2(coords, inv_r2) };
        }
    }
    membership_sum_generic(coords, inv_r2)
}

/// Same code compiled with AVX2 enabled; no fused operations, so results
/// match the generic build bit for bit.
#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn membership_sum_avx2(coords: &[Vec<f64>], inv_r2: f64) -> f64 {
    membership_sum_generic(coords, inv_r2)
}

/// Sum with four interleaved accumulators, which vectorizes.
#[inline(always)]
fn lane_sum(x: &[f64]) -> f64 {
    let mut lanes = [0.0f64; 4];
    let chunks = x.chunks_exact(4);
    let rest = chunks.remainder();
    for c in chunks {
        for k in 0..4 {
            lanes[k] += c[k];
        }
    }
    (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]) + rest.iter().sum::<f64>()
}

#[inline(always)]
fn membership_sum_generic(coords: &[Vec<f64>], inv_r2: f64) -> f64 {
    let count = coords[0].len();
    let mut total = 0.0;
    let mut dist = vec![0.0f64; count];
    for i in 0..count.saturating_sub(1) {
        let tail = &mut dist[i + 1..];
        tail.fill(0.0);
        for c in coords {
            let ci = c[i];
            for (d, &cj) in tail.iter_mut().zip(&c[i + 1..]) {
                let a = (ci - cj).abs();
                *d = if a > *d { a } else { *d };
            }
        }
        for d in tail.iter_mut() {
            *d = exp_neg(*d * *d * inv_r2);
        }
        total += lane_sum(tail);
    }
    total
}

/// Fuzzy entropy with exponential membership `exp(-(d/r)²)` over
/// mean-removed templates: `ln(phi_m) - ln(phi_{m+1})`. A zero tolerance
/// (constant window) gives 0; vanishing similarity gives `ln(len)`.
pub fn fuzzy_entropy(x: &[f64], m: usize, r: f64) -> Result<f64, FeatureError> {
    let n = x.len();
    if m == 0 || n < m + 2 {
        return Err(FeatureError::TooShort {
            what: "fuzzy entropy",
            len: n,
            required: m.max(1) + 2,
        });
    }
    if r <= 0.0 {
        return Ok(0.0);
    }
    let count = n - m;
    let inv_r2 = 1.0 / (r * r);
    let pairs = (count * (count - 1) / 2) as f64;
    let phi_m = membership_sum(&centered_templates(x, m, count), inv_r2) / pairs;
    let phi_m1 = membership_sum(&centered_templates(x, m + 1, count), inv_r2) / pairs;
    if phi_m <= 0.0 || phi_m1 <= 0.0 {
        return Ok(no_match_sentinel(n));
    }
    Ok(phi_m.ln() - phi_m1.ln())
}

pub fn fuzzy_entropy_default(x: &[f64]) -> Result<f64, FeatureError> {
    fuzzy_entropy(x, TEMPLATE_LEN, TOLERANCE_FACTOR * stats::std_dev(x))
}

/// Shannon entropy (nats) of a 64-bin amplitude histogram spanning
/// `[min, max]`.
pub fn shannon_entropy(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = hi - lo;
    if width <= 0.0 {
        return 0.0;
    }
    let mut counts = [0usize; SHANNON_BINS];
    for &v in x {
        let bin = (((v - lo) / width) * SHANNON_BINS as f64) as usize;
        counts[bin.min(SHANNON_BINS - 1)] += 1;
    }
    let n = x.len() as f64;
    -counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * p.ln()
        })
        .sum::<f64>()
}

/// `-∫ S(t) ln S(t) dt` with `S` the empirical survival function of `|x|`.
pub fn cumulative_residual_entropy(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_by(f64::total_cmp);
    let mut total = 0.0;
    for i in 0..n - 1 {
        let width = mags[i + 1] - mags[i];
        if width > 0.0 {
            let s = (n - 1 - i) as f64 / n as f64;
            total -= s * s.ln() * width;
        }
    }
    total
}
