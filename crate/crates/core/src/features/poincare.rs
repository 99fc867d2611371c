use std::f64::consts::{PI, SQRT_2};

use super::stats;
use super::FeatureError;

/// Poincaré-plot dispersion of successive pairs `(x[n], x[n+1])`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Poincare {
    pub sd1: f64,
    pub sd2: f64,
    /// `sd1 / sd2`, or 0 when `sd2` is 0.
    pub ratio: f64,
    /// Complex correlation measure, 0 when either SD is 0.
    pub ccm: f64,
}

pub fn poincare_descriptors(x: &[f64]) -> Result<Poincare, FeatureError> {
    let n = x.len();
    if n < 3 {
        return Err(FeatureError::TooShort {
            what: "poincare descriptors",
            len: n,
            required: 3,
        });
    }
    let diffs: Vec<f64> = x.windows(2).map(|w| (w[0] - w[1]) / SQRT_2).collect();
    let sums: Vec<f64> = x.windows(2).map(|w| (w[0] + w[1]) / SQRT_2).collect();
    let sd1 = stats::std_dev_exact(&diffs);
    let sd2 = stats::std_dev_exact(&sums);
    let ratio = if sd2 > 0.0 { sd1 / sd2 } else { 0.0 };
    let ccm = if sd1 > 0.0 && sd2 > 0.0 {
        // Points (x[n], x[n+1]); each triangle uses three consecutive points.
        let area: f64 = x
            .windows(4)
            .map(|w| {
                let (ax, ay) = (w[1] - w[0], w[2] - w[1]);
                let (bx, by) = (w[2] - w[0], w[3] - w[1]);
                (ax * by - ay * bx).abs() / 2.0
            })
            .sum();
        area / ((n - 2) as f64 * PI * sd1 * sd2)
    } else {
        0.0
    };
    Ok(Poincare {
        sd1,
        sd2,
        ratio,
        ccm,
    })
}

/// `L² / T` with `L = 4·SD2` and `T = 4·SD1`; 0 when `SD1` is 0.
pub fn modified_csi(rr: &[f64]) -> Result<f64, FeatureError> {
    let p = poincare_descriptors(rr)?;
    if p.sd1 > 0.0 {
        Ok((4.0 * p.sd2).powi(2) / (4.0 * p.sd1))
    } else {
        Ok(0.0)
    }
}
