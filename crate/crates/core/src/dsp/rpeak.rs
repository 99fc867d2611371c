//! Pan–Tompkins style QRS detection.
//!
//! 5–15 Hz bandpass, five-point derivative, squaring and 150 ms moving
//! window integration feed an adaptive signal/noise threshold. Each accepted
//! integrator peak is then localized on the raw trace.

use crate::io::Channel;

use super::{design_butterworth, DspError, FilterSpec};

/// Minimum spacing between two accepted R peaks.
pub const REFRACTORY_S: f64 = 0.25;

const MIN_FS: f64 = 100.0;
const MIN_DURATION_S: f64 = 10.0;

fn moving_average(x: &[f64], width: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    for i in 0..x.len() {
        acc += x[i];
        if i >= width {
            acc -= x[i - width];
        }
        out.push(acc / width as f64);
    }
    out
}

fn local_maxima(x: &[f64]) -> Vec<usize> {
    (1..x.len().saturating_sub(1))
        .filter(|&i| x[i] > x[i - 1] && x[i] >= x[i + 1])
        .collect()
}

/// Ascending sample indices of R peaks, at least [`REFRACTORY_S`] apart.
pub fn detect_r_peaks(ecg: &Channel) -> Result<Vec<usize>, DspError> {
    let fs = ecg.fs();
    if fs < MIN_FS {
        return Err(DspError::RateTooLow {
            fs,
            required: MIN_FS,
        });
    }
    if ecg.duration_s() < MIN_DURATION_S {
        return Err(DspError::TooShort {
            duration_s: ecg.duration_s(),
            required_s: MIN_DURATION_S,
        });
    }
    let raw = ecg.samples();
    let band = design_butterworth(&FilterSpec::bandpass(2, 5.0, 15.0, fs))?.apply_steady(raw)?;

    let mut energy = vec![0.0; band.len()];
    for n in 4..band.len() {
        let d = (2.0 * band[n] + band[n - 1] - band[n - 3] - 2.0 * band[n - 4]) * fs / 8.0;
        energy[n] = d * d;
    }
    let width = ((0.150 * fs).round() as usize).max(1);
    let integrated = moving_average(&energy, width);

    let refractory = (REFRACTORY_S * fs).ceil() as usize;
    let learn = ((2.0 * fs) as usize).min(integrated.len());
    let head = &integrated[..learn];
    let mut spk = 0.25 * head.iter().copied().fold(0.0, f64::max);
    let mut npk = 0.5 * head.iter().sum::<f64>() / learn as f64;

    let candidates = local_maxima(&integrated);
    let mut qrs: Vec<usize> = Vec::new();
    let mut rr_avg: Option<f64> = None;
    let mut last_candidate_pos = 0;

    for (ci, &p) in candidates.iter().enumerate() {
        let v = integrated[p];
        let threshold = npk + 0.25 * (spk - npk);

        // Search back for a missed beat when the gap grows too long.
        if let (Some(&last), Some(avg)) = (qrs.last(), rr_avg) {
            if (p - last) as f64 > 1.66 * avg {
                let missed = candidates[last_candidate_pos..ci]
                    .iter()
                    .copied()
                    .filter(|&c| c >= last + refractory && p >= c + refractory)
                    .filter(|&c| integrated[c] > 0.5 * threshold)
                    .max_by(|&a, &b| integrated[a].total_cmp(&integrated[b]));
                if let Some(m) = missed {
                    spk = 0.25 * integrated[m] + 0.75 * spk;
                    qrs.push(m);
                }
            }
        }

        if v > threshold && v > 0.0 {
            match qrs.last() {
                Some(&last) if p < last + refractory => {
                    if v > integrated[last] {
                        *qrs.last_mut().unwrap() = p;
                    }
                }
                _ => {
                    if let Some(&last) = qrs.last() {
                        let rr = (p - last) as f64;
                        rr_avg = Some(match rr_avg {
                            Some(a) => 0.875 * a + 0.125 * rr,
                            None => rr,
                        });
                    }
                    qrs.push(p);
                    last_candidate_pos = ci;
                }
            }
            spk = 0.125 * v + 0.875 * spk;
        } else {
            npk = 0.125 * v + 0.875 * npk;
        }
    }

    // Localize on the raw trace: the integrator peak lags the R wave.
    let search = refractory;
    let mut peaks: Vec<usize> = qrs
        .iter()
        .map(|&p| {
            let lo = p.saturating_sub(search);
            (lo..=p)
                .max_by(|&a, &b| raw[a].total_cmp(&raw[b]).then(b.cmp(&a)))
                .unwrap_or(p)
        })
        .collect();
    peaks.sort_unstable();

    let mut out: Vec<usize> = Vec::with_capacity(peaks.len());
    for p in peaks {
        match out.last() {
            Some(&last) if p < last + refractory => {
                if raw[p] > raw[last] {
                    *out.last_mut().unwrap() = p;
                }
            }
            _ => out.push(p),
        }
    }
    Ok(out)
}
