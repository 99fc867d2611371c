use std::f64::consts::{PI, SQRT_2};

use chrono::{DateTime, Duration, TimeZone, Timelike, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use tcsdet_core::features::entropy::sample_entropy;
use tcsdet_core::features::{
    acc_channel_features, ecg_window_features, eeg_channel_features, emg_channel_features, ACC_FEATURES,
    ECG_FEATURES, EEG_FEATURES, EMG_FEATURES,
};

use crate::oracles;
use crate::Check;

const FS: f64 = 250.0;
const FS_ACC: f64 = 25.0;
const N: usize = 500;
const N_ACC: usize = 50;
const WINDOWS: usize = 1000;
const REL: f64 = 1e-6;

fn close(got: f64, want: f64) -> bool {
    (got - want).abs() <= REL * got.abs().max(want.abs()) + 1e-12
}

fn compare(what: &str, names: &[&str], got: &[f64], want: &[f64], case: usize) -> Result<(), String> {
    for ((name, &g), &w) in names.iter().zip(got).zip(want) {
        ensure!(close(g, w), "{what} window {case}: {name} = {g:e}, oracle {w:e}");
    }
    Ok(())
}

/// A few random sinusoids over Gaussian noise.
fn signal(rng: &mut ChaCha8Rng, n: usize, fs: f64, f_max: f64, scale: f64) -> Vec<f64> {
    let tones: Vec<(f64, f64, f64)> = (0..rng.random_range(1..5))
        .map(|_| (rng.random_range(0.3..f_max), rng.random_range(0.2..2.0), rng.random_range(0.0..2.0 * PI)))
        .collect();
    let noise = rng.random_range(0.05..1.0);
    (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            let s: f64 = tones.iter().map(|(f, a, p)| a * (2.0 * PI * f * t + p).sin()).sum();
            let e: f64 = rng.sample(StandardNormal);
            scale * (s + noise * e)
        })
        .collect()
}

/// R peaks over 150 s, sometimes with a heart-rate surge.
fn r_peaks(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let base = rng.random_range(0.6..1.1);
    let surge: Option<(f64, f64)> = rng.random_bool(0.6).then(|| (rng.random_range(40.0..140.0), rng.random_range(0.45..0.75)));
    let jitter = rng.random_range(0.005..0.05);
    let mut t = rng.random_range(0.0..1.0);
    let mut peaks = Vec::new();
    while t < 150.0 {
        peaks.push(t);
        let factor = match surge {
            Some((onset, depth)) if t > onset => 1.0 - (1.0 - depth) * ((t - onset) / 10.0).min(1.0),
            _ => 1.0,
        };
        let e: f64 = rng.sample(StandardNormal);
        t += (base * factor + jitter * e).max(0.25);
    }
    peaks
}

fn seconds_of_day(clock: DateTime<Utc>) -> f64 {
    clock.num_seconds_from_midnight() as f64 + clock.nanosecond() as f64 * 1e-9
}

pub fn check_oracles() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1_000);
    for case in 0..WINDOWS {
        let scale = 10f64.powf(rng.random_range(0.0..2.5));
        let bp = signal(&mut rng, N, FS, 30.0, scale);
        let hp = signal(&mut rng, N, FS, 120.0, scale);
        let got = eeg_channel_features(&bp, &hp, FS).map_err(|e| e.to_string())?;
        compare("eeg", &EEG_FEATURES, &got, &oracles::eeg(&bp, &hp, FS), case)?;

        let emg_scale = 10f64.powf(rng.random_range(0.5..2.5));
        let emg = signal(&mut rng, N, FS, 120.0, emg_scale);
        let got = emg_channel_features(&emg).map_err(|e| e.to_string())?;
        compare("emg", &EMG_FEATURES, &got, &oracles::emg(&emg), case)?;

        let acc_scale = rng.random_range(0.01..1.0);
        let acc = signal(&mut rng, N_ACC, FS_ACC, 12.0, acc_scale);
        let got = acc_channel_features(&acc).map_err(|e| e.to_string())?;
        compare("acc", &ACC_FEATURES, &got, &oracles::acc(&acc), case)?;
    }
    let base = Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap();
    let mut ecg_valid = 0;
    let mut episodes = 0;
    for case in 0..WINDOWS {
        let peaks = r_peaks(&mut rng);
        let end = rng.random_range(5.0..150.0);
        let clock = base + Duration::milliseconds(rng.random_range(0..86_400_000));
        let got = ecg_window_features(&peaks, end, clock);
        let want = oracles::ecg(&peaks, end, seconds_of_day(clock));
        match (got, want) {
            (Some(g), Some(w)) => {
                compare("ecg", &ECG_FEATURES, &g, &w, case)?;
                ecg_valid += 1;
                episodes += usize::from(g[0] > 0.0);
            }
            (None, None) => {}
            (g, w) => return Err(format!("ecg window {case}: validity {} vs oracle {}", g.is_some(), w.is_some())),
        }
    }
    Ok(format!(
        "{WINDOWS} windows each: EEG 21, EMG 7, ACC 13 features; ECG {ecg_valid} valid ({episodes} with tachycardia)"
    ))
}

fn exact(what: &str, got: f64, want: f64) -> Result<(), String> {
    ensure!(got == want, "{what}: {got:e}, expected exactly {want:e}");
    Ok(())
}

/// Closed forms evaluated in floating point; only rounding separates them.
fn analytic(what: &str, got: f64, want: f64) -> Result<(), String> {
    ensure!((got - want).abs() <= 1e-12 * want.abs().max(1e-300), "{what}: {got:e}, expected {want:e}");
    Ok(())
}

fn table(what: &str, names: &[&str], got: &[f64], rows: &[(usize, f64, bool)]) -> Result<(), String> {
    for &(i, want, is_exact) in rows {
        let label = format!("{what} {}", names[i]);
        if is_exact {
            exact(&label, got[i], want)?;
        } else {
            analytic(&label, got[i], want)?;
        }
    }
    Ok(())
}

const E: bool = true;
const A: bool = false;

fn degenerate_constant() -> Result<usize, String> {
    let c = 0.25;
    let x = vec![c; N];
    let f = eeg_channel_features(&x, &x, FS).map_err(|e| e.to_string())?;
    let mut rows: Vec<(usize, f64, bool)> = (0..21).map(|i| (i, 0.0, E)).collect();
    rows[5] = (5, c, E);
    table("eeg constant", &EEG_FEATURES, &f, &rows)?;

    let f = emg_channel_features(&vec![-c; N]).map_err(|e| e.to_string())?;
    table("emg constant", &EMG_FEATURES, &f, &[(0, 0.0, E), (1, 0.0, E), (2, c, E), (3, c, E), (4, 0.0, E), (5, 0.0, E), (6, 0.0, E)])?;

    let f = acc_channel_features(&vec![c; N_ACC]).map_err(|e| e.to_string())?;
    let mut rows: Vec<(usize, f64, bool)> = (0..13).map(|i| (i, 0.0, E)).collect();
    rows[5] = (5, c, E);
    rows[6] = (6, c, E);
    rows[7] = (7, c, E);
    rows[8] = (8, c * c, A);
    table("acc constant", &ACC_FEATURES, &f, &rows)?;

    let peaks: Vec<f64> = (0..120).map(f64::from).collect();
    let midnight = Utc.with_ymd_and_hms(2024, 3, 1, 0, 0, 0).unwrap();
    let f = ecg_window_features(&peaks, 100.0, midnight).ok_or("constant rhythm rejected")?;
    table(
        "ecg constant",
        &ECG_FEATURES,
        &f,
        &[(0, 0.0, E), (1, 60.0, E), (2, 60.0, E), (3, 0.0, E), (4, 0.0, E), (5, 0.0, E), (6, 0.0, E), (7, 1.0, E)],
    )?;
    ensure!(ecg_window_features(&peaks[..10], 60.0, midnight).is_none(), "9 RR intervals accepted");
    Ok(21 + 7 + 13 + 8 + 1)
}

fn degenerate_impulse() -> Result<usize, String> {
    let (amp, k0) = (1000.0, 200);
    let mut x = vec![0.0; N];
    x[k0] = amp;
    let n = N as f64;
    let skew = (n - 2.0) / (n - 1.0).sqrt();
    let kurt = (n * n - 3.0 * n + 3.0) / (n - 1.0);
    let std = amp * (n - 1.0).sqrt() / n;
    // Zero-valued length-2 templates: all but the two touching the impulse;
    // one of them has the impulse as its third sample.
    let zero_templates = (N - 2 - 2) as f64;
    let template_entropy = (zero_templates / (zero_templates - 2.0)).ln();
    let shannon = -((n - 1.0) / n * ((n - 1.0) / n).ln() + (1.0 / n) * (1.0 / n).ln());

    // A lone sample has a flat spectrum: each one-sided bin holds the same power.
    let w = (PI * k0 as f64 / n).sin().powi(2);
    let taper_energy = 3.0 * n / 8.0;
    let bin = 2.0 * (amp * w).powi(2) / (taper_energy * FS);
    let f = eeg_channel_features(&x, &x, FS).map_err(|e| e.to_string())?;
    table(
        "eeg impulse",
        &EEG_FEATURES,
        &f,
        &[
            (0, 2.0, E),
            (1, 1.0, E),
            (2, 0.0, E),
            (3, skew, A),
            (4, kurt, A),
            (5, amp / n.sqrt(), A),
            (6, 49.0 * bin, A),
            (8, bin, A),
            (9, 6.0 / 49.0, A),
            (10, bin, A),
            (11, 8.0 / 49.0, A),
            (12, bin, A),
            (13, 10.0 / 49.0, A),
            (14, bin, A),
            (15, 25.0 / 49.0, A),
            (16, bin, A),
            // 40-80 Hz holds 81 bins; 1-125 Hz holds 248 plus the unmirrored Nyquist bin.
            (17, 81.0 / 248.5, A),
            (18, template_entropy, A),
            (19, shannon, A),
            (20, 1.0, A),
        ],
    )?;

    let f = emg_channel_features(&x).map_err(|e| e.to_string())?;
    table(
        "emg impulse",
        &EMG_FEATURES,
        &f,
        &[
            (0, 2.0 / (n - 1.0), A),
            (1, 2.0, E),
            (2, amp / n, A),
            (3, 0.0, E),
            (4, std, A),
            (5, amp * n.ln() / n, A),
            (6, template_entropy, A),
        ],
    )?;

    let mut y = vec![0.0; N_ACC];
    y[20] = amp;
    let m = N_ACC as f64;
    let sd1 = amp / (m - 1.0).sqrt();
    let sd2 = amp * (m - 3.0).sqrt() / (m - 1.0);
    let f = acc_channel_features(&y).map_err(|e| e.to_string())?;
    table(
        "acc impulse",
        &ACC_FEATURES,
        &f,
        &[
            (0, 0.0, E),
            (1, amp * (m - 1.0).sqrt() / m, A),
            (2, (m * m - 3.0 * m + 3.0) / (m - 1.0), A),
            (3, (m - 2.0) / (m - 1.0).sqrt(), A),
            (4, 2.0 / (m - 1.0), A),
            (5, amp, E),
            (6, amp / m, A),
            (7, 0.0, E),
            (8, amp * amp / m, A),
            (9, sd1, A),
            (10, sd2, A),
            (11, sd1 / sd2, A),
            // Two triangles of area amp²/2 each.
            (12, amp * amp / ((m - 2.0) * PI * sd1 * sd2), A),
        ],
    )?;
    Ok(20 + 7 + 13)
}

fn degenerate_ramp() -> Result<usize, String> {
    let x: Vec<f64> = (0..N).map(|i| i as f64).collect();
    let n = N as f64;
    let kurt = 3.0 * (3.0 * n * n - 7.0) / (5.0 * (n * n - 1.0));
    let rms = ((n - 1.0) * (2.0 * n - 1.0) / 6.0).sqrt();
    // Bin of sample i is floor(64 i / 499), the last sample joining bin 63.
    let mut counts = [0usize; 64];
    for i in 0..N {
        counts[((64 * i) / (N - 1)).min(63)] += 1;
    }
    let shannon: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| -(c as f64 / n) * (c as f64 / n).ln())
        .sum();
    let f = eeg_channel_features(&x, &x, FS).map_err(|e| e.to_string())?;
    table(
        "eeg ramp",
        &EEG_FEATURES,
        &f,
        &[(0, 1.0, E), (1, 0.0, E), (2, 0.0, E), (4, kurt, A), (5, rms, A), (18, 0.0, E), (19, shannon, A)],
    )?;
    ensure!(f[3].abs() < 1e-12, "eeg ramp skewness {:e}", f[3]);
    exact("ramp sample entropy with r -> 0", sample_entropy(&x, 2, 1e-9).map_err(|e| e.to_string())?, n.ln())?;

    let step = 60.0;
    let y: Vec<f64> = x.iter().map(|v| v * step).collect();
    let cre: f64 = (1..N).map(|k| -(k as f64 / n) * (k as f64 / n).ln() * step).sum();
    let f = emg_channel_features(&y).map_err(|e| e.to_string())?;
    table(
        "emg ramp",
        &EMG_FEATURES,
        &f,
        &[
            (0, 1.0 / (n - 1.0), A),
            (1, n - 1.0, E),
            (2, step * (n - 1.0) / 2.0, A),
            (3, step * (n - 1.0) / 2.0, A),
            (4, step * ((n * n - 1.0) / 12.0).sqrt(), A),
            (5, cre, A),
            (6, 0.0, E),
        ],
    )?;

    let z: Vec<f64> = (0..N_ACC).map(|i| i as f64 * 0.5).collect();
    let m = N_ACC as f64;
    let f = acc_channel_features(&z).map_err(|e| e.to_string())?;
    table(
        "acc ramp",
        &ACC_FEATURES,
        &f,
        &[
            (0, 0.25 * (m - 1.0), A),
            (1, 0.5 * ((m * m - 1.0) / 12.0).sqrt(), A),
            (2, 3.0 * (3.0 * m * m - 7.0) / (5.0 * (m * m - 1.0)), A),
            (4, 1.0 / (m - 1.0), A),
            (5, 0.5 * (m - 1.0), E),
            (6, 0.25 * (m - 1.0), A),
            (7, 0.25 * (m - 1.0), A),
            (8, 0.25 * (m - 1.0) * (2.0 * m - 1.0) / 6.0, A),
            (9, 0.0, E),
            // Pair sums are 0.5, 1.5, ... over m - 1 points, scaled by 1/sqrt(2).
            (10, ((m - 1.0).powi(2) - 1.0).sqrt() / (12f64.sqrt() * SQRT_2), A),
            (11, 0.0, E),
            (12, 0.0, E),
        ],
    )?;
    ensure!(f[3].abs() < 1e-12, "acc ramp skewness {:e}", f[3]);
    Ok(7 + 2 + 7 + 13)
}

pub fn check_degenerate() -> Check {
    let a = degenerate_constant()?;
    let b = degenerate_impulse()?;
    let c = degenerate_ramp()?;
    Ok(format!("constant {a}, impulse {b}, ramp {c} table entries"))
}
