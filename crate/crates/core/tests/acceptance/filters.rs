use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use tcsdet_core::dsp::{design_butterworth, SosFilter};
use tcsdet_core::io::Modality;
use tcsdet_core::pipeline::{BandConfig, PipelineConfig};

use crate::Check;

const TARGET_DB: f64 = -3.01;
const TOL_DB: f64 = 0.1;

fn configured() -> Vec<(&'static str, BandConfig, f64)> {
    let f = PipelineConfig::default().filters;
    vec![
        ("eeg bandpass", f.eeg_bandpass, Modality::Eeg.default_fs()),
        ("eeg highpass", f.eeg_highpass, Modality::Eeg.default_fs()),
        ("emg highpass", f.emg_highpass, Modality::Emg.default_fs()),
        ("acc highpass", f.acc_highpass, Modality::Acc.default_fs()),
    ]
}

/// Amplitude of the `freq_hz` component over the last `cycles` whole
/// periods of the causal response to a unit sine that started at rest.
fn measured_gain(sos: &SosFilter, freq_hz: f64, fs: f64) -> f64 {
    let cycles = 20.0;
    let settle_s = 60.0f64.max(200.0 / freq_hz);
    let tail = (cycles * fs / freq_hz).round() as usize;
    let n = (settle_s * fs) as usize + tail;
    let x: Vec<f64> = (0..n).map(|i| (2.0 * PI * freq_hz * i as f64 / fs).sin()).collect();
    let y = sos.apply(&x).unwrap();
    let (mut s, mut c) = (0.0, 0.0);
    for (i, v) in y.iter().enumerate().skip(n - tail) {
        let phase = 2.0 * PI * freq_hz * i as f64 / fs;
        s += v * phase.sin();
        c += v * phase.cos();
    }
    2.0 * (s * s + c * c).sqrt() / tail as f64
}

fn db(gain: f64) -> f64 {
    20.0 * gain.log10()
}

fn noise(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal) * 50.0).collect()
}

fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn check() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut cutoffs = 0;
    for (name, band, fs) in configured() {
        let sos = design_butterworth(&band.spec(fs).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        for cutoff in [band.low_hz, band.high_hz].into_iter().flatten() {
            let analytic = db(sos.magnitude(cutoff));
            let measured = db(measured_gain(&sos, cutoff, fs));
            for (how, v) in [("response", analytic), ("measured", measured)] {
                ensure!((v - TARGET_DB).abs() <= TOL_DB, "{name} at {cutoff} Hz ({how}): {v:.3} dB");
                worst = worst.max((v - TARGET_DB).abs());
            }
            cutoffs += 1;
        }

        // Linearity: filter(a·x1 + b·x2) = a·filter(x1) + b·filter(x2).
        for _ in 0..5 {
            let n = 4000;
            let (x1, x2) = (noise(&mut rng, n), noise(&mut rng, n));
            let (a, b) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let mix: Vec<f64> = x1.iter().zip(&x2).map(|(u, v)| a * u + b * v).collect();
            let y = sos.apply(&mix).unwrap();
            let (y1, y2) = (sos.apply(&x1).unwrap(), sos.apply(&x2).unwrap());
            let scale = max_abs(&y).max(1.0);
            for i in 0..n {
                let want = a * y1[i] + b * y2[i];
                ensure!((y[i] - want).abs() <= 1e-9 * scale, "{name}: linearity off by {:e} at {i}", y[i] - want);
            }
        }

        // Time invariance: delaying the input delays the output.
        for _ in 0..5 {
            let x = noise(&mut rng, 3000);
            let delay = rng.random_range(1..500);
            let mut shifted = vec![0.0; delay];
            shifted.extend_from_slice(&x);
            let (y, ys) = (sos.apply(&x).unwrap(), sos.apply(&shifted).unwrap());
            ensure!(ys[..delay].iter().all(|&v| v == 0.0), "{name}: output before the delayed input");
            let scale = max_abs(&y).max(1.0);
            for i in 0..x.len() {
                ensure!((ys[i + delay] - y[i]).abs() <= 1e-12 * scale, "{name}: delay {delay} changes sample {i}");
            }
        }
    }
    Ok(format!("{cutoffs} cutoffs within {worst:.4} dB of -3.01 dB; linear and time invariant"))
}
