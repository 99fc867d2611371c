//! Synthetic multimodal recordings with tonic-clonic seizures and
//! single-modality confounders.
//!
//! Each seizure has a quiet focal lead, a tonic phase of sustained muscle
//! activity, a clonic phase of jerks whose rate decays from 3 Hz to 1 Hz, and
//! a quiet tail before the annotated offset. Confounders each mimic seizure
//! morphology in one detection modality only: motion jerks on ACC (with
//! sub-20 Hz EMG artifact that the EMG highpass removes), chewing bursts on
//! EMG, and electrode pops with muscle-like bursts on EEG.

use std::f64::consts::{PI, SQRT_2};

use chrono::{DateTime, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsp::{design_butterworth, detect_r_peaks, FilterSpec};
use crate::io::{AnnotationSet, Channel, IoError, Modality, Recording, SeizureEvent, SeizureType};

pub const EEG_CHANNELS: [&str; 2] = ["eeg_l", "eeg_r"];
pub const EMG_CHANNEL: &str = "emg";
pub const ECG_CHANNEL: &str = "ecg";
pub const ACC_AXES: [&str; 3] = ["acc_x", "acc_y", "acc_z"];

/// Background EEG (pink noise) standard deviation, µV.
pub const EEG_BACKGROUND_UV: f64 = 10.0;
/// Peak amplitude of background alpha bursts, µV.
pub const ALPHA_UV: f64 = 20.0;
/// Muscle artifact on EEG during seizures: 5× the alpha RMS.
pub const EEG_MUSCLE_UV: f64 = 5.0 * ALPHA_UV / SQRT_2;
/// Background EMG standard deviation, µV.
pub const EMG_BACKGROUND_UV: f64 = 5.0;
/// Seizure EMG standard deviation: 10× background.
pub const EMG_SEIZURE_UV: f64 = 10.0 * EMG_BACKGROUND_UV;
/// Highpassed 2 s EMG window RMS that only tonic activity reaches.
pub const SEIZURE_EMG_RMS_UV: f64 = 0.8 * EMG_SEIZURE_UV;
pub const ECG_R_UV: f64 = 1000.0;
pub const ECG_NOISE_UV: f64 = 20.0;
pub const ACC_NOISE_G: f64 = 0.01;
pub const ACC_TONIC_G: f64 = 0.03;
pub const ACC_JERK_G: f64 = 0.5;
/// Heart-rate increase reached 20 s into a seizure, bpm.
pub const ICTAL_HR_RISE_BPM: f64 = 40.0;

const MUSCLE_BAND_HZ: (f64, f64) = (20.0, 80.0);
const BURST_S: f64 = 0.15;
const EDGE_MARGIN_S: f64 = 300.0;
const CONFOUNDER_MARGIN_S: f64 = 60.0;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synth config: {0}")]
    Config(String),
    #[error("{0}")]
    DoesNotFit(String),
    #[error("seizure at {onset_s} s overlaps an existing seizure")]
    Overlap { onset_s: f64 },
    #[error("recording has no {0} channel")]
    MissingChannel(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Dsp(#[from] crate::dsp::DspError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub subject_id: String,
    pub recording_id: String,
    pub start_time: DateTime<Utc>,
    pub duration_h: f64,
    pub n_seizures: usize,
    pub seizure_min_s: f64,
    pub seizure_max_s: f64,
    pub seizure_mean_s: f64,
    /// Fraction of the active (post-lead, pre-tail) seizure spent in the tonic phase.
    pub tonic_fraction: f64,
    pub lead_s: f64,
    pub tail_s: f64,
    pub min_seizure_gap_s: f64,
    pub artifact_rate_per_h: f64,
    pub fs_exg_hz: f64,
    pub fs_acc_hz: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            subject_id: "sub-01".into(),
            recording_id: "sub-01_rec-01".into(),
            start_time: Utc.with_ymd_and_hms(2024, 1, 1, 20, 0, 0).unwrap(),
            duration_h: 8.0,
            n_seizures: 3,
            seizure_min_s: 55.0,
            seizure_max_s: 661.0,
            seizure_mean_s: 124.0,
            tonic_fraction: 0.3,
            lead_s: 8.0,
            tail_s: 6.0,
            min_seizure_gap_s: 120.0,
            artifact_rate_per_h: 4.0,
            fs_exg_hz: Modality::Eeg.default_fs(),
            fs_acc_hz: Modality::Acc.default_fs(),
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::Config(m.into()));
        if !(self.duration_h > 0.0) {
            return bad("duration_h must be positive");
        }
        if !(self.seizure_min_s > 0.0
            && self.seizure_min_s <= self.seizure_mean_s
            && self.seizure_mean_s <= self.seizure_max_s)
        {
            return bad("seizure durations need 0 < min <= mean <= max");
        }
        if !(0.0..1.0).contains(&self.tonic_fraction) {
            return bad("tonic_fraction must lie in [0, 1)");
        }
        if self.lead_s < 0.0 || self.tail_s < 0.0 || self.lead_s + self.tail_s >= self.seizure_min_s {
            return bad("lead and tail must fit inside the shortest seizure");
        }
        if self.artifact_rate_per_h < 0.0 || self.min_seizure_gap_s < 0.0 {
            return bad("rates and gaps must be non-negative");
        }
        if self.fs_exg_hz < 2.0 * MUSCLE_BAND_HZ.1 || self.fs_acc_hz < 20.0 {
            return bad("sampling rates too low for the seizure model");
        }
        Ok(())
    }

    fn seizure_params(&self, duration_s: f64, seed: u64) -> SeizureParams {
        SeizureParams {
            duration_s,
            lead_s: self.lead_s,
            tail_s: self.tail_s,
            tonic_fraction: self.tonic_fraction,
            seizure_type: SeizureType::Fbtc,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeizureParams {
    pub duration_s: f64,
    pub lead_s: f64,
    pub tail_s: f64,
    pub tonic_fraction: f64,
    pub seizure_type: SeizureType,
    pub seed: u64,
}

impl SeizureParams {
    /// `(tonic onset, clonic onset, activity end)` relative to seizure onset.
    pub fn phases(&self) -> (f64, f64, f64) {
        let active = self.duration_s - self.lead_s - self.tail_s;
        let tonic = self.lead_s;
        (tonic, tonic + self.tonic_fraction * active, self.duration_s - self.tail_s)
    }

    /// Clonic burst times relative to onset, with rate falling linearly from
    /// 3 Hz to 1 Hz across the clonic phase.
    pub fn clonic_bursts(&self) -> Vec<f64> {
        let (_, start, end) = self.phases();
        let mut out = Vec::new();
        let mut t = start;
        while t < end - BURST_S {
            out.push(t);
            let u = (t - start) / (end - start);
            t += 1.0 / (3.0 - 2.0 * u);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfounderKind {
    Motion,
    Chewing,
    ElectrodePop,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Confounder {
    pub kind: ConfounderKind,
    pub start_s: f64,
    pub end_s: f64,
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub recording: Recording,
    pub annotations: AnnotationSet,
    pub confounders: Vec<Confounder>,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn quantize(x: &mut [f64]) {
    for v in x {
        *v = *v as f32 as f64;
    }
}

fn to_index(t: f64, fs: f64) -> usize {
    (t * fs).round().max(0.0) as usize
}

/// White noise through a 20-80 Hz bandpass, scaled to unit standard deviation.
fn muscle_noise(rng: &mut ChaCha8Rng, n: usize, fs: f64) -> Vec<f64> {
    let white: Vec<f64> = (0..n.max(1)).map(|_| normal(rng)).collect();
    let filter = design_butterworth(&FilterSpec::bandpass(4, MUSCLE_BAND_HZ.0, MUSCLE_BAND_HZ.1, fs))
        .expect("valid muscle band");
    let mut y = filter.apply(&white).expect("non-empty");
    let sd = (y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64).sqrt();
    if sd > 0.0 {
        y.iter_mut().for_each(|v| *v /= sd);
    }
    y.truncate(n);
    y
}

/// Raised-cosine gain rising over `ramp` samples at both ends.
fn edge_ramp(k: usize, n: usize, ramp: usize) -> f64 {
    let d = k.min(n.saturating_sub(1 + k));
    if d >= ramp || ramp == 0 {
        1.0
    } else {
        0.5 - 0.5 * (PI * d as f64 / ramp as f64).cos()
    }
}

/// Hann-shaped noise bursts of `BURST_S` seconds added at `times` (seconds, absolute).
fn add_bursts(x: &mut [f64], fs: f64, times: &[f64], amp: f64, rng: &mut ChaCha8Rng, span: (usize, usize)) {
    let len = to_index(BURST_S, fs).max(2);
    for &t in times {
        let noise = muscle_noise(rng, len + 64, fs);
        let start = to_index(t, fs);
        for k in 0..len {
            let i = start + k;
            if i < span.0 || i >= span.1 || i >= x.len() {
                continue;
            }
            let env = 0.5 - 0.5 * (2.0 * PI * k as f64 / (len - 1) as f64).cos();
            x[i] += amp * env * noise[k + 64];
        }
    }
}

/// Damped 5 Hz oscillation in a random direction for each jerk time.
fn add_jerks(axes: &mut [Vec<f64>; 3], fs: f64, times: &[f64], amp: f64, rng: &mut ChaCha8Rng, span: (usize, usize)) {
    let len = to_index(0.6, fs);
    for &t in times {
        let dir: [f64; 3] = [normal(rng), normal(rng), normal(rng)];
        let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt().max(1e-9);
        let start = to_index(t, fs);
        for k in 0..len {
            let i = start + k;
            if i < span.0 || i >= span.1 || i >= axes[0].len() {
                continue;
            }
            let tk = k as f64 / fs;
            let shape = amp * (-tk / 0.12).exp() * (2.0 * PI * 5.0 * tk).sin();
            for (a, d) in axes.iter_mut().zip(dir) {
                a[i] += shape * d / norm;
            }
        }
    }
}

/// Gaussian P-QRS-T template evaluated `dt` seconds from the R peak.
fn beat_shape(dt: f64) -> f64 {
    let g = |c: f64, w: f64, a: f64| a * (-((dt - c) / w).powi(2) / 2.0).exp();
    g(-0.2, 0.025, 0.12) + g(-0.025, 0.008, -0.1) + g(0.0, 0.01, 1.0) + g(0.025, 0.008, -0.15) + g(0.25, 0.04, 0.25)
}

fn add_beat(x: &mut [f64], fs: f64, t: f64, span: (usize, usize)) {
    let lo = to_index((t - 0.35).max(0.0), fs).max(span.0);
    let hi = to_index(t + 0.45, fs).min(span.1).min(x.len());
    for (i, v) in x.iter_mut().enumerate().take(hi).skip(lo) {
        *v += ECG_R_UV * beat_shape(i as f64 / fs - t);
    }
}

struct Background {
    eeg: [Vec<f64>; 2],
    emg: Vec<f64>,
    ecg: Vec<f64>,
    acc: [Vec<f64>; 3],
}

fn background(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Background {
    let total_s = cfg.duration_h * 3600.0;
    let fs = cfg.fs_exg_hz;
    let n = to_index(total_s, fs);
    let na = to_index(total_s, cfg.fs_acc_hz);

    let mut eeg = [Vec::new(), Vec::new()];
    for ch in &mut eeg {
        // Paul Kellet's economy pink-noise filter.
        let (mut b0, mut b1, mut b2) = (0.0, 0.0, 0.0);
        let mut x: Vec<f64> = (0..n)
            .map(|_| {
                let w = normal(rng);
                b0 = 0.99765 * b0 + w * 0.099_046_0;
                b1 = 0.963 * b1 + w * 0.296_516_4;
                b2 = 0.57 * b2 + w * 1.052_691_3;
                b0 + b1 + b2 + w * 0.1848
            })
            .collect();
        let mean = x.iter().sum::<f64>() / n as f64;
        let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        x.iter_mut().for_each(|v| *v = (*v - mean) / sd * EEG_BACKGROUND_UV);
        // Alpha bursts: off for ~8 s on average, on for 1-4 s.
        let off = Exp::new(1.0 / 8.0).expect("positive rate");
        let mut t = off.sample(rng);
        while t < total_s {
            let dur = rng.random_range(1.0..4.0);
            let f = rng.random_range(9.5..10.5);
            let (a, b) = (to_index(t, fs), to_index((t + dur).min(total_s), fs).min(n));
            for i in a..b {
                let env = (PI * (i - a) as f64 / (b - a) as f64).sin();
                x[i] += ALPHA_UV * env * (2.0 * PI * f * (i - a) as f64 / fs).sin();
            }
            t += dur + off.sample(rng);
        }
        *ch = x;
    }

    let emg: Vec<f64> = muscle_noise(rng, n, fs)
        .into_iter()
        .map(|v| v * EMG_BACKGROUND_UV)
        .collect();

    let mut ecg: Vec<f64> = (0..n).map(|_| normal(rng) * ECG_NOISE_UV).collect();
    let base_hr = rng.random_range(60.0..80.0);
    let mut t = rng.random_range(0.2..0.8);
    while t < total_s {
        add_beat(&mut ecg, fs, t, (0, n));
        let hrv = 1.0 + 0.03 * (2.0 * PI * t / 25.0).sin();
        let rr = 60.0 / (base_hr * hrv) + 0.02 * normal(rng);
        t += rr.max(0.35);
    }

    // Gravity with occasional slow posture changes.
    let fa = cfg.fs_acc_hz;
    let mut acc = [vec![0.0; na], vec![0.0; na], vec![0.0; na]];
    let mut current = [0.0, 0.0, 1.0];
    let mut changes = Vec::new();
    let gaps = Exp::new(6.0 / 3600.0).expect("positive rate");
    let mut tc = gaps.sample(rng);
    while tc < total_s {
        let v = [normal(rng) * 0.5, normal(rng) * 0.5, 1.0 + normal(rng) * 0.2];
        let m = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        changes.push((tc, [v[0] / m, v[1] / m, v[2] / m]));
        tc += gaps.sample(rng);
    }
    let mut next = 0;
    let mut from = current;
    for i in 0..na {
        let ti = i as f64 / fa;
        while next < changes.len() && ti >= changes[next].0 + 2.0 {
            current = changes[next].1;
            from = current;
            next += 1;
        }
        let g = if next < changes.len() && ti >= changes[next].0 {
            let u = (ti - changes[next].0) / 2.0;
            let w = 0.5 - 0.5 * (PI * u).cos();
            let to = changes[next].1;
            [0, 1, 2].map(|k| from[k] + (to[k] - from[k]) * w)
        } else {
            current
        };
        for k in 0..3 {
            acc[k][i] = g[k] + ACC_NOISE_G * normal(rng);
        }
    }

    Background { eeg, emg, ecg, acc }
}

fn channel_mut<'a>(channels: &'a mut [(String, Modality, f64, Vec<f64>)], name: &str) -> Result<&'a mut (String, Modality, f64, Vec<f64>), SynthError> {
    channels
        .iter_mut()
        .find(|c| c.0 == name)
        .ok_or_else(|| SynthError::MissingChannel(name.into()))
}

fn unpack(rec: &Recording) -> Vec<(String, Modality, f64, Vec<f64>)> {
    rec.channels()
        .iter()
        .map(|c| (c.name().to_string(), c.modality(), c.fs(), c.samples().to_vec()))
        .collect()
}

fn repack(rec: &Recording, channels: Vec<(String, Modality, f64, Vec<f64>)>) -> Result<Recording, SynthError> {
    let channels = channels
        .into_iter()
        .map(|(name, m, fs, mut x)| {
            quantize(&mut x);
            Channel::new(name, m, fs, x)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Recording::new(rec.id(), rec.subject_id(), rec.start_time(), channels)?)
}

/// Add a seizure starting at `onset_s`. Samples outside
/// `[onset_s, onset_s + duration_s)` are left untouched.
pub fn inject_seizure(
    rec: &Recording,
    truth: &AnnotationSet,
    onset_s: f64,
    params: &SeizureParams,
) -> Result<(Recording, AnnotationSet), SynthError> {
    let offset_s = onset_s + params.duration_s;
    if onset_s < 0.0 || offset_s > rec.duration_s() {
        return Err(SynthError::DoesNotFit(format!(
            "seizure [{onset_s}, {offset_s}] outside recording of {} s",
            rec.duration_s()
        )));
    }
    if truth
        .events()
        .iter()
        .any(|e| onset_s < e.offset_s && e.onset_s < offset_s)
    {
        return Err(SynthError::Overlap { onset_s });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let (tonic_rel, clonic_rel, end_rel) = params.phases();
    let bursts: Vec<f64> = params.clonic_bursts().iter().map(|t| onset_s + t).collect();
    let mut channels = unpack(rec);

    for (name, modality, fs, x) in channels.iter_mut() {
        let fs = *fs;
        let span = (to_index(onset_s, fs), to_index(offset_s, fs).min(x.len()));
        let tonic = (to_index(onset_s + tonic_rel, fs), to_index(onset_s + clonic_rel, fs));
        match modality {
            Modality::Eeg | Modality::Emg => {
                let amp = if *modality == Modality::Eeg { EEG_MUSCLE_UV } else { EMG_SEIZURE_UV };
                let n = tonic.1.saturating_sub(tonic.0);
                let noise = muscle_noise(&mut rng, n, fs);
                let ramp = to_index(1.0, fs);
                for k in 0..n {
                    x[tonic.0 + k] += amp * edge_ramp(k, n, ramp) * noise[k];
                }
                add_bursts(x, fs, &bursts, amp * 1.5, &mut rng, span);
                if *modality == Modality::Eeg {
                    // Subtle rhythmic focal change during the lead.
                    let lead_end = tonic.0;
                    for i in span.0..lead_end {
                        let t = (i - span.0) as f64 / fs;
                        x[i] += 0.5 * ALPHA_UV * (t / params.lead_s.max(1e-9)) * (2.0 * PI * 6.0 * t).sin();
                    }
                }
            }
            Modality::Ecg => {
                let lo = onset_s.max(0.0);
                let slice_start = to_index((lo - 10.0).max(0.0), fs);
                let slice_end = to_index(offset_s + 10.0, fs).min(x.len());
                let ch = Channel::new(name.clone(), Modality::Ecg, fs, x[slice_start..slice_end].to_vec())?;
                let peaks: Vec<f64> = detect_r_peaks(&ch)?
                    .into_iter()
                    .map(|p| (slice_start + p) as f64 / fs)
                    .filter(|&t| t >= onset_s && t < offset_s)
                    .collect();
                // Insert extra beats mid-interval so the mean rate climbs by the
                // ictal rise over the first 20 s.
                let mut credit = 0.0;
                for w in peaks.windows(2) {
                    let rr = w[1] - w[0];
                    let hr = 60.0 / rr;
                    let ramp = ((w[0] - onset_s) / 20.0).clamp(0.0, 1.0);
                    credit += ramp * ICTAL_HR_RISE_BPM / hr;
                    if credit >= 1.0 {
                        credit -= 1.0;
                        add_beat(x, fs, w[0] + rr / 2.0, span);
                    }
                }
            }
            Modality::Acc => {
                let n = tonic.1.saturating_sub(tonic.0);
                let ramp = to_index(1.0, fs);
                let phase = match name.as_str() {
                    "acc_x" => 0.0,
                    "acc_y" => 2.0,
                    _ => 4.0,
                };
                for k in 0..n {
                    let t = k as f64 / fs;
                    x[tonic.0 + k] +=
                        ACC_TONIC_G * edge_ramp(k, n, ramp) * (2.0 * PI * 8.0 * t + phase).sin();
                }
            }
            Modality::Gyr => {}
        }
    }

    let fa = channels
        .iter()
        .find(|c| c.1 == Modality::Acc)
        .map(|c| c.2);
    if let Some(fa) = fa {
        let span = (to_index(onset_s, fa), to_index(offset_s, fa));
        let mut axes = [Vec::new(), Vec::new(), Vec::new()];
        for (k, name) in ACC_AXES.iter().enumerate() {
            axes[k] = std::mem::take(&mut channel_mut(&mut channels, name)?.3);
        }
        add_jerks(&mut axes, fa, &bursts, ACC_JERK_G, &mut rng, span);
        for (k, name) in ACC_AXES.iter().enumerate() {
            channel_mut(&mut channels, name)?.3 = std::mem::take(&mut axes[k]);
        }
    }
    let _ = end_rel;

    let mut events = truth.events().to_vec();
    events.push(SeizureEvent {
        onset_s,
        offset_s,
        tonic_onset_s: Some(onset_s + tonic_rel),
        clonic_onset_s: Some(onset_s + clonic_rel),
        seizure_type: params.seizure_type,
    });
    events.sort_by(|a, b| a.onset_s.total_cmp(&b.onset_s));
    Ok((repack(rec, channels)?, AnnotationSet::new(events)?))
}

fn add_confounder(
    channels: &mut [(String, Modality, f64, Vec<f64>)],
    c: &Confounder,
    rng: &mut ChaCha8Rng,
) -> Result<(), SynthError> {
    let dur = c.end_s - c.start_s;
    let rate = rng.random_range(1.5..3.0);
    let times: Vec<f64> = (0..)
        .map(|k| c.start_s + 0.5 + k as f64 / rate)
        .take_while(|&t| t < c.end_s - 0.7)
        .collect();
    match c.kind {
        ConfounderKind::Motion => {
            let fa = channel_mut(channels, ACC_AXES[0])?.2;
            let span = (to_index(c.start_s, fa), to_index(c.end_s, fa));
            let mut axes = [Vec::new(), Vec::new(), Vec::new()];
            for (k, name) in ACC_AXES.iter().enumerate() {
                axes[k] = std::mem::take(&mut channel_mut(channels, name)?.3);
            }
            add_jerks(&mut axes, fa, &times, ACC_JERK_G, rng, span);
            for (k, name) in ACC_AXES.iter().enumerate() {
                channel_mut(channels, name)?.3 = std::mem::take(&mut axes[k]);
            }
            // Movement artifact on EMG stays below the 20 Hz highpass.
            let emg = channel_mut(channels, EMG_CHANNEL)?;
            let fs = emg.2;
            let f = rng.random_range(2.0..5.0);
            let (a, b) = (to_index(c.start_s, fs), to_index(c.end_s, fs).min(emg.3.len()));
            for i in a..b {
                let t = (i - a) as f64 / fs;
                emg.3[i] += 100.0 * edge_ramp(i - a, b - a, to_index(1.0, fs)) * (2.0 * PI * f * t).sin();
            }
        }
        ConfounderKind::Chewing => {
            let emg = channel_mut(channels, EMG_CHANNEL)?;
            let fs = emg.2;
            let span = (to_index(c.start_s, fs), to_index(c.end_s, fs));
            add_bursts(&mut emg.3, fs, &times, EMG_SEIZURE_UV * 1.5, rng, span);
        }
        ConfounderKind::ElectrodePop => {
            // Scalp muscle artifact: a sustained stretch, then rhythmic bursts,
            // with small electrode steps on top.
            let tonic_end = c.start_s + rng.random_range(0.2..0.4) * dur;
            let bursts: Vec<f64> = times.iter().copied().filter(|&t| t > tonic_end).collect();
            for name in EEG_CHANNELS {
                let eeg = channel_mut(channels, name)?;
                let fs = eeg.2;
                let (a, b) = (to_index(c.start_s, fs), to_index(tonic_end, fs).min(eeg.3.len()));
                let noise = muscle_noise(rng, b - a, fs);
                let ramp = to_index(1.0, fs);
                for k in 0..b - a {
                    eeg.3[a + k] += EEG_MUSCLE_UV * edge_ramp(k, b - a, ramp) * noise[k];
                }
                let span = (to_index(c.start_s, fs), to_index(c.end_s, fs).min(eeg.3.len()));
                add_bursts(&mut eeg.3, fs, &bursts, EEG_MUSCLE_UV * 1.5, rng, span);
                let mut t = c.start_s + 1.0;
                while t < c.end_s - 1.0 {
                    let step = rng.random_range(-50.0..50.0);
                    let s = to_index(t, fs);
                    for i in s..span.1 {
                        let dt = (i - s) as f64 / fs;
                        eeg.3[i] += step * (-dt / 0.5).exp();
                    }
                    t += rng.random_range(4.0..8.0);
                }
            }
        }
    }
    let _ = dur;
    Ok(())
}

/// Seizure durations: 55 s plus an exponential tail, truncated at the maximum.
fn sample_duration(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> f64 {
    let tail = Exp::new(1.0 / (cfg.seizure_mean_s - cfg.seizure_min_s).max(1e-9)).expect("positive rate");
    loop {
        let d = cfg.seizure_min_s + tail.sample(rng);
        if d <= cfg.seizure_max_s {
            return d;
        }
    }
}

fn place(
    rng: &mut ChaCha8Rng,
    total_s: f64,
    dur: f64,
    taken: &[(f64, f64)],
    gap: f64,
    what: &str,
) -> Result<f64, SynthError> {
    let lo = EDGE_MARGIN_S.min(total_s / 4.0);
    let hi = total_s - lo - dur;
    if hi <= lo {
        return Err(SynthError::DoesNotFit(format!("{what} of {dur:.0} s does not fit")));
    }
    for _ in 0..10_000 {
        let t = rng.random_range(lo..hi);
        if taken.iter().all(|&(a, b)| t + dur + gap <= a || b + gap <= t) {
            return Ok(t);
        }
    }
    Err(SynthError::DoesNotFit(format!("no room left for {what}")))
}

pub fn generate_recording(cfg: &SynthConfig) -> Result<SynthOutput, SynthError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let total_s = cfg.duration_h * 3600.0;

    let mut seizures = Vec::new();
    for _ in 0..cfg.n_seizures {
        let dur = sample_duration(cfg, &mut rng);
        let spans: Vec<(f64, f64)> = seizures.iter().map(|&(t, d, _)| (t, t + d)).collect();
        let t = place(&mut rng, total_s, dur, &spans, cfg.min_seizure_gap_s, "seizure")?;
        seizures.push((t, dur, rng.random::<u64>()));
    }
    seizures.sort_by(|a, b| a.0.total_cmp(&b.0));

    let n_conf = (cfg.artifact_rate_per_h * cfg.duration_h).round() as usize;
    let mut confounders = Vec::with_capacity(n_conf);
    for k in 0..n_conf {
        let kind = [ConfounderKind::Motion, ConfounderKind::Chewing, ConfounderKind::ElectrodePop][k % 3];
        let dur = rng.random_range(30.0..60.0);
        let seizure_spans = seizures.iter().map(|&(t, d, _)| (t, t + d));
        let taken: Vec<(f64, f64)> = confounders
            .iter()
            .map(|c: &Confounder| (c.start_s, c.end_s))
            .chain(seizure_spans)
            .collect();
        let t = place(&mut rng, total_s, dur, &taken, CONFOUNDER_MARGIN_S, "confounder")?;
        confounders.push(Confounder {
            kind,
            start_s: t,
            end_s: t + dur,
        });
    }
    confounders.sort_by(|a, b| a.start_s.total_cmp(&b.start_s));

    let bg = background(cfg, &mut rng);
    let fs = cfg.fs_exg_hz;
    let fa = cfg.fs_acc_hz;
    let mut channels: Vec<(String, Modality, f64, Vec<f64>)> = Vec::new();
    let [eeg_l, eeg_r] = bg.eeg;
    channels.push((EEG_CHANNELS[0].into(), Modality::Eeg, fs, eeg_l));
    channels.push((EEG_CHANNELS[1].into(), Modality::Eeg, fs, eeg_r));
    channels.push((EMG_CHANNEL.into(), Modality::Emg, fs, bg.emg));
    channels.push((ECG_CHANNEL.into(), Modality::Ecg, fs, bg.ecg));
    for (name, x) in ACC_AXES.iter().zip(bg.acc) {
        channels.push(((*name).into(), Modality::Acc, fa, x));
    }
    for c in &confounders {
        add_confounder(&mut channels, c, &mut rng)?;
    }
    let channels = channels
        .into_iter()
        .map(|(name, m, fs, mut x)| {
            quantize(&mut x);
            Channel::new(name, m, fs, x)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut rec = Recording::new(&cfg.recording_id, &cfg.subject_id, cfg.start_time, channels)?;
    let mut truth = AnnotationSet::empty();
    for &(t, dur, seed) in &seizures {
        (rec, truth) = inject_seizure(&rec, &truth, t, &cfg.seizure_params(dur, seed))?;
    }
    Ok(SynthOutput {
        recording: rec,
        annotations: truth,
        confounders,
    })
}
