//! Digital Butterworth design.
//!
//! The analog prototype poles are mapped to the requested band with the
//! usual zero-pole-gain frequency transformations, discretized with a
//! prewarped bilinear transform, and finally paired into second-order
//! sections.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Biquad, DspError, SosFilter};

/// Highest order accepted by [`design_butterworth`].
pub const MAX_ORDER: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Lowpass,
    Highpass,
    Bandpass,
    Bandstop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub kind: FilterKind,
    pub order: usize,
    pub cutoffs_hz: Vec<f64>,
    pub fs_hz: f64,
}

impl FilterSpec {
    pub fn lowpass(order: usize, cutoff_hz: f64, fs_hz: f64) -> Self {
        Self {
            kind: FilterKind::Lowpass,
            order,
            cutoffs_hz: vec![cutoff_hz],
            fs_hz,
        }
    }

    pub fn highpass(order: usize, cutoff_hz: f64, fs_hz: f64) -> Self {
        Self {
            kind: FilterKind::Highpass,
            order,
            cutoffs_hz: vec![cutoff_hz],
            fs_hz,
        }
    }

    pub fn bandpass(order: usize, low_hz: f64, high_hz: f64, fs_hz: f64) -> Self {
        Self {
            kind: FilterKind::Bandpass,
            order,
            cutoffs_hz: vec![low_hz, high_hz],
            fs_hz,
        }
    }

    pub fn bandstop(order: usize, low_hz: f64, high_hz: f64, fs_hz: f64) -> Self {
        Self {
            kind: FilterKind::Bandstop,
            order,
            cutoffs_hz: vec![low_hz, high_hz],
            fs_hz,
        }
    }

    pub fn validate(&self) -> Result<(), DspError> {
        let bad = |reason: String| Err(DspError::InvalidFilter(reason));
        if !(self.fs_hz.is_finite() && self.fs_hz > 0.0) {
            return bad(format!("sampling rate {} Hz", self.fs_hz));
        }
        if self.order == 0 || self.order > MAX_ORDER {
            return bad(format!("order {} outside 1..={MAX_ORDER}", self.order));
        }
        let expected = match self.kind {
            FilterKind::Lowpass | FilterKind::Highpass => 1,
            FilterKind::Bandpass | FilterKind::Bandstop => 2,
        };
        if self.cutoffs_hz.len() != expected {
            return bad(format!(
                "{:?} needs {expected} cutoff(s), got {}",
                self.kind,
                self.cutoffs_hz.len()
            ));
        }
        let nyquist = self.fs_hz / 2.0;
        for &f in &self.cutoffs_hz {
            if !(f.is_finite() && f > 0.0 && f < nyquist) {
                return bad(format!("cutoff {f} Hz must lie in (0, {nyquist}) Hz"));
            }
        }
        if expected == 2 && self.cutoffs_hz[0] >= self.cutoffs_hz[1] {
            return bad(format!(
                "band edges {:?} must be ascending",
                self.cutoffs_hz
            ));
        }
        Ok(())
    }
}

struct Zpk {
    zeros: Vec<Complex64>,
    poles: Vec<Complex64>,
    gain: f64,
}

fn analog_prototype(order: usize) -> Zpk {
    let n = order as f64;
    let poles = (0..order)
        .map(|k| {
            let theta = PI * (2.0 * k as f64 + n + 1.0) / (2.0 * n);
            Complex64::from_polar(1.0, theta)
        })
        .collect();
    Zpk {
        zeros: Vec::new(),
        poles,
        gain: 1.0,
    }
}

fn prod_neg(values: &[Complex64]) -> Complex64 {
    values.iter().fold(Complex64::new(1.0, 0.0), |acc, &v| acc * -v)
}

fn to_lowpass(p: Zpk, wo: f64) -> Zpk {
    let degree = (p.poles.len() - p.zeros.len()) as i32;
    Zpk {
        zeros: p.zeros.iter().map(|z| z * wo).collect(),
        poles: p.poles.iter().map(|z| z * wo).collect(),
        gain: p.gain * wo.powi(degree),
    }
}

fn to_highpass(p: Zpk, wo: f64) -> Zpk {
    let degree = p.poles.len() - p.zeros.len();
    let gain = p.gain * (prod_neg(&p.zeros) / prod_neg(&p.poles)).re;
    let mut zeros: Vec<Complex64> = p.zeros.iter().map(|z| wo / z).collect();
    zeros.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), degree));
    Zpk {
        zeros,
        poles: p.poles.iter().map(|z| wo / z).collect(),
        gain,
    }
}

fn to_bandpass(p: Zpk, wo: f64, bw: f64) -> Zpk {
    let degree = p.poles.len() - p.zeros.len();
    let split = |vals: &[Complex64]| -> Vec<Complex64> {
        let scaled: Vec<Complex64> = vals.iter().map(|v| v * (bw / 2.0)).collect();
        let mut out: Vec<Complex64> = scaled
            .iter()
            .map(|v| v + (v * v - wo * wo).sqrt())
            .collect();
        out.extend(scaled.iter().map(|v| v - (v * v - wo * wo).sqrt()));
        out
    };
    let mut zeros = split(&p.zeros);
    zeros.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), degree));
    Zpk {
        zeros,
        poles: split(&p.poles),
        gain: p.gain * bw.powi(degree as i32),
    }
}

fn to_bandstop(p: Zpk, wo: f64, bw: f64) -> Zpk {
    let degree = p.poles.len() - p.zeros.len();
    let gain = p.gain * (prod_neg(&p.zeros) / prod_neg(&p.poles)).re;
    let split = |vals: &[Complex64]| -> Vec<Complex64> {
        let inv: Vec<Complex64> = vals.iter().map(|v| (bw / 2.0) / v).collect();
        let mut out: Vec<Complex64> = inv.iter().map(|v| v + (v * v - wo * wo).sqrt()).collect();
        out.extend(inv.iter().map(|v| v - (v * v - wo * wo).sqrt()));
        out
    };
    let mut zeros = split(&p.zeros);
    zeros.extend(std::iter::repeat_n(Complex64::new(0.0, wo), degree));
    zeros.extend(std::iter::repeat_n(Complex64::new(0.0, -wo), degree));
    Zpk {
        zeros,
        poles: split(&p.poles),
        gain,
    }
}

fn bilinear(p: Zpk, fs: f64) -> Zpk {
    let fs2 = Complex64::new(2.0 * fs, 0.0);
    let degree = p.poles.len() - p.zeros.len();
    let num = p.zeros.iter().fold(Complex64::new(1.0, 0.0), |a, &z| a * (fs2 - z));
    let den = p.poles.iter().fold(Complex64::new(1.0, 0.0), |a, &z| a * (fs2 - z));
    let mut zeros: Vec<Complex64> = p.zeros.iter().map(|&z| (fs2 + z) / (fs2 - z)).collect();
    zeros.extend(std::iter::repeat_n(Complex64::new(-1.0, 0.0), degree));
    Zpk {
        zeros,
        poles: p.poles.iter().map(|&z| (fs2 + z) / (fs2 - z)).collect(),
        gain: p.gain * (num / den).re,
    }
}

/// Groups roots into conjugate pairs (complex) and consecutive pairs (real).
/// A trailing unpaired real root becomes a single-element group.
fn pair_roots(roots: &[Complex64]) -> Vec<Vec<Complex64>> {
    let scale = roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
    let eps = 1e-9 * scale;
    let mut complex: Vec<Complex64> = roots.iter().copied().filter(|r| r.im > eps).collect();
    let mut real: Vec<f64> = roots
        .iter()
        .filter(|r| r.im.abs() <= eps)
        .map(|r| r.re)
        .collect();
    complex.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    real.sort_by(f64::total_cmp);
    let mut groups: Vec<Vec<Complex64>> = complex.into_iter().map(|c| vec![c, c.conj()]).collect();
    for chunk in real.chunks(2) {
        groups.push(chunk.iter().map(|&r| Complex64::new(r, 0.0)).collect());
    }
    groups
}

fn poly(roots: &[Complex64]) -> [f64; 3] {
    match roots {
        [] => [1.0, 0.0, 0.0],
        [r] => [1.0, -r.re, 0.0],
        [a, b] => [1.0, -(a + b).re, (a * b).re],
        _ => unreachable!("sections hold at most two roots"),
    }
}

fn zpk_to_sos(p: Zpk) -> Vec<Biquad> {
    let pole_groups = pair_roots(&p.poles);
    let zero_groups = pair_roots(&p.zeros);
    let sections = pole_groups.len().max(zero_groups.len());
    let mut out = Vec::with_capacity(sections);
    for i in 0..sections {
        let a = pole_groups.get(i).map_or([1.0, 0.0, 0.0], |g| poly(g));
        let mut b = zero_groups.get(i).map_or([1.0, 0.0, 0.0], |g| poly(g));
        if i == 0 {
            b.iter_mut().for_each(|v| *v *= p.gain);
        }
        out.push(Biquad {
            b,
            a: [a[1], a[2]],
        });
    }
    out
}

/// Designs a digital Butterworth filter as a cascade of second-order sections.
pub fn design_butterworth(spec: &FilterSpec) -> Result<SosFilter, DspError> {
    spec.validate()?;
    let fs = spec.fs_hz;
    let warp = |f: f64| 2.0 * fs * (PI * f / fs).tan();
    let proto = analog_prototype(spec.order);
    let analog = match spec.kind {
        FilterKind::Lowpass => to_lowpass(proto, warp(spec.cutoffs_hz[0])),
        FilterKind::Highpass => to_highpass(proto, warp(spec.cutoffs_hz[0])),
        FilterKind::Bandpass | FilterKind::Bandstop => {
            let w1 = warp(spec.cutoffs_hz[0]);
            let w2 = warp(spec.cutoffs_hz[1]);
            let wo = (w1 * w2).sqrt();
            let bw = w2 - w1;
            if spec.kind == FilterKind::Bandpass {
                to_bandpass(proto, wo, bw)
            } else {
                to_bandstop(proto, wo, bw)
            }
        }
    };
    let digital = bilinear(analog, fs);
    Ok(SosFilter::new(zpk_to_sos(digital), fs))
}
