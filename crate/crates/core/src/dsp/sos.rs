use std::f64::consts::PI;

use num_complex::Complex64;

use super::DspError;

/// One second-order section, `a0` normalized to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    /// `a1`, `a2`.
    pub a: [f64; 2],
}

impl Biquad {
    fn response(&self, z_inv: Complex64) -> Complex64 {
        let z2 = z_inv * z_inv;
        let num = self.b[0] + self.b[1] * z_inv + self.b[2] * z2;
        let den = 1.0 + self.a[0] * z_inv + self.a[1] * z2;
        num / den
    }

    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[0] + self.a[1])
    }

    fn poles(&self) -> [Complex64; 2] {
        let (a1, a2) = (self.a[0], self.a[1]);
        let disc = Complex64::new(a1 * a1 - 4.0 * a2, 0.0).sqrt();
        [(-a1 + disc) / 2.0, (-a1 - disc) / 2.0]
    }
}

/// Cascade of second-order sections sampled at `fs`.
#[derive(Debug, Clone, PartialEq)]
pub struct SosFilter {
    sections: Vec<Biquad>,
    fs: f64,
}

impl SosFilter {
    pub fn new(sections: Vec<Biquad>, fs: f64) -> Self {
        Self { sections, fs }
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    /// Concatenates two cascades running at the same rate.
    pub fn then(mut self, other: &SosFilter) -> SosFilter {
        debug_assert_eq!(self.fs, other.fs);
        self.sections.extend_from_slice(&other.sections);
        self
    }

    /// Complex frequency response at `freq_hz`.
    pub fn response(&self, freq_hz: f64) -> Complex64 {
        let z_inv = Complex64::from_polar(1.0, -2.0 * PI * freq_hz / self.fs);
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(z_inv))
    }

    pub fn magnitude(&self, freq_hz: f64) -> f64 {
        self.response(freq_hz).norm()
    }

    pub fn max_pole_radius(&self) -> f64 {
        self.sections
            .iter()
            .flat_map(|s| s.poles())
            .map(|p| p.norm())
            .fold(0.0, f64::max)
    }

    /// Causal single-pass filtering from a zero initial state.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>, DspError> {
        if x.is_empty() {
            return Err(DspError::EmptyInput);
        }
        let mut y = x.to_vec();
        for s in &self.sections {
            run_section(s, &mut y, 0.0, 0.0);
        }
        Ok(y)
    }

    /// Causal filtering whose initial state is the steady state for a
    /// constant input equal to `x[0]`, so a DC level produces no transient.
    pub fn apply_steady(&self, x: &[f64]) -> Result<Vec<f64>, DspError> {
        if x.is_empty() {
            return Err(DspError::EmptyInput);
        }
        let mut y = x.to_vec();
        let mut level = x[0];
        for s in &self.sections {
            let out = s.dc_gain() * level;
            let s2 = s.b[2] * level - s.a[1] * out;
            let s1 = out - s.b[0] * level;
            run_section(s, &mut y, s1, s2);
            level = out;
        }
        Ok(y)
    }
}

/// Transposed direct form II, in place.
fn run_section(s: &Biquad, y: &mut [f64], mut s1: f64, mut s2: f64) {
    let [b0, b1, b2] = s.b;
    let [a1, a2] = s.a;
    for v in y.iter_mut() {
        let x = *v;
        let out = b0 * x + s1;
        s1 = b1 * x - a1 * out + s2;
        s2 = b2 * x - a2 * out;
        *v = out;
    }
}
