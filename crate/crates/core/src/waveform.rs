//! Uniformly sampled real and complex waveforms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_input, Result};

/// Uniform time grid: `len` instants starting at `t0`, spaced `1 / rate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub rate: f64,
    pub len: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, rate: f64, len: usize) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return invalid_input(format!("grid rate must be positive, got {rate}"));
        }
        if !t0.is_finite() {
            return invalid_input("grid start time must be finite");
        }
        if len == 0 {
            return invalid_input("grid must contain at least one instant");
        }
        Ok(Self { t0, rate, len })
    }

    /// Grid covering `n_samples` samples of a stream at `sample_rate`,
    /// `oversampling` grid points per sample, starting at `t = 0`.
    pub fn covering(sample_rate: f64, n_samples: usize, oversampling: usize) -> Result<Self> {
        if oversampling == 0 {
            return invalid_input("oversampling factor must be at least 1");
        }
        Self::new(0.0, sample_rate * oversampling as f64, n_samples * oversampling)
    }

    #[inline]
    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 / self.rate
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |i| self.time(i))
    }

    pub fn duration(&self) -> f64 {
        self.len as f64 / self.rate
    }

    /// Index of the grid point at time `t`, if `t` falls on the grid within
    /// `tol` grid periods.
    pub fn index_of(&self, t: f64, tol: f64) -> Option<usize> {
        let pos = (t - self.t0) * self.rate;
        let idx = pos.round();
        if (pos - idx).abs() <= tol && idx >= 0.0 && (idx as usize) < self.len {
            Some(idx as usize)
        } else {
            None
        }
    }

    pub(crate) fn same_as(&self, other: &TimeGrid) -> bool {
        self.len == other.len
            && (self.rate - other.rate).abs() <= 1e-12 * self.rate
            && (self.t0 - other.t0).abs() <= 1e-6 / self.rate
    }
}

/// Real-valued, uniformly sampled signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledWaveform {
    samples: Vec<f64>,
    sample_rate: f64,
    t0: f64,
}

impl SampledWaveform {
    pub fn new(samples: Vec<f64>, sample_rate: f64, t0: f64) -> Result<Self> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return invalid_input(format!("sample rate must be positive, got {sample_rate}"));
        }
        if samples.is_empty() {
            return invalid_input("waveform must contain at least one sample");
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return invalid_input(format!("non-finite sample at index {i}"));
        }
        if !t0.is_finite() {
            return invalid_input("start time must be finite");
        }
        Ok(Self {
            samples,
            sample_rate,
            t0,
        })
    }

    pub fn on_grid(samples: Vec<f64>, grid: &TimeGrid) -> Result<Self> {
        if samples.len() != grid.len {
            return invalid_input(format!(
                "sample count {} does not match grid length {}",
                samples.len(),
                grid.len
            ));
        }
        Self::new(samples, grid.rate, grid.t0)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn grid(&self) -> TimeGrid {
        TimeGrid {
            t0: self.t0,
            rate: self.sample_rate,
            len: self.samples.len(),
        }
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 / self.sample_rate
    }

    /// Sub-waveform of `len` samples starting at index `start`.
    pub fn window(&self, start: usize, len: usize) -> Result<Self> {
        if len == 0 || start + len > self.samples.len() {
            return invalid_input(format!(
                "window [{start}, {}) outside waveform of length {}",
                start + len,
                self.samples.len()
            ));
        }
        Ok(Self {
            samples: self.samples[start..start + len].to_vec(),
            sample_rate: self.sample_rate,
            t0: self.time(start),
        })
    }

    pub fn power(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum::<f64>() / self.samples.len() as f64
    }

    pub fn rms(&self) -> f64 {
        self.power().sqrt()
    }

    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|v| v * gain).collect(),
            ..self.clone()
        }
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Complex envelope of a band-pass signal (here the optical field).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexWaveform {
    samples: Vec<Complex64>,
    sample_rate: f64,
    t0: f64,
    /// Informational carrier frequency in hertz.
    pub carrier: f64,
}

/// 193.1 THz, the C-band anchor frequency.
pub const C_BAND_CARRIER: f64 = 193.1e12;

impl ComplexWaveform {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64, t0: f64, carrier: f64) -> Result<Self> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return invalid_input(format!("sample rate must be positive, got {sample_rate}"));
        }
        if samples.is_empty() {
            return invalid_input("waveform must contain at least one sample");
        }
        if let Some(i) = samples
            .iter()
            .position(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return invalid_input(format!("non-finite sample at index {i}"));
        }
        Ok(Self {
            samples,
            sample_rate,
            t0,
            carrier,
        })
    }

    pub fn from_real(wave: &SampledWaveform, carrier: f64) -> Self {
        Self {
            samples: wave
                .samples()
                .iter()
                .map(|&v| Complex64::new(v, 0.0))
                .collect(),
            sample_rate: wave.sample_rate(),
            t0: wave.t0(),
            carrier,
        }
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn power(&self) -> f64 {
        self.samples.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    pub fn grid(&self) -> TimeGrid {
        TimeGrid {
            t0: self.t0,
            rate: self.sample_rate,
            len: self.samples.len(),
        }
    }

    pub fn real(&self) -> SampledWaveform {
        SampledWaveform {
            samples: self.samples.iter().map(|v| v.re).collect(),
            sample_rate: self.sample_rate,
            t0: self.t0,
        }
    }

    pub fn imag(&self) -> SampledWaveform {
        SampledWaveform {
            samples: self.samples.iter().map(|v| v.im).collect(),
            sample_rate: self.sample_rate,
            t0: self.t0,
        }
    }
}
