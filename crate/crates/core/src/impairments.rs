//! Stochastic impairments: timing jitter, uniform quantization and
//! OSNR-referenced optical noise.
//!
//! Every stochastic function takes its generator explicitly; equal seeds give
//! bit-identical output.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid_input, Result};
use crate::waveform::{ComplexWaveform, SampledWaveform};

/// 0.1 nm at 193.1 THz.
pub const DEFAULT_REFERENCE_BANDWIDTH: f64 = 12.5e9;

/// RMS jitter assumed for the RF oscillator that feeds the sequences.
pub const DEFAULT_RF_JITTER: f64 = 100e-15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ImpairmentSpec {
    /// Per-sample aperture jitter of every electronic DAC, seconds RMS.
    pub dac_jitter_rms: f64,
    /// Timing jitter of the shared RF oscillator, seconds RMS.
    pub rf_jitter_rms: f64,
    pub quantizer_bits: Option<u32>,
    /// `None` means noiseless.
    pub osnr_db: Option<f64>,
    pub reference_bandwidth: f64,
    pub seed: u64,
}

impl Default for ImpairmentSpec {
    fn default() -> Self {
        Self {
            dac_jitter_rms: 0.0,
            rf_jitter_rms: 0.0,
            quantizer_bits: None,
            osnr_db: None,
            reference_bandwidth: DEFAULT_REFERENCE_BANDWIDTH,
            seed: 0,
        }
    }
}

impl ImpairmentSpec {
    pub fn ideal() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dac_jitter_rms >= 0.0 && self.dac_jitter_rms.is_finite()) {
            return invalid_input("DAC jitter must be finite and non-negative");
        }
        if !(self.rf_jitter_rms >= 0.0 && self.rf_jitter_rms.is_finite()) {
            return invalid_input("RF jitter must be finite and non-negative");
        }
        if self.quantizer_bits == Some(0) {
            return invalid_input("quantizer needs at least one bit");
        }
        if !(self.reference_bandwidth > 0.0 && self.reference_bandwidth.is_finite()) {
            return invalid_input("reference bandwidth must be positive");
        }
        if matches!(self.osnr_db, Some(v) if v.is_nan()) {
            return invalid_input("OSNR must not be NaN");
        }
        Ok(())
    }

    pub fn is_ideal(&self) -> bool {
        self.dac_jitter_rms == 0.0
            && self.rf_jitter_rms == 0.0
            && self.quantizer_bits.is_none()
            && self.osnr_db.is_none()
    }
}

/// `count` i.i.d. Gaussian timing errors with standard deviation `sigma`.
/// Returns `None` for `sigma == 0` without touching the generator.
pub fn timing_errors<R: Rng + ?Sized>(
    count: usize,
    sigma: f64,
    rng: &mut R,
) -> Result<Option<Vec<f64>>> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return invalid_input(format!("jitter must be finite and non-negative, got {sigma}"));
    }
    if sigma == 0.0 {
        return Ok(None);
    }
    Ok(Some(
        (0..count)
            .map(|_| sigma * Distribution::<f64>::sample(&StandardNormal, rng))
            .collect(),
    ))
}

/// Nominal instants plus i.i.d. Gaussian timing errors.
pub fn jitter_instants<R: Rng + ?Sized>(
    nominal: &[f64],
    sigma: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    Ok(match timing_errors(nominal.len(), sigma, rng)? {
        None => nominal.to_vec(),
        Some(tau) => nominal.iter().zip(tau).map(|(t, e)| t + e).collect(),
    })
}

/// Uniform mid-rise quantizer with `2^bits` levels spanning
/// `[-full_scale, +full_scale]`; values beyond the range clip to the
/// outermost level.
pub fn quantize(wave: &SampledWaveform, bits: u32, full_scale: f64) -> Result<SampledWaveform> {
    if bits == 0 || bits > 52 {
        return invalid_input(format!("quantizer bits must be in 1..=52, got {bits}"));
    }
    if !(full_scale > 0.0 && full_scale.is_finite()) {
        return invalid_input("full scale must be positive");
    }
    let levels = 1i64 << bits;
    let step = 2.0 * full_scale / levels as f64;
    let (lo, hi) = (-(levels / 2), levels / 2 - 1);
    let samples = wave
        .samples()
        .iter()
        .map(|&v| {
            let idx = ((v / step).floor() as i64).clamp(lo, hi);
            (idx as f64 + 0.5) * step
        })
        .collect();
    SampledWaveform::new(samples, wave.sample_rate(), wave.t0())
}

/// Adds circular complex Gaussian noise for the given OSNR.
///
/// The noise PSD is `P_signal / (10^(osnr/10) · B_ref)`, so the per-sample
/// variance is `PSD · sample_rate`, split equally between quadratures.
/// `osnr_db = +∞` leaves the field unchanged.
pub fn awgn_osnr<R: Rng + ?Sized>(
    wave: &ComplexWaveform,
    osnr_db: f64,
    reference_bandwidth: f64,
    rng: &mut R,
) -> Result<ComplexWaveform> {
    if osnr_db.is_nan() {
        return invalid_input("OSNR must not be NaN");
    }
    if !(reference_bandwidth > 0.0) {
        return invalid_input("reference bandwidth must be positive");
    }
    let power = wave.power();
    if !(power > 0.0) {
        return invalid_input("cannot reference OSNR to a zero-power signal");
    }
    if osnr_db == f64::INFINITY {
        return Ok(wave.clone());
    }
    let psd = power / (10f64.powf(osnr_db / 10.0) * reference_bandwidth);
    let variance = psd * wave.sample_rate();
    let normal = Normal::new(0.0, (variance / 2.0).sqrt())
        .map_err(|e| crate::Error::InvalidInput(e.to_string()))?;
    let samples = wave
        .samples()
        .iter()
        .map(|v| v + Complex64::new(normal.sample(rng), normal.sample(rng)))
        .collect();
    ComplexWaveform::new(samples, wave.sample_rate(), wave.t0(), wave.carrier)
}

/// Noise variance per complex sample that [`awgn_osnr`] adds.
pub fn osnr_noise_variance(power: f64, osnr_db: f64, reference_bandwidth: f64, rate: f64) -> f64 {
    power / (10f64.powf(osnr_db / 10.0) * reference_bandwidth) * rate
}
