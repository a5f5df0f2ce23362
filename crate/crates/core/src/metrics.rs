//! Signal-quality metrics.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dsp::fft_real;
use crate::error::{invalid_input, Result};
use crate::signals::SymbolStream;
use crate::waveform::SampledWaveform;

/// Reported Q for noiseless, fully separated classes.
pub const Q_SATURATION_DB: f64 = 100.0;

/// Floor for `Q_linear` before taking the logarithm, so that closed or
/// inverted eyes still produce a finite (very negative) number.
const Q_LINEAR_FLOOR: f64 = 1e-6;

/// Q below which a link counts as collapsed: `Q = 3.5` (about 10.9 dB), a
/// Gaussian bit-error ratio near 2.3e-4, the usual hard-decision FEC limit.
pub const COLLAPSE_THRESHOLD_DB: f64 = 10.881360887005513;

/// Minimum number of decisions per class for [`qfactor_bpsk`].
pub const MIN_CLASS_SAMPLES: usize = 100;

/// `100 · RMS(test - reference) / RMS(reference)` over the full records.
/// Apply [`SampledWaveform::window`] first to restrict to an interior.
pub fn rms_error_pct(test: &SampledWaveform, reference: &SampledWaveform) -> Result<f64> {
    if !test.grid().same_as(&reference.grid()) {
        return invalid_input("waveforms must share a time grid");
    }
    let ref_power = reference.power();
    if !(ref_power > 0.0) {
        return invalid_input("reference waveform has zero power");
    }
    let err_power = test
        .samples()
        .iter()
        .zip(reference.samples())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / test.len() as f64;
    Ok(100.0 * (err_power / ref_power).sqrt())
}

/// SINAD in dB and the corresponding ENOB of a coherently captured tone.
///
/// The fundamental must fall on a DFT bin. Its power (both signed bins) is
/// compared with everything else except DC; harmonics count as distortion.
pub fn sinad_enob(wave: &SampledWaveform, fundamental: f64) -> Result<(f64, f64)> {
    let len = wave.len();
    if len < 4 {
        return invalid_input("SINAD needs at least four samples");
    }
    let rate = wave.sample_rate();
    let exact = fundamental * len as f64 / rate;
    let bin = exact.round();
    if !(bin >= 1.0 && bin <= (len / 2) as f64) || (exact - bin).abs() > 1e-6 {
        return invalid_input(format!(
            "fundamental {fundamental} Hz is not on a DFT bin of a {len}-sample capture at {rate} Hz"
        ));
    }
    let q = bin as usize;
    let bins = fft_real(wave.samples());
    let power = |k: usize| bins[k].norm_sqr();
    let signal = if 2 * q == len {
        power(q)
    } else {
        power(q) + power(len - q)
    };
    let rest: f64 = (1..len)
        .filter(|&k| k != q && k != len - q)
        .map(power)
        .sum();
    let sinad = 10.0 * (signal / rest).log10();
    Ok((sinad, enob_from_sinad(sinad)))
}

pub fn enob_from_sinad(sinad_db: f64) -> f64 {
    (sinad_db - 1.76) / 6.02
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QFactor {
    pub q_db: f64,
    pub q_linear: f64,
    pub mean_one: f64,
    pub mean_zero: f64,
    pub std_one: f64,
    pub std_zero: f64,
    /// Noiseless classes; `q_db` is [`Q_SATURATION_DB`].
    pub saturated: bool,
}

impl QFactor {
    pub fn collapsed(&self) -> bool {
        self.collapsed_below(COLLAPSE_THRESHOLD_DB)
    }

    pub fn collapsed_below(&self, threshold_db: f64) -> bool {
        !self.saturated && self.q_db < threshold_db
    }
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64, usize) {
    let n = values.clone().count();
    let mean = values.clone().sum::<f64>() / n as f64;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    (mean, var.sqrt(), n)
}

/// `Q = (μ₁ - μ₀) / (σ₁ + σ₀)` from class-conditional statistics, reported as
/// `20 · log₁₀ Q`.
pub fn qfactor_bpsk(decisions: &[f64], labels: &[u8]) -> Result<QFactor> {
    if decisions.len() != labels.len() {
        return invalid_input(format!(
            "{} decisions but {} labels",
            decisions.len(),
            labels.len()
        ));
    }
    if decisions.iter().any(|v| !v.is_finite()) {
        return invalid_input("non-finite decision sample");
    }
    let class = |bit: u8| {
        decisions
            .iter()
            .zip(labels)
            .filter(move |(_, &l)| l == bit)
            .map(|(&v, _)| v)
    };
    let (m1, s1, n1) = mean_std(class(1));
    let (m0, s0, n0) = mean_std(class(0));
    if n1 == 0 || n0 == 0 {
        return invalid_input("both classes must be present");
    }
    if n1 < MIN_CLASS_SAMPLES || n0 < MIN_CLASS_SAMPLES {
        return invalid_input(format!(
            "need at least {MIN_CLASS_SAMPLES} samples per class, got {n1} and {n0}"
        ));
    }
    let spread = s1 + s0;
    let gap = m1 - m0;
    if spread == 0.0 {
        if gap == 0.0 {
            return invalid_input("classes are identical and noiseless");
        }
        if gap > 0.0 {
            return Ok(QFactor {
                q_db: Q_SATURATION_DB,
                q_linear: f64::INFINITY,
                mean_one: m1,
                mean_zero: m0,
                std_one: s1,
                std_zero: s0,
                saturated: true,
            });
        }
    }
    let q_linear = if spread == 0.0 { f64::NEG_INFINITY } else { gap / spread };
    let mut q_db = 20.0 * q_linear.max(Q_LINEAR_FLOOR).log10();
    let saturated = q_db >= Q_SATURATION_DB;
    if saturated {
        q_db = Q_SATURATION_DB;
    }
    Ok(QFactor {
        q_db,
        q_linear,
        mean_one: m1,
        mean_zero: m0,
        std_one: s1,
        std_zero: s0,
        saturated,
    })
}

/// Error-vector magnitude in percent after a least-squares complex gain is
/// applied to `received`.
pub fn evm_pct(received: &[Complex64], reference: &SymbolStream) -> Result<f64> {
    let reference = &reference.symbols;
    if received.len() != reference.len() {
        return invalid_input(format!(
            "{} received symbols but {} reference symbols",
            received.len(),
            reference.len()
        ));
    }
    if received.is_empty() {
        return invalid_input("no symbols");
    }
    let ref_power: f64 = reference.iter().map(|s| s.norm_sqr()).sum();
    if !(ref_power > 0.0) {
        return invalid_input("reference has zero power");
    }
    let rx_power: f64 = received.iter().map(|s| s.norm_sqr()).sum();
    if !(rx_power > 0.0) {
        return Ok(100.0);
    }
    let cross: Complex64 = received
        .iter()
        .zip(reference)
        .map(|(r, s)| r.conj() * s)
        .sum();
    let gain = cross / rx_power;
    let err: f64 = received
        .iter()
        .zip(reference)
        .map(|(r, s)| (gain * r - s).norm_sqr())
        .sum();
    Ok(100.0 * (err / ref_power).sqrt())
}

/// Collected metrics of one run; absent entries do not apply to the scenario.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub rms_error_pct: Option<f64>,
    pub sinad_db: Option<f64>,
    pub enob: Option<f64>,
    pub q_db: Option<f64>,
    pub evm_pct: Option<f64>,
}

impl MetricsReport {
    /// Sets SINAD and the ENOB derived from it.
    pub fn with_sinad(mut self, sinad_db: f64) -> Self {
        self.sinad_db = Some(sinad_db);
        self.enob = Some(enob_from_sinad(sinad_db));
        self
    }
}
