//! Baseband-equivalent optical link: Mach-Zehnder modulator, OSNR noise
//! loading, coherent receiver and decision sampling.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dsp::brickwall_complex;
use crate::error::{invalid_input, Result};
use crate::impairments::{awgn_osnr, DEFAULT_REFERENCE_BANDWIDTH};
use crate::signals::SymbolStream;
use crate::waveform::{ComplexWaveform, SampledWaveform, C_BAND_CARRIER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bias {
    /// Transmission null: bipolar field, carrier suppressed.
    Null,
    /// Half transmission point, intensity-style operation.
    Quadrature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinkConfig {
    pub vpi: f64,
    pub bias: Bias,
    /// `+∞` disables noise loading.
    pub osnr_db: f64,
    pub reference_bandwidth: f64,
    pub lo_phase_deg: f64,
    pub rx_bandwidth: f64,
    pub decision_offset: f64,
    /// Peak drive voltage as a fraction of `vpi`; the transmitter waveform is
    /// scaled so that its largest excursion lands there.
    pub drive_swing: f64,
    /// Symbols discarded at each end of the record.
    pub guard_symbols: usize,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            vpi: 1.0,
            bias: Bias::Null,
            osnr_db: 40.0,
            reference_bandwidth: DEFAULT_REFERENCE_BANDWIDTH,
            lo_phase_deg: 0.0,
            rx_bandwidth: 30e9,
            decision_offset: 0.0,
            drive_swing: 1.0,
            guard_symbols: 0,
        }
    }
}

impl LinkConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.vpi > 0.0 && self.vpi.is_finite()) {
            return invalid_input("V_pi must be positive");
        }
        if !(self.rx_bandwidth > 0.0 && self.rx_bandwidth.is_finite()) {
            return invalid_input("receiver bandwidth must be positive");
        }
        if !(self.drive_swing > 0.0 && self.drive_swing.is_finite()) {
            return invalid_input("drive swing must be positive");
        }
        if !(self.reference_bandwidth > 0.0) {
            return invalid_input("reference bandwidth must be positive");
        }
        if self.osnr_db.is_nan() || !self.decision_offset.is_finite() {
            return invalid_input("OSNR and decision offset must be numbers");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Modulated {
    pub field: ComplexWaveform,
    /// Some drive sample exceeded `±vpi`.
    pub overdriven: bool,
}

/// Null bias: `E = sin(πv / 2V_π)`. Quadrature bias: `E = cos(π/4 - πv / 2V_π)`,
/// unit peak field.
pub fn mzm(drive: &SampledWaveform, vpi: f64, bias: Bias) -> Result<Modulated> {
    if !(vpi > 0.0 && vpi.is_finite()) {
        return invalid_input(format!("V_pi must be positive, got {vpi}"));
    }
    let overdriven = drive.samples().iter().any(|v| v.abs() > vpi);
    let field = drive
        .samples()
        .iter()
        .map(|&v| {
            let phi = FRAC_PI_2 * v / vpi;
            let e = match bias {
                Bias::Null => phi.sin(),
                Bias::Quadrature => (FRAC_PI_4 - phi).cos(),
            };
            Complex64::new(e, 0.0)
        })
        .collect();
    Ok(Modulated {
        field: ComplexWaveform::new(field, drive.sample_rate(), drive.t0(), C_BAND_CARRIER)?,
        overdriven,
    })
}

/// Mixes with a local oscillator at `lo_phase_deg` and band-limits I and Q to
/// `rx_bandwidth`.
pub fn coherent_rx(
    field: &ComplexWaveform,
    lo_phase_deg: f64,
    rx_bandwidth: f64,
) -> Result<(SampledWaveform, SampledWaveform)> {
    let rate = field.sample_rate();
    if !(rx_bandwidth > 0.0 && rx_bandwidth <= rate / 2.0 * (1.0 + 1e-12)) {
        return invalid_input(format!(
            "receiver bandwidth {rx_bandwidth} Hz outside (0, {}] Hz",
            rate / 2.0
        ));
    }
    let lo = Complex64::from_polar(1.0, -lo_phase_deg.to_radians());
    let mixed: Vec<Complex64> = field.samples().iter().map(|v| v * lo).collect();
    // I and Q are each filtered as real signals; a complex brick-wall would
    // leak between them for asymmetric spectra.
    let i: Vec<Complex64> = mixed.iter().map(|v| Complex64::new(v.re, 0.0)).collect();
    let q: Vec<Complex64> = mixed.iter().map(|v| Complex64::new(v.im, 0.0)).collect();
    let i = brickwall_complex(&i, rate, rx_bandwidth);
    let q = brickwall_complex(&q, rate, rx_bandwidth);
    Ok((
        SampledWaveform::new(i.iter().map(|v| v.re).collect(), rate, field.t0())?,
        SampledWaveform::new(q.iter().map(|v| v.re).collect(), rate, field.t0())?,
    ))
}

/// Decision samples of one link realization.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkDecisions {
    /// In-phase decision samples, interior symbols only.
    pub samples: Vec<f64>,
    /// Transmitted bit per decision (`1` for a positive in-phase symbol).
    pub labels: Vec<u8>,
    /// Full complex decision samples (I + jQ).
    pub received: Vec<Complex64>,
    /// Index of each decision in the symbol stream.
    pub symbol_indices: Vec<usize>,
    pub overdriven: bool,
}

/// Drives the modulator with `tx` scaled to a peak of `drive_swing · vpi`,
/// loads noise for `osnr_db`, detects coherently and samples at the symbol
/// instants plus `decision_offset`.
pub fn run_link<R: Rng + ?Sized>(
    tx: &SampledWaveform,
    stream: &SymbolStream,
    cfg: &LinkConfig,
    rng: &mut R,
) -> Result<LinkDecisions> {
    cfg.validate()?;
    if stream.len() <= 2 * cfg.guard_symbols {
        return invalid_input(format!(
            "{} symbols leave nothing inside a guard of {} symbols",
            stream.len(),
            cfg.guard_symbols
        ));
    }
    let grid = tx.grid();
    let indices = (cfg.guard_symbols..stream.len() - cfg.guard_symbols)
        .map(|k| {
            let t = stream.instant(k) + cfg.decision_offset;
            grid.index_of(t, 1e-3).ok_or_else(|| {
                crate::Error::InvalidInput(format!(
                    "decision instant {t} s of symbol {k} is not on the waveform grid"
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let peak = tx.peak();
    if !(peak > 0.0) {
        return invalid_input("transmitter waveform is identically zero");
    }
    let modulated = mzm(&tx.scaled(cfg.drive_swing * cfg.vpi / peak), cfg.vpi, cfg.bias)?;
    let noisy = awgn_osnr(&modulated.field, cfg.osnr_db, cfg.reference_bandwidth, rng)?;
    let (i, q) = coherent_rx(&noisy, cfg.lo_phase_deg, cfg.rx_bandwidth)?;

    let received: Vec<Complex64> = indices
        .iter()
        .map(|&n| Complex64::new(i.samples()[n], q.samples()[n]))
        .collect();
    let symbol_indices: Vec<usize> = (cfg.guard_symbols..stream.len() - cfg.guard_symbols).collect();
    Ok(LinkDecisions {
        samples: received.iter().map(|v| v.re).collect(),
        labels: symbol_indices
            .iter()
            .map(|&k| u8::from(stream.symbols[k].re > 0.0))
            .collect(),
        received,
        symbol_indices,
        overdriven: modulated.overdriven,
    })
}
