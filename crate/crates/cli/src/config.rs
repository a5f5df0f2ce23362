//! Scenario presets and configuration loading.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use orthodac::dsp::Extent;
use orthodac::impairments::{ImpairmentSpec, DEFAULT_RF_JITTER};
use orthodac::link::LinkConfig;
use orthodac::sequence::check_branch_count;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{usage, CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioName {
    Fig3Sine,
    Fig3Bpsk,
    Fig3Qam16,
    Fig4Sine,
    Fig4Bpsk,
    Fig4Qam16,
    Fig5EnobSweep,
    Fig7aQVsJitter,
    Fig7bQVsOsnr,
    Fig8Waveforms,
    Custom,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 11] = [
        ScenarioName::Fig3Sine,
        ScenarioName::Fig3Bpsk,
        ScenarioName::Fig3Qam16,
        ScenarioName::Fig4Sine,
        ScenarioName::Fig4Bpsk,
        ScenarioName::Fig4Qam16,
        ScenarioName::Fig5EnobSweep,
        ScenarioName::Fig7aQVsJitter,
        ScenarioName::Fig7bQVsOsnr,
        ScenarioName::Fig8Waveforms,
        ScenarioName::Custom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::Fig3Sine => "fig3_sine",
            ScenarioName::Fig3Bpsk => "fig3_bpsk",
            ScenarioName::Fig3Qam16 => "fig3_qam16",
            ScenarioName::Fig4Sine => "fig4_sine",
            ScenarioName::Fig4Bpsk => "fig4_bpsk",
            ScenarioName::Fig4Qam16 => "fig4_qam16",
            ScenarioName::Fig5EnobSweep => "fig5_enob_sweep",
            ScenarioName::Fig7aQVsJitter => "fig7a_q_vs_jitter",
            ScenarioName::Fig7bQVsOsnr => "fig7b_q_vs_osnr",
            ScenarioName::Fig8Waveforms => "fig8_waveforms",
            ScenarioName::Custom => "custom",
        }
    }

    /// Branch bandwidth a named single-arm preset is built around.
    fn expected_branch_bandwidth(self) -> Option<f64> {
        match self {
            ScenarioName::Fig3Sine | ScenarioName::Fig3Bpsk => Some(10e9),
            ScenarioName::Fig3Qam16 => Some(20e9),
            ScenarioName::Fig4Sine | ScenarioName::Fig4Bpsk => Some(6e9),
            ScenarioName::Fig4Qam16 => Some(12e9),
            _ => None,
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|n| n.as_str()).collect();
                format!("unknown scenario `{s}` (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalKind {
    /// Cosine at `tone_frequency`.
    Tone,
    /// Nyquist-shaped BPSK at `symbol_rate`.
    Bpsk,
    /// Nyquist-shaped QAM-16 at `symbol_rate`, I and Q.
    Qam16,
    /// Rectangular BPSK at `symbol_rate`, band-limited to half the full rate.
    Nrz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    DacJitterRms,
    OsnrDb,
}

impl SweepParam {
    /// CSV column of the swept value.
    pub fn column(self) -> &'static str {
        match self {
            SweepParam::DacJitterRms => "jitter_ps",
            SweepParam::OsnrDb => "osnr_db",
        }
    }

    /// Converts a value in display units (ps, dB) to SI.
    pub fn to_si(self, v: f64) -> f64 {
        match self {
            SweepParam::DacJitterRms => v * 1e-12,
            SweepParam::OsnrDb => v,
        }
    }
}

impl FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "dac_jitter_rms" => Ok(SweepParam::DacJitterRms),
            "osnr_db" => Ok(SweepParam::OsnrDb),
            _ => Err(format!(
                "unknown sweep parameter `{s}` (expected dac_jitter_rms or osnr_db)"
            )),
        }
    }
}

/// Evenly spaced values from `from` to `to` in display units: picoseconds
/// for jitter, dB for OSNR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    /// Monte-Carlo repetitions per point.
    pub seeds: usize,
}

/// Seeds per point stay below the repetition stride of the seed formula.
pub const MAX_SEEDS: usize = 1000;

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.from];
        }
        let step = (self.to - self.from) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.to
                } else {
                    self.from + step * i as f64
                }
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return usage("a sweep needs at least one point");
        }
        if self.points >= MAX_SEEDS {
            return usage(format!("at most {} sweep points", MAX_SEEDS - 1));
        }
        if self.seeds == 0 || self.seeds > MAX_SEEDS {
            return usage(format!("seeds per point must be in 1..={MAX_SEEDS}"));
        }
        if !(self.from.is_finite() && self.to.is_finite()) {
            return usage("sweep bounds must be finite");
        }
        if self.to < self.from {
            return usage("sweep values must be increasing (from ≤ to)");
        }
        if self.param == SweepParam::DacJitterRms && self.from < 0.0 {
            return usage("jitter cannot be negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: ScenarioName,
    pub n_branches: usize,
    /// Full output sample rate `Δf_s`.
    pub full_rate: f64,
    /// Analog grid points per full-rate sample.
    pub oversampling: usize,
    /// Analog grid length, i.e. output samples.
    pub samples: usize,
    pub signal: SignalKind,
    pub tone_frequency: f64,
    pub symbol_rate: f64,
    pub prbs_order: u32,
    pub extent: Extent,
    pub impairments: ImpairmentSpec,
    pub link: LinkConfig,
    pub sweep: Option<SweepSpec>,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub svg: bool,
}

impl ScenarioConfig {
    pub fn preset(name: ScenarioName) -> Self {
        use ScenarioName::*;
        let base = Self {
            scenario: name,
            n_branches: 3,
            full_rate: 60e9,
            oversampling: 8,
            samples: 1 << 16,
            signal: SignalKind::Tone,
            tone_frequency: 30e9,
            symbol_rate: 60e9,
            prbs_order: 7,
            extent: Extent::Finite,
            impairments: ImpairmentSpec::ideal(),
            link: LinkConfig::default(),
            sweep: None,
            output_dir: PathBuf::from("out").join(name.as_str()),
            seed: 1,
            svg: false,
        };
        let sweep = |param, from, to, points| {
            Some(SweepSpec {
                param,
                from,
                to,
                points,
                seeds: 30,
            })
        };
        let link = |sweep| Self {
            signal: SignalKind::Bpsk,
            oversampling: 4,
            samples: 61_440,
            prbs_order: 15,
            extent: Extent::Periodic,
            impairments: ImpairmentSpec {
                rf_jitter_rms: DEFAULT_RF_JITTER,
                ..ImpairmentSpec::ideal()
            },
            sweep,
            ..base.clone()
        };
        match name {
            Fig3Sine | Custom => base,
            Fig3Bpsk => Self {
                signal: SignalKind::Bpsk,
                ..base
            },
            Fig3Qam16 => Self {
                signal: SignalKind::Qam16,
                full_rate: 120e9,
                symbol_rate: 120e9,
                ..base
            },
            Fig4Sine => Self { n_branches: 5, ..base },
            Fig4Bpsk => Self {
                n_branches: 5,
                signal: SignalKind::Bpsk,
                ..base
            },
            Fig4Qam16 => Self {
                n_branches: 5,
                signal: SignalKind::Qam16,
                full_rate: 120e9,
                symbol_rate: 120e9,
                ..base
            },
            Fig5EnobSweep => Self {
                oversampling: 2,
                samples: 15_360,
                extent: Extent::Periodic,
                impairments: ImpairmentSpec {
                    rf_jitter_rms: DEFAULT_RF_JITTER,
                    ..ImpairmentSpec::ideal()
                },
                sweep: sweep(SweepParam::DacJitterRms, 0.05, 3.5, 8),
                ..base
            },
            Fig7aQVsJitter => link(sweep(SweepParam::DacJitterRms, 0.05, 3.5, 8)),
            Fig7bQVsOsnr => {
                let mut cfg = link(sweep(SweepParam::OsnrDb, 20.0, 40.0, 5));
                cfg.impairments.dac_jitter_rms = 100e-15;
                cfg
            }
            Fig8Waveforms => Self {
                full_rate: 24e9,
                symbol_rate: 24e9,
                tone_frequency: 10e9,
                samples: 61_440,
                extent: Extent::Periodic,
                ..base
            },
        }
    }

    /// Preset `name`, overlaid with the JSON file at `path` if given.
    pub fn load(name: ScenarioName, path: Option<&Path>) -> Result<Self> {
        let preset = Self::preset(name);
        let Some(path) = path else {
            return Ok(preset);
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let overlay: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Self::overlay(preset, overlay)
    }

    pub fn overlay(preset: Self, overlay: Value) -> Result<Self> {
        if !overlay.is_object() {
            return usage("config file must hold a JSON object");
        }
        let name = preset.scenario;
        let mut merged = serde_json::to_value(preset).expect("config serializes");
        merge(&mut merged, overlay);
        let cfg: Self = serde_json::from_value(merged)
            .map_err(|e| CliError::Usage(format!("invalid config: {e}")))?;
        if cfg.scenario != name {
            return usage(format!(
                "config file is for scenario `{}`, not `{name}`",
                cfg.scenario
            ));
        }
        Ok(cfg)
    }

    pub fn branch_bandwidth(&self) -> f64 {
        self.full_rate / (2.0 * self.n_branches as f64)
    }

    /// Full-rate sample count feeding the DACs.
    pub fn full_samples(&self) -> usize {
        self.samples / self.oversampling.max(1)
    }

    pub fn is_link(&self) -> bool {
        matches!(
            self.scenario,
            ScenarioName::Fig7aQVsJitter | ScenarioName::Fig7bQVsOsnr
        )
    }

    pub fn validate(&self) -> Result<()> {
        check_branch_count(self.n_branches).map_err(|e| CliError::Usage(e.to_string()))?;
        if !(self.full_rate.is_finite() && self.full_rate > 0.0) {
            return usage("full_rate must be positive");
        }
        if let Some(expected) = self.scenario.expected_branch_bandwidth() {
            let got = self.branch_bandwidth();
            if (got - expected).abs() > 1e-6 * expected {
                return usage(format!(
                    "{} is built on {} GHz branch DACs; N={} at {} GHz gives {} GHz",
                    self.scenario,
                    expected / 1e9,
                    self.n_branches,
                    self.full_rate / 1e9,
                    got / 1e9
                ));
            }
        }
        if self.oversampling == 0 {
            return usage("oversampling must be at least 1");
        }
        if self.samples == 0 || !self.samples.is_multiple_of(self.oversampling) {
            return usage(format!(
                "samples ({}) must be a positive multiple of the oversampling factor ({})",
                self.samples, self.oversampling
            ));
        }
        let full = self.full_samples();
        if self.extent == Extent::Periodic {
            let multiple = if self.sweep.is_some() || self.scenario == ScenarioName::Fig8Waveforms {
                30
            } else {
                2 * self.n_branches
            };
            if !full.is_multiple_of(multiple) {
                return usage(format!(
                    "periodic playback needs a multiple of {multiple} full-rate samples, got {full}"
                ));
            }
        }
        match self.signal {
            SignalKind::Tone => {
                if !(self.tone_frequency > 0.0 && self.tone_frequency <= self.full_rate / 2.0) {
                    return usage("tone_frequency must lie in (0, full_rate/2]");
                }
            }
            SignalKind::Bpsk | SignalKind::Qam16 => {
                if (self.symbol_rate - self.full_rate).abs() > 1e-9 * self.full_rate {
                    return usage("Nyquist-shaped symbols run at the full rate (symbol_rate = full_rate)");
                }
            }
            SignalKind::Nrz => {
                let ratio = self.full_rate / self.symbol_rate;
                if !(ratio >= 1.0 && (ratio - ratio.round()).abs() < 1e-9) {
                    return usage("NRZ symbol_rate must divide full_rate");
                }
            }
        }
        if matches!(self.signal, SignalKind::Bpsk | SignalKind::Qam16 | SignalKind::Nrz)
            && ![7, 9, 15, 23, 31].contains(&self.prbs_order)
        {
            return usage("prbs_order must be one of 7, 9, 15, 23, 31");
        }
        self.impairments
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        self.link
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        if let Some(s) = &self.sweep {
            s.validate()?;
        }
        if self.seed > u64::MAX / 1_000_000 - 1 {
            return usage("seed too large for per-point seed derivation");
        }
        Ok(())
    }
}

fn merge(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for name in ScenarioName::ALL {
            ScenarioConfig::preset(name).validate().unwrap();
            assert_eq!(name.as_str().parse::<ScenarioName>().unwrap(), name);
        }
    }

    #[test]
    fn preset_rates() {
        let c = ScenarioConfig::preset(ScenarioName::Fig3Sine);
        assert_eq!(c.branch_bandwidth(), 10e9);
        assert_eq!(ScenarioConfig::preset(ScenarioName::Fig4Bpsk).branch_bandwidth(), 6e9);
        assert_eq!(ScenarioConfig::preset(ScenarioName::Fig3Qam16).branch_bandwidth(), 20e9);
        assert_eq!(ScenarioConfig::preset(ScenarioName::Fig4Qam16).branch_bandwidth(), 12e9);
    }

    #[test]
    fn rate_mismatch_is_rejected() {
        let mut c = ScenarioConfig::preset(ScenarioName::Fig3Sine);
        c.n_branches = 5;
        assert!(matches!(c.validate(), Err(CliError::Usage(_))));
        c.scenario = ScenarioName::Custom;
        c.validate().unwrap();
    }

    #[test]
    fn overlay_merges_nested_fields() {
        let c = ScenarioConfig::overlay(
            ScenarioConfig::preset(ScenarioName::Fig7aQVsJitter),
            serde_json::json!({ "link": { "osnr_db": 30.0 }, "seed": 9 }),
        )
        .unwrap();
        assert_eq!(c.link.osnr_db, 30.0);
        assert_eq!(c.link.vpi, 1.0);
        assert_eq!(c.seed, 9);
        let wrong = ScenarioConfig::overlay(
            ScenarioConfig::preset(ScenarioName::Fig3Sine),
            serde_json::json!({ "scenario": "fig4_sine" }),
        );
        assert!(wrong.is_err());
    }

    #[test]
    fn sweep_values_hit_both_ends() {
        let s = SweepSpec {
            param: SweepParam::DacJitterRms,
            from: 0.05,
            to: 3.5,
            points: 8,
            seeds: 30,
        };
        let v = s.values();
        assert_eq!(v.len(), 8);
        assert_eq!(v[0], 0.05);
        assert_eq!(v[7], 3.5);
        assert!(SweepSpec { points: 0, ..s.clone() }.validate().is_err());
        assert!(SweepSpec { from: 4.0, ..s }.validate().is_err());
    }
}
