//! Sinc-pulse sequences.
//!
//! A sinc-pulse sequence of `N` (odd) and bandwidth `Δf_s` is the periodic
//! superposition `Σ_k sinc(Δf_s t - kN)`, which in closed form is a DC level
//! `1/N` plus `(N-1)/2` cosines of amplitude `2/N` at `k·Δf_s/N`. Branch `l`
//! uses the sequence delayed by `(l-1)/Δf_s`, i.e. tone `k` carries the phase
//! `k·(l-1)·360°/N`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dsp::{fft_real, sinc};
use crate::error::{invalid_input, invalid_spec, Result};
use crate::waveform::{SampledWaveform, TimeGrid};

/// Validates a branch count: odd and at least 3.
pub fn check_branch_count(n: usize) -> Result<()> {
    if n < 3 || n.is_multiple_of(2) {
        return invalid_spec(format!(
            "branch count must be odd and at least 3, got {n}"
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SequenceSpec {
    n_branches: usize,
    bandwidth: f64,
    branch: usize,
}

impl SequenceSpec {
    /// `branch` is 1-based, in `1..=n_branches`.
    pub fn new(n_branches: usize, bandwidth: f64, branch: usize) -> Result<Self> {
        check_branch_count(n_branches)?;
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return invalid_spec(format!("bandwidth must be positive, got {bandwidth}"));
        }
        if branch < 1 || branch > n_branches {
            return invalid_spec(format!(
                "branch index {branch} outside 1..={n_branches}"
            ));
        }
        Ok(Self {
            n_branches,
            bandwidth,
            branch,
        })
    }

    pub fn n_branches(&self) -> usize {
        self.n_branches
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn branch(&self) -> usize {
        self.branch
    }

    /// Number of RF tones, `(N-1)/2`.
    pub fn tone_count(&self) -> usize {
        (self.n_branches - 1) / 2
    }

    /// Repetition period `N / Δf_s`.
    pub fn period(&self) -> f64 {
        self.n_branches as f64 / self.bandwidth
    }

    /// Time of the branch's first peak, `(l-1) / Δf_s`.
    pub fn delay(&self) -> f64 {
        (self.branch - 1) as f64 / self.bandwidth
    }

    /// Oscillator components feeding this branch.
    pub fn tones(&self) -> Vec<RfTone> {
        let n = self.n_branches as f64;
        let phase = branch_phase(self.n_branches, self.branch);
        (1..=self.tone_count())
            .map(|k| RfTone {
                harmonic: k,
                frequency: k as f64 * self.bandwidth / n,
                amplitude: 2.0 / n,
                phase_deg: (k as f64 * phase).rem_euclid(360.0),
            })
            .collect()
    }
}

/// One cosine component of a sequence: `amplitude · cos(2πft - phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfTone {
    pub harmonic: usize,
    pub frequency: f64,
    pub amplitude: f64,
    pub phase_deg: f64,
}

fn branch_phase(n: usize, branch: usize) -> f64 {
    (branch - 1) as f64 * 360.0 / n as f64
}

/// Fundamental-tone phase per branch, `(l-1)·360°/N` for `l = 1..=N`.
pub fn branch_phases(n: usize) -> Result<Vec<f64>> {
    check_branch_count(n)?;
    Ok((1..=n).map(|l| branch_phase(n, l)).collect())
}

/// Closed cosine form of the branch's sequence at time `t`. The peak value 1
/// occurs at `t = (l-1)/Δf_s` and repeats every `N/Δf_s`.
pub fn sequence_value(spec: &SequenceSpec, t: f64) -> f64 {
    let n = spec.n_branches as f64;
    // position in full-rate sample units, reduced to one period
    let u = (spec.bandwidth * t - (spec.branch - 1) as f64).rem_euclid(n);
    let tones: f64 = (1..=spec.tone_count())
        .map(|k| (2.0 * PI * k as f64 * u / n).cos())
        .sum();
    2.0 / n * (0.5 + tones)
}

/// The sinc-sum form `Σ_{|k| ≤ terms} sinc(Δf_s (t - delay) - kN)`, truncated.
/// Converges to [`sequence_value`] as `terms` grows.
pub fn sequence_value_sinc_sum(spec: &SequenceSpec, t: f64, terms: usize) -> f64 {
    let n = spec.n_branches as f64;
    let x = spec.bandwidth * t - (spec.branch - 1) as f64;
    let terms = terms as i64;
    // sum from the outside in to limit rounding
    let mut acc = 0.0;
    for k in (1..=terms).rev() {
        acc += sinc(x - k as f64 * n) + sinc(x + k as f64 * n);
    }
    acc + sinc(x)
}

/// Samples the sequence on `grid`. With `rf_timing` (one timing error in
/// seconds per grid instant, shared by all tones of the oscillator) the
/// sequence is evaluated at `t - τ(t)`.
pub fn sequence_trace(
    spec: &SequenceSpec,
    grid: &TimeGrid,
    rf_timing: Option<&[f64]>,
) -> Result<SampledWaveform> {
    let highest = spec.tone_count() as f64 * spec.bandwidth / spec.n_branches as f64;
    if grid.rate <= 2.0 * highest {
        return invalid_input(format!(
            "grid rate {} Hz does not resolve the {highest} Hz tone",
            grid.rate
        ));
    }
    if let Some(tau) = rf_timing {
        if tau.len() != grid.len {
            return invalid_input("RF timing length differs from grid length");
        }
    }
    let samples = (0..grid.len)
        .map(|i| {
            let t = grid.time(i) - rf_timing.map_or(0.0, |tau| tau[i]);
            sequence_value(spec, t)
        })
        .collect();
    SampledWaveform::on_grid(samples, grid)
}

/// Spectral lines of a sequence trace.
#[derive(Debug, Clone, PartialEq)]
pub struct CombReport {
    /// Two-sided line frequencies `k·Δf_s/N`, `k = -(N-1)/2 ..= (N-1)/2`.
    pub line_frequencies: Vec<f64>,
    /// Line magnitudes normalized by the record length (`1/N` ideally).
    pub magnitudes: Vec<f64>,
    /// Largest over smallest line magnitude.
    pub flatness_ratio: f64,
    /// Largest off-line bin relative to the weakest line.
    pub max_spur: f64,
}

impl CombReport {
    /// `true` when the lines are equal within `flatness_tol` and every other
    /// bin stays below `spur_tol` of the line level.
    pub fn is_flat_comb(&self, flatness_tol: f64, spur_tol: f64) -> bool {
        self.flatness_ratio.is_finite()
            && self.flatness_ratio - 1.0 <= flatness_tol
            && self.max_spur <= spur_tol
    }

    pub fn line_spacing(&self) -> f64 {
        self.line_frequencies[1] - self.line_frequencies[0]
    }
}

/// Measures the `N` comb lines of a trace spanning an integer number of
/// sequence periods.
pub fn verify_comb(trace: &SampledWaveform, spec: &SequenceSpec) -> Result<CombReport> {
    let len = trace.len();
    let periods = trace.len() as f64 / trace.sample_rate() / spec.period();
    let whole = periods.round();
    if whole < 1.0 || (periods - whole).abs() > 1e-6 {
        return invalid_input(format!(
            "trace spans {periods} sequence periods, need a positive integer"
        ));
    }
    let p = whole as usize;
    let n_tones = spec.tone_count();
    if n_tones * p >= len / 2 {
        return invalid_input("trace sample rate too low for the comb");
    }
    let bins = fft_real(trace.samples());
    let norm = 1.0 / len as f64;
    let mut line_bins = Vec::with_capacity(spec.n_branches);
    let mut line_frequencies = Vec::with_capacity(spec.n_branches);
    for k in -(n_tones as i64)..=(n_tones as i64) {
        let q = if k >= 0 {
            k as usize * p
        } else {
            len - (-k) as usize * p
        };
        line_bins.push(q);
        line_frequencies.push(k as f64 * spec.bandwidth / spec.n_branches as f64);
    }
    let magnitudes: Vec<f64> = line_bins.iter().map(|&q| bins[q].norm() * norm).collect();
    let max = magnitudes.iter().cloned().fold(0.0, f64::max);
    let min = magnitudes.iter().cloned().fold(f64::INFINITY, f64::min);
    let flatness_ratio = if min > 0.0 { max / min } else { f64::INFINITY };
    let spur = bins
        .iter()
        .enumerate()
        .filter(|(q, _)| !line_bins.contains(q))
        .map(|(_, v)| v.norm() * norm)
        .fold(0.0, f64::max);
    let max_spur = if min > 0.0 { spur / min } else { f64::INFINITY };
    Ok(CombReport {
        line_frequencies,
        magnitudes,
        flatness_ratio,
        max_spur,
    })
}
