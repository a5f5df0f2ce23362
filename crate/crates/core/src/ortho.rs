//! Orthogonal-sampling synthesis.
//!
//! A full-rate stream `s[k]` at `Δf_s` is split into `N` sub-streams
//! `s_l[m] = s[(l-1) + N·m]`. Branch `l` renders its sub-stream with a DAC of
//! rate `Δf_s/N` and bandwidth `Δf_s/(2N)`, the result is multiplied by the
//! branch's sinc-pulse sequence and all branches are summed. Term by term,
//! `sinc(Δf_s t/N - (l-1)/N - m) · sq(t - (l-1)/Δf_s) = sinc(Δf_s t - (l-1) - N·m)`,
//! so the ideal pipeline reproduces the full-rate reconstruction exactly.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dsp::{render, Extent};
use crate::error::{invalid_input, Result};
use crate::impairments::timing_errors;
use crate::sequence::{branch_phases, check_branch_count, sequence_trace, SequenceSpec};
use crate::waveform::{SampledWaveform, TimeGrid};

/// Per-branch rate plan of an `N`-branch synthesizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPlan {
    pub n_branches: usize,
    pub full_rate: f64,
    pub branch_rate: f64,
    pub branch_bandwidth: f64,
    /// `k·Δf_s/N` for `k = 1..=(N-1)/2`.
    pub tone_frequencies: Vec<f64>,
    /// Fundamental phase per branch, degrees.
    pub phases: Vec<f64>,
    /// Playback mode of the branch DACs.
    pub extent: Extent,
}

impl BranchPlan {
    pub fn new(n_branches: usize, full_rate: f64) -> Result<Self> {
        check_branch_count(n_branches)?;
        if !(full_rate.is_finite() && full_rate > 0.0) {
            return invalid_input(format!("full rate must be positive, got {full_rate}"));
        }
        let n = n_branches as f64;
        let branch_rate = full_rate / n;
        Ok(Self {
            n_branches,
            full_rate,
            branch_rate,
            branch_bandwidth: branch_rate / 2.0,
            tone_frequencies: (1..=(n_branches - 1) / 2)
                .map(|k| k as f64 * full_rate / n)
                .collect(),
            phases: branch_phases(n_branches)?,
            extent: Extent::Finite,
        })
    }

    pub fn with_extent(mut self, extent: Extent) -> Self {
        self.extent = extent;
        self
    }

    /// Sequence of branch `l` (1-based).
    pub fn sequence(&self, branch: usize) -> Result<SequenceSpec> {
        SequenceSpec::new(self.n_branches, self.full_rate, branch)
    }

    /// Output bandwidth of the synthesized signal, `Δf_s/2`.
    pub fn output_bandwidth(&self) -> f64 {
        self.full_rate / 2.0
    }
}

/// Samples routed to one branch.
#[derive(Debug, Clone, PartialEq)]
pub struct SubStream {
    /// 1-based branch index `l`.
    pub branch_index: usize,
    /// Sample `m` is full-stream sample `(l-1) + N·m`.
    pub samples: Vec<f64>,
    /// Time of sample 0, `(l-1)/Δf_s`.
    pub origin_offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub branches: Vec<SubStream>,
    /// Input length before zero padding.
    pub original_len: usize,
    pub padded: bool,
}

impl Decomposition {
    /// Re-interleaves the sub-streams and drops the padding.
    pub fn interleave(&self) -> Vec<f64> {
        let n = self.branches.len();
        let per = self.branches.first().map_or(0, |b| b.samples.len());
        let mut out = vec![0.0; n * per];
        for (l, b) in self.branches.iter().enumerate() {
            for (m, &v) in b.samples.iter().enumerate() {
                out[l + n * m] = v;
            }
        }
        out.truncate(self.original_len);
        out
    }
}

/// Splits a full-rate stream into `N` branch sub-streams, zero-padding the
/// input to a multiple of `N`. Periodic plans need a length that is a multiple
/// of `2N` instead.
pub fn decompose(full_samples: &[f64], plan: &BranchPlan) -> Result<Decomposition> {
    if full_samples.is_empty() {
        return invalid_input("cannot decompose an empty stream");
    }
    let n = plan.n_branches;
    if plan.extent == Extent::Periodic && !full_samples.len().is_multiple_of(2 * n) {
        return invalid_input(format!(
            "periodic playback over {n} branches needs a multiple of {} samples, got {}",
            2 * n,
            full_samples.len()
        ));
    }
    let per = full_samples.len().div_ceil(n);
    let padded = per * n != full_samples.len();
    let branches = (0..n)
        .map(|l| SubStream {
            branch_index: l + 1,
            samples: (0..per)
                .map(|m| full_samples.get(l + n * m).copied().unwrap_or(0.0))
                .collect(),
            origin_offset: l as f64 / plan.full_rate,
        })
        .collect();
    Ok(Decomposition {
        branches,
        original_len: full_samples.len(),
        padded,
    })
}

fn check_grid(grid: &TimeGrid, full_rate: f64) -> Result<()> {
    if grid.rate < full_rate * (1.0 - 1e-12) {
        return invalid_input(format!(
            "grid rate {} Hz below the full rate {full_rate} Hz",
            grid.rate
        ));
    }
    Ok(())
}

/// Renders one branch with an ideal DAC of rate `Δf_s/N`.
///
/// Sample `m` contributes `sinc(r_b · (t - origin - τ_m) - m)`; `jitter`
/// holds the per-sample timing errors `τ_m` in seconds.
pub fn branch_analog(
    sub: &SubStream,
    plan: &BranchPlan,
    grid: &TimeGrid,
    jitter: Option<&[f64]>,
) -> Result<SampledWaveform> {
    check_grid(grid, plan.full_rate)?;
    if sub.samples.is_empty() {
        return invalid_input("empty sub-stream");
    }
    if let Some(tau) = jitter {
        if tau.len() != sub.samples.len() {
            return invalid_input("jitter length differs from sub-stream length");
        }
    }
    let y = render(
        &sub.samples,
        plan.branch_rate,
        sub.origin_offset,
        jitter,
        grid,
        plan.extent,
    )?;
    SampledWaveform::on_grid(y, grid)
}

/// Multiplies each branch by its sinc-pulse sequence and sums.
///
/// `rf_timing` is the oscillator timing error per grid instant, shared by all
/// branches.
pub fn synthesize(
    branches: &[SampledWaveform],
    plan: &BranchPlan,
    rf_timing: Option<&[f64]>,
) -> Result<SampledWaveform> {
    if branches.len() != plan.n_branches {
        return invalid_input(format!(
            "expected {} branch waveforms, got {}",
            plan.n_branches,
            branches.len()
        ));
    }
    let grid = branches[0].grid();
    if branches.iter().any(|b| !b.grid().same_as(&grid)) {
        return invalid_input("branch waveforms are not on a common grid");
    }
    let mut out = vec![0.0; grid.len];
    for (l, b) in branches.iter().enumerate() {
        let seq = sequence_trace(&plan.sequence(l + 1)?, &grid, rf_timing)?;
        for ((o, v), s) in out.iter_mut().zip(b.samples()).zip(seq.samples()) {
            *o += v * s;
        }
    }
    SampledWaveform::on_grid(out, &grid)
}

/// Single full-rate DAC: `Σ_k s[k] · sinc(Δf_s (t - τ_k) - k)`.
pub fn direct_dac(
    full_samples: &[f64],
    full_rate: f64,
    grid: &TimeGrid,
    jitter: Option<&[f64]>,
    extent: Extent,
) -> Result<SampledWaveform> {
    if full_samples.is_empty() {
        return invalid_input("cannot reconstruct from an empty sample array");
    }
    if !(full_rate.is_finite() && full_rate > 0.0) {
        return invalid_input("full rate must be positive");
    }
    check_grid(grid, full_rate)?;
    if let Some(tau) = jitter {
        if tau.len() != full_samples.len() {
            return invalid_input("jitter length differs from sample count");
        }
    }
    SampledWaveform::on_grid(render(full_samples, full_rate, 0.0, jitter, grid, extent)?, grid)
}

/// Direct DAC with i.i.d. Gaussian sample-instant jitter drawn from `rng`.
pub fn direct_dac_jittered<R: Rng + ?Sized>(
    full_samples: &[f64],
    full_rate: f64,
    grid: &TimeGrid,
    dac_jitter_rms: f64,
    extent: Extent,
    rng: &mut R,
) -> Result<SampledWaveform> {
    let tau = timing_errors(full_samples.len(), dac_jitter_rms, rng)?;
    direct_dac(full_samples, full_rate, grid, tau.as_deref(), extent)
}

/// Output of the full branch pipeline.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub output: SampledWaveform,
    pub branches: Vec<SampledWaveform>,
    pub padded: bool,
}

/// decompose → branch DACs (independent jitter per branch sample) →
/// multiply by sequences (shared RF timing) → sum.
///
/// Jitter draws happen in a fixed order: branch 1..N sample jitter, then the
/// RF timing process.
pub fn synthesize_stream<R: Rng + ?Sized>(
    full_samples: &[f64],
    plan: &BranchPlan,
    grid: &TimeGrid,
    dac_jitter_rms: f64,
    rf_jitter_rms: f64,
    rng: &mut R,
) -> Result<Synthesis> {
    let dec = decompose(full_samples, plan)?;
    let mut branches = Vec::with_capacity(plan.n_branches);
    for sub in &dec.branches {
        let tau = timing_errors(sub.samples.len(), dac_jitter_rms, rng)?;
        branches.push(branch_analog(sub, plan, grid, tau.as_deref())?);
    }
    let rf = timing_errors(grid.len, rf_jitter_rms, rng)?;
    let output = synthesize(&branches, plan, rf.as_deref())?;
    Ok(Synthesis {
        output,
        branches,
        padded: dec.padded,
    })
}
