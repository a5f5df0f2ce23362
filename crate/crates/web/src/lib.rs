//! WebAssembly bindings behind `www/index.html`.
//!
//! Every export returns flat `f64` arrays so the page can slice them without
//! any serialization layer. The same functions compile and run natively.

use orthodac::dsp::Extent;
use orthodac::impairments::DEFAULT_RF_JITTER;
use orthodac::metrics::sinad_enob;
use orthodac::ortho::{direct_dac_jittered, synthesize_stream, BranchPlan};
use orthodac::sequence::{sequence_trace, verify_comb};
use orthodac::signals::tone_samples;
use orthodac::TimeGrid;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

/// Full output rate of the demo transmitter.
pub const FULL_RATE: f64 = 60e9;
/// Samples in the looped memory; a multiple of 2N for N = 3 and 5.
pub const RECORD: usize = 1920;
const OVERSAMPLING: usize = 2;

fn err(e: orthodac::Error) -> String {
    e.to_string()
}

/// Snaps `ghz` to the nearest odd DFT bin of the record so the tone loops
/// seamlessly and never shares a period with the record.
#[wasm_bindgen]
pub fn coherent_tone_ghz(ghz: f64) -> f64 {
    let bin = FULL_RATE / RECORD as f64;
    let max = (RECORD / 2 - 1) as f64;
    let mut k = (ghz * 1e9 / bin).round().clamp(1.0, max);
    if k % 2.0 == 0.0 {
        k = if k + 1.0 <= max { k + 1.0 } else { k - 1.0 };
    }
    k * bin / 1e9
}

/// Two periods of every branch sequence followed by the comb line
/// magnitudes of branch 1.
///
/// Layout: `[points, s_1(0..points), ..., s_N(0..points), |c_-(N-1)/2|, ..]`.
#[wasm_bindgen]
pub fn sequences(n: usize, points_per_period: usize) -> Result<Vec<f64>, String> {
    let plan = BranchPlan::new(n, FULL_RATE).map_err(err)?;
    let points = 2 * points_per_period.max(16);
    let first = plan.sequence(1).map_err(err)?;
    let rate = points as f64 / (2.0 * first.period());
    let grid = TimeGrid::new(0.0, rate, points).map_err(err)?;
    let mut out = vec![points as f64];
    for l in 1..=n {
        let trace = sequence_trace(&plan.sequence(l).map_err(err)?, &grid, None).map_err(err)?;
        out.extend_from_slice(trace.samples());
    }
    let trace = sequence_trace(&first, &grid, None).map_err(err)?;
    out.extend(verify_comb(&trace, &first).map_err(err)?.magnitudes);
    Ok(out)
}

struct ToneRun {
    ideal: Vec<f64>,
    direct: Vec<f64>,
    branches: Vec<f64>,
    grid: TimeGrid,
}

fn tone_outputs(n: usize, tone_ghz: f64, jitter_ps: f64, seed: u64) -> Result<ToneRun, String> {
    if !(jitter_ps.is_finite() && (0.0..=20.0).contains(&jitter_ps)) {
        return Err(format!("jitter must lie in 0..=20 ps, got {jitter_ps}"));
    }
    let f = coherent_tone_ghz(tone_ghz) * 1e9;
    let full = tone_samples(f, 0.0, 1.0, FULL_RATE, RECORD).map_err(err)?;
    let grid = TimeGrid::covering(FULL_RATE, RECORD, OVERSAMPLING).map_err(err)?;
    let plan = BranchPlan::new(n, FULL_RATE).map_err(err)?.with_extent(Extent::Periodic);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter = jitter_ps * 1e-12;
    let branches = synthesize_stream(&full, &plan, &grid, jitter, DEFAULT_RF_JITTER, &mut rng)
        .map_err(err)?
        .output
        .into_samples();
    let direct = direct_dac_jittered(&full, FULL_RATE, &grid, jitter, Extent::Periodic, &mut rng)
        .map_err(err)?
        .into_samples();
    let ideal = direct_dac_jittered(&full, FULL_RATE, &grid, 0.0, Extent::Periodic, &mut rng)
        .map_err(err)?
        .into_samples();
    Ok(ToneRun {
        ideal,
        direct,
        branches,
        grid,
    })
}

/// Ideal, jittered direct-DAC and jittered N-branch renderings of a tone.
///
/// Layout: `[len, grid_rate, ideal.., direct.., branches..]`, each trace
/// `len` long and truncated to the first `max_points` grid instants.
#[wasm_bindgen]
pub fn synthesize_tone(
    n: usize,
    tone_ghz: f64,
    jitter_ps: f64,
    seed: u64,
    max_points: usize,
) -> Result<Vec<f64>, String> {
    let run = tone_outputs(n, tone_ghz, jitter_ps, seed)?;
    let len = max_points.clamp(1, run.grid.len);
    let mut out = vec![len as f64, run.grid.rate];
    for trace in [&run.ideal, &run.direct, &run.branches] {
        out.extend_from_slice(&trace[..len]);
    }
    Ok(out)
}

/// Mean ENOB over `seeds` repetitions: `[direct, branches]`.
#[wasm_bindgen]
pub fn enob_vs_jitter(n: usize, tone_ghz: f64, jitter_ps: f64, seeds: u32) -> Result<Vec<f64>, String> {
    let f = coherent_tone_ghz(tone_ghz) * 1e9;
    let seeds = seeds.clamp(1, 200);
    let mut sum = [0.0; 2];
    for seed in 0..seeds {
        let run = tone_outputs(n, tone_ghz, jitter_ps, seed as u64)?;
        for (acc, trace) in sum.iter_mut().zip([run.direct, run.branches]) {
            let wave = orthodac::SampledWaveform::on_grid(trace, &run.grid).map_err(err)?;
            *acc += sinad_enob(&wave, f).map_err(err)?.1;
        }
    }
    Ok(sum.iter().map(|s| s / seeds as f64).collect())
}
