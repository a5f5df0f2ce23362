//! Single scenario runs: generate → decompose → branch DACs → synthesize →
//! metrics, plus the multi-waveform fig8 preset.

use std::path::PathBuf;

use num_complex::Complex64;
use orthodac::dsp::Extent;
use orthodac::impairments::quantize;
use orthodac::metrics::{evm_pct, qfactor_bpsk, rms_error_pct, sinad_enob};
use orthodac::ortho::{direct_dac, direct_dac_jittered, synthesize_stream, BranchPlan};
use orthodac::signals::{
    map_symbols, nrz_shape, prbs_bits, tone_samples, Modulation, Quadrature, SymbolStream,
};
use orthodac::{SampledWaveform, TimeGrid};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{ScenarioConfig, ScenarioName, SignalKind};
use crate::error::{usage, Result, Stage};
use crate::output::{ensure_dir, fmt_num, fmt_opt, waveform_table, write_text, Table};
use crate::svg::{line_plot, Series};
use crate::sweep::run_sweep;

pub const METRICS_HEADER: [&str; 10] = [
    "scenario",
    "n_branches",
    "full_rate_hz",
    "samples",
    "rms_error_pct",
    "window_error_pct",
    "sinad_db",
    "enob",
    "q_db",
    "evm_pct",
];

pub const FIG8_METRICS_HEADER: [&str; 4] = ["signal", "arm", "rms_error_pct", "window_error_pct"];

/// One transmitter configuration of a comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    /// A single DAC at the full rate.
    Direct,
    /// `N` branch DACs combined with sinc-pulse sequences.
    Branches(usize),
}

impl Arm {
    pub fn label(self) -> String {
        match self {
            Arm::Direct => "direct".into(),
            Arm::Branches(n) => format!("n{n}"),
        }
    }
}

/// Full-rate input samples and, for symbol formats, the symbol stream.
#[derive(Debug, Clone)]
pub struct Source {
    pub i: Vec<f64>,
    pub q: Option<Vec<f64>>,
    pub stream: Option<SymbolStream>,
}

pub fn source(cfg: &ScenarioConfig) -> Result<Source> {
    let full = cfg.full_samples();
    let mut src = match cfg.signal {
        SignalKind::Tone => Source {
            i: tone_samples(cfg.tone_frequency, 0.0, 1.0, cfg.full_rate, full).stage("tone")?,
            q: None,
            stream: None,
        },
        SignalKind::Bpsk | SignalKind::Qam16 => {
            let format = if cfg.signal == SignalKind::Bpsk {
                Modulation::Bpsk
            } else {
                Modulation::Qam16
            };
            let bits = prbs_bits(cfg.prbs_order, full * format.bits_per_symbol(), 1).stage("prbs")?;
            let stream = map_symbols(&bits, format, cfg.symbol_rate).stage("symbol mapping")?;
            Source {
                i: stream.component(Quadrature::I),
                q: (format == Modulation::Qam16).then(|| stream.component(Quadrature::Q)),
                stream: Some(stream),
            }
        }
        SignalKind::Nrz => {
            let ratio = (cfg.full_rate / cfg.symbol_rate).round() as usize;
            let bits = prbs_bits(cfg.prbs_order, full / ratio, 1).stage("prbs")?;
            let stream = map_symbols(&bits, Modulation::Bpsk, cfg.symbol_rate).stage("symbol mapping")?;
            let fine = TimeGrid::covering(cfg.full_rate, full, cfg.oversampling).stage("grid")?;
            let shaped = nrz_shape(&stream, Quadrature::I, cfg.full_rate / 2.0, &fine).stage("NRZ shaping")?;
            Source {
                i: shaped.samples().iter().step_by(cfg.oversampling).copied().collect(),
                q: None,
                stream: Some(stream),
            }
        }
    };
    if let Some(bits) = cfg.impairments.quantizer_bits {
        let peak = src
            .i
            .iter()
            .chain(src.q.iter().flatten())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let q = |v: &Vec<f64>| -> Result<Vec<f64>> {
            let w = SampledWaveform::new(v.clone(), cfg.full_rate, 0.0).stage("quantizer")?;
            Ok(quantize(&w, bits, peak).stage("quantizer")?.into_samples())
        };
        src.i = q(&src.i)?;
        if let Some(qq) = &src.q {
            src.q = Some(q(qq)?);
        }
    }
    Ok(src)
}

pub fn grid(cfg: &ScenarioConfig) -> Result<TimeGrid> {
    TimeGrid::covering(cfg.full_rate, cfg.full_samples(), cfg.oversampling).stage("grid")
}

/// Renders `full` through one arm with the configured DAC and RF jitter.
pub fn render_arm(
    full: &[f64],
    cfg: &ScenarioConfig,
    arm: Arm,
    grid: &TimeGrid,
    rng: &mut ChaCha8Rng,
) -> Result<SampledWaveform> {
    let imp = &cfg.impairments;
    match arm {
        Arm::Direct => direct_dac_jittered(full, cfg.full_rate, grid, imp.dac_jitter_rms, cfg.extent, rng)
            .stage("direct DAC"),
        Arm::Branches(n) => {
            let plan = BranchPlan::new(n, cfg.full_rate)
                .stage("branch plan")?
                .with_extent(cfg.extent);
            Ok(synthesize_stream(full, &plan, grid, imp.dac_jitter_rms, imp.rf_jitter_rms, rng)
                .stage("branch synthesis")?
                .output)
        }
    }
}

/// Grid samples excluded at each end before measuring: the truncated sinc
/// tails of a finite record; none for looped playback.
pub fn guard_samples(cfg: &ScenarioConfig, n_branches: usize) -> Result<usize> {
    if cfg.extent == Extent::Periodic {
        return Ok(0);
    }
    let guard = 64 * n_branches * cfg.oversampling;
    if 4 * guard >= cfg.samples {
        return usage(format!(
            "{} samples leave no interior window beyond a {guard}-sample guard",
            cfg.samples
        ));
    }
    Ok(guard)
}

/// Longest window inside `[start, start + avail)` that holds a whole number
/// of tone periods, so the tone falls on a DFT bin.
pub fn coherent_window(f: f64, rate: f64, start: usize, avail: usize) -> Option<(usize, usize)> {
    (avail / 2..=avail)
        .rev()
        .find(|&l| {
            let cycles = f * l as f64 / rate;
            (cycles - cycles.round()).abs() < 1e-6 && cycles >= 1.0
        })
        .map(|l| (start, l))
}

fn joined(parts: &[&SampledWaveform]) -> Result<SampledWaveform> {
    let v: Vec<f64> = parts.iter().flat_map(|w| w.samples().iter().copied()).collect();
    SampledWaveform::new(v, parts[0].sample_rate(), 0.0).stage("metrics")
}

fn window(w: &SampledWaveform, guard: usize) -> Result<SampledWaveform> {
    w.window(guard, w.len() - 2 * guard).stage("metrics")
}

/// Relative RMS error of `test` against `reference` in percent, over the
/// interior window and both quadratures when present.
fn pair_error(
    test: (&SampledWaveform, Option<&SampledWaveform>),
    reference: (&SampledWaveform, Option<&SampledWaveform>),
    guard: usize,
) -> Result<f64> {
    let (ti, ri) = (window(test.0, guard)?, window(reference.0, guard)?);
    match (test.1, reference.1) {
        (Some(tq), Some(rq)) => {
            let (tq, rq) = (window(tq, guard)?, window(rq, guard)?);
            rms_error_pct(&joined(&[&ti, &tq])?, &joined(&[&ri, &rq])?).stage("metrics")
        }
        _ => rms_error_pct(&ti, &ri).stage("metrics"),
    }
}

/// Everything a run produces, held until the files are written.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub tables: Vec<Table>,
    pub svgs: Vec<(String, String)>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub tables: Vec<Table>,
}

impl RunOutcome {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

/// Runs `cfg` and writes its CSVs (and SVGs when enabled) into
/// `cfg.output_dir`. `threads` caps sweep parallelism.
pub fn run_scenario(cfg: &ScenarioConfig, threads: Option<usize>) -> Result<RunOutcome> {
    cfg.validate()?;
    let artifacts = compute(cfg, threads)?;
    ensure_dir(&cfg.output_dir)?;
    let mut files = Vec::new();
    for t in &artifacts.tables {
        files.push(t.write(&cfg.output_dir)?);
    }
    if cfg.svg {
        for (name, text) in &artifacts.svgs {
            let path = cfg.output_dir.join(format!("{name}.svg"));
            write_text(&path, text)?;
            files.push(path);
        }
    }
    Ok(RunOutcome {
        files,
        tables: artifacts.tables,
    })
}

pub fn compute(cfg: &ScenarioConfig, threads: Option<usize>) -> Result<Artifacts> {
    if let Some(spec) = &cfg.sweep {
        let table = run_sweep(cfg, spec, threads)?;
        let svgs = if cfg.svg { vec![("sweep".to_string(), sweep_svg(&table))] } else { Vec::new() };
        return Ok(Artifacts {
            tables: vec![table],
            svgs,
        });
    }
    if cfg.scenario == ScenarioName::Fig8Waveforms {
        return fig8(cfg);
    }
    single(cfg)
}

fn single(cfg: &ScenarioConfig) -> Result<Artifacts> {
    let src = source(cfg)?;
    let grid = grid(cfg)?;
    let n = cfg.n_branches;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let plan = BranchPlan::new(n, cfg.full_rate)
        .stage("branch plan")?
        .with_extent(cfg.extent);
    let imp = &cfg.impairments;
    let syn_i = synthesize_stream(&src.i, &plan, &grid, imp.dac_jitter_rms, imp.rf_jitter_rms, &mut rng)
        .stage("branch synthesis")?;
    let syn_q = src
        .q
        .as_ref()
        .map(|q| synthesize_stream(q, &plan, &grid, imp.dac_jitter_rms, imp.rf_jitter_rms, &mut rng))
        .transpose()
        .stage("branch synthesis")?;
    let ref_i = render_arm(&src.i, cfg, Arm::Direct, &grid, &mut rng)?;
    let ref_q = src
        .q
        .as_ref()
        .map(|q| render_arm(q, cfg, Arm::Direct, &grid, &mut rng))
        .transpose()?;

    let guard = guard_samples(cfg, n)?;
    let out_i = &syn_i.output;
    let out_q = syn_q.as_ref().map(|s| &s.output);
    let rms = pair_error((out_i, out_q), (&ref_i, ref_q.as_ref()), guard)?;

    let window_error = if src.i.len() % 2 == 0 {
        let analog = |v: &[f64]| direct_dac(v, cfg.full_rate, &grid, None, Extent::Periodic).stage("ideal analog");
        let ai = analog(&src.i)?;
        let aq = src.q.as_deref().map(analog).transpose()?;
        Some(pair_error((out_i, out_q), (&ai, aq.as_ref()), guard)?)
    } else {
        None
    };

    let mut sinad = None;
    let mut q_db = None;
    let mut evm = None;
    match cfg.signal {
        SignalKind::Tone => {
            if let Some((start, len)) =
                coherent_window(cfg.tone_frequency, grid.rate, guard, grid.len - 2 * guard)
            {
                let w = out_i.window(start, len).stage("metrics")?;
                sinad = Some(sinad_enob(&w, cfg.tone_frequency).stage("SINAD")?.0);
            }
        }
        SignalKind::Bpsk | SignalKind::Nrz => {
            let stream = src.stream.as_ref().expect("symbol source");
            let (idx, labels) = interior_symbols(stream, &grid, guard);
            let samples: Vec<f64> = idx.iter().map(|&(_, g)| out_i.samples()[g]).collect();
            q_db = Some(qfactor_bpsk(&samples, &labels).stage("Q factor")?.q_db);
        }
        SignalKind::Qam16 => {
            let stream = src.stream.as_ref().expect("symbol source");
            let out_q = out_q.expect("quadrature output");
            let (idx, _) = interior_symbols(stream, &grid, guard);
            let received: Vec<Complex64> = idx
                .iter()
                .map(|&(_, g)| Complex64::new(out_i.samples()[g], out_q.samples()[g]))
                .collect();
            let reference = SymbolStream {
                symbols: idx.iter().map(|&(k, _)| stream.symbols[k]).collect(),
                ..stream.clone()
            };
            evm = Some(evm_pct(&received, &reference).stage("EVM")?);
        }
    }

    let mut metrics = Table::new("metrics", &METRICS_HEADER);
    metrics.push(vec![
        cfg.scenario.to_string(),
        n.to_string(),
        fmt_num(cfg.full_rate),
        cfg.samples.to_string(),
        fmt_num(rms),
        fmt_opt(window_error),
        fmt_opt(sinad),
        fmt_opt(sinad.map(orthodac::metrics::enob_from_sinad)),
        fmt_opt(q_db),
        fmt_opt(evm),
    ]);

    let mut tables = vec![
        waveform_table("output", out_i, out_q),
        waveform_table("reference", &ref_i, ref_q.as_ref()),
    ];
    for (l, b) in syn_i.branches.iter().enumerate() {
        let bq = syn_q.as_ref().map(|s| &s.branches[l]);
        tables.push(waveform_table(&format!("branch_{}", l + 1), b, bq));
    }
    tables.push(metrics);

    let mut svgs = Vec::new();
    if cfg.svg {
        let span = (48 * cfg.oversampling).min(grid.len);
        let start = (grid.len - span) / 2;
        let t: Vec<f64> = (start..start + span).map(|i| grid.time(i) * 1e12).collect();
        let cut = |w: &SampledWaveform| w.samples()[start..start + span].to_vec();
        let (o, r) = (cut(out_i), cut(&ref_i));
        let mut series = vec![
            Series { label: "direct", x: &t, y: &r },
            Series { label: "branches", x: &t, y: &o },
        ];
        let branch_cuts: Vec<Vec<f64>> = syn_i.branches.iter().map(cut).collect();
        let labels: Vec<String> = (1..=n).map(|l| format!("branch {l}")).collect();
        for (c, label) in branch_cuts.iter().zip(&labels) {
            series.push(Series { label, x: &t, y: c });
        }
        svgs.push((
            "output".to_string(),
            line_plot(cfg.scenario.as_str(), "t (ps)", "amplitude", &series),
        ));
    }
    Ok(Artifacts { tables, svgs })
}

/// `(symbol index, grid index)` of symbols clear of the guard, with labels.
fn interior_symbols(
    stream: &SymbolStream,
    grid: &TimeGrid,
    guard: usize,
) -> (Vec<(usize, usize)>, Vec<u8>) {
    let mut idx = Vec::new();
    let mut labels = Vec::new();
    for k in 0..stream.len() {
        if let Some(g) = grid.index_of(stream.instant(k), 1e-3) {
            if g >= guard && g + guard < grid.len {
                idx.push((k, g));
                labels.push(u8::from(stream.symbols[k].re > 0.0));
            }
        }
    }
    (idx, labels)
}

fn fig8(cfg: &ScenarioConfig) -> Result<Artifacts> {
    let signals = [
        ("tone", SignalKind::Tone, cfg.full_rate),
        ("nyquist", SignalKind::Bpsk, cfg.full_rate),
        ("nrz", SignalKind::Nrz, cfg.full_rate / 2.0),
    ];
    let arms = [Arm::Direct, Arm::Branches(3), Arm::Branches(5)];
    let grid = grid(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut tables = Vec::new();
    let mut metrics = Table::new("metrics", &FIG8_METRICS_HEADER);
    let mut svgs = Vec::new();
    for (name, signal, symbol_rate) in signals {
        let sub = ScenarioConfig {
            signal,
            symbol_rate,
            ..cfg.clone()
        };
        let src = source(&sub)?;
        let analog = direct_dac(&src.i, cfg.full_rate, &grid, None, Extent::Periodic).stage("ideal analog")?;
        let mut waves = Vec::new();
        for arm in arms {
            waves.push(render_arm(&src.i, &sub, arm, &grid, &mut rng)?);
        }
        let guard = guard_samples(cfg, 5)?;
        for (arm, w) in arms.iter().zip(&waves) {
            let rms = pair_error((w, None), (&waves[0], None), guard)?;
            let win = pair_error((w, None), (&analog, None), guard)?;
            metrics.push(vec![name.into(), arm.label(), fmt_num(rms), fmt_num(win)]);
            tables.push(waveform_table(&format!("{name}_{}", arm.label()), w, None));
        }
        if cfg.svg {
            let span = (24 * cfg.oversampling).min(grid.len);
            let t: Vec<f64> = (0..span).map(|i| grid.time(i) * 1e12).collect();
            let cuts: Vec<Vec<f64>> = waves.iter().map(|w| w.samples()[..span].to_vec()).collect();
            let labels: Vec<String> = arms.iter().map(|a| a.label()).collect();
            let series: Vec<Series> = cuts
                .iter()
                .zip(&labels)
                .map(|(y, label)| Series { label, x: &t, y })
                .collect();
            svgs.push((name.to_string(), line_plot(name, "t (ps)", "amplitude", &series)));
        }
    }
    tables.push(metrics);
    Ok(Artifacts { tables, svgs })
}

fn sweep_svg(table: &Table) -> String {
    let x: Vec<f64> = table.column(&table.header[0]).unwrap_or_default().into_iter().map(|v| v.unwrap_or(f64::NAN)).collect();
    let metric = if table.header.iter().any(|h| h == "enob_direct") { "enob" } else { "q" };
    let cols: Vec<(String, Vec<f64>)> = ["direct", "n3", "n5"]
        .iter()
        .filter_map(|arm| {
            let name = if metric == "enob" { format!("enob_{arm}") } else { format!("q_{arm}_db") };
            table
                .column(&name)
                .map(|c| (arm.to_string(), c.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect()))
        })
        .collect();
    let series: Vec<Series> = cols
        .iter()
        .map(|(label, y)| Series { label, x: &x, y })
        .collect();
    let y_label = if metric == "enob" { "ENOB (bits)" } else { "Q (dB)" };
    line_plot("sweep", &table.header[0], y_label, &series)
}
