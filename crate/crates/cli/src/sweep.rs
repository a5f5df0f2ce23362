//! Monte-Carlo parameter sweeps over the direct, 3-branch and 5-branch
//! transmitters.

use orthodac::link::{run_link, LinkConfig};
use orthodac::metrics::{qfactor_bpsk, sinad_enob, COLLAPSE_THRESHOLD_DB};
use orthodac::signals::SymbolStream;
use orthodac::TimeGrid;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ScenarioConfig, SignalKind, SweepParam, SweepSpec};
use crate::error::{usage, CliError, Result, Stage};
use crate::output::{fmt_num, Table};
use crate::scenario::{coherent_window, grid, guard_samples, render_arm, source, Arm};

pub const ARMS: [Arm; 3] = [Arm::Direct, Arm::Branches(3), Arm::Branches(5)];

/// Seed of repetition `rep` at sweep point `point`.
pub fn point_seed(base: u64, point: usize, rep: usize) -> u64 {
    base * 1_000_000 + point as u64 * 1_000 + rep as u64
}

/// Reads `ORTHODAC_THREADS`; unset means rayon's default.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var("ORTHODAC_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => usage(format!("ORTHODAC_THREADS must be a positive integer, got `{v}`")),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Enob,
    Link,
}

impl Kind {
    fn metrics(self) -> &'static [&'static str] {
        match self {
            Kind::Enob => &["sinad_{}_db", "enob_{}"],
            Kind::Link => &["q_{}_db"],
        }
    }
}

pub fn sweep_header(cfg: &ScenarioConfig, param: SweepParam) -> Result<Vec<String>> {
    let kind = kind(cfg, param)?;
    let mut header = vec![param.column().to_string()];
    for arm in ARMS {
        for m in kind.metrics() {
            let name = m.replace("{}", &arm.label());
            header.push(name.clone());
            header.push(format!("{name}_std"));
        }
    }
    if kind == Kind::Link {
        header.extend(ARMS.iter().map(|a| format!("collapsed_{}", a.label())));
    }
    Ok(header)
}

fn kind(cfg: &ScenarioConfig, param: SweepParam) -> Result<Kind> {
    match (cfg.signal, param) {
        (SignalKind::Tone, SweepParam::DacJitterRms) => Ok(Kind::Enob),
        (SignalKind::Tone, SweepParam::OsnrDb) => {
            usage("osnr_db sweeps need a link scenario (signal = bpsk)")
        }
        (SignalKind::Bpsk, _) => Ok(Kind::Link),
        (other, _) => usage(format!("sweeps support tone and bpsk signals, not {other:?}")),
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

struct Shared {
    full: Vec<f64>,
    stream: Option<SymbolStream>,
    grid: TimeGrid,
    window: (usize, usize),
}

fn job(
    cfg: &ScenarioConfig,
    shared: &Shared,
    kind: Kind,
    param: SweepParam,
    value: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut cfg = cfg.clone();
    let mut link = LinkConfig {
        osnr_db: cfg.impairments.osnr_db.unwrap_or(cfg.link.osnr_db),
        ..cfg.link.clone()
    };
    match param {
        SweepParam::DacJitterRms => cfg.impairments.dac_jitter_rms = param.to_si(value),
        SweepParam::OsnrDb => link.osnr_db = value,
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(2 * ARMS.len());
    for arm in ARMS {
        let wave = render_arm(&shared.full, &cfg, arm, &shared.grid, &mut rng)?;
        match kind {
            Kind::Enob => {
                let (start, len) = shared.window;
                let w = wave.window(start, len).stage("SINAD")?;
                let (sinad, enob) = sinad_enob(&w, cfg.tone_frequency).stage("SINAD")?;
                out.extend([sinad, enob]);
            }
            Kind::Link => {
                let stream = shared.stream.as_ref().expect("symbol stream");
                let d = run_link(&wave, stream, &link, &mut rng).stage("optical link")?;
                out.push(qfactor_bpsk(&d.samples, &d.labels).stage("Q factor")?.q_db);
            }
        }
    }
    Ok(out)
}

/// One row per swept value: per-arm Monte-Carlo means with standard
/// deviations, plus collapse flags for link sweeps.
pub fn run_sweep(cfg: &ScenarioConfig, spec: &SweepSpec, threads: Option<usize>) -> Result<Table> {
    spec.validate()?;
    let kind = kind(cfg, spec.param)?;
    let header = sweep_header(cfg, spec.param)?;
    let src = source(cfg)?;
    let grid = grid(cfg)?;
    let guard = guard_samples(cfg, 5)?;
    let window = match kind {
        Kind::Enob => coherent_window(cfg.tone_frequency, grid.rate, guard, grid.len - 2 * guard)
            .ok_or_else(|| CliError::Usage("tone does not fit a whole number of periods".into()))?,
        Kind::Link => (0, grid.len),
    };
    let shared = Shared {
        full: src.i,
        stream: src.stream,
        grid,
        window,
    };
    let values = spec.values();
    let jobs: Vec<(usize, usize)> = (0..values.len())
        .flat_map(|p| (0..spec.seeds).map(move |r| (p, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let results: Vec<Result<Vec<f64>>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(p, r)| {
                job(cfg, &shared, kind, spec.param, values[p], point_seed(cfg.seed, p, r))
            })
            .collect()
    });
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;

    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut table = Table::new("sweep", &header_refs);
    let per_arm = kind.metrics().len();
    for (p, value) in values.iter().enumerate() {
        let reps = &results[p * spec.seeds..(p + 1) * spec.seeds];
        let mut row = vec![fmt_num(*value)];
        let mut means = Vec::new();
        for col in 0..per_arm * ARMS.len() {
            let samples: Vec<f64> = reps.iter().map(|r| r[col]).collect();
            let (mean, std) = mean_std(&samples);
            means.push(mean);
            row.push(fmt_num(mean));
            row.push(fmt_num(std));
        }
        if kind == Kind::Link {
            row.extend(means.iter().map(|&q| u8::from(q < COLLAPSE_THRESHOLD_DB).to_string()));
        }
        table.push(row);
    }
    Ok(table)
}
