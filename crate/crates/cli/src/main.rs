use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use orthodac_cli::config::{ScenarioConfig, ScenarioName, SweepParam, SweepSpec};
use orthodac_cli::error::{CliError, Result};
use orthodac_cli::scenario::run_scenario;
use orthodac_cli::sweep::threads_from_env;

#[derive(Parser)]
#[command(name = "orthodac", version, about = "Broadband DAC synthesis from low-rate branches")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario preset and write its CSVs
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Sweep DAC jitter or OSNR over the direct, 3- and 5-branch transmitters
    Sweep {
        #[command(flatten)]
        common: Common,
        /// dac_jitter_rms (values in ps) or osnr_db
        #[arg(long)]
        param: Option<SweepParam>,
        #[arg(long, allow_negative_numbers = true)]
        from: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        to: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        /// Monte-Carlo repetitions per point
        #[arg(long)]
        seeds: Option<usize>,
    },
}

#[derive(Args)]
struct Common {
    scenario: ScenarioName,
    /// JSON file overriding preset fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output samples (analog grid length)
    #[arg(long)]
    samples: Option<usize>,
    /// Also write SVG plots
    #[arg(long)]
    svg: bool,
}

impl Common {
    fn load(&self) -> Result<ScenarioConfig> {
        let mut cfg = ScenarioConfig::load(self.scenario, self.config.as_deref())?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        if let Some(samples) = self.samples {
            cfg.samples = samples;
        }
        cfg.svg |= self.svg;
        Ok(cfg)
    }
}

fn execute(cli: Cli) -> Result<()> {
    let threads = threads_from_env()?;
    let cfg = match cli.command {
        Command::Run { common } => common.load()?,
        Command::Sweep {
            common,
            param,
            from,
            to,
            points,
            seeds,
        } => {
            let mut cfg = common.load()?;
            let base = cfg.sweep.clone();
            let param = param
                .or(base.as_ref().map(|s| s.param))
                .ok_or_else(|| CliError::Usage("--param is required for this scenario".into()))?;
            let same = base.filter(|s| s.param == param);
            let pick = |flag: Option<f64>, preset: Option<f64>, name: &str| {
                flag.or(preset)
                    .ok_or_else(|| CliError::Usage(format!("--{name} is required")))
            };
            cfg.sweep = Some(SweepSpec {
                param,
                from: pick(from, same.as_ref().map(|s| s.from), "from")?,
                to: pick(to, same.as_ref().map(|s| s.to), "to")?,
                points: points
                    .or(same.as_ref().map(|s| s.points))
                    .ok_or_else(|| CliError::Usage("--points is required".into()))?,
                seeds: seeds.or(same.as_ref().map(|s| s.seeds)).unwrap_or(30),
            });
            cfg
        }
    };
    let outcome = run_scenario(&cfg, threads)?;
    for f in &outcome.files {
        println!("{}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("orthodac: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
