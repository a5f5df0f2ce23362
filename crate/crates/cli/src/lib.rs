//! Scenario runner for the `orthodac` synthesizer: named presets for each
//! experiment, Monte-Carlo sweeps, CSV and SVG output.
//!
//! ```no_run
//! use orthodac_cli::config::{ScenarioConfig, ScenarioName};
//! use orthodac_cli::scenario::run_scenario;
//!
//! let cfg = ScenarioConfig::preset(ScenarioName::Fig3Sine);
//! let outcome = run_scenario(&cfg, None).unwrap();
//! println!("{:?}", outcome.files);
//! ```

pub mod config;
pub mod error;
pub mod output;
pub mod scenario;
pub mod svg;
pub mod sweep;

pub use config::{ScenarioConfig, ScenarioName, SweepParam, SweepSpec};
pub use error::{CliError, Result};
pub use scenario::{run_scenario, RunOutcome};
