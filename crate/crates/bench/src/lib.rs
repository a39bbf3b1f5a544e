//! Experiment harness for the abbflow schemes: configuration, fits and the
//! heat-square, disc-mode, channel-flow and boundary-analysis runs.

pub mod analyze;
pub mod config;
pub mod disc;
pub mod error;
pub mod fit;
pub mod heat;
pub mod output;
pub mod poiseuille;

pub use config::{parse_config, parse_config_str, Experiment, ExperimentConfig, ParsedConfig};
pub use error::{BenchError, Result};
pub use output::{OutputDir, Summary};

/// Runs `config`, writing CSV tables and `summary.txt` under `out`.
pub fn run_experiment(parsed: &ParsedConfig, out: &std::path::Path, seed: u64) -> Result<Summary> {
    let dir = OutputDir::create(out)?;
    let sink = Some((&dir, parsed.source.as_str()));
    Ok(match &parsed.config {
        ExperimentConfig::HeatSquare(c) => heat::run_heat_square(c, seed, sink)?.summary,
        ExperimentConfig::DiscModes(c) => disc::run_disc_modes(c, seed, sink)?.summary,
        ExperimentConfig::Poiseuille(c) => poiseuille::run_poiseuille(c, sink)?.summary,
        ExperimentConfig::Analyze(c) => analyze::run_analyze(c, sink)?.summary,
    })
}
