//! Command-line experiment runner: spectra, weight tuning, QAOA depth
//! sweeps, landscapes and circuit export, with CSV tables and SVG plots.

pub mod commands;
pub mod error;
pub mod experiment;
pub mod plot;

pub use commands::{run, Cli, Command};
pub use error::{CliError, CliResult};
pub use experiment::{load_problem, run_experiment, ExperimentConfig, MeritReport, Problem};
