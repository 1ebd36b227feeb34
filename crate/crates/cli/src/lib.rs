//! Config-driven sweeps over the `nhlab-core` models: parsing, seeding,
//! parallel scheduling and deterministic result files.

pub mod config;
pub mod expr;
pub mod output;
pub mod presets;
pub mod run;
pub mod seeds;

pub use config::{parse_config, Experiment, ExperimentConfig, ThermalSolver};
pub use output::{summarize, write_csv, write_outputs};
pub use presets::{preset, preset_text, PRESETS};
pub use run::{run_experiment, ResultTable, Row, COLUMNS, SCHEMA_VERSION};

/// Environment variable giving the default worker count.
pub const WORKERS_ENV: &str = "NHLAB_WORKERS";

/// Worker count: explicit flag, then config, then [`WORKERS_ENV`], then the
/// number of available cores.
pub fn resolve_workers(flag: Option<usize>, cfg: &ExperimentConfig) -> usize {
    flag.or(cfg.workers)
        .or_else(|| std::env::var(WORKERS_ENV).ok().and_then(|s| s.parse().ok()))
        .or_else(|| std::thread::available_parallelism().ok().map(|n| n.get()))
        .unwrap_or(1)
        .max(1)
}
