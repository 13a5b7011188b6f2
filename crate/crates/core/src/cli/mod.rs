//! Experiment runner behind the `robann` binary.

pub mod config;
pub mod experiments;
pub mod output;

use std::path::{Path, PathBuf};

pub use config::{ExperimentConfig, Kind};
pub use experiments::{beta_table, make_searcher, run_experiment, SCHEMA};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const EXPERIMENT_FAILED: i32 = 1;
    pub const CONFIG_ERROR: i32 = 2;
}

/// Loads, runs and writes one experiment. Returns the exit code and a message.
pub fn run_config_file(path: &Path, seed: Option<u64>, out: Option<PathBuf>) -> (i32, String) {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return (exit::CONFIG_ERROR, format!("{}: {e}", path.display())),
    };
    let mut cfg = match ExperimentConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => return (exit::CONFIG_ERROR, format!("{}: {e}", path.display())),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(o) = out {
        cfg.output.dir = o;
    }
    let dir = cfg.output.dir.clone();
    match run_experiment(&cfg).and_then(|a| output::write_artifacts(&dir, &a)) {
        Ok(files) => (
            exit::OK,
            files
                .iter()
                .map(|f| f.display().to_string())
                .collect::<Vec<_>>()
                .join("\n"),
        ),
        Err(e) => {
            output::mark_failed(&dir, &e.to_string());
            (exit::EXPERIMENT_FAILED, format!("experiment failed: {e}"))
        }
    }
}
