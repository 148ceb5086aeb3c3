//! Experiment orchestration: JSON configs, the per-`N` grid, an on-disk
//! operator/spectrum cache, CSV tables and SVG figures.
//!
//! Outputs are deterministic in `(config, seed)`: per-`N` work runs on a
//! worker pool but tables are assembled in `N` order, and every file goes
//! through a staging file renamed into place.

mod cache;
mod config;
mod plots;
mod run;

pub use cache::{cache_key, cache_key_with_version, spectrum_difference, write_atomic, Cache, Origin, CODE_VERSION};
pub use config::{
    parse_config, parse_config_for, parse_config_str, parse_config_str_for, Experiment, ExperimentConfig, MapConfig, Tolerances, DEFAULT_DIM_CAP,
    DEFAULT_N_LIST, DEFAULT_SEED,
};
pub use plots::{emit_plots, step_points, Plot};
pub use run::{
    relative_files, run_experiment, run_experiment_with, CacheCheck, ManifestEntry, Row, RunOptions, RunReport,
};
