//! Scenario files, figure presets and the run pipeline.

mod config;
mod presets;
mod run;

pub use crate::dynamics::TimeGrid;
pub use config::{
    emit, parse_config, parse_config_verbose, BathConfig, ChainConfig, RunConfig, ScenarioConfig,
    DEFAULT_N_EFOLD, DEFAULT_SPACING_OVER_R,
};
pub use presets::{preset, preset_text, PRESETS};
pub use run::{
    analyze, run_scenario, simulate, sweep, sweep_with, with_axis, Analysis, RunReport,
    SweepPoint, CSV_NAME, FALLBACK_T_MAX, NETWORK_THRESHOLD, REPORT_NAME, SWEEPABLE,
};
