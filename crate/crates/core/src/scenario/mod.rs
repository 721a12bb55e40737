//! Named scenarios: configuration, execution and tabular output.

pub mod checks;
pub mod config;
pub mod output;
pub mod run;

pub use checks::{run_checks, CheckOutcome};
pub use config::{
    preset, preset_description, preset_names, Ansatz, CdMode, NoiseConfig, ScenarioConfig, ScenarioName, Variant,
    ANNEAL_TAU,
};
pub use output::{emit_csv, emit_plot_script, format_float, plot_script, RunRecord, Table, FIGURE_IDS};
pub use run::{run_scenario, run_scenario_with, Output, RunOptions, RunResult};
