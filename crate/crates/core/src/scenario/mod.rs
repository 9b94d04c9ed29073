//! Scenario files, the wireless downlink model and the experiment runner.

mod config;
mod experiment;
mod wireless;

pub use config::{
    load_scenario, parse_scenario, ArmConfig, BuiltModel, ExperimentConfig, GeneratorConfig, IndexMethodName,
    IndexSection, MdpConfig, ModelConfig, OutputConfig, PolicyName, RmabConfig, RolloutSection, ScenarioConfig,
    SolverSection, SCHEMA_VERSION,
};
pub use experiment::{
    build_policy, evaluate_experiment, format_sig, index_tables, render_csv, render_manifest, render_timing,
    run_experiment, ExperimentReport, PolicyRow, RunOptions, CSV_COLUMNS, CSV_SCHEMA,
};
pub use wireless::{build_wireless_arm, build_wireless_rmab, ArrivalChain, ChannelChain, WirelessParams};
