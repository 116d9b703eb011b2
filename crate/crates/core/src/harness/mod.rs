//! Experiment runner: scenario presets, replication, seeding and output files.

mod config;
mod output;
mod run;

pub use config::{Algorithm, ScenarioConfig, StartRule, TargetConfig, PRESETS};
pub use output::{write_outputs, write_rasters};
pub use run::{
    halton_start, preliminary_stage, run_experiment, run_replicate, Aggregate, ExperimentResult,
    InitialState, LocalEstimate, Preliminary, RegionMean, ReplicateOutput, Scenario,
};
