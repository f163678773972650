//! Experiment driver: scenario presets, exponent fits, config files and
//! reproducible run directories.

pub mod config;
pub mod fit;
pub mod run;
pub mod scenario;

pub use config::{Budgets, Estimator, ExperimentConfig, ExperimentKind, MethodSpec};
pub use fit::{fit_exponent, ExponentFit};
pub use scenario::{scenario_r4, scenario_r5, scenario_r6, R4Config, R4Report, R5Config, R5Report, R6Config, R6Report};
pub use run::{
    partition_sweep, phase_scan, phase_scan_csv, results_csv, run_config, run_experiment, ExperimentManifest, OutputFile,
    PartitionReport, PartitionRow, PhaseCell, ResultRow,
};
