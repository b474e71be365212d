//! Seeded experiments, their reports, configuration files and CSV output.

pub mod config;
pub mod experiments;
pub mod persist;

pub use config::{AlphaSpec, ExperimentConfig, ExperimentId};
pub use experiments::{
    run, run_attack, run_baseline, run_check_partitions, run_static_counterexample,
    AttackReport, BaselineReport, ExceedanceReport, Report, StaticReport,
};
pub use persist::{load_config, persist};
