//! Configuration, named experiments, reports and convergence studies.

pub mod checks;
pub mod config;
pub mod converge;
pub mod experiments;
pub mod report;

pub use config::{ExperimentConfig, Tolerances};
pub use converge::{convergence_study, observed_orders};
pub use experiments::{compute, run_experiment, CriticalClass, Experiment, PointlabSummary};
pub use report::{write_report, Check, Metric, ReportDoc};

/// Reads the config at `path`, applies `STAB_SEED`.
pub fn load_config(path: &std::path::Path) -> crate::Result<ExperimentConfig> {
    let mut c = ExperimentConfig::load(path)?;
    c.apply_env()?;
    Ok(c)
}
