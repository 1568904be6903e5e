//! Experiment harness for the `nudlab-core` numerics: configuration,
//! the experiment registry, report files and velocity snapshots.

pub mod config;
pub mod error;
pub mod experiments;
pub mod report;
pub mod snapshot;

use std::path::{Path, PathBuf};

pub use config::{parse_config, Experiment, ExperimentConfig};
pub use error::{LabError, LabResult};
pub use experiments::{run_experiment, Outcome};
pub use report::{write_report, ExperimentReport};

/// Files produced by [`run_to_dir`].
#[derive(Debug, Clone)]
pub struct Written {
    pub json: PathBuf,
    pub csv: PathBuf,
    pub snapshots: Vec<PathBuf>,
}

/// Runs an experiment and writes its report and kept snapshots into `dir`.
pub fn run_to_dir(cfg: &ExperimentConfig, dir: &Path) -> LabResult<(ExperimentReport, Written)> {
    let outcome = run_experiment(cfg)?;
    let (json, csv) = write_report(&outcome.report, dir)?;
    let mut snapshots = Vec::new();
    for snap in &outcome.snapshots {
        let path = dir.join(format!("{}-{}.snap", outcome.report.experiment, snap.name));
        snapshot::write_snapshot(&path, &snap.field, snap.time)?;
        snapshots.push(path);
    }
    Ok((outcome.report, Written { json, csv, snapshots }))
}
