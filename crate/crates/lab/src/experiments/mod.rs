//! The experiment registry. Each experiment turns an [`ExperimentConfig`]
//! into an [`ExperimentReport`] whose checks are the acceptance rules.

mod inequalities;
mod littlewood_paley;
mod nonperiodic;
mod periodic;
mod scaling;
mod solver;

use std::time::Instant;

use nudlab_core::estimates::fit_loglog_slope;
use nudlab_core::lp::{Profile, VelocityField};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::LabResult;
use crate::report::{ExperimentReport, SlopeRecord};

/// A report plus the solver states the experiment chose to keep.
#[derive(Debug)]
pub struct Outcome {
    pub report: ExperimentReport,
    pub snapshots: Vec<NamedSnapshot>,
}

#[derive(Debug)]
pub struct NamedSnapshot {
    pub name: String,
    pub time: f64,
    pub field: VelocityField,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> LabResult<Outcome> {
    cfg.validate()?;
    let mut ctx = Context::new(cfg);
    let started = Instant::now();
    match cfg.experiment {
        Experiment::PartitionCheck => littlewood_paley::partition_check(cfg, &mut ctx)?,
        Experiment::NormOracle => littlewood_paley::norm_oracle(cfg, &mut ctx)?,
        Experiment::LemmaTlemp => scaling::periodic_modes(cfg, &mut ctx)?,
        Experiment::LemmaTlemnp => scaling::dilated_bumps(cfg, &mut ctx)?,
        Experiment::HolderVanishing => scaling::holder_vanishing(cfg, &mut ctx)?,
        Experiment::NudPeriodic => periodic::nud_periodic(cfg, &mut ctx)?,
        Experiment::NudNonperiodic => nonperiodic::nud_nonperiodic(cfg, &mut ctx)?,
        Experiment::ResidualDecay => nonperiodic::residual_decay(cfg, &mut ctx)?,
        Experiment::SolverVerify => solver::solver_verify(cfg, &mut ctx)?,
        Experiment::TransportBound => solver::transport_bound(cfg, &mut ctx)?,
        Experiment::InequalitySuite => inequalities::inequality_suite(cfg, &mut ctx)?,
    }
    ctx.report.timings.push(("total".into(), started.elapsed().as_secs_f64()));
    Ok(Outcome { report: ctx.report, snapshots: ctx.snapshots })
}

/// Mutable state shared by the experiment bodies.
pub(crate) struct Context {
    pub report: ExperimentReport,
    pub snapshots: Vec<NamedSnapshot>,
    keep_snapshots: bool,
}

impl Context {
    fn new(cfg: &ExperimentConfig) -> Self {
        let report = ExperimentReport::new(cfg.experiment.name(), cfg.quick, Profile::default().identifier(), cfg.echo());
        Context { report, snapshots: Vec::new(), keep_snapshots: cfg.snapshots }
    }

    pub fn snapshot(&mut self, name: String, time: f64, field: &VelocityField) {
        if self.keep_snapshots {
            self.snapshots.push(NamedSnapshot { name, time, field: field.clone() });
        }
    }

    pub fn timed<T>(&mut self, label: impl Into<String>, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.report.timings.push((label.into(), t.elapsed().as_secs_f64()));
        out
    }

    /// Fits a log-log slope, records it against `predicted +- tolerance`
    /// and returns it.
    pub fn slope(
        &mut self,
        quantity: &str,
        params: &[(&str, f64)],
        pairs: &[(f64, f64)],
        predicted: f64,
        tolerance: f64,
    ) -> LabResult<f64> {
        self.record_slope(quantity, params, pairs, predicted, tolerance, false)
    }

    /// Like [`Context::slope`], but only requires `slope <= predicted + tolerance`.
    pub fn slope_at_most(
        &mut self,
        quantity: &str,
        params: &[(&str, f64)],
        pairs: &[(f64, f64)],
        predicted: f64,
        tolerance: f64,
    ) -> LabResult<f64> {
        self.record_slope(quantity, params, pairs, predicted, tolerance, true)
    }

    fn record_slope(
        &mut self,
        quantity: &str,
        params: &[(&str, f64)],
        pairs: &[(f64, f64)],
        predicted: f64,
        tolerance: f64,
        upper_only: bool,
    ) -> LabResult<f64> {
        let fit = fit_loglog_slope(pairs)?;
        let pass = if upper_only {
            fit.slope <= predicted + tolerance
        } else {
            (fit.slope - predicted).abs() <= tolerance
        };
        self.report.slopes.push(SlopeRecord {
            quantity: quantity.into(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            slope: fit.slope,
            predicted,
            tolerance,
            upper_only,
            max_relative_residual: fit.max_relative_residual,
            pass,
        });
        Ok(fit.slope)
    }
}

/// `(a, b)` formatted as `name=value` pairs for check details.
pub(crate) fn describe(params: &[(&str, f64)]) -> String {
    params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
}

/// Uniform sample in `[-1, 1)`.
pub(crate) fn symmetric(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(-1.0..1.0)
}
