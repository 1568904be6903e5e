use nudlab_core::euler::{leray_project, solve, transport_solve, SolverConfig, Trajectory};
use nudlab_core::families::{exact_family_2d, FamilyParams};
use nudlab_core::lp::{spectral_derivative, DyadicPartition, Grid, GridFunction, Profile, VelocityField};
use nudlab_core::norms::{besov_norm_field, block_norms, combine_blocks, BesovParams, Exponent};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::littlewood_paley::random_field;
use super::{describe, Context};
use crate::config::ExperimentConfig;
use crate::error::LabResult;
use crate::report::Row;

const ORACLE_TOL: f64 = 1e-6;
const DRIFT_TOL: f64 = 1e-6;
const ORDER_FLOOR: f64 = 3.7;
/// Errors below this are rounding, not truncation, and are left out of the order estimate.
const ERROR_FLOOR: f64 = 1e-12;
const CONVERGENCE_N: f64 = 4.0;
const CONVERGENCE_S: f64 = 1.0;
const CONVERGENCE_GRID: usize = 16;
const CONVERGENCE_STEPS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];
const CONSTANT_BUDGET: f64 = 100.0;
const ADVECTOR_SPEED: f64 = 1.0;

pub(crate) fn solver_verify(cfg: &ExperimentConfig, ctx: &mut Context) -> LabResult<()> {
    let grid = Grid::torus(2, cfg.grid.unwrap_or(256))?;
    let dt = cfg.dt[0];
    let s = cfg.s[0];
    let mut worst = 0.0f64;
    let mut drift = 0.0f64;
    for &n in &cfg.freqs {
        let prm = FamilyParams::periodic(1.0, n, s)?;
        let u0 = exact_family_2d(&prm, 0.0, &grid)?;
        let traj = ctx.timed(format!("solve n={n}"), || solve(&u0, &SolverConfig::for_grid(&grid, dt, 1.0)))?;
        let err = traj.last().sub(&exact_family_2d(&prm, 1.0, &grid)?).max_abs();
        let params = [("n", n), ("dt", dt), ("t", 1.0)];
        ctx.report.row(Row::new("oracle error", &params, err).predicted(0.0).pass(err < ORACLE_TOL));
        ctx.report.row(Row::new("energy drift", &params, traj.energy_drift()).predicted(0.0).pass(traj.energy_drift() < DRIFT_TOL));
        worst = worst.max(err);
        drift = drift.max(traj.energy_drift());
        if n == cfg.freqs[0] {
            ctx.snapshot(format!("solver-n{n}-final"), 1.0, traj.last());
        }
    }
    ctx.report.check(
        format!("solution matches the exact family to {ORACLE_TOL:e} at t = 1"),
        worst < ORACLE_TOL,
        format!("max |error| {worst:e}"),
    );
    ctx.report.check(
        format!("relative energy drift < {DRIFT_TOL:e}"),
        drift < DRIFT_TOL,
        format!("max drift {drift:e}"),
    );

    let coarse = Grid::torus(2, CONVERGENCE_GRID)?;
    let prm = FamilyParams::periodic(1.0, CONVERGENCE_N, CONVERGENCE_S)?;
    let u0 = exact_family_2d(&prm, 0.0, &coarse)?;
    let target = exact_family_2d(&prm, 1.0, &coarse)?;
    let mut errors = Vec::new();
    for h in CONVERGENCE_STEPS {
        let traj = solve(&u0, &SolverConfig::for_grid(&coarse, h, 1.0))?;
        let err = traj.last().sub(&target).max_abs();
        ctx.report.row(Row::new("convergence error", &[("n", CONVERGENCE_N), ("dt", h)], err));
        errors.push((h, err));
    }
    let orders: Vec<f64> = errors
        .windows(2)
        .filter(|w| w[1].1 > ERROR_FLOOR)
        .map(|w| (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln())
        .collect();
    for (w, order) in errors.windows(2).filter(|w| w[1].1 > ERROR_FLOOR).zip(&orders) {
        ctx.report.row(Row::new("observed order", &[("dt", w[1].0)], *order).predicted(4.0).pass(*order >= ORDER_FLOOR));
    }
    let min_order = orders.iter().copied().fold(f64::INFINITY, f64::min);
    ctx.report.check(
        format!("observed time order >= {ORDER_FLOOR}"),
        !orders.is_empty() && min_order >= ORDER_FLOOR,
        format!("{} step pairs above the floor, min order {min_order:.4}", orders.len()),
    );
    Ok(())
}

fn random_velocity(grid: &Grid, band: usize, rng: &mut ChaCha8Rng) -> LabResult<VelocityField> {
    let comps = (0..grid.dim()).map(|_| random_field(grid, band, rng)).collect();
    Ok(VelocityField::new(comps, false)?)
}

/// A random divergence-free field with `max |mu| = ADVECTOR_SPEED`.
fn random_advector(grid: &Grid, band: usize, rng: &mut ChaCha8Rng) -> LabResult<VelocityField> {
    let mu = leray_project(&random_velocity(grid, band, rng)?);
    let speed = mu.max_abs();
    Ok(mu.scale(ADVECTOR_SPEED / speed))
}

/// Samples `cos(a t) x + sin(b t) y` at `count` evenly spaced times.
fn oscillating(x: &VelocityField, y: &VelocityField, a: f64, b: f64, spacing: f64, count: usize, div_free: bool) -> LabResult<Trajectory> {
    let snaps = (0..count)
        .map(|i| {
            let t = i as f64 * spacing;
            (t, x.clone().scale((a * t).cos()).axpy((b * t).sin(), y).with_divergence_free(div_free))
        })
        .collect();
    Ok(Trajectory::new(snaps)?)
}

/// `||grad mu||_{B^1_{2,inf}} + ||grad mu||_inf`, with the gradient measured
/// entrywise in the Frobenius norm.
fn gradient_size(mu: &VelocityField, partition: &DyadicPartition) -> LabResult<f64> {
    let two = Exponent::Finite(2.0);
    let grid = *mu.grid();
    let mut blocks: Vec<f64> = Vec::new();
    let mut pointwise = vec![0.0f64; grid.len()];
    for c in mu.components() {
        for axis in 0..grid.dim() {
            let entry: GridFunction = spectral_derivative(c, axis)?;
            for (j, b) in block_norms(&entry, partition, two)?.into_iter().enumerate() {
                if j == blocks.len() {
                    blocks.push(0.0);
                }
                blocks[j] += b * b;
            }
            for (acc, v) in pointwise.iter_mut().zip(entry.samples()) {
                *acc += v.re * v.re;
            }
        }
    }
    let blocks: Vec<f64> = blocks.into_iter().map(f64::sqrt).collect();
    let sup = pointwise.into_iter().fold(0.0, f64::max).sqrt();
    Ok(combine_blocks(&blocks, 1.0, Exponent::Infinity) + sup)
}

/// Cumulative trapezoid integrals of `values` sampled with `spacing`.
fn cumulative(values: &[f64], spacing: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    for w in values.windows(2) {
        out.push(out[out.len() - 1] + 0.5 * spacing * (w[0] + w[1]));
    }
    out
}

pub(crate) fn transport_bound(cfg: &ExperimentConfig, ctx: &mut Context) -> LabResult<()> {
    let grid = Grid::torus(2, cfg.grid.unwrap_or(64))?;
    let partition = DyadicPartition::for_grid(&grid, Profile::default());
    let band = grid.points_per_axis() / 4;
    let dt = cfg.dt[0];
    let final_time = cfg.times.iter().copied().fold(0.0, f64::max).max(dt);
    let spacing = dt / 2.0;
    let count = (final_time / spacing).round() as usize + 1;
    let solver = SolverConfig::for_grid(&grid, dt, final_time);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut fitted = 0.0f64;
    for &sigma in &cfg.sigma {
        let two = Exponent::Finite(2.0);
        let prm = BesovParams::new(sigma, two, two)?;
        for instance in 0..cfg.instances {
            let advectors = [random_advector(&grid, band, &mut rng)?, random_advector(&grid, band, &mut rng)?];
            let (mut fa, mut fb) = (random_velocity(&grid, band, &mut rng)?, random_velocity(&grid, band, &mut rng)?);
            // every other instance is pure transport, where only the exponential factor can absorb growth
            if instance % 2 == 1 {
                (fa, fb) = (fa.scale(0.0), fb.scale(0.0));
            }
            let f0 = random_velocity(&grid, band, &mut rng)?;
            let (a, b) = (rng.gen_range(0.5..3.0), rng.gen_range(0.5..3.0));
            let mu = oscillating(&advectors[0], &advectors[1], a, b, spacing, count, true)?;
            let forcing = oscillating(&fa, &fb, b, a, spacing, count, false)?;
            let f = transport_solve(&mu, &forcing, &f0, &solver)?;

            let forcing_norms: Vec<f64> =
                forcing.snapshots().iter().map(|(_, g)| besov_norm_field(g, &prm)).collect::<Result<_, _>>()?;
            let gradient: Vec<f64> =
                mu.snapshots().iter().map(|(_, m)| gradient_size(m, &partition)).collect::<LabResult<_>>()?;
            let (forced, v) = (cumulative(&forcing_norms, spacing), cumulative(&gradient, spacing));
            let start = besov_norm_field(&f0, &prm)?;
            let mut needed = 0.0f64;
            for (step, (t, g)) in f.snapshots().iter().enumerate().skip(1) {
                let i = 2 * step;
                let ratio = besov_norm_field(g, &prm)? / (start + forced[i]);
                if ratio > 1.0 {
                    needed = needed.max(ratio.ln() / v[i]);
                }
                if step == f.snapshots().len() - 1 {
                    let params = [("instance", instance as f64), ("sigma", sigma), ("t", *t)];
                    ctx.report.row(Row::new("growth ratio", &params, ratio).predicted((v[i] * CONSTANT_BUDGET).exp()));
                }
            }
            ctx.report.row(Row::new("needed constant", &[("instance", instance as f64), ("sigma", sigma)], needed));
            fitted = fitted.max(needed);
        }

        let zero = VelocityField::zeros(grid);
        let mu = oscillating(&random_advector(&grid, band, &mut rng)?, &zero, 1.0, 1.0, spacing, count, true)?;
        let forcing = oscillating(&zero, &zero, 1.0, 1.0, spacing, count, false)?;
        let f = transport_solve(&mu, &forcing, &zero, &solver)?;
        let largest = f.snapshots().iter().map(|(_, g)| g.max_abs()).fold(0.0, f64::max);
        ctx.report.row(Row::new("zero instance", &[("sigma", sigma)], largest).predicted(0.0).pass(largest == 0.0));
        ctx.report.check("zero data and zero forcing stay exactly zero", largest == 0.0, format!("max |f| {largest:e}"));
    }
    ctx.report.row(Row::new("fitted constant", &[], fitted).predicted(CONSTANT_BUDGET).margin(CONSTANT_BUDGET - fitted));
    ctx.report.check(
        format!("one constant C <= {CONSTANT_BUDGET} covers every instance"),
        fitted <= CONSTANT_BUDGET,
        format!("{} instances, fitted C {fitted:.6}", describe(&[("instances", cfg.instances as f64)])),
    );
    Ok(())
}
