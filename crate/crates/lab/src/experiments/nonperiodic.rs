use nudlab_core::estimates::{rate_d1, rate_d1_dominant_exponent, rate_d2, rate_d2_dominant_exponent};
use nudlab_core::euler::{solve, SolverConfig, Trajectory};
use nudlab_core::families::{
    approximate_solution, approximate_time_derivative, euler_residual, grid_for, low_freq_initial, FamilyParams,
};
use nudlab_core::lp::{Grid, VelocityField};
use nudlab_core::norms::{besov_norm_field, BesovParams, Exponent};

use super::{describe, Context};
use crate::config::ExperimentConfig;
use crate::error::LabResult;
use crate::report::Row;

const RESIDUAL_SLOPE_TOL: f64 = 0.2;
const DISTANCE_SLOPE_TOL: f64 = 0.15;
const SEPARATION_FRACTION: f64 = 0.5;
const SEPARATION_FROM: f64 = 16.0;
const LOW_GRID_CAP: usize = 512;

fn sobolev_type(s: f64) -> LabResult<BesovParams> {
    let two = Exponent::Finite(2.0);
    Ok(BesovParams::new(s, two, two)?)
}

/// The box grid and the evolved low frequency part of `u^{omega,lambda}`.
struct Approximation {
    prm: FamilyParams,
    grid: Grid,
    low: Trajectory,
}

fn approximation(
    cfg: &ExperimentConfig,
    ctx: &mut Context,
    omega: f64,
    lambda: f64,
    s: f64,
    delta: f64,
    final_time: f64,
) -> LabResult<Approximation> {
    let prm = FamilyParams::nonperiodic(omega, lambda, s, delta)?;
    let grid = grid_for(&prm, 2, cfg.grid)?;
    let low_grid = Grid::centered_box(2, grid.points_per_axis().min(LOW_GRID_CAP), grid.side())?;
    let u0 = low_freq_initial(&prm, &low_grid)?;
    let dt = cfg.dt[0];
    let solver = SolverConfig::for_grid(&low_grid, dt, final_time.max(dt)).with_snapshot_interval(dt);
    let low = ctx.timed(format!("low frequency solve lambda={lambda} omega={omega}"), || solve(&u0, &solver))?;
    Ok(Approximation { prm, grid, low })
}

/// A snapshot spacing, in whole steps, that lands on every requested time.
fn snapshot_interval(times: &[f64], dt: f64) -> f64 {
    let steps: Vec<u64> = times.iter().map(|t| (t / dt).round() as u64).filter(|k| *k > 0).collect();
    let gcd = steps.iter().copied().fold(0, |a, b| {
        let (mut a, mut b) = (a, b);
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    });
    dt * gcd.max(1) as f64
}

fn positive_times(cfg: &ExperimentConfig) -> Vec<f64> {
    cfg.times.iter().copied().filter(|t| *t > 0.0).collect()
}

pub(crate) fn residual_decay(cfg: &ExperimentConfig, ctx: &mut Context) -> LabResult<()> {
    let final_time = cfg.times.iter().copied().fold(0.0, f64::max);
    for &s in &cfg.s {
        for &delta in &cfg.delta {
            for &sigma in &cfg.sigma {
                let prm = sobolev_type(sigma)?;
                let mut pairs = Vec::new();
                for &lambda in &cfg.freqs {
                    let mut worst = 0.0f64;
                    for omega in [1.0, -1.0] {
                        let a = approximation(cfg, ctx, omega, lambda, s, delta, final_time)?;
                        for &t in &cfg.times {
                            let u = approximate_solution(&a.prm, t, &a.low, &a.grid)?;
                            let du = approximate_time_derivative(&a.prm, t, &a.low, &a.grid)?;
                            let residual = euler_residual(&u, &du, &prm)?;
                            let params = [("s", s), ("delta", delta), ("sigma", sigma), ("lambda", lambda), ("omega", omega), ("t", t)];
                            ctx.report.row(
                                Row::new("residual", &params, residual).predicted(rate_d1(lambda, s, sigma, delta)?),
                            );
                            worst = worst.max(residual);
                        }
                    }
                    pairs.push((lambda, worst));
                }
                let params = [("s", s), ("delta", delta), ("sigma", sigma)];
                let predicted = rate_d1_dominant_exponent(s, sigma, delta)?;
                let slope = ctx.slope_at_most("residual", &params, &pairs, predicted, RESIDUAL_SLOPE_TOL)?;
                ctx.report.check(
                    format!("residual slope <= dominant d1 exponent + {RESIDUAL_SLOPE_TOL}"),
                    slope <= predicted + RESIDUAL_SLOPE_TOL,
                    format!("{} slope {slope:.6}, dominant exponent {predicted}", describe(&params)),
                );
            }
        }
    }
    Ok(())
}

pub(crate) fn nud_nonperiodic(cfg: &ExperimentConfig, ctx: &mut Context) -> LabResult<()> {
    let times = positive_times(cfg);
    let final_time = times.iter().copied().fold(0.0, f64::max);
    let k = cfg.k;
    for &s in &cfg.s {
        for &delta in &cfg.delta {
            for &sigma in &cfg.sigma {
                let norms = [("sigma", sigma), ("s", s), ("k", k)];
                let besov = [sobolev_type(sigma)?, sobolev_type(s)?, sobolev_type(k)?];
                // distance in B^s per time, maximized over omega
                let mut distance: Vec<Vec<(f64, f64)>> = vec![Vec::new(); times.len()];
                let mut separations: Vec<(f64, f64, f64, f64)> = Vec::new();
                for &lambda in &cfg.freqs {
                    let d1 = rate_d1(lambda, s, sigma, delta)?;
                    let d2 = rate_d2(lambda, s, sigma, delta, k)?;
                    let mut exact_at: Vec<Vec<VelocityField>> = Vec::new();
                    let mut worst = vec![0.0f64; times.len()];
                    for omega in [1.0, -1.0] {
                        let a = approximation(cfg, ctx, omega, lambda, s, delta, final_time)?;
                        let u0 = approximate_solution(&a.prm, 0.0, &a.low, &a.grid)?;
                        let solver = SolverConfig::for_grid(&a.grid, cfg.dt[0], final_time)
                            .with_snapshot_interval(snapshot_interval(&times, cfg.dt[0]));
                        let exact = ctx.timed(format!("exact solve lambda={lambda} omega={omega}"), || solve(&u0, &solver))?;
                        drop(u0);
                        let mut kept = Vec::new();
                        for (i, &t) in times.iter().enumerate() {
                            let u = exact.at(t)?;
                            let diff = u.sub(&approximate_solution(&a.prm, t, &a.low, &a.grid)?);
                            for ((name, value), prm) in norms.iter().zip(&besov) {
                                let measured = besov_norm_field(&diff, prm)?;
                                let params = [("delta", delta), ("lambda", lambda), ("omega", omega), ("t", t), ("norm", *value)];
                                let mut row = Row::new(format!("distance in B^{name}"), &params, measured);
                                if *name == "sigma" {
                                    row = row.predicted(d1);
                                } else if *name == "s" {
                                    row = row.predicted(d2);
                                    worst[i] = worst[i].max(measured);
                                }
                                ctx.report.row(row);
                            }
                            if t == final_time {
                                ctx.snapshot(format!("nonperiodic-lambda{lambda}-omega{omega}"), t, &u);
                            }
                            kept.push(u);
                        }
                        exact_at.push(kept);
                    }
                    for (i, &t) in times.iter().enumerate() {
                        distance[i].push((lambda, worst[i]));
                        let gap = exact_at[0][i].sub(&exact_at[1][i]);
                        let measured = besov_norm_field(&gap, &besov[1])?;
                        let floor = t.sin() - lambda.powf(-delta - 1.0) - lambda.powf(delta - 1.0) - d2;
                        let params = [("delta", delta), ("lambda", lambda), ("t", t)];
                        ctx.report.row(
                            Row::new("exact separation", &params, measured)
                                .predicted(SEPARATION_FRACTION * floor)
                                .margin(measured - SEPARATION_FRACTION * floor),
                        );
                        separations.push((lambda, t, measured, floor));
                    }
                }
                let params = [("s", s), ("delta", delta), ("sigma", sigma), ("k", k)];
                let predicted = rate_d2_dominant_exponent(s, sigma, delta, k)?;
                for (i, &t) in times.iter().enumerate() {
                    let slope = ctx.slope("distance in B^s", &[params.as_slice(), &[("t", t)]].concat(), &distance[i], predicted, DISTANCE_SLOPE_TOL)?;
                    ctx.report.check(
                        format!("B^s distance slope within {DISTANCE_SLOPE_TOL} of the dominant d2 exponent"),
                        (slope - predicted).abs() <= DISTANCE_SLOPE_TOL,
                        format!("{} t={t} slope {slope:.6}, dominant exponent {predicted:.6}", describe(&params)),
                    );
                }
                let tested: Vec<_> = separations.iter().filter(|(lambda, ..)| *lambda >= SEPARATION_FROM).collect();
                let failures: Vec<String> = tested
                    .iter()
                    .filter(|(_, _, m, floor)| *m < SEPARATION_FRACTION * floor)
                    .map(|(lambda, t, m, floor)| format!("lambda={lambda} t={t}: {m:.6e} < {:.6e}", SEPARATION_FRACTION * floor))
                    .collect();
                ctx.report.check(
                    format!("exact separation >= {SEPARATION_FRACTION} (sin t - lambda^(-delta-1) - lambda^(delta-1) - d2) for lambda >= {SEPARATION_FROM}"),
                    !tested.is_empty() && failures.is_empty(),
                    if failures.is_empty() {
                        format!("{} {} cases", describe(&params), tested.len())
                    } else {
                        failures.join("; ")
                    },
                );
            }
        }
    }
    Ok(())
}
