use nudlab_core::euler::{solve, SolverConfig};
use nudlab_core::families::{exact_family_2d, exact_family_3d, family_difference_closed_form, FamilyParams};
use nudlab_core::lp::{Grid, VelocityField};
use nudlab_core::norms::{besov_norm_field, BesovParams};

use super::{describe, Context};
use crate::config::ExperimentConfig;
use crate::error::{LabError, LabResult};
use crate::report::Row;

const BOUND_FACTOR: f64 = 10.0;
const SLOPE_TOL: f64 = 0.05;
const SEPARATION_FRACTION: f64 = 0.5;
const SEPARATION_WINDOW: f64 = 128.0;
const CLOSED_FORM_TOL: f64 = 1e-12;
const SOLVER_TOL: f64 = 1e-6;
const SNAPSHOT_SPACING: f64 = 0.05;

fn norm_grid(cfg: &ExperimentConfig, n: f64, dim: usize) -> LabResult<Grid> {
    let needed = (4.0 * n).ceil() as usize;
    let points = match cfg.grid {
        Some(g) if g < needed => {
            return Err(LabError::Config(format!("grid {g} does not resolve n = {n}; need at least {needed}")))
        }
        Some(g) => g,
        None if dim == 3 => needed.max(16).next_power_of_two(),
        None => needed.max(256).next_power_of_two(),
    };
    Ok(Grid::torus(dim, points)?)
}

fn family(omega: f64, n: f64, s: f64, t: f64, grid: &Grid) -> LabResult<VelocityField> {
    let prm = FamilyParams::periodic(omega, n, s)?;
    Ok(if grid.dim() == 3 { exact_family_3d(&prm, t, grid)? } else { exact_family_2d(&prm, t, grid)? })
}

/// `u^{+1,n}(t) - u^{-1,n}(t)` from its closed form.
fn closed_difference(n: f64, s: f64, t: f64, grid: &Grid) -> LabResult<VelocityField> {
    if grid.dim() == 2 {
        return Ok(family_difference_closed_form(n, s, t, grid)?);
    }
    let amp = 2.0 * n.powf(-s) * t.sin();
    let u1 = grid.sample(|x| 2.0 / n + amp * (n * x[1]).sin());
    let u2 = grid.sample(|x| 2.0 / n + amp * (n * x[0]).sin());
    let u3 = grid.sample(|_| 0.0);
    Ok(VelocityField::new(vec![u1, u2, u3], true)?)
}

/// `2 n^{-s} ||(sin n x2, sin n x1)||`, the limit of `||difference(t)|| / sin t`.
fn asymptote(n: f64, prm: &BesovParams, grid: &Grid) -> LabResult<f64> {
    let mut comps = vec![grid.sample(|x| (n * x[1]).sin()), grid.sample(|x| (n * x[0]).sin())];
    if grid.dim() == 3 {
        comps.push(grid.sample(|_| 0.0));
    }
    let v = VelocityField::new(comps, true)?;
    Ok(2.0 * n.powf(-prm.s) * besov_norm_field(&v, prm)?)
}

pub(crate) fn nud_periodic(cfg: &ExperimentConfig, ctx: &mut Context) -> LabResult<()> {
    let dim = if cfg.three_d { 3 } else { 2 };
    let largest = cfg.freqs.iter().copied().fold(0.0, f64::max);
    let window = SEPARATION_WINDOW.min(largest);
    let mut times = vec![0.0];
    times.extend(cfg.times.iter().copied().filter(|t| *t > 0.0));
    for &s in &cfg.s {
        for &p in &cfg.p {
            for &q in &cfg.q {
                let prm = BesovParams::new(s, p, q)?;
                let base = [("s", s), ("p", p.value()), ("q", q.value())];
                let mut sup_all = 0.0f64;
                let mut sup_largest = 0.0f64;
                let mut initial = Vec::new();
                let mut closed_error = 0.0f64;
                let mut ratios: Vec<(f64, f64, f64)> = Vec::new();
                let mut limit = 0.0;
                for &n in &cfg.freqs {
                    let grid = norm_grid(cfg, n, dim)?;
                    for &t in &times {
                        let plus = family(1.0, n, s, t, &grid)?;
                        let minus = family(-1.0, n, s, t, &grid)?;
                        for (omega, u) in [(1.0, &plus), (-1.0, &minus)] {
                            let norm = besov_norm_field(u, &prm)?;
                            ctx.report.row(Row::new("norm", &[("n", n), ("t", t), ("omega", omega)], norm));
                            sup_all = sup_all.max(norm);
                            if n == largest {
                                sup_largest = sup_largest.max(norm);
                            }
                        }
                        let diff = plus.sub(&minus);
                        drop((plus, minus));
                        let closed = closed_difference(n, s, t, &grid)?;
                        closed_error = closed_error.max(diff.sub(&closed).max_abs());
                        let measured = besov_norm_field(&diff, &prm)?;
                        let predicted = besov_norm_field(&closed, &prm)?;
                        ctx.report.row(Row::new("difference", &[("n", n), ("t", t)], measured).predicted(predicted));
                        if t == 0.0 {
                            initial.push((n, measured));
                        } else {
                            ratios.push((n, t, measured / t.sin()));
                        }
                    }
                    if n == largest {
                        limit = asymptote(n, &prm, &grid)?;
                    }
                }
                ctx.report.row(Row::new("asymptote", &[("n", largest)], limit));
                for &(n, t, r) in &ratios {
                    ctx.report.row(Row::new("difference/sin t", &[("n", n), ("t", t)], r).predicted(limit).margin(r / limit));
                }

                let bound = BOUND_FACTOR * sup_largest;
                ctx.report.check(
                    format!("(i) sup of the family norms <= {BOUND_FACTOR} x the value at n = {largest}"),
                    sup_all <= bound,
                    format!("{} sup {sup_all:.6e}, bound {bound:.6e}", describe(&base)),
                );
                let slope = ctx.slope("difference at t=0", &base, &initial, -1.0, SLOPE_TOL)?;
                ctx.report.check(
                    format!("(ii) t = 0 difference slope within {SLOPE_TOL} of -1"),
                    (slope + 1.0).abs() <= SLOPE_TOL,
                    format!("{} slope {slope:.6}", describe(&base)),
                );
                ctx.report.check(
                    format!("closed form matches subtraction to {CLOSED_FORM_TOL:e}"),
                    closed_error <= CLOSED_FORM_TOL,
                    format!("{} max |error| {closed_error:e}", describe(&base)),
                );
                for &t in &times[1..] {
                    let worst = ratios
                        .iter()
                        .filter(|(n, tt, _)| *tt == t && *n >= window)
                        .map(|r| r.2)
                        .fold(f64::INFINITY, f64::min);
                    ctx.report.check(
                        format!("(iii) min over n >= {window} of difference / sin t >= {SEPARATION_FRACTION} x asymptote"),
                        worst >= SEPARATION_FRACTION * limit,
                        format!("{} t={t} min {worst:.6e}, asymptote {limit:.6e}", describe(&base)),
                    );
                }
            }
        }
    }
    solver_agreement(cfg, ctx, dim)
}

/// Evolves each family member with the Euler solver and compares with the
/// formula at the sampled times.
fn solver_agreement(cfg: &ExperimentConfig, ctx: &mut Context, dim: usize) -> LabResult<()> {
    let points = if dim == 3 { 32 } else { 256 };
    let grid = Grid::torus(dim, points)?;
    let dt = cfg.dt[0];
    let final_time = cfg.times.iter().copied().fold(0.0, f64::max);
    let s = cfg.s[0];
    let mut worst = 0.0f64;
    let mut checked = 0;
    for &n in cfg.freqs.iter().filter(|n| 4.0 * **n <= points as f64) {
        for omega in [1.0, -1.0] {
            let u0 = family(omega, n, s, 0.0, &grid)?;
            let errors: Vec<(f64, f64)> = if final_time > 0.0 {
                let solver = SolverConfig::for_grid(&grid, dt, final_time).with_snapshot_interval(SNAPSHOT_SPACING);
                let traj = ctx.timed(format!("solve n={n} omega={omega}"), || solve(&u0, &solver))?;
                if omega == 1.0 && n == cfg.freqs[0] {
                    ctx.snapshot(format!("periodic-n{n}-final"), final_time, traj.last());
                }
                cfg.times
                    .iter()
                    .map(|&t| Ok((t, traj.at(t)?.sub(&family(omega, n, s, t, &grid)?).max_abs())))
                    .collect::<LabResult<_>>()?
            } else {
                vec![(0.0, 0.0)]
            };
            for (t, err) in errors {
                ctx.report.row(
                    Row::new("solver error", &[("n", n), ("omega", omega), ("t", t)], err)
                        .predicted(0.0)
                        .pass(err < SOLVER_TOL),
                );
                worst = worst.max(err);
            }
            checked += 1;
        }
    }
    ctx.report.check(
        format!("solver matches the closed form to {SOLVER_TOL:e} (N = {points})"),
        checked > 0 && worst < SOLVER_TOL,
        format!("{checked} solves, max |error| {worst:e}"),
    );
    Ok(())
}
