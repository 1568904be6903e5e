use std::f64::consts::PI;

use nudlab_core::estimates::check_two_sided;
use nudlab_core::families::{exact_family_2d, FamilyParams, Plateau};
use nudlab_core::lp::{Grid, GridFunction};
use nudlab_core::norms::{besov_norm, besov_norm_diff, holder_quotient_sup, BesovParams, DifferenceNormParams, Exponent};

use super::{describe, Context};
use crate::config::ExperimentConfig;
use crate::error::{LabError, LabResult};
use crate::report::Row;

const PERIODIC_SLOPE_TOL: f64 = 0.05;
const BOX_SLOPE_TOL: f64 = 0.1;
const TWO_SIDED_BUDGET: f64 = 10.0;
/// Side of the box standing in for the line.
const LINE_BOX: f64 = 16.0 * PI;
const PHASE: f64 = 0.3;
const HOLDER_SLACK: f64 = 1.01;
const HOLDER_FLOOR: f64 = 1e-3;

fn resolved_grid(cfg: &ExperimentConfig, needed: usize) -> LabResult<usize> {
    match cfg.grid {
        Some(n) if n < needed => Err(LabError::Config(format!("grid {n} is below the required {needed} points"))),
        Some(n) => Ok(n),
        None => Ok(needed.next_power_of_two()),
    }
}

pub(crate) fn periodic_modes(cfg: &ExperimentConfig, ctx: &mut Context) -> LabResult<()> {
    let kinds: [(&str, fn(f64) -> f64); 2] = [("cos", f64::cos), ("sin", f64::sin)];
    for (kind_index, (kind, wave)) in kinds.iter().enumerate() {
        for &s in &cfg.s {
            for &p in &cfg.p {
                for &q in &cfg.q {
                    let prm = BesovParams::new(s, p, q)?;
                    let mut pairs = Vec::new();
                    for &n in &cfg.freqs {
                        let grid = Grid::torus(1, resolved_grid(cfg, (4.0 * n) as usize)?.max(64))?;
                        let f = grid.sample(|x| wave(n * x[0]));
                        let norm = besov_norm(&f, &prm)?;
                        let params = [("kind", kind_index as f64), ("s", s), ("p", p.value()), ("q", q.value()), ("n", n)];
                        ctx.report.row(Row::new(format!("norm:{kind}"), &params, norm).predicted(n.powf(s)));
                        pairs.push((n, norm));
                    }
                    let params = [("kind", kind_index as f64), ("s", s), ("p", p.value()), ("q", q.value())];
                    let slope = ctx.slope(&format!("norm:{kind}"), &params, &pairs, s, PERIODIC_SLOPE_TOL)?;
                    ctx.report.check(
                        format!("{kind} norm slope within {PERIODIC_SLOPE_TOL} of s"),
                        (slope - s).abs() <= PERIODIC_SLOPE_TOL,
                        format!("{} slope {slope:.6}", describe(&params[1..])),
                    );
                    let scaled: Vec<f64> = pairs.iter().map(|(n, v)| v / n.powf(s)).collect();
                    let two = check_two_sided(&scaled, TWO_SIDED_BUDGET)?;
                    ctx.report.check(
                        format!("{kind} norm / n^s two-sided with C = {TWO_SIDED_BUDGET}"),
                        two.pass,
                        format!("{} range [{:.6e}, {:.6e}]", describe(&params[1..]), two.min, two.max),
                    );
                }
            }
        }
    }
    Ok(())
}

/// The two routes to a Besov norm on the box: dyadic blocks and differences.
fn both_routes(f: &GridFunction, sigma: f64, q: Exponent) -> LabResult<[(&'static str, f64); 2]> {
    let two = Exponent::Finite(2.0);
    let lp = besov_norm(f, &BesovParams::new(sigma, two, q)?)?;
    let diff = besov_norm_diff(f, &DifferenceNormParams::new(sigma, two, q)?)?;
    Ok([("blocks", lp), ("differences", diff)])
}

pub(crate) fn dilated_bumps(cfg: &ExperimentConfig, ctx: &mut Context) -> LabResult<()> {
    let n = cfg.grid.unwrap_or(32768);
    let grid = Grid::centered_box(1, n, LINE_BOX)?;
    let bump = Plateau::new(1.0, 2.0)?;
    let waves: [(&str, fn(f64) -> f64); 2] = [("cos", f64::cos), ("sin", f64::sin)];
    for &delta in &cfg.delta {
        for &sigma in &cfg.sigma {
            for &q in &cfg.q {
                let mut plain: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
                let mut modulated: [[Vec<(f64, f64)>; 2]; 2] = Default::default();
                for &lam in &cfg.freqs {
                    let scale = lam.powf(delta);
                    let f = grid.sample(|x| bump.value(x[0] / scale));
                    let params = [("delta", delta), ("sigma", sigma), ("q", q.value()), ("lambda", lam)];
                    for (r, (route, value)) in both_routes(&f, sigma, q)?.into_iter().enumerate() {
                        let ratio = value / lam.powf(delta / 2.0);
                        ctx.report.row(Row::new(format!("dilated:{route}"), &params, value).predicted(lam.powf(delta / 2.0)).margin(ratio));
                        plain[r].push(ratio);
                    }
                    for (w, (kind, wave)) in waves.iter().enumerate() {
                        let g = grid.sample(|x| bump.value(x[0] / scale) * wave(lam * x[0] - PHASE));
                        for (r, (route, value)) in both_routes(&g, sigma, q)?.into_iter().enumerate() {
                            let predicted = lam.powf(sigma + delta / 2.0);
                            ctx.report.row(Row::new(format!("modulated-{kind}:{route}"), &params, value).predicted(predicted));
                            modulated[w][r].push((lam, value));
                        }
                    }
                }
                let params = [("delta", delta), ("sigma", sigma), ("q", q.value())];
                for (r, route) in ["blocks", "differences"].into_iter().enumerate() {
                    let two = check_two_sided(&plain[r], TWO_SIDED_BUDGET)?;
                    ctx.report.check(
                        format!("dilated bump / lambda^(delta/2) two-sided with C = {TWO_SIDED_BUDGET} ({route})"),
                        two.pass,
                        format!("{} range [{:.6e}, {:.6e}]", describe(&params), two.min, two.max),
                    );
                    for (w, kind) in ["cos", "sin"].into_iter().enumerate() {
                        let predicted = sigma + delta / 2.0;
                        let quantity = format!("modulated-{kind}:{route}");
                        let slope = ctx.slope(&quantity, &params, &modulated[w][r], predicted, BOX_SLOPE_TOL)?;
                        ctx.report.check(
                            format!("modulated bump slope within {BOX_SLOPE_TOL} of sigma + delta/2 ({kind}, {route})"),
                            (slope - predicted).abs() <= BOX_SLOPE_TOL,
                            format!("{} slope {slope:.6} vs {predicted}", describe(&params)),
                        );
                    }
                }
            }
        }
    }
    Ok(())
}

pub(crate) fn holder_vanishing(cfg: &ExperimentConfig, ctx: &mut Context) -> LabResult<()> {
    let n_grid = cfg.grid.unwrap_or(256);
    let grid = Grid::torus(2, n_grid)?;
    let dx = grid.spacing();
    let mut windows = Vec::new();
    let mut h = dx;
    while h <= 1.0 {
        windows.push(h);
        h *= 2.0;
    }
    for &n in &cfg.freqs {
        if 4.0 * n > n_grid as f64 {
            return Err(LabError::Config(format!("grid {n_grid} does not resolve n = {n}")));
        }
        for &sigma in &cfg.sigma {
            let mut worst_ratio = 0.0f64;
            let mut finest = 0.0f64;
            let mut monotone = true;
            for omega in [1.0, -1.0] {
                for &t in &cfg.times {
                    let u = exact_family_2d(&FamilyParams::periodic(omega, n, 1.0 + sigma)?, t, &grid)?;
                    let mut previous = 0.0f64;
                    for &h in &windows {
                        let measured = holder_quotient_sup(&u, sigma, h)?;
                        let bound = (n * h).powf(1.0 - sigma);
                        let params = [("n", n), ("sigma", sigma), ("omega", omega), ("t", t), ("h", h)];
                        ctx.report.row(
                            Row::new("holder-quotient", &params, measured)
                                .predicted(bound)
                                .margin(bound / measured)
                                .pass(measured <= HOLDER_SLACK * bound),
                        );
                        worst_ratio = worst_ratio.max(measured / bound);
                        monotone &= measured >= previous;
                        previous = measured;
                        if h == dx {
                            finest = finest.max(measured);
                        }
                    }
                }
            }
            let params = [("n", n), ("sigma", sigma)];
            ctx.report.check(
                format!("quotient <= {HOLDER_SLACK} (n h)^(1-sigma)"),
                worst_ratio <= HOLDER_SLACK,
                format!("{} worst measured/bound {worst_ratio:.6}", describe(&params)),
            );
            ctx.report.check(
                "quotient shrinks with the window",
                monotone,
                describe(&params),
            );
            ctx.report.check(
                format!("quotient < {HOLDER_FLOOR:e} at the grid spacing"),
                finest < HOLDER_FLOOR,
                format!("{} quotient {finest:.6e} at h = {dx:.6e}; bound there {:.6e}", describe(&params), (n * dx).powf(1.0 - sigma)),
            );
        }
    }
    Ok(())
}
