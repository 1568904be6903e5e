use std::f64::consts::PI;

use nudlab_core::lp::{apply_block, DyadicPartition, Grid, GridFunction, Profile};
use nudlab_core::norms::{besov_norm_lp, BesovParams, Exponent};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{describe, symmetric, Context};
use crate::config::ExperimentConfig;
use crate::error::LabResult;
use crate::report::Row;

const UNITY_TOL: f64 = 1e-12;
const ORACLE_TOL: f64 = 1e-10;

pub(crate) fn partition_check(cfg: &ExperimentConfig, ctx: &mut Context) -> LabResult<()> {
    let profile = Profile::default();
    let blocks = 12;
    let part = nudlab_core::lp::build_partition(blocks, profile)?;
    let top = 2f64.powi(blocks as i32);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut unity = 0.0f64;
    let mut leak = 0.0f64;
    let mut overlap = 0.0f64;
    let mut rotation = 0.0f64;
    for i in 0..cfg.instances {
        let dim = 1 + i % 3;
        // log-uniform radius over [2^-4, 2^J], with the origin once
        let r = if i == 0 { 0.0 } else { 2f64.powf(rng.gen_range(-4.0..blocks as f64)) };
        let mut dir: Vec<f64> = (0..dim).map(|_| symmetric(&mut rng)).collect();
        let len = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
        dir.iter_mut().for_each(|x| *x *= r / len);
        let xi = dir;
        let values: Vec<f64> = (0..=blocks).map(|j| part.eval(j, &xi)).collect::<Result<_, _>>()?;
        if r <= top {
            unity = unity.max((values.iter().sum::<f64>() - 1.0).abs());
        }
        for (j, v) in values.iter().enumerate() {
            let (lo, hi) = if j == 0 { (0.0, 2.0) } else { (2f64.powi(j as i32 - 1), 2f64.powi(j as i32 + 1)) };
            if r < lo || r > hi {
                leak = leak.max(v.abs());
            }
            for w in values.iter().skip(j + 2) {
                overlap = overlap.max((v * w).abs());
            }
        }
        if dim >= 2 {
            let theta = rng.gen_range(0.0..2.0 * PI);
            let (c, s) = (theta.cos(), theta.sin());
            let mut rotated = xi.clone();
            rotated[0] = c * xi[0] - s * xi[1];
            rotated[1] = s * xi[0] + c * xi[1];
            for (j, v) in values.iter().enumerate() {
                rotation = rotation.max((part.eval(j, &rotated)? - v).abs());
            }
        }
    }
    let samples = cfg.instances as f64;
    for (name, value, tol) in [
        ("unity", unity, UNITY_TOL),
        ("support", leak, 0.0),
        ("orthogonality", overlap, 0.0),
        ("radiality", rotation, UNITY_TOL),
    ] {
        ctx.report.row(Row::new(name, &[("samples", samples)], value).predicted(0.0).pass(value <= tol));
        ctx.report.check(format!("{name} error <= {tol:e}"), value <= tol, format!("max error {value:e}"));
    }

    let n = cfg.grid.unwrap_or(64);
    let grid = Grid::torus(2, n)?;
    let f = random_field(&grid, n / 4, &mut rng);
    let cover = DyadicPartition::for_grid(&grid, profile);
    let spectrum = f.spectrum();
    let mut sum = GridFunction::zeros(grid);
    for j in 0..=cover.block_count() {
        sum = sum.add(&cover.apply_to_spectrum(&spectrum, j).to_function());
    }
    let recon = sum.sub(&f).max_abs() / f.max_abs();
    ctx.report.row(Row::new("reconstruction", &[("N", n as f64)], recon).predicted(0.0).pass(recon <= UNITY_TOL));
    ctx.report.check(
        format!("sum of blocks rebuilds f to {UNITY_TOL:e}"),
        recon <= UNITY_TOL,
        format!("relative max error {recon:e}"),
    );

    // a block whose annulus passes Nyquist must be refused
    let refused = apply_block(&f, &cover, cover.block_count()).is_err();
    ctx.report.check("unresolved block raises a resolution error", refused, String::new());
    Ok(())
}

/// A real trigonometric polynomial as `(mode, coefficient)` pairs.
pub(crate) type ModeSum = Vec<([i64; 2], Complex64)>;

pub(crate) fn real_mode(k: [i64; 2], amp: f64, phase: f64) -> ModeSum {
    let c = Complex64::from_polar(amp / 2.0, phase);
    vec![(k, c), ([-k[0], -k[1]], c.conj())]
}

fn test_functions(freqs: &[f64]) -> Vec<(String, ModeSum)> {
    let mut out = Vec::new();
    for &k in freqs {
        let k = k as i64;
        out.push((format!("cos({k}x1)"), real_mode([k, 0], 1.0, 0.0)));
        out.push((format!("sin({k}x2)"), real_mode([0, k], 1.0, -PI / 2.0)));
        out.push((format!("cos({k}x1+{k}x2)"), real_mode([k, k], 1.0, 0.0)));
    }
    let mut a = real_mode([3, 0], 1.0, 0.0);
    a.extend(real_mode([0, 11], 0.5, -PI / 2.0));
    a.extend(real_mode([16, 16], 0.25, 0.0));
    out.push(("cos(3x1)+sin(11x2)/2+cos(16x1+16x2)/4".into(), a));
    let mut b = real_mode([4, 0], 2.0, 0.0);
    b.extend(real_mode([0, 6], 1.0, PI));
    b.extend(real_mode([37, 3], 0.3, -PI / 2.0));
    out.push(("2cos(4x1)-cos(6x2)+0.3sin(37x1+3x2)".into(), b));
    out
}

/// Block `L^p` norms evaluated by summing the modes at every grid point.
pub(crate) fn oracle_blocks(grid: &Grid, modes: &ModeSum, part: &DyadicPartition, p: Exponent) -> Vec<f64> {
    let n = grid.points_per_axis();
    (0..=part.block_count())
        .map(|j| {
            let weights: Vec<Complex64> = modes
                .iter()
                .map(|(m, c)| c * part.radial_symbol(j, ((m[0] * m[0] + m[1] * m[1]) as f64).sqrt()))
                .collect();
            if weights.iter().all(|w| *w == Complex64::new(0.0, 0.0)) {
                return 0.0;
            }
            let mut acc = 0.0f64;
            for a in 0..n {
                for b in 0..n {
                    let (x1, x2) = (grid.coordinate(a), grid.coordinate(b));
                    let v: Complex64 = modes
                        .iter()
                        .zip(&weights)
                        .map(|((m, _), w)| w * Complex64::from_polar(1.0, m[0] as f64 * x1 + m[1] as f64 * x2))
                        .sum();
                    match p {
                        Exponent::Infinity => acc = acc.max(v.norm()),
                        Exponent::Finite(p) => acc += v.norm().powf(p),
                    }
                }
            }
            match p {
                Exponent::Infinity => acc,
                Exponent::Finite(p) => (acc / (n * n) as f64).powf(1.0 / p),
            }
        })
        .collect()
}

pub(crate) fn oracle_combine(blocks: &[f64], s: f64, q: Exponent) -> f64 {
    let terms = blocks.iter().enumerate().map(|(j, b)| 2f64.powf(s * j as f64) * b);
    match q {
        Exponent::Infinity => terms.fold(0.0, f64::max),
        Exponent::Finite(q) => terms.map(|t| t.powf(q)).sum::<f64>().powf(1.0 / q),
    }
}

pub(crate) fn norm_oracle(cfg: &ExperimentConfig, ctx: &mut Context) -> LabResult<()> {
    let n = cfg.grid.unwrap_or(256);
    let grid = Grid::torus(2, n)?;
    let part = DyadicPartition::for_grid(&grid, Profile::default());
    let mut worst = 0.0f64;
    for (index, (label, modes)) in test_functions(&cfg.freqs).into_iter().enumerate() {
        let f = grid.sample_complex(|x| {
            modes.iter().map(|(m, c)| c * Complex64::from_polar(1.0, m[0] as f64 * x[0] + m[1] as f64 * x[1])).sum()
        });
        for &p in &cfg.p {
            let oracle = oracle_blocks(&grid, &modes, &part, p);
            for &s in &cfg.s {
                for &q in &cfg.q {
                    let measured = besov_norm_lp(&f, &BesovParams::new(s, p, q)?, &part)?;
                    let expected = oracle_combine(&oracle, s, q);
                    let rel = (measured - expected).abs() / expected;
                    worst = worst.max(rel);
                    let params = [("function", index as f64), ("s", s), ("p", p.value()), ("q", q.value())];
                    ctx.report.row(
                        Row::new(format!("besov:{label}"), &params, measured)
                            .predicted(expected)
                            .margin(rel)
                            .pass(rel <= ORACLE_TOL),
                    );
                    if rel > ORACLE_TOL {
                        ctx.report.check(
                            format!("oracle agreement <= {ORACLE_TOL:e}"),
                            false,
                            format!("{label} {}: relative error {rel:e}", describe(&params[1..])),
                        );
                    }
                }
            }
        }
    }
    ctx.report.check(
        format!("block norms match direct summation to {ORACLE_TOL:e}"),
        worst <= ORACLE_TOL,
        format!("worst relative error {worst:e}"),
    );
    Ok(())
}

/// A real field with random coefficients on the modes `|m_i| <= band`,
/// decaying like `(1 + |m|^2)^-1`.
pub(crate) fn random_field(grid: &Grid, band: usize, rng: &mut ChaCha8Rng) -> GridFunction {
    let n = grid.points_per_axis();
    let dim = grid.dim();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (i, c) in coeffs.iter_mut().enumerate() {
        let idx = grid.multi_index(i);
        let m: Vec<i64> = idx[..dim].iter().map(|&a| grid.signed_mode(a)).collect();
        if m.iter().any(|x| x.unsigned_abs() as usize > band || x.unsigned_abs() as usize >= n / 2) {
            continue;
        }
        let r2: i64 = m.iter().map(|x| x * x).sum();
        let decay = 1.0 / (1.0 + r2 as f64);
        *c = Complex64::new(symmetric(rng), symmetric(rng)) * decay;
    }
    nudlab_core::lp::Spectrum::new(*grid, coeffs)
        .expect("coefficient count matches the grid")
        .to_function()
        .into_real()
}
