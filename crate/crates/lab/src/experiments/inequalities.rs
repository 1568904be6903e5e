use nudlab_core::estimates::{
    algebra_sides, fit_constant, interpolation_sides, moser_sides, InequalityMargin, MoserSplit, Sides,
};
use nudlab_core::lp::{DyadicPartition, Grid, Profile};
use nudlab_core::norms::{BesovParams, Exponent};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::littlewood_paley::{oracle_blocks, oracle_combine, random_field, real_mode, ModeSum};
use super::{describe, Context};
use crate::config::ExperimentConfig;
use crate::error::LabResult;
use crate::report::Row;

const CONSTANT_BUDGET: f64 = 100.0;
const ORACLE_TOL: f64 = 1e-10;
const INTERPOLATION_SPREAD: f64 = 0.5;
const THETA: f64 = 0.5;
const ORACLE_MODE: i64 = 4;
const ORACLE_S: f64 = 2.0;

/// Records the corpus constant and the margin of every instance under it.
fn record(ctx: &mut Context, name: &str, params: &[(&str, f64)], sides: &[Sides]) {
    let constant = fit_constant(sides);
    let mut worst = f64::INFINITY;
    for (i, side) in sides.iter().enumerate() {
        let m = InequalityMargin::new(side.left, side.right_unit, constant);
        ctx.report.row(
            Row::new(format!("{name} left"), &[params, &[("instance", i as f64)]].concat(), m.left)
                .predicted(m.right)
                .margin(m.margin)
                .pass(m.pass),
        );
        worst = worst.min(m.margin);
    }
    ctx.report.row(Row::new(format!("{name} constant"), params, constant).predicted(CONSTANT_BUDGET));
    ctx.report.check(
        format!("{name}: one constant <= {CONSTANT_BUDGET} with margin >= 1 on the corpus"),
        constant <= CONSTANT_BUDGET && worst >= 1.0 - 1e-12,
        format!("{} constant {constant:.6}, min margin {worst:.6}", describe(params)),
    );
}

fn product(a: &ModeSum, b: &ModeSum) -> ModeSum {
    let mut out: ModeSum = Vec::new();
    for (ka, ca) in a {
        for (kb, cb) in b {
            let k = [ka[0] + kb[0], ka[1] + kb[1]];
            match out.iter_mut().find(|(m, _)| *m == k) {
                Some((_, c)) => *c += ca * cb,
                None => out.push((k, ca * cb)),
            }
        }
    }
    out
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// The single-mode cases with both sides summed mode by mode.
fn oracle_cases(ctx: &mut Context, grid: &Grid, part: &DyadicPartition, q: Exponent) -> LabResult<()> {
    let two = Exponent::Finite(2.0);
    let modes = real_mode([ORACLE_MODE, 0], 1.0, 0.0);
    let f = grid.sample_complex(|x| {
        modes.iter().map(|(m, c)| c * Complex64::from_polar(1.0, m[0] as f64 * x[0] + m[1] as f64 * x[1])).sum()
    });
    let oracle = |m: &ModeSum, s: f64| oracle_combine(&oracle_blocks(grid, m, part, two), s, q);
    let square = product(&modes, &modes);
    let (norm_f, norm_ff) = (oracle(&modes, ORACLE_S), oracle(&square, ORACLE_S));
    // sup |cos| = 1 is attained on the grid
    let cases = [
        ("moser", moser_sides(&f, &f, ORACLE_S, q, &MoserSplit::sup_l2(), part)?, norm_ff, 2.0 * norm_f),
        ("algebra", algebra_sides(&f, &f, &BesovParams::new(ORACLE_S, two, q)?, part)?, norm_ff, norm_f * norm_f),
        (
            "interpolation",
            interpolation_sides(
                &f,
                ORACLE_S + INTERPOLATION_SPREAD,
                ORACLE_S - INTERPOLATION_SPREAD,
                THETA,
                two,
                q,
                part,
            )?,
            norm_f,
            oracle(&modes, ORACLE_S + INTERPOLATION_SPREAD).powf(THETA)
                * oracle(&modes, ORACLE_S - INTERPOLATION_SPREAD).powf(1.0 - THETA),
        ),
    ];
    let mut worst = 0.0f64;
    for (name, sides, left, right) in cases {
        let params = [("mode", ORACLE_MODE as f64), ("s", ORACLE_S), ("q", q.value())];
        let (el, er) = (relative(sides.left, left), relative(sides.right_unit, right));
        ctx.report.row(Row::new(format!("{name} oracle left"), &params, sides.left).predicted(left).margin(el).pass(el <= ORACLE_TOL));
        ctx.report.row(
            Row::new(format!("{name} oracle right"), &params, sides.right_unit).predicted(right).margin(er).pass(er <= ORACLE_TOL),
        );
        worst = worst.max(el).max(er);
    }
    ctx.report.check(
        format!("single-mode cases match direct summation to {ORACLE_TOL:e}"),
        worst <= ORACLE_TOL,
        format!("worst relative error {worst:e}"),
    );
    Ok(())
}

pub(crate) fn inequality_suite(cfg: &ExperimentConfig, ctx: &mut Context) -> LabResult<()> {
    let grid = Grid::torus(2, cfg.grid.unwrap_or(64))?;
    let part = DyadicPartition::for_grid(&grid, Profile::default());
    let two = Exponent::Finite(2.0);
    let max_band = grid.points_per_axis() / 4;
    for &q in &cfg.q {
        for &s in &cfg.s {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let corpus: Vec<_> = (0..cfg.instances)
                .map(|_| {
                    let (bf, bg) = (rng.gen_range(1..=max_band), rng.gen_range(1..=max_band));
                    (random_field(&grid, bf, &mut rng), random_field(&grid, bg, &mut rng))
                })
                .collect();
            let params = [("s", s), ("q", q.value())];
            let moser = corpus
                .iter()
                .map(|(f, g)| moser_sides(f, g, s, q, &MoserSplit::sup_l2(), &part))
                .collect::<Result<Vec<_>, _>>()?;
            record(ctx, "moser", &params, &moser);
            let prm = BesovParams::new(s, two, q)?;
            let algebra = corpus.iter().map(|(f, g)| algebra_sides(f, g, &prm, &part)).collect::<Result<Vec<_>, _>>()?;
            record(ctx, "algebra", &params, &algebra);
            let interpolation = corpus
                .iter()
                .map(|(f, _)| interpolation_sides(f, s + INTERPOLATION_SPREAD, s - INTERPOLATION_SPREAD, THETA, two, q, &part))
                .collect::<Result<Vec<_>, _>>()?;
            record(ctx, "interpolation", &params, &interpolation);
        }
        oracle_cases(ctx, &grid, &part, q)?;
    }
    Ok(())
}
