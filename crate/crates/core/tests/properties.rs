use nudlab_core::estimates::fit_loglog_slope;
use nudlab_core::euler::{divergence, leray_project};
use nudlab_core::families::{
    exact_family_2d, family_difference_closed_form, high_freq_field, low_freq_initial, FamilyParams, Plateau,
};
use nudlab_core::lp::{apply_block, build_partition, DyadicPartition, Grid, GridFunction, Profile, Spectrum, VelocityField};
use nudlab_core::norms::{
    besov_norm, besov_norm_diff, besov_norm_field, iterated_difference, BesovParams, DifferenceMode,
    DifferenceNormParams, Exponent,
};
use num_complex::Complex64;
use proptest::prelude::*;

const TWO: Exponent = Exponent::Finite(2.0);

/// A real field on the modes `|m_i| <= band` from a seed-driven coefficient list.
fn band_limited(grid: &Grid, band: i64, coeffs: &[f64]) -> GridFunction {
    let mut spectrum = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut next = coeffs.iter().cycle();
    for (i, c) in spectrum.iter_mut().enumerate() {
        let idx = grid.multi_index(i);
        let m: Vec<i64> = idx[..grid.dim()].iter().map(|&a| grid.signed_mode(a)).collect();
        if m.iter().all(|x| x.abs() <= band) {
            let r2: i64 = m.iter().map(|x| x * x).sum();
            *c = Complex64::new(*next.next().unwrap(), *next.next().unwrap()) / (1.0 + r2 as f64);
        }
    }
    Spectrum::new(*grid, spectrum).unwrap().to_function().into_real()
}

fn coeff_list() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 7..23)
}

fn exponent() -> impl Strategy<Value = Exponent> {
    prop_oneof![Just(Exponent::Infinity), (1.0f64..6.0).prop_map(Exponent::Finite)]
}

fn point(dim: usize, radius: f64, angles: &[f64]) -> Vec<f64> {
    match dim {
        1 => vec![radius],
        2 => vec![radius * angles[0].cos(), radius * angles[0].sin()],
        _ => vec![
            radius * angles[1].sin() * angles[0].cos(),
            radius * angles[1].sin() * angles[0].sin(),
            radius * angles[1].cos(),
        ],
    }
}

fn rotate(xi: &[f64], theta: f64, phi: f64) -> Vec<f64> {
    let (c, s) = (theta.cos(), theta.sin());
    let mut out = xi.to_vec();
    out[0] = c * xi[0] - s * xi[1];
    out[1] = s * xi[0] + c * xi[1];
    if xi.len() == 3 {
        let (c, s) = (phi.cos(), phi.sin());
        let (y, z) = (out[1], out[2]);
        out[1] = c * y - s * z;
        out[2] = s * y + c * z;
    }
    out
}

proptest! {
    #[test]
    fn partition_of_unity(dim in 1usize..=3, log_r in -6.0f64..9.0, a in 0.0f64..6.3, b in 0.0f64..3.1) {
        let part = build_partition(10, Profile::default()).unwrap();
        let xi = point(dim, 2f64.powf(log_r), &[a, b]);
        let sum: f64 = (0..=10).map(|j| part.eval(j, &xi).unwrap()).sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distant_blocks_never_overlap(r in 0.0f64..2048.0, j in 0usize..=10, gap in 2usize..=10) {
        let part = build_partition(10, Profile::default()).unwrap();
        let k = j + gap;
        prop_assume!(k <= 10);
        prop_assert_eq!(part.radial_symbol(j, r) * part.radial_symbol(k, r), 0.0);
    }

    #[test]
    fn symbols_are_radial(dim in 2usize..=3, log_r in -3.0f64..9.0, a in 0.0f64..6.3, b in 0.0f64..3.1,
                          theta in 0.0f64..6.3, phi in 0.0f64..6.3) {
        let part = build_partition(10, Profile::default()).unwrap();
        let xi = point(dim, 2f64.powf(log_r), &[a, b]);
        let turned = rotate(&xi, theta, phi);
        for j in 0..=10 {
            prop_assert!((part.eval(j, &xi).unwrap() - part.eval(j, &turned).unwrap()).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn blocks_rebuild_band_limited_fields(coeffs in coeff_list(), band in 1i64..8) {
        let grid = Grid::torus(2, 32).unwrap();
        let f = band_limited(&grid, band, &coeffs);
        let part = DyadicPartition::for_grid(&grid, Profile::default());
        let spectrum = f.spectrum();
        let mut sum = GridFunction::zeros(grid);
        for j in 0..=part.block_count() {
            sum = sum.add(&part.apply_to_spectrum(&spectrum, j).to_function());
        }
        if band <= 5 {
            let checked = (0..=3).try_fold(GridFunction::zeros(grid), |acc, j| apply_block(&f, &part, j).map(|b| acc.add(&b)));
            prop_assert!(checked.unwrap().sub(&f).max_abs() <= 1e-10 * f.max_abs().max(1.0));
        }
        prop_assert!(sum.sub(&f).max_abs() <= 1e-10 * f.max_abs().max(1.0));
    }

    #[test]
    fn larger_q_gives_smaller_norms(coeffs in coeff_list(), band in 1i64..12, s in -1.0f64..3.0,
                                    p in exponent(), q1 in 1.0f64..8.0, dq in 0.0f64..8.0) {
        let grid = Grid::torus(2, 32).unwrap();
        let f = band_limited(&grid, band, &coeffs);
        let small_q = besov_norm(&f, &BesovParams::new(s, p, Exponent::Finite(q1)).unwrap()).unwrap();
        let large_q = besov_norm(&f, &BesovParams::new(s, p, Exponent::Finite(q1 + dq)).unwrap()).unwrap();
        let sup_q = besov_norm(&f, &BesovParams::new(s, p, Exponent::Infinity).unwrap()).unwrap();
        prop_assert!(large_q <= small_q + 1e-12 * small_q.max(1.0));
        prop_assert!(sup_q <= large_q + 1e-12 * large_q.max(1.0));
    }

    #[test]
    fn besov_22_is_comparable_to_sobolev(coeffs in coeff_list(), band in 1i64..12, s in 0.0f64..2.0) {
        let grid = Grid::torus(2, 32).unwrap();
        let f = band_limited(&grid, band, &coeffs);
        let besov = besov_norm(&f, &BesovParams::new(s, TWO, TWO).unwrap()).unwrap();
        let table = grid.wavenumbers();
        let spectrum = f.spectrum();
        let mut sum = 0.0;
        grid.for_each_mode(&table, |i, k| {
            let weight = (1.0 + k[0] * k[0] + k[1] * k[1]).powf(s);
            sum += weight * spectrum.coeffs()[i].norm_sqr();
        });
        let ratio = besov / sum.sqrt();
        prop_assert!((0.25..=4.0).contains(&ratio), "ratio {}", ratio);
    }

    #[test]
    fn projection_never_increases_besov_norms(a in coeff_list(), b in coeff_list(), band in 1i64..10,
                                              high in any::<bool>()) {
        let grid = Grid::torus(2, 32).unwrap();
        let u = VelocityField::new(vec![band_limited(&grid, band, &a), band_limited(&grid, band, &b)], false).unwrap();
        let s = if high { 2.5 } else { 1.5 };
        let prm = BesovParams::new(s, TWO, TWO).unwrap();
        let before = besov_norm_field(&u, &prm).unwrap();
        let after = besov_norm_field(&leray_project(&u), &prm).unwrap();
        prop_assert!(after <= before * (1.0 + 1e-12));
    }

    #[test]
    fn differences_commute_with_dilation(k in 1usize..6, m in 1usize..5, c_log in 1u32..3, shift in -3.0f64..3.0) {
        let c = 2f64.powi(c_log as i32);
        let bump = Plateau::new(1.0, 2.0).unwrap();
        let shape = |x: f64| bump.value(x - 0.1 * shift) * (3.0 * x).cos();
        let small = Grid::centered_box(1, 256, 16.0).unwrap();
        let large = Grid::centered_box(1, 256, 16.0 * c).unwrap();
        let f = small.sample(|x| shape(x[0]));
        let g = large.sample(|x| shape(x[0] / c));
        let h = k as f64 * large.spacing();
        let lhs = iterated_difference(&g, &[h], m, DifferenceMode::Grid).unwrap();
        let rhs = iterated_difference(&f, &[h / c], m, DifferenceMode::Grid).unwrap();
        for (a, b) in lhs.samples().iter().zip(rhs.samples()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn recursive_and_binomial_differences_agree(coeffs in coeff_list(), k in -5i64..6, m in 1usize..5) {
        prop_assume!(k != 0);
        let grid = Grid::torus(1, 64).unwrap();
        let f = band_limited(&grid, 20, &coeffs);
        let h = [k as f64 * grid.spacing()];
        let direct = iterated_difference(&f, &h, m + 1, DifferenceMode::Grid).unwrap();
        let inner = iterated_difference(&f, &h, m, DifferenceMode::Grid).unwrap();
        let nested = iterated_difference(&inner, &h, 1, DifferenceMode::Grid).unwrap();
        prop_assert!(direct.sub(&nested).max_abs() < 1e-12 * f.max_abs().max(1.0) * 2f64.powi(m as i32 + 1));
    }

    #[test]
    fn shear_family_is_divergence_free(n in 1u32..8, t in 0.0f64..1.0, s in 0.5f64..3.0, plus in any::<bool>()) {
        let grid = Grid::torus(2, 64).unwrap();
        let omega = if plus { 1.0 } else { -1.0 };
        let n = 2.0 * n as f64;
        let u = exact_family_2d(&FamilyParams::periodic(omega, n, s).unwrap(), t, &grid).unwrap();
        prop_assert!(divergence(&u).max_abs() < 1e-10);
        let minus = exact_family_2d(&FamilyParams::periodic(-1.0, n, s).unwrap(), t, &grid).unwrap();
        let pos = exact_family_2d(&FamilyParams::periodic(1.0, n, s).unwrap(), t, &grid).unwrap();
        let closed = family_difference_closed_form(n, s, t, &grid).unwrap();
        prop_assert!(pos.sub(&minus).sub(&closed).max_abs() < 1e-13);
    }

    #[test]
    fn pure_power_laws_fit_exactly(slope in -4.0f64..4.0, log_c in -5.0f64..5.0, count in 4usize..10) {
        let c = log_c.exp();
        let pairs: Vec<(f64, f64)> = (0..count).map(|i| {
            let x = 2f64.powi(i as i32 + 1);
            (x, c * x.powf(slope))
        }).collect();
        let fit = fit_loglog_slope(&pairs).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-12);
        prop_assert!(fit.max_relative_residual < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn localized_fields_are_divergence_free(t in 0.0f64..1.0, plus in any::<bool>(), delta in 0.1f64..0.45) {
        let omega = if plus { 1.0 } else { -1.0 };
        let prm = FamilyParams::nonperiodic(omega, 4.0, 2.5, delta).unwrap();
        let side = nudlab_core::families::box_side(&prm);
        let grid = Grid::centered_box(2, 256, side).unwrap();
        for u in [high_freq_field(&prm, t, &grid).unwrap(), low_freq_initial(&prm, &grid).unwrap()] {
            prop_assert!(divergence(&u).max_abs() < 1e-10);
        }
    }
}

/// Smooth compactly supported test functions for comparing the two norm routes.
fn corpus() -> Vec<Box<dyn Fn(f64) -> f64>> {
    let bump = Plateau::new(1.0, 2.0).unwrap();
    let wide = Plateau::new(0.5, 2.5).unwrap();
    let mut out: Vec<Box<dyn Fn(f64) -> f64>> = Vec::new();
    for k in 0..5 {
        let freq = k as f64;
        out.push(Box::new(move |x| bump.value(x) * (freq * x).cos()));
        out.push(Box::new(move |x| wide.value(x) * (freq * x + 0.4).sin()));
    }
    for k in 1..6 {
        let a = 0.3 * k as f64;
        out.push(Box::new(move |x| bump.value(x - a) * (1.0 + x * x).recip()));
        out.push(Box::new(move |x| wide.value(1.2 * x) * (a * x).cos() * x));
    }
    out
}

#[test]
fn block_and_difference_norms_are_equivalent() {
    let grid = Grid::centered_box(1, 2048, 32.0).unwrap();
    for sigma in [0.5, 1.5] {
        for (i, f) in corpus().iter().enumerate() {
            let mut ratios = Vec::new();
            for c in [1.0, 1.5, 2.0] {
                let sampled = grid.sample(|x| f(x[0] / c));
                let lp = besov_norm(&sampled, &BesovParams::new(sigma, TWO, TWO).unwrap()).unwrap();
                let diff = besov_norm_diff(&sampled, &DifferenceNormParams::new(sigma, TWO, TWO).unwrap()).unwrap();
                let ratio = lp / diff;
                assert!((0.1..=10.0).contains(&ratio), "function {i}, sigma {sigma}, scale {c}: ratio {ratio}");
                ratios.push(ratio);
            }
            let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
            let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / ratios.len() as f64;
            assert!(var.sqrt() / mean < 0.5, "function {i}: ratios {ratios:?}");
        }
    }
}
