use nudlab_core::estimates::{fit_loglog_slope, rate_d1, rate_d2};
use nudlab_core::euler::{leray_project, nonlinear_term, transport_solve, SolverConfig, Trajectory};
use nudlab_core::families::{exact_family_2d, exact_family_time_derivative, FamilyParams};
use nudlab_core::lp::{Grid, VelocityField};
use nudlab_core::norms::{besov_norm, BesovParams, Exponent};

const TWO: Exponent = Exponent::Finite(2.0);

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn single_mode_besov_norms() {
    let grid = Grid::torus(2, 64).unwrap();
    // cos(4 x1) sits in block 2 alone: 2^{2*2} / sqrt(2)
    let f = grid.sample(|x| (4.0 * x[0]).cos());
    let v = besov_norm(&f, &BesovParams::new(2.0, TWO, TWO).unwrap()).unwrap();
    assert!(close(v, 8.0 * 2f64.sqrt(), 1e-13), "{v}");

    // cos(3 x1) splits evenly between blocks 1 and 2
    let f = grid.sample(|x| (3.0 * x[0]).cos());
    let v = besov_norm(&f, &BesovParams::new(1.0, TWO, TWO).unwrap()).unwrap();
    assert!(close(v, 1.581_138_830_084_189_7, 1e-13), "{v}");
    let v = besov_norm(&f, &BesovParams::new(1.0, Exponent::Infinity, Exponent::Infinity).unwrap()).unwrap();
    assert!(close(v, 2.0, 1e-13), "{v}");

    // cos(5 x2) meets the transition at r = 5/4
    let f = grid.sample(|x| (5.0 * x[1]).cos());
    let v = besov_norm(&f, &BesovParams::new(1.5, TWO, TWO).unwrap()).unwrap();
    assert!(close(v, 5.390_511_955_436_047, 1e-12), "{v}");
}

#[test]
fn closed_form_rates() {
    let d1 = rate_d1(8.0, 2.5, 1.25, 0.25).unwrap();
    assert!(close(d1, 0.042_048_179_860_834_19, 1e-14), "{d1}");
    let d2 = rate_d2(16.0, 2.5, 1.25, 0.25, 3.0).unwrap();
    assert!(close(d2, 0.755_745_214_055_157_4, 1e-14), "{d2}");
}

#[test]
fn fit_recovers_prefactor() {
    let pairs: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0, 16.0].iter().map(|&x| (x, 5.0 / x)).collect();
    let fit = fit_loglog_slope(&pairs).unwrap();
    assert!((fit.slope + 1.0).abs() < 1e-12);
    assert!((fit.intercept - 5f64.ln()).abs() < 1e-12);
}

#[test]
fn projection_removes_a_known_gradient() {
    let grid = Grid::torus(2, 32).unwrap();
    let shear = |x: [f64; 3]| [x[1].cos(), x[0].cos()];
    // grad(sin x1 sin x2) added to a divergence-free shear
    let u1 = grid.sample(|x| shear(x)[0] + x[0].cos() * x[1].sin());
    let u2 = grid.sample(|x| shear(x)[1] + x[0].sin() * x[1].cos());
    let u = VelocityField::new(vec![u1, u2], false).unwrap();
    let p = leray_project(&u);
    let want = VelocityField::new(vec![grid.sample(|x| shear(x)[0]), grid.sample(|x| shear(x)[1])], true).unwrap();
    assert!(p.sub(&want).max_abs() < 1e-13);
}

#[test]
fn nonlinear_term_is_the_time_derivative_of_the_shear_family() {
    let grid = Grid::torus(2, 64).unwrap();
    for (omega, n, t) in [(1.0, 4.0, 0.3), (-1.0, 8.0, 0.9)] {
        let prm = FamilyParams::periodic(omega, n, 2.0).unwrap();
        let u = exact_family_2d(&prm, t, &grid).unwrap();
        let du = exact_family_time_derivative(&prm, t, &grid).unwrap();
        let err = nonlinear_term(&u).sub(&du).max_abs();
        assert!(err < 1e-13, "omega={omega} n={n}: {err}");
    }
}

#[test]
fn constant_advection_translates() {
    let grid = Grid::torus(2, 32).unwrap();
    let (a, b) = (0.7, -0.4);
    let spacing = 0.01;
    let count = 21;
    let profile = |x: f64, y: f64| (x.sin() + (2.0 * y).cos(), (x + y).cos());
    let field = |t: f64| {
        let c1 = grid.sample(|x| profile(x[0] - a * t, x[1] - b * t).0);
        let c2 = grid.sample(|x| profile(x[0] - a * t, x[1] - b * t).1);
        VelocityField::new(vec![c1, c2], false).unwrap()
    };
    let mu = VelocityField::new(vec![grid.sample(|_| a), grid.sample(|_| b)], true).unwrap();
    let times = |f: &dyn Fn(f64) -> VelocityField| {
        Trajectory::new((0..count).map(|i| (i as f64 * spacing, f(i as f64 * spacing))).collect()).unwrap()
    };
    let advector = times(&|_| mu.clone());
    let forcing = times(&|_| VelocityField::zeros(grid));
    let cfg = SolverConfig::for_grid(&grid, 2.0 * spacing, 0.2);
    let out = transport_solve(&advector, &forcing, &field(0.0), &cfg).unwrap();
    let (t, last) = out.snapshots().last().unwrap();
    assert!((t - 0.2).abs() < 1e-12);
    assert!(last.sub(&field(*t)).max_abs() < 1e-8);
}
