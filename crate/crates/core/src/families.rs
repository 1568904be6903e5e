//! Explicit solution families: the exact periodic travelling waves, the
//! localized high/low frequency approximate solutions, and their residuals.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent f64 math shadows the trait when std is linked (tests)
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::euler::{leray_project, nonlinear_term, Trajectory};
use crate::lp::{Grid, GridFunction, VelocityField};
use crate::norms::{besov_norm_field, BesovParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyParams {
    /// Direction sign, `+1` or `-1`.
    pub omega: f64,
    /// The frequency `n` (periodic families) or `lambda` (localized ones).
    pub freq: f64,
    pub s: f64,
    pub delta: f64,
    pub sigma: f64,
}

impl FamilyParams {
    pub fn periodic(omega: f64, n: f64, s: f64) -> Result<Self> {
        let prm = Self { omega, freq: n, s, delta: 0.0, sigma: 0.0 };
        prm.check_common()?;
        Ok(prm)
    }

    pub fn nonperiodic(omega: f64, lambda: f64, s: f64, delta: f64) -> Result<Self> {
        let prm = Self { omega, freq: lambda, s, delta, sigma: 0.0 };
        prm.check_common()?;
        prm.check_delta()?;
        Ok(prm)
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    fn check_common(&self) -> Result<()> {
        if self.omega != 1.0 && self.omega != -1.0 {
            return Err(invalid!("omega must be +1 or -1, got {}", self.omega));
        }
        if !(self.freq >= 2.0 && self.freq.is_finite()) {
            return Err(invalid!("frequency {} must be at least 2", self.freq));
        }
        if !self.s.is_finite() {
            return Err(invalid!("smoothness {} must be finite", self.s));
        }
        Ok(())
    }

    fn check_delta(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid!("scale exponent delta = {} must lie in (0, 1)", self.delta));
        }
        Ok(())
    }

    /// The envelope scale `lambda^delta`.
    pub fn envelope(&self) -> f64 {
        self.freq.powf(self.delta)
    }
}

/// Smooth even plateau: 1 on `|x| <= inner`, 0 on `|x| >= outer`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plateau {
    inner: f64,
    outer: f64,
}

impl Plateau {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(inner >= 0.0 && outer > inner) {
            return Err(invalid!("plateau needs 0 <= inner < outer, got {inner}, {outer}"));
        }
        Ok(Self { inner, outer })
    }

    /// `ln(g(t) / g(1 - t))` for `g(x) = exp(-1/x)`.
    fn log_ratio(t: f64) -> f64 {
        1.0 / (1.0 - t) - 1.0 / t
    }

    /// The transition `h(t)` on `0 < t < 1`, decreasing from 1 to 0.
    fn step(t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        if t >= 1.0 {
            return 0.0;
        }
        let l = Self::log_ratio(t);
        if l > 700.0 {
            0.0
        } else if l < -700.0 {
            1.0
        } else {
            1.0 / (1.0 + l.exp())
        }
    }

    fn step_derivative(t: f64) -> f64 {
        if t <= 0.0 || t >= 1.0 {
            return 0.0;
        }
        let l = Self::log_ratio(t);
        if l.abs() > 700.0 {
            return 0.0;
        }
        let e = l.exp();
        -e / ((1.0 + e) * (1.0 + e)) * (1.0 / ((1.0 - t) * (1.0 - t)) + 1.0 / (t * t))
    }

    pub fn value(&self, x: f64) -> f64 {
        Self::step((x.abs() - self.inner) / (self.outer - self.inner))
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let w = self.outer - self.inner;
        let d = Self::step_derivative((x.abs() - self.inner) / w) / w;
        if x < 0.0 {
            -d
        } else {
            d
        }
    }

    pub fn support(&self) -> f64 {
        self.outer
    }
}

/// 10-point Gauss-Legendre nodes and weights on `[-1, 1]`.
const GAUSS_NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GAUSS_WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_4,
    0.219_086_362_515_982_0,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * width;
        let half = 0.5 * width;
        for (x, w) in GAUSS_NODES.iter().zip(GAUSS_WEIGHTS.iter()) {
            total += w * half * (f(mid - half * x) + f(mid + half * x));
        }
    }
    total
}

/// The localizing profiles of the approximate solutions.
///
/// `phi` is 1 on `[-1, 1]` and supported in `[-2, 2]`; `psi2` is 1 on
/// `[-2, 2]`; `psi1 = A chi` with `A(x) = int_0^x rho`, where `rho` is 1 on
/// `[-2, 2]` and `chi` is 1 on the support of `rho`, so `psi1' = 1` on
/// `[-2, 2]` and `psi1` is supported in `[-8, 8]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpSet {
    phi: Plateau,
    psi2: Plateau,
    rho: Plateau,
    chi: Plateau,
}

impl Default for BumpSet {
    fn default() -> Self {
        Self {
            phi: Plateau { inner: 1.0, outer: 2.0 },
            psi2: Plateau { inner: 2.0, outer: 6.0 },
            rho: Plateau { inner: 2.0, outer: 4.0 },
            chi: Plateau { inner: 4.0, outer: 8.0 },
        }
    }
}

impl BumpSet {
    pub fn phi(&self, x: f64) -> f64 {
        self.phi.value(x)
    }

    pub fn dphi(&self, x: f64) -> f64 {
        self.phi.derivative(x)
    }

    pub fn psi2(&self, x: f64) -> f64 {
        self.psi2.value(x)
    }

    pub fn dpsi2(&self, x: f64) -> f64 {
        self.psi2.derivative(x)
    }

    /// `A(x) = int_0^x rho`.
    fn antiderivative(&self, x: f64) -> f64 {
        let y = x.abs();
        let inner = self.rho.inner;
        let v = if y <= inner {
            y
        } else {
            let top = y.min(self.rho.outer);
            inner + integrate(|z| self.rho.value(z), inner, top, 16)
        };
        if x < 0.0 {
            -v
        } else {
            v
        }
    }

    pub fn psi1(&self, x: f64) -> f64 {
        if x.abs() >= self.chi.outer {
            return 0.0;
        }
        self.antiderivative(x) * self.chi.value(x)
    }

    pub fn dpsi1(&self, x: f64) -> f64 {
        if x.abs() >= self.chi.outer {
            return 0.0;
        }
        self.rho.value(x) * self.chi.value(x) + self.antiderivative(x) * self.chi.derivative(x)
    }

    /// Radius outside which every profile vanishes.
    pub fn support(&self) -> f64 {
        self.chi.outer.max(self.psi2.outer).max(self.phi.outer)
    }
}

fn require_dim(grid: &Grid, dim: usize) -> Result<()> {
    if grid.dim() != dim {
        return Err(invalid!("expected a {dim}-dimensional grid, got dimension {}", grid.dim()));
    }
    Ok(())
}

/// Checks that `cos(n x)` is periodic on the box and resolved with four
/// samples per wavelength.
fn check_periodic(prm: &FamilyParams, grid: &Grid) -> Result<()> {
    let cycles = prm.freq * grid.side() / (2.0 * PI);
    if (cycles - cycles.round()).abs() > 1e-9 * cycles.max(1.0) {
        return Err(invalid!("frequency {} is not periodic on a box of side {}", prm.freq, grid.side()));
    }
    let required = (4.0 * cycles).ceil() as usize;
    if grid.points_per_axis() < required {
        let required_n = required.next_power_of_two();
        return Err(Error::Resolution {
            reason: format!("frequency {} needs N >= {required_n}", prm.freq),
            required_n: Some(required_n),
        });
    }
    Ok(())
}

/// Per-axis sample vector of a one-variable function.
fn axis(grid: &Grid, f: impl Fn(f64) -> f64) -> Vec<f64> {
    (0..grid.points_per_axis()).map(|i| f(grid.coordinate(i))).collect()
}

/// A field whose samples are `f(a[i], b[j], c[l])` over the per-axis vectors.
fn tensor(grid: &Grid, f: impl Fn(usize, usize, usize) -> f64) -> GridFunction {
    let n = grid.points_per_axis();
    let samples: Vec<Complex64> = match grid.dim() {
        1 => (0..n).map(|i| Complex64::new(f(i, 0, 0), 0.0)).collect(),
        2 => (0..n * n).map(|x| Complex64::new(f(x / n, x % n, 0), 0.0)).collect(),
        _ => (0..n * n * n).map(|x| Complex64::new(f(x / (n * n), (x / n) % n, x % n), 0.0)).collect(),
    };
    GridFunction::new(*grid, samples).expect("sample count matches grid")
}

fn exact_components(prm: &FamilyParams, t: f64, grid: &Grid, derivative: bool) -> Result<Vec<GridFunction>> {
    prm.check_common()?;
    check_periodic(prm, grid)?;
    let (n, w) = (prm.freq, prm.omega);
    let amp = n.powf(-prm.s);
    let wave = axis(grid, |x| {
        if derivative {
            w * amp * (n * x - w * t).sin()
        } else {
            w / n + amp * (n * x - w * t).cos()
        }
    });
    let u1 = tensor(grid, |_, j, _| wave[j]);
    let u2 = tensor(grid, |i, _, _| wave[i]);
    Ok(vec![u1, u2])
}

/// `u^{w,n} = (w/n + n^{-s} cos(n x2 - w t), w/n + n^{-s} cos(n x1 - w t))`.
pub fn exact_family_2d(prm: &FamilyParams, t: f64, grid: &Grid) -> Result<VelocityField> {
    require_dim(grid, 2)?;
    VelocityField::new(exact_components(prm, t, grid, false)?, true)
}

/// `d/dt u^{w,n}`, evaluated analytically.
pub fn exact_family_time_derivative(prm: &FamilyParams, t: f64, grid: &Grid) -> Result<VelocityField> {
    let mut comps = exact_components(prm, t, grid, true)?;
    if grid.dim() == 3 {
        comps.push(GridFunction::zeros(*grid));
    } else {
        require_dim(grid, 2)?;
    }
    VelocityField::new(comps, true)
}

/// The three-dimensional family: the 2D field with a vanishing third component.
pub fn exact_family_3d(prm: &FamilyParams, t: f64, grid: &Grid) -> Result<VelocityField> {
    require_dim(grid, 3)?;
    let mut comps = exact_components(prm, t, grid, false)?;
    comps.push(GridFunction::zeros(*grid));
    VelocityField::new(comps, true)
}

/// `u^{+1,n}(t) - u^{-1,n}(t) = (2/n + 2 n^{-s} sin t sin(n x2), 2/n + 2 n^{-s} sin t sin(n x1))`.
pub fn family_difference_closed_form(n: f64, s: f64, t: f64, grid: &Grid) -> Result<VelocityField> {
    require_dim(grid, 2)?;
    let prm = FamilyParams::periodic(1.0, n, s)?;
    check_periodic(&prm, grid)?;
    let amp = 2.0 * n.powf(-s) * t.sin();
    let wave = axis(grid, |x| 2.0 / n + amp * (n * x).sin());
    let u1 = tensor(grid, |_, j, _| wave[j]);
    let u2 = tensor(grid, |i, _, _| wave[i]);
    VelocityField::new(vec![u1, u2], true)
}

/// Side `max(16 lambda^delta, 8 pi ceil(lambda^delta))` of the box standing in for the plane.
pub fn box_side(prm: &FamilyParams) -> f64 {
    let c = prm.envelope();
    (16.0 * c).max(8.0 * PI * c.ceil())
}

/// The box grid for a localized family: four samples per wavelength of
/// `lambda` and 64 per envelope length, unless `n` is given.
pub fn grid_for(prm: &FamilyParams, dim: usize, n: Option<usize>) -> Result<Grid> {
    prm.check_delta()?;
    let side = box_side(prm);
    let n = n.unwrap_or_else(|| {
        let wave = 4.0 * prm.freq * side / (2.0 * PI);
        let envelope = 64.0 * side / prm.envelope();
        (wave.max(envelope).ceil() as usize).next_power_of_two()
    });
    Grid::centered_box(dim, n, side)
}

fn check_box(prm: &FamilyParams, grid: &Grid, extent: f64, what: &str) -> Result<()> {
    prm.check_common()?;
    prm.check_delta()?;
    let need = 2.0 * extent * prm.envelope();
    if grid.side() < need {
        return Err(Error::DomainTruncation(format!(
            "{what} needs a box of side >= {need}, got {}",
            grid.side()
        )));
    }
    Ok(())
}

fn check_wave_resolution(prm: &FamilyParams, grid: &Grid) -> Result<()> {
    if grid.nyquist() < 2.0 * prm.freq {
        let required_n = ((4.0 * prm.freq * grid.side() / (2.0 * PI)).ceil() as usize).next_power_of_two();
        return Err(Error::Resolution {
            reason: format!("frequency {} needs N >= {required_n} on a box of side {}", prm.freq, grid.side()),
            required_n: Some(required_n),
        });
    }
    Ok(())
}

/// Analytic curl of the high frequency stream function
/// `A prod_i phi(x_i / c) sin(lambda x2 - w t)`, or of its time derivative.
fn high_freq_components(prm: &FamilyParams, t: f64, grid: &Grid, derivative: bool) -> Vec<GridFunction> {
    let bumps = BumpSet::default();
    let dim = grid.dim();
    let c = prm.envelope();
    let (lam, w) = (prm.freq, prm.omega);
    let amp = if dim == 3 {
        lam.powf(-1.5 * prm.delta - prm.s - 1.0)
    } else {
        lam.powf(-prm.delta - prm.s - 1.0)
    };
    let p = axis(grid, |x| bumps.phi(x / c));
    let dp = axis(grid, |x| bumps.dphi(x / c) / c);
    // sine and cosine factors, or their time derivatives
    let sn = axis(grid, |x| if derivative { -w * (lam * x - w * t).cos() } else { (lam * x - w * t).sin() });
    let cs = axis(grid, |x| if derivative { w * (lam * x - w * t).sin() } else { (lam * x - w * t).cos() });
    let third = |l: usize| if dim == 3 { p[l] } else { 1.0 };
    let u1 = tensor(grid, |i, j, l| amp * p[i] * third(l) * (dp[j] * sn[j] + p[j] * lam * cs[j]));
    let u2 = tensor(grid, |i, j, l| -amp * dp[i] * p[j] * third(l) * sn[j]);
    let mut comps = vec![u1, u2];
    if dim == 3 {
        comps.push(GridFunction::zeros(*grid));
    }
    comps
}

fn high_freq(prm: &FamilyParams, t: f64, grid: &Grid, derivative: bool) -> Result<VelocityField> {
    if grid.dim() < 2 {
        return Err(invalid!("localized families need dimension 2 or 3"));
    }
    check_box(prm, grid, 4.0, "the high frequency term")?;
    check_wave_resolution(prm, grid)?;
    let raw = VelocityField::new(high_freq_components(prm, t, grid, derivative), false)?;
    Ok(leray_project(&raw))
}

/// `u^h(t)`: analytic curl, then projected so the divergence vanishes to
/// rounding on the lattice.
pub fn high_freq_field(prm: &FamilyParams, t: f64, grid: &Grid) -> Result<VelocityField> {
    high_freq(prm, t, grid, false)
}

/// `d/dt u^h(t)`, evaluated analytically.
pub fn high_freq_time_derivative(prm: &FamilyParams, t: f64, grid: &Grid) -> Result<VelocityField> {
    high_freq(prm, t, grid, true)
}

/// `u^l(0)`: curl of `-w lambda^{delta-1} psi1(x1/c) psi2(x2/c) [psi3(x3/c)]`.
pub fn low_freq_initial(prm: &FamilyParams, grid: &Grid) -> Result<VelocityField> {
    if grid.dim() < 2 {
        return Err(invalid!("localized families need dimension 2 or 3"));
    }
    let bumps = BumpSet::default();
    check_box(prm, grid, bumps.support(), "the low frequency term")?;
    let dim = grid.dim();
    let c = prm.envelope();
    let amp = prm.omega / prm.freq;
    let p1 = axis(grid, |x| bumps.psi1(x / c));
    let dp1 = axis(grid, |x| bumps.dpsi1(x / c));
    let p2 = axis(grid, |x| bumps.psi2(x / c));
    let dp2 = axis(grid, |x| bumps.dpsi2(x / c));
    let third = |l: usize| if dim == 3 { p2[l] } else { 1.0 };
    let u1 = tensor(grid, |i, j, l| -amp * p1[i] * dp2[j] * third(l));
    let u2 = tensor(grid, |i, j, l| amp * dp1[i] * p2[j] * third(l));
    let mut comps = vec![u1, u2];
    if dim == 3 {
        comps.push(GridFunction::zeros(*grid));
    }
    Ok(leray_project(&VelocityField::new(comps, false)?))
}

/// Spectral interpolation of a field onto `n` points per axis.
pub fn resample_field(u: &VelocityField, n: usize) -> Result<VelocityField> {
    if u.grid().points_per_axis() == n {
        return Ok(u.clone());
    }
    let comps = u
        .components()
        .iter()
        .map(|c| Ok(c.spectrum().resample(n)?.to_function().into_real()))
        .collect::<Result<Vec<_>>>()?;
    VelocityField::new(comps, u.is_divergence_free())
}

/// `u^{w,lambda}(t) = u^h(t) + u^l(t)` with `u^l` read from an evolved trajectory.
pub fn approximate_solution(prm: &FamilyParams, t: f64, low: &Trajectory, grid: &Grid) -> Result<VelocityField> {
    let ul = resample_field(&low.at(t)?, grid.points_per_axis())?;
    if ul.grid() != grid {
        return Err(invalid!("low frequency trajectory lives on a different box"));
    }
    Ok(high_freq_field(prm, t, grid)?.add(&ul))
}

/// `d/dt u^{w,lambda}(t) = d/dt u^h(t) - P((u^l . grad) u^l)(t)`.
pub fn approximate_time_derivative(prm: &FamilyParams, t: f64, low: &Trajectory, grid: &Grid) -> Result<VelocityField> {
    let ul = resample_field(&low.at(t)?, grid.points_per_axis())?;
    if ul.grid() != grid {
        return Err(invalid!("low frequency trajectory lives on a different box"));
    }
    Ok(high_freq_time_derivative(prm, t, grid)?.add(&nonlinear_term(&ul)))
}

/// Besov norm of `du_dt + P((u . grad) u)`.
pub fn euler_residual(u: &VelocityField, du_dt: &VelocityField, prm: &BesovParams) -> Result<f64> {
    if !u.is_divergence_free() {
        return Err(Error::PreconditionViolation("the residual is defined for divergence-free fields".into()));
    }
    let r = du_dt.sub(&nonlinear_term(u));
    besov_norm_field(&r, prm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler::divergence;

    #[test]
    fn plateau_shape() {
        let p = Plateau::new(1.0, 2.0).unwrap();
        assert_eq!(p.value(0.3), 1.0);
        assert_eq!(p.value(-1.0), 1.0);
        assert_eq!(p.value(2.0), 0.0);
        assert!((p.value(1.5) - 0.5).abs() < 1e-15);
        for &x in &[-1.7, -1.2, 1.1, 1.4, 1.9] {
            let fd = (p.value(x + 1e-6) - p.value(x - 1e-6)) / 2e-6;
            assert!((fd - p.derivative(x)).abs() < 1e-7, "x={x}");
        }
        assert!(Plateau::new(2.0, 1.0).is_err());
    }

    #[test]
    fn bumps_meet_their_design_constraints() {
        let b = BumpSet::default();
        for i in 0..=40 {
            let x = -2.0 + 0.1 * i as f64;
            assert!((b.dpsi1(x) - 1.0).abs() < 1e-14);
            assert_eq!(b.psi2(x), 1.0);
        }
        // rho integrates to 1 over [2, 4] by symmetry of the transition
        assert!((b.antiderivative(5.0) - 3.0).abs() < 1e-14);
        assert!((b.antiderivative(-4.5) + 3.0).abs() < 1e-14);
        for &x in &[-7.0, -3.3, 2.5, 3.9, 5.5, 7.5] {
            let fd = (b.psi1(x + 1e-6) - b.psi1(x - 1e-6)) / 2e-6;
            assert!((fd - b.dpsi1(x)).abs() < 1e-7, "x={x}");
        }
        assert_eq!(b.psi1(8.0), 0.0);
        assert_eq!(b.psi2(6.0), 0.0);
    }

    #[test]
    fn exact_family_is_divergence_free_and_matches_difference() {
        let grid = Grid::torus(2, 64).unwrap();
        let (n, s, t) = (8.0, 2.0, 0.7);
        let plus = exact_family_2d(&FamilyParams::periodic(1.0, n, s).unwrap(), t, &grid).unwrap();
        let minus = exact_family_2d(&FamilyParams::periodic(-1.0, n, s).unwrap(), t, &grid).unwrap();
        assert!(divergence(&plus).max_abs() < 1e-12);
        let closed = family_difference_closed_form(n, s, t, &grid).unwrap();
        assert!(plus.sub(&minus).sub(&closed).max_abs() < 1e-13);
        assert!(exact_family_2d(&FamilyParams::periodic(1.0, 32.0, s).unwrap(), t, &grid).is_err());
    }

    #[test]
    fn low_frequency_field_on_the_plateau() {
        let prm = FamilyParams::nonperiodic(1.0, 8.0, 2.5, 0.25).unwrap();
        let grid = grid_for(&prm, 2, Some(256)).unwrap();
        let ul = low_freq_initial(&prm, &grid).unwrap();
        let c = prm.envelope();
        for flat in 0..grid.len() {
            let x = grid.point(flat);
            if x[0].abs() < 1.5 * c && x[1].abs() < 1.5 * c {
                assert!(ul.components()[0].samples()[flat].re.abs() < 1e-6);
                assert!((ul.components()[1].samples()[flat].re - 1.0 / 8.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn small_boxes_are_rejected() {
        let prm = FamilyParams::nonperiodic(1.0, 8.0, 2.5, 0.25).unwrap();
        let grid = Grid::centered_box(2, 256, 10.0).unwrap();
        assert!(matches!(low_freq_initial(&prm, &grid), Err(Error::DomainTruncation(_))));
        assert!(FamilyParams::nonperiodic(1.0, 8.0, 2.5, 1.2).is_err());
    }
}
