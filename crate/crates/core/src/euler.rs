//! Pseudo-spectral incompressible Euler solver, Leray projection and a
//! forced linear transport solver on periodic boxes.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent f64 math shadows the trait when std is linked (tests)
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::lp::fft::NdFft;
use crate::lp::{Grid, GridFunction, Spectrum, VelocityField};

type Coeffs = Vec<Complex64>;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Precomputed tables for spectral operations on one grid.
///
/// Derivatives use wavenumbers with the Nyquist bin zeroed; divergence,
/// projection and advection all share that convention so that projected
/// fields have spectrally exact zero divergence.
#[derive(Debug, Clone)]
pub struct SpectralOps {
    grid: Grid,
    plan: NdFft,
    k: Vec<f64>,
    /// Flat mask of the modes kept by the 2/3 rule, empty when dealiasing is off.
    keep: Vec<bool>,
    /// Flat index of the mode `-k` for every mode `k`.
    mirror: Vec<u32>,
}

impl SpectralOps {
    pub fn new(grid: &Grid, dealias: bool) -> Self {
        let n = grid.points_per_axis();
        let cutoff = ((n - 1) / 3) as i64;
        let band: Vec<f64> = (0..n).map(|i| if grid.signed_mode(i).abs() <= cutoff { 1.0 } else { 0.0 }).collect();
        let mut keep = Vec::new();
        if dealias {
            keep = vec![false; grid.len()];
            grid.for_each_mode(&band, |i, b| keep[i] = b[..grid.dim()].iter().all(|&x| x > 0.0));
        }
        let mirror = (0..grid.len()).map(|i| grid.mirror_index(i) as u32).collect();
        Self { grid: *grid, plan: grid.plan(), k: grid.derivative_wavenumbers(), keep, mirror }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn for_each_mode(&self, visit: impl FnMut(usize, [f64; 3])) {
        self.grid.for_each_mode(&self.k, visit);
    }

    fn kept(&self, i: usize) -> bool {
        self.keep.is_empty() || self.keep[i]
    }

    /// Packs two real fields, given by their spectra, into one complex
    /// transform and returns the physical samples `a + i b`.
    fn packed_physical(&self, a: Source<'_>, b: Option<Source<'_>>) -> Coeffs {
        let mut h = vec![ZERO; self.grid.len()];
        self.for_each_mode(|i, k| {
            if !self.kept(i) {
                return;
            }
            let mut v = a.coeff(i, &k);
            if let Some(b) = &b {
                let w = b.coeff(i, &k);
                v += Complex64::new(-w.im, w.re);
            }
            h[i] = v;
        });
        self.plan.inverse(&mut h);
        h
    }

    /// Normalized, truncated spectra of the real and imaginary parts of `h`.
    fn unpack_spectra(&self, mut h: Coeffs, pair: bool) -> (Coeffs, Option<Coeffs>) {
        let scale = 1.0 / self.grid.len() as f64;
        self.plan.forward(&mut h);
        if !pair {
            for (i, c) in h.iter_mut().enumerate() {
                *c = if self.kept(i) { Complex64::new(c.re * scale, c.im * scale) } else { ZERO };
            }
            return (h, None);
        }
        let mut sa = vec![ZERO; h.len()];
        let mut sb = vec![ZERO; h.len()];
        for i in 0..h.len() {
            if !self.kept(i) {
                continue;
            }
            let hk = h[i];
            let hm = h[self.mirror[i] as usize].conj();
            sa[i] = (hk + hm) * (0.5 * scale);
            let d = (hk - hm) * (0.5 * scale);
            sb[i] = Complex64::new(d.im, -d.re);
        }
        (sa, Some(sb))
    }

    /// Spectrum of `(mu . grad) f` for each component of `f`, dealiased.
    fn advect(&self, mu: &[Coeffs], f: &[Coeffs]) -> Vec<Coeffs> {
        let dim = self.grid.dim();
        let mut sources: Vec<Source<'_>> = mu.iter().map(|m| Source { coeffs: m, axis: None }).collect();
        for c in f {
            sources.extend((0..dim).map(|a| Source { coeffs: c, axis: Some(a) }));
        }
        let packed: Vec<Coeffs> = sources
            .chunks(2)
            .map(|pair| self.packed_physical(pair[0], pair.get(1).copied()))
            .collect();
        let value = |src: usize, x: usize| {
            let c = packed[src / 2][x];
            if src % 2 == 0 {
                c.re
            } else {
                c.im
            }
        };
        let product = |comp: usize, x: usize| -> f64 {
            (0..dim).map(|a| value(a, x) * value(dim + comp * dim + a, x)).sum()
        };
        let mut out = Vec::with_capacity(f.len());
        let mut comp = 0;
        while comp < f.len() {
            let pair = comp + 1 < f.len();
            let h: Coeffs = (0..self.grid.len())
                .map(|x| Complex64::new(product(comp, x), if pair { product(comp + 1, x) } else { 0.0 }))
                .collect();
            let (a, b) = self.unpack_spectra(h, pair);
            out.push(a);
            out.extend(b);
            comp += 2;
        }
        out
    }

    /// `u - k (k . u) / |k|^2` in place; the zero mode is left alone.
    pub fn project(&self, comps: &mut [Coeffs]) {
        let dim = self.grid.dim();
        self.for_each_mode(|i, k| {
            let k2: f64 = k[..dim].iter().map(|x| x * x).sum();
            if k2 == 0.0 {
                return;
            }
            let dot: Complex64 = (0..dim).map(|a| comps[a][i] * k[a]).sum();
            let f = dot / k2;
            for a in 0..dim {
                comps[a][i] -= f * k[a];
            }
        });
    }

    fn divergence_coeffs(&self, comps: &[Coeffs]) -> Coeffs {
        let dim = self.grid.dim();
        let mut out = vec![ZERO; self.grid.len()];
        self.for_each_mode(|i, k| {
            out[i] = (0..dim).map(|a| comps[a][i] * Complex64::new(0.0, k[a])).sum();
        });
        out
    }

    /// `-P((u . grad) u)` on spectra.
    pub fn nonlinear(&self, u: &[Coeffs]) -> Vec<Coeffs> {
        let mut out = self.advect(u, u);
        self.project(&mut out);
        for c in out.iter_mut() {
            for v in c.iter_mut() {
                *v = -*v;
            }
        }
        out
    }
}

/// A spectrum, optionally differentiated along one axis.
#[derive(Clone, Copy)]
struct Source<'a> {
    coeffs: &'a [Complex64],
    axis: Option<usize>,
}

impl Source<'_> {
    fn coeff(&self, i: usize, k: &[f64; 3]) -> Complex64 {
        match self.axis {
            Some(a) => self.coeffs[i] * Complex64::new(0.0, k[a]),
            None => self.coeffs[i],
        }
    }
}

fn spectra_of(u: &VelocityField) -> Vec<Coeffs> {
    u.components().iter().map(|c| c.spectrum().into_coeffs()).collect()
}

fn field_from(grid: &Grid, spectra: &[Coeffs], divergence_free: bool) -> VelocityField {
    let comps = spectra
        .iter()
        .map(|s| Spectrum::new(*grid, s.clone()).expect("spectrum matches grid").to_function().into_real())
        .collect();
    VelocityField::new(comps, divergence_free).expect("components match grid")
}

/// Leray projection onto divergence-free fields.
pub fn leray_project(u: &VelocityField) -> VelocityField {
    let ops = SpectralOps::new(u.grid(), false);
    let mut s = spectra_of(u);
    ops.project(&mut s);
    field_from(u.grid(), &s, true)
}

/// Spectral divergence.
pub fn divergence(u: &VelocityField) -> GridFunction {
    let ops = SpectralOps::new(u.grid(), false);
    let d = ops.divergence_coeffs(&spectra_of(u));
    Spectrum::new(*u.grid(), d).expect("spectrum matches grid").to_function().into_real()
}

/// `-P((u . grad) u)` with 2/3 dealiasing.
pub fn nonlinear_term(u: &VelocityField) -> VelocityField {
    let ops = SpectralOps::new(u.grid(), true);
    field_from(u.grid(), &ops.nonlinear(&spectra_of(u)), true)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub n: usize,
    pub side: f64,
    pub dt: f64,
    pub final_time: f64,
    pub dealias: bool,
    pub cfl: f64,
    /// Time between stored snapshots; the initial and final states are always kept.
    pub snapshot_interval: f64,
    pub blowup_factor: f64,
}

impl SolverConfig {
    pub fn for_grid(grid: &Grid, dt: f64, final_time: f64) -> Self {
        Self {
            n: grid.points_per_axis(),
            side: grid.side(),
            dt,
            final_time,
            dealias: true,
            cfl: 0.5,
            snapshot_interval: final_time,
            blowup_factor: 1e3,
        }
    }

    pub fn with_snapshot_interval(mut self, interval: f64) -> Self {
        self.snapshot_interval = interval;
        self
    }

    fn check(&self, grid: &Grid, max_speed: f64) -> Result<(usize, f64)> {
        if grid.points_per_axis() != self.n || (grid.side() - self.side).abs() > 1e-12 * self.side {
            return Err(Error::Config(format!(
                "solver configured for N = {}, L = {} but data lives on N = {}, L = {}",
                self.n,
                self.side,
                grid.points_per_axis(),
                grid.side()
            )));
        }
        if !(self.dt > 0.0 && self.final_time > 0.0 && self.final_time.is_finite()) {
            return Err(Error::Config(format!("need dt > 0 and T > 0, got dt = {}, T = {}", self.dt, self.final_time)));
        }
        if !(self.snapshot_interval > 0.0) {
            return Err(Error::Config(format!("snapshot interval {} must be positive", self.snapshot_interval)));
        }
        let steps = ((self.final_time / self.dt) - 1e-9).ceil().max(1.0) as usize;
        let dt = self.final_time / steps as f64;
        let limit = self.cfl * grid.spacing() / max_speed;
        if max_speed > 0.0 && dt > limit {
            return Err(Error::Config(format!(
                "time step {dt} violates the CFL limit {limit} (cfl = {}, dx = {}, max |u| = {max_speed})",
                self.cfl,
                grid.spacing()
            )));
        }
        Ok((steps, dt))
    }
}

/// Time-stamped snapshots of a field.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    snapshots: Vec<(f64, VelocityField)>,
    energy_drift: f64,
}

impl Trajectory {
    pub fn new(snapshots: Vec<(f64, VelocityField)>) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(invalid!("a trajectory needs at least one snapshot"));
        }
        if snapshots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(invalid!("snapshot times must be strictly increasing"));
        }
        let grid = *snapshots[0].1.grid();
        if snapshots.iter().any(|(_, u)| *u.grid() != grid) {
            return Err(invalid!("snapshots live on different grids"));
        }
        Ok(Self { snapshots, energy_drift: 0.0 })
    }

    pub fn snapshots(&self) -> &[(f64, VelocityField)] {
        &self.snapshots
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|(t, _)| *t).collect()
    }

    pub fn first(&self) -> &VelocityField {
        &self.snapshots[0].1
    }

    pub fn last(&self) -> &VelocityField {
        &self.snapshots[self.snapshots.len() - 1].1
    }

    pub fn grid(&self) -> &Grid {
        self.first().grid()
    }

    /// Largest relative change of the L2 norm seen during the solve.
    pub fn energy_drift(&self) -> f64 {
        self.energy_drift
    }

    /// The field at time `t`: a stored snapshot, or cubic Lagrange
    /// interpolation through the nearest snapshots.
    pub fn at(&self, t: f64) -> Result<VelocityField> {
        let times = self.times();
        let (t0, t1) = (times[0], times[times.len() - 1]);
        let tol = 1e-9 * (t1 - t0).abs().max(1.0);
        if t < t0 - tol || t > t1 + tol {
            return Err(invalid!("time {t} outside the trajectory range [{t0}, {t1}]"));
        }
        if let Some(i) = times.iter().position(|s| (s - t).abs() <= tol) {
            return Ok(self.snapshots[i].1.clone());
        }
        let upper = times.iter().position(|&s| s > t).unwrap_or(times.len() - 1);
        let width = times.len().min(4);
        let start = upper.saturating_sub(width / 2).min(times.len() - width);
        let nodes = &times[start..start + width];
        let mut acc: Option<VelocityField> = None;
        for (a, &ta) in nodes.iter().enumerate() {
            let w: f64 = nodes.iter().enumerate().filter(|(b, _)| *b != a).map(|(_, &tb)| (t - tb) / (ta - tb)).product();
            let term = &self.snapshots[start + a].1;
            acc = Some(match acc {
                None => term.clone().scale(w),
                Some(v) => v.axpy(w, term),
            });
        }
        Ok(acc.expect("at least one node"))
    }
}

fn axpy_coeffs(y: &mut [Coeffs], a: f64, x: &[Coeffs]) {
    for (yc, xc) in y.iter_mut().zip(x) {
        for (p, q) in yc.iter_mut().zip(xc) {
            *p += q * a;
        }
    }
}

fn energy(s: &[Coeffs]) -> f64 {
    s.iter().flat_map(|c| c.iter()).map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn l1(s: &[Coeffs]) -> f64 {
    let mut total = 0.0;
    for c in s {
        total += c.iter().map(|v| v.norm()).sum::<f64>();
    }
    total
}

/// Classical RK4 for `y' = rhs(t, y)`, calling `after` once per step.
fn rk4<F, G>(mut y: Vec<Coeffs>, steps: usize, dt: f64, mut rhs: F, mut after: G) -> Result<Vec<Coeffs>>
where
    F: FnMut(usize, &[Coeffs]) -> Result<Vec<Coeffs>>,
    G: FnMut(usize, &[Coeffs]) -> Result<()>,
{
    // `rhs` receives the time in half steps so that stage times are exact.
    for step in 0..steps {
        let k1 = rhs(2 * step, &y)?;
        let mut stage = y.clone();
        axpy_coeffs(&mut stage, 0.5 * dt, &k1);
        let k2 = rhs(2 * step + 1, &stage)?;
        let mut acc = k1;
        axpy_coeffs(&mut acc, 2.0, &k2);
        stage.clone_from(&y);
        axpy_coeffs(&mut stage, 0.5 * dt, &k2);
        drop(k2);
        let k3 = rhs(2 * step + 1, &stage)?;
        axpy_coeffs(&mut acc, 2.0, &k3);
        stage.clone_from(&y);
        axpy_coeffs(&mut stage, dt, &k3);
        drop(k3);
        let k4 = rhs(2 * step + 2, &stage)?;
        axpy_coeffs(&mut acc, 1.0, &k4);
        axpy_coeffs(&mut y, dt / 6.0, &acc);
        after(step + 1, &y)?;
    }
    Ok(y)
}

fn snapshot_stride(interval: f64, dt: f64) -> usize {
    ((interval / dt).round() as usize).max(1)
}

/// Integrates `u_t = -P((u . grad) u)` with RK4 up to `cfg.final_time`.
pub fn solve(u0: &VelocityField, cfg: &SolverConfig) -> Result<Trajectory> {
    let grid = *u0.grid();
    if grid.dim() < 2 {
        return Err(invalid!("the Euler solver needs dimension 2 or 3"));
    }
    let max0 = u0.max_abs();
    let (steps, dt) = cfg.check(&grid, max0)?;
    let div = divergence(u0).max_abs();
    if div > 1e-10 * max0 * grid.max_frequency() {
        return Err(Error::PreconditionViolation(format!("initial data has max |div u| = {div:.3e}")));
    }
    let ops = SpectralOps::new(&grid, cfg.dealias);
    let y0: Vec<Coeffs> = spectra_of(u0);
    let e0 = energy(&y0);
    let stride = snapshot_stride(cfg.snapshot_interval, dt);
    let mut snapshots = vec![(0.0, u0.clone())];
    let mut drift = 0.0f64;
    let threshold = cfg.blowup_factor * max0;
    rk4(
        y0,
        steps,
        dt,
        |_, y| Ok(ops.nonlinear(y)),
        |step, y| {
            let t = step as f64 * dt;
            let e = energy(y);
            if !e.is_finite() {
                return Err(Error::Blowup { time: t, reason: "non-finite values in the solution".into() });
            }
            if e0 > 0.0 {
                drift = drift.max((e - e0).abs() / e0);
            }
            let bound = l1(y);
            let snapshot = step % stride == 0 || step == steps;
            if snapshot || (max0 > 0.0 && bound > threshold) {
                let u = field_from(&grid, y, true);
                let m = u.max_abs();
                if max0 > 0.0 && m > threshold {
                    return Err(Error::Blowup {
                        time: t,
                        reason: format!("max |u| = {m:.3e} exceeds {} times the initial maximum", cfg.blowup_factor),
                    });
                }
                if snapshot {
                    snapshots.push((t, u));
                }
            }
            Ok(())
        },
    )?;
    let mut traj = Trajectory::new(snapshots)?;
    traj.energy_drift = drift;
    Ok(traj)
}

/// Integrates `f_t + (mu . grad) f = F` with RK4.
///
/// `advector` and `forcing` must share uniformly spaced snapshot times with
/// spacing `cfg.dt / 2`: each step of length `dt` reads the snapshots at
/// its start, midpoint and end.
pub fn transport_solve(
    advector: &Trajectory,
    forcing: &Trajectory,
    f0: &VelocityField,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    let times = advector.times();
    let ftimes = forcing.times();
    let tol = 1e-9 * times[times.len() - 1].abs().max(1.0);
    if times.len() != ftimes.len() || times.iter().zip(&ftimes).any(|(a, b)| (a - b).abs() > tol) {
        return Err(invalid!("advector and forcing are sampled at different times"));
    }
    if times.len() < 3 || (times.len() - 1) % 2 != 0 {
        return Err(invalid!("transport needs an odd number (>= 3) of snapshots, got {}", times.len()));
    }
    let spacing = times[1] - times[0];
    if times.windows(2).any(|w| ((w[1] - w[0]) - spacing).abs() > tol) {
        return Err(invalid!("advector snapshots are not uniformly spaced"));
    }
    if (cfg.dt - 2.0 * spacing).abs() > tol {
        return Err(invalid!("time step {} does not match twice the snapshot spacing {spacing}", cfg.dt));
    }
    if (times[0]).abs() > tol {
        return Err(invalid!("trajectories must start at t = 0"));
    }
    let grid = *f0.grid();
    if *advector.grid() != grid || *forcing.grid() != grid {
        return Err(invalid!("advector, forcing and initial data must share one grid"));
    }
    let steps = (times.len() - 1) / 2;
    let dt = 2.0 * spacing;
    let max_speed = advector.snapshots().iter().map(|(_, u)| u.max_abs()).fold(0.0, f64::max);
    let limit = cfg.cfl * grid.spacing() / max_speed;
    if max_speed > 0.0 && dt > limit {
        return Err(Error::Config(format!("time step {dt} violates the CFL limit {limit}")));
    }
    let ops = SpectralOps::new(&grid, cfg.dealias);
    let mu: Vec<Vec<Coeffs>> = advector.snapshots().iter().map(|(_, u)| spectra_of(u)).collect();
    let force: Vec<Vec<Coeffs>> = forcing.snapshots().iter().map(|(_, u)| spectra_of(u)).collect();
    let mut snapshots = vec![(0.0, f0.clone())];
    rk4(
        spectra_of(f0),
        steps,
        dt,
        |half, y| {
            let mut out = ops.advect(&mu[half], y);
            for (o, f) in out.iter_mut().zip(&force[half]) {
                for (a, b) in o.iter_mut().zip(f) {
                    *a = b - *a;
                }
            }
            Ok(out)
        },
        |step, y| {
            let t = times[2 * step];
            if !energy(y).is_finite() {
                return Err(Error::Blowup { time: t, reason: "non-finite values in the transported field".into() });
            }
            snapshots.push((t, field_from(&grid, y, false)));
            Ok(())
        },
    )?;
    Trajectory::new(snapshots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::spectral_derivative;

    fn random_field(grid: &Grid, seed: u64) -> VelocityField {
        let mut state = seed;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let comps = (0..grid.dim())
            .map(|_| {
                let modes: Vec<(f64, f64, f64, f64)> = (0..6).map(|_| (next() * 8.0, next() * 8.0, next(), next() * 6.0)).collect();
                grid.sample(|x| {
                    modes.iter().map(|(a, b, c, ph)| c * (a.round() * x[0] + b.round() * x[1] + ph).sin()).sum()
                })
            })
            .collect();
        VelocityField::new(comps, false).unwrap()
    }

    #[test]
    fn projection_is_idempotent_and_kills_divergence() {
        let grid = Grid::torus(2, 32).unwrap();
        let u = random_field(&grid, 3);
        let p = leray_project(&u);
        assert!(divergence(&p).max_abs() < 1e-12);
        let pp = leray_project(&p);
        assert!(pp.sub(&p).max_abs() < 1e-12);
    }

    #[test]
    fn projection_removes_gradients() {
        let grid = Grid::torus(2, 32).unwrap();
        let g = grid.sample(|x| (2.0 * x[0] + x[1]).sin() + (3.0 * x[1]).cos());
        let grad = VelocityField::new(
            vec![spectral_derivative(&g, 0).unwrap(), spectral_derivative(&g, 1).unwrap()],
            false,
        )
        .unwrap();
        assert!(leray_project(&grad).max_abs() < 1e-12);
    }

    #[test]
    fn nonlinear_term_is_energy_neutral() {
        let grid = Grid::torus(2, 32).unwrap();
        let u = leray_project(&random_field(&grid, 11));
        let nl = nonlinear_term(&u);
        let dot: f64 = (0..2)
            .map(|a| {
                u.components()[a].samples().iter().zip(nl.components()[a].samples()).map(|(x, y)| x.re * y.re).sum::<f64>()
            })
            .sum();
        let scale = u.max_abs().powi(3) * grid.len() as f64;
        assert!(dot.abs() < 1e-12 * scale);
        let c = VelocityField::new(vec![GridFunction::constant(grid, 1.0), GridFunction::constant(grid, 2.0)], true).unwrap();
        assert!(nonlinear_term(&c).max_abs() < 1e-14);
    }

    #[test]
    fn trajectory_interpolation_is_exact_for_cubics() {
        let grid = Grid::torus(2, 8).unwrap();
        let base = VelocityField::new(vec![GridFunction::constant(grid, 1.0), GridFunction::zeros(grid)], true).unwrap();
        let poly = |t: f64| 1.0 + t - 2.0 * t * t + 0.5 * t * t * t;
        let snaps = (0..5).map(|i| {
            let t = 0.25 * i as f64;
            (t, base.clone().scale(poly(t)))
        });
        let traj = Trajectory::new(snaps.collect()).unwrap();
        let u = traj.at(0.6).unwrap();
        assert!((u.components()[0].samples()[0].re - poly(0.6)).abs() < 1e-13);
        assert!(traj.at(1.5).is_err());
    }

    #[test]
    fn cfl_violation_is_a_config_error() {
        let grid = Grid::torus(2, 32).unwrap();
        let u = leray_project(&random_field(&grid, 5));
        let cfg = SolverConfig::for_grid(&grid, 1.0, 1.0);
        assert!(matches!(solve(&u, &cfg), Err(Error::Config(_))));
    }
}
