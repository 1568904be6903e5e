//! Lebesgue, Besov and Hölder norms of sampled functions.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent f64 math shadows the trait when std is linked (tests)
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::lp::{spectral_derivative_of, DyadicPartition, Grid, GridFunction, Profile, Spectrum, VelocityField};

/// Largest share of spectral energy allowed in the last two blocks.
pub const TAIL_TOLERANCE: f64 = 1e-8;

/// An integrability or summability exponent in `[1, inf]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn finite(value: f64) -> Result<Self> {
        if value.is_finite() && value >= 1.0 {
            Ok(Self::Finite(value))
        } else if value == f64::INFINITY {
            Ok(Self::Infinity)
        } else {
            Err(invalid!("exponent {value} must lie in [1, inf]"))
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            Self::Finite(v) => *v,
            Self::Infinity => f64::INFINITY,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Self::Infinity)
    }

    fn validate(&self) -> Result<()> {
        Self::finite(self.value()).map(|_| ())
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(v) => write!(f, "{v}"),
            Self::Infinity => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovParams {
    pub s: f64,
    pub p: Exponent,
    pub q: Exponent,
}

impl BesovParams {
    pub fn new(s: f64, p: Exponent, q: Exponent) -> Result<Self> {
        if !s.is_finite() {
            return Err(invalid!("smoothness {s} must be finite"));
        }
        p.validate()?;
        q.validate()?;
        Ok(Self { s, p, q })
    }
}

/// How shifted samples are produced for iterated differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DifferenceMode {
    /// Exact index shifts; the shift must be a multiple of the spacing.
    Grid,
    /// Fourier translation, exact for band-limited samples and valid for any shift.
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferenceNormParams {
    pub sigma: f64,
    pub m: usize,
    pub p: Exponent,
    pub q: Exponent,
    /// Number of log-spaced points in the `t` quadrature.
    pub t_points: usize,
    /// Shift magnitudes sampled per direction.
    pub magnitudes: usize,
    pub mode: DifferenceMode,
}

impl DifferenceNormParams {
    /// Defaults: order `floor(sigma) + 2`, 64 quadrature points, 256 magnitudes.
    pub fn new(sigma: f64, p: Exponent, q: Exponent) -> Result<Self> {
        let m = if sigma.is_finite() && sigma > 0.0 { sigma.floor() as usize + 2 } else { 1 };
        let prm = Self { sigma, m, p, q, t_points: 64, magnitudes: 256, mode: DifferenceMode::Grid };
        prm.validate()?;
        Ok(prm)
    }

    pub fn with_order(mut self, m: usize) -> Result<Self> {
        self.m = m;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma < self.m as f64) {
            return Err(invalid!("difference norm needs 0 < sigma < m, got sigma = {}, m = {}", self.sigma, self.m));
        }
        if self.t_points < 2 || self.magnitudes < 1 {
            return Err(invalid!("t_points must be >= 2 and magnitudes >= 1"));
        }
        self.p.validate()?;
        self.q.validate()
    }
}

fn lp_of_moduli(grid: &Grid, moduli: impl Iterator<Item = f64>, p: Exponent) -> f64 {
    match p {
        Exponent::Infinity => moduli.fold(0.0, f64::max),
        Exponent::Finite(p) => {
            let w = grid.volume() / grid.len() as f64;
            let sum: f64 = if p == 2.0 { moduli.map(|v| v * v).sum() } else { moduli.map(|v| v.powf(p)).sum() };
            (w * sum).powf(1.0 / p)
        }
    }
}

/// `||f||_{L^p}` under the grid's measure; `p = inf` is the largest modulus.
pub fn lp_norm(f: &GridFunction, p: Exponent) -> f64 {
    lp_of_moduli(f.grid(), f.samples().iter().map(|c| c.norm()), p)
}

/// `L^p` norm of the pointwise Euclidean magnitude.
pub fn lp_norm_field(u: &VelocityField, p: Exponent) -> f64 {
    lp_norm(&u.magnitude(), p)
}

fn radius(k: [f64; 3]) -> f64 {
    (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt()
}

/// Squared block norms by Parseval, before the measure factor.
fn block_energies(spectra: &[Spectrum], partition: &DyadicPartition) -> Result<Vec<f64>> {
    let grid = *spectra[0].grid();
    let blocks = partition.block_count();
    let table = grid.wavenumbers();
    let mut energy = vec![0.0; blocks + 1];
    let mut total = 0.0;
    let mut tail = 0.0;
    for s in spectra {
        let coeffs = s.coeffs();
        grid.for_each_mode(&table, |i, k| {
            let e = coeffs[i].norm_sqr();
            if e == 0.0 {
                return;
            }
            let r = radius(k);
            total += e;
            tail += partition.tail_symbol(r) * e;
            for (j, w) in partition.active_blocks(r) {
                if j <= blocks {
                    energy[j] += w * w * e;
                }
            }
        });
    }
    if total > 0.0 && tail > TAIL_TOLERANCE * total {
        return Err(Error::Resolution {
            reason: format!(
                "the last two of {} dyadic blocks carry {:.3e} of the spectral energy (tolerance {TAIL_TOLERANCE:e})",
                blocks + 1,
                tail / total
            ),
            required_n: None,
        });
    }
    Ok(energy)
}

fn block_norms_of(spectra: &[Spectrum], partition: &DyadicPartition, p: Exponent) -> Result<Vec<f64>> {
    let grid = *spectra[0].grid();
    let energy = block_energies(spectra, partition)?;
    if p == Exponent::Finite(2.0) {
        return Ok(energy.iter().map(|e| (e * grid.volume()).sqrt()).collect());
    }
    let mut norms = vec![0.0; energy.len()];
    for (j, e) in energy.iter().enumerate() {
        if *e == 0.0 {
            continue;
        }
        let parts: Vec<GridFunction> =
            spectra.iter().map(|s| partition.apply_to_spectrum(s, j).to_function()).collect();
        let moduli = (0..grid.len()).map(|i| parts.iter().map(|f| f.samples()[i].norm_sqr()).sum::<f64>().sqrt());
        norms[j] = lp_of_moduli(&grid, moduli, p);
    }
    Ok(norms)
}

/// `||phi_j(D) f||_{L^p}` for `j = 0..=J`.
pub fn block_norms(f: &GridFunction, partition: &DyadicPartition, p: Exponent) -> Result<Vec<f64>> {
    block_norms_of(&[f.spectrum()], partition, p)
}

pub fn block_norms_field(u: &VelocityField, partition: &DyadicPartition, p: Exponent) -> Result<Vec<f64>> {
    let spectra: Vec<Spectrum> = u.components().iter().map(|c| c.spectrum()).collect();
    block_norms_of(&spectra, partition, p)
}

/// The `l^q` norm of `(2^{js} b_j)_j`.
pub fn combine_blocks(blocks: &[f64], s: f64, q: Exponent) -> f64 {
    let weighted = blocks.iter().enumerate().map(|(j, b)| (2.0f64).powf(j as f64 * s) * b);
    match q {
        Exponent::Infinity => weighted.fold(0.0, f64::max),
        Exponent::Finite(q) => {
            let terms: Vec<f64> = weighted.collect();
            let top = terms.iter().copied().fold(0.0, f64::max);
            if top == 0.0 {
                return 0.0;
            }
            top * terms.iter().map(|t| (t / top).powf(q)).sum::<f64>().powf(1.0 / q)
        }
    }
}

pub fn besov_norm_lp(f: &GridFunction, prm: &BesovParams, partition: &DyadicPartition) -> Result<f64> {
    Ok(combine_blocks(&block_norms(f, partition, prm.p)?, prm.s, prm.q))
}

pub fn besov_norm_lp_field(u: &VelocityField, prm: &BesovParams, partition: &DyadicPartition) -> Result<f64> {
    Ok(combine_blocks(&block_norms_field(u, partition, prm.p)?, prm.s, prm.q))
}

/// Besov norm with the standard profile and a partition covering the grid.
pub fn besov_norm(f: &GridFunction, prm: &BesovParams) -> Result<f64> {
    besov_norm_lp(f, prm, &DyadicPartition::for_grid(f.grid(), Profile::default()))
}

pub fn besov_norm_field(u: &VelocityField, prm: &BesovParams) -> Result<f64> {
    besov_norm_lp_field(u, prm, &DyadicPartition::for_grid(u.grid(), Profile::default()))
}

fn binomial(m: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

/// Shift in grid steps, or an error when `h` is off the lattice.
fn lattice_shift(grid: &Grid, h: &[f64]) -> Result<[i64; 3]> {
    let dx = grid.spacing();
    let mut steps = [0i64; 3];
    for (a, &ha) in h.iter().enumerate() {
        let x = ha / dx;
        let r = x.round();
        if (x - r).abs() > 1e-9 * r.abs().max(1.0) {
            return Err(invalid!("shift component {ha} is not a multiple of the grid spacing {dx}"));
        }
        steps[a] = r as i64;
    }
    Ok(steps)
}

/// `sum_k c_k f(x + k s)` with periodic wrap, for integer step vector `s`.
fn shifted_combination(f: &GridFunction, step: [i64; 3], coeffs: &[f64]) -> GridFunction {
    let grid = *f.grid();
    let n = grid.points_per_axis();
    let dim = grid.dim();
    let wrap = |i: usize, k: usize, a: usize| ((i as i64 + k as i64 * step[a]).rem_euclid(n as i64)) as usize;
    let src = f.samples();
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (k, &c) in coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let maps: Vec<Vec<usize>> = (0..3).map(|a| if a < dim { (0..n).map(|i| wrap(i, k, a)).collect() } else { vec![0] }).collect();
        match dim {
            1 => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o += src[maps[0][i]] * c;
                }
            }
            2 => {
                for i in 0..n {
                    let row = maps[0][i] * n;
                    for j in 0..n {
                        out[i * n + j] += src[row + maps[1][j]] * c;
                    }
                }
            }
            _ => {
                for i in 0..n {
                    for j in 0..n {
                        let base = (maps[0][i] * n + maps[1][j]) * n;
                        let dst = (i * n + j) * n;
                        for l in 0..n {
                            out[dst + l] += src[base + maps[2][l]] * c;
                        }
                    }
                }
            }
        }
    }
    GridFunction::new(grid, out).expect("output matches the grid")
}

/// `(e^{i k.h} - 1)^m` applied to a spectrum; the Nyquist bins are dropped.
fn spectral_difference(s: &Spectrum, h: &[f64], m: usize) -> Spectrum {
    let table = s.grid().derivative_wavenumbers();
    let mut out = s.clone();
    let mut hv = [0.0; 3];
    hv[..h.len()].copy_from_slice(h);
    let coeffs = out.coeffs_mut();
    s.grid().for_each_mode(&table, |i, k| {
        let theta = k[0] * hv[0] + k[1] * hv[1] + k[2] * hv[2];
        // e^{i theta} - 1 = 2i sin(theta/2) e^{i theta/2}, free of cancellation for small theta
        let factor = Complex64::new(0.0, 2.0 * (0.5 * theta).sin()) * Complex64::new(0.0, 0.5 * theta).exp();
        coeffs[i] *= factor.powu(m as u32);
    });
    out
}

/// `Delta_h^m f(x) = sum_k (-1)^{m-k} C(m,k) f(x + k h)` with periodic wrap.
pub fn iterated_difference(f: &GridFunction, h: &[f64], m: usize, mode: DifferenceMode) -> Result<GridFunction> {
    if h.len() != f.grid().dim() {
        return Err(invalid!("shift has {} components on a {}-dimensional grid", h.len(), f.grid().dim()));
    }
    if m == 0 {
        return Err(invalid!("difference order must be positive"));
    }
    match mode {
        DifferenceMode::Grid => {
            let step = lattice_shift(f.grid(), h)?;
            let coeffs: Vec<f64> = (0..=m)
                .map(|k| if (m - k) % 2 == 0 { binomial(m, k) } else { -binomial(m, k) })
                .collect();
            Ok(shifted_combination(f, step, &coeffs))
        }
        DifferenceMode::Spectral => Ok(spectral_difference(&f.spectrum(), h, m).to_function()),
    }
}

/// Integer shift directions: the axes plus the diagonals.
fn directions(dim: usize) -> Vec<[i64; 3]> {
    match dim {
        1 => vec![[1, 0, 0]],
        2 => vec![[1, 0, 0], [0, 1, 0], [1, 1, 0], [1, -1, 0]],
        _ => vec![
            [1, 0, 0],
            [0, 1, 0],
            [0, 0, 1],
            [1, 1, 1],
            [1, 1, -1],
            [1, -1, 1],
            [1, -1, -1],
        ],
    }
}

/// Multiples `1..=jmax`: all of them when few, otherwise the first half of
/// the budget densely and the rest log-spaced.
fn sampled_multiples(jmax: usize, budget: usize) -> Vec<usize> {
    if jmax <= budget {
        return (1..=jmax).collect();
    }
    let dense = (budget / 2).max(1);
    let mut out: Vec<usize> = (1..=dense).collect();
    let rest = budget - dense;
    let ratio = (jmax as f64 / dense as f64).powf(1.0 / rest.max(1) as f64);
    for i in 1..=rest {
        let j = ((dense as f64) * ratio.powi(i as i32)).round() as usize;
        let j = j.min(jmax);
        if j > *out.last().unwrap_or(&0) {
            out.push(j);
        }
    }
    out
}

/// Fails when `f` is not negligible within `side/16` of the box boundary.
fn check_support(f: &GridFunction) -> Result<()> {
    let grid = f.grid();
    let n = grid.points_per_axis();
    let layer = (n / 16).max(1);
    let scale = f.max_abs();
    if scale == 0.0 {
        return Ok(());
    }
    let mut worst = 0.0f64;
    for (i, c) in f.samples().iter().enumerate() {
        let idx = grid.multi_index(i);
        if idx[..grid.dim()].iter().any(|&a| a < layer || a >= n - layer) {
            worst = worst.max(c.norm());
        }
    }
    if worst > 1e-10 * scale {
        return Err(Error::DomainTruncation(format!(
            "function reaches {:.3e} of its maximum within {} cells of the box boundary",
            worst / scale,
            layer
        )));
    }
    Ok(())
}

/// Difference characterization
/// `||f||_p + (int_0^1 t^{-sigma q} sup_{|h| <= t} ||Delta_h^m f||_p^q dt/t)^{1/q}`.
///
/// The sup is taken over lattice shifts with `|h| <= 1`; the integral runs
/// over log-spaced `t` in `[dx, 1]`, and on `(0, dx)` the sup is continued
/// as `S(dx) (t/dx)^m`, the small-shift behaviour of an `m`-th difference.
pub fn besov_norm_diff(f: &GridFunction, prm: &DifferenceNormParams) -> Result<f64> {
    prm.validate()?;
    let grid = *f.grid();
    if grid.measure() == crate::lp::Measure::Lebesgue {
        check_support(f)?;
    }
    let dx = grid.spacing();
    if dx >= 1.0 {
        return Err(invalid!("grid spacing {dx} must be below the unit shift window"));
    }
    let spectrum = match prm.mode {
        DifferenceMode::Spectral => Some(f.spectrum()),
        DifferenceMode::Grid => None,
    };
    let mut samples: Vec<(f64, f64)> = Vec::new();
    for dir in directions(grid.dim()) {
        let unit = dir.iter().map(|&a| (a * a) as f64).sum::<f64>().sqrt() * dx;
        let jmax = (1.0 / unit + 1e-12).floor() as usize;
        for j in sampled_multiples(jmax, prm.magnitudes) {
            let h: Vec<f64> = dir[..grid.dim()].iter().map(|&a| (a * j as i64) as f64 * dx).collect();
            let diff = match &spectrum {
                Some(s) => spectral_difference(s, &h, prm.m).to_function(),
                None => iterated_difference(f, &h, prm.m, DifferenceMode::Grid)?,
            };
            samples.push((j as f64 * unit, lp_norm(&diff, prm.p)));
        }
    }
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let base = lp_norm(f, prm.p);
    let sigma = prm.sigma;
    let seminorm = match prm.q {
        Exponent::Infinity => samples.iter().map(|(h, d)| d / h.powf(sigma)).fold(0.0, f64::max),
        Exponent::Finite(q) => {
            let ts: Vec<f64> = (0..prm.t_points)
                .map(|i| dx * (1.0 / dx).powf(i as f64 / (prm.t_points - 1) as f64))
                .collect();
            let mut sup = Vec::with_capacity(ts.len());
            let mut cursor = 0;
            let mut running = 0.0f64;
            for &t in &ts {
                while cursor < samples.len() && samples[cursor].0 <= t * (1.0 + 1e-12) {
                    running = running.max(samples[cursor].1);
                    cursor += 1;
                }
                sup.push(running);
            }
            let g: Vec<f64> = ts.iter().zip(&sup).map(|(t, s)| (s / t.powf(sigma)).powf(q)).collect();
            let du = (1.0 / dx).ln() / (prm.t_points - 1) as f64;
            let body: f64 = g.windows(2).map(|w| 0.5 * (w[0] + w[1]) * du).sum();
            let head = g[0] / ((prm.m as f64 - sigma) * q);
            (body + head).powf(1.0 / q)
        }
    };
    Ok(base + seminorm)
}

/// `max |d_b u_i(x) - d_b u_i(y)| / |x - y|^sigma` over first derivatives and
/// sampled pairs with `0 < |x - y| < h`.
///
/// Lattice displacements use exact sample differences; displacements below
/// the grid spacing use Fourier translation.
pub fn holder_quotient_sup(u: &VelocityField, sigma: f64, h: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(invalid!("Hölder exponent {sigma} must lie in (0, 1)"));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid!("window {h} must be positive"));
    }
    let grid = *u.grid();
    let dim = grid.dim();
    let dx = grid.spacing();
    let mut derivs: Vec<Spectrum> = Vec::new();
    for c in u.components() {
        let s = c.spectrum();
        for axis in 0..dim {
            derivs.push(spectral_derivative_of(&s, axis)?);
        }
    }
    let fields: Vec<GridFunction> = derivs.iter().map(|s| s.to_function().into_real()).collect();
    let mut best = 0.0f64;

    let mut dirs = directions(dim);
    if dim == 2 {
        dirs.extend([[2, 1, 0], [1, 2, 0], [2, -1, 0], [1, -2, 0]]);
    }
    for dir in &dirs {
        let unit = dir.iter().map(|&a| (a * a) as f64).sum::<f64>().sqrt() * dx;
        if unit >= h {
            continue;
        }
        let jmax = ((h / unit).ceil() as usize).saturating_sub(1);
        for j in sampled_multiples(jmax, 128) {
            let dist = j as f64 * unit;
            if dist >= h {
                continue;
            }
            let step = [dir[0] * j as i64, dir[1] * j as i64, dir[2] * j as i64];
            for f in &fields {
                let d = shifted_combination(f, step, &[-1.0, 1.0]);
                best = best.max(d.max_abs() / dist.powf(sigma));
            }
        }
    }

    let top = h.min(dx);
    for i in 1..=8 {
        let rho = top * (2.0f64).powf(-(i as f64) / 2.0);
        for dir in directions(dim) {
            let len = dir.iter().map(|&a| (a * a) as f64).sum::<f64>().sqrt();
            let shift: Vec<f64> = dir[..dim].iter().map(|&a| a as f64 * rho / len).collect();
            for s in &derivs {
                let d = spectral_difference(s, &shift, 1).to_function();
                best = best.max(d.max_abs() / rho.powf(sigma));
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{build_partition, Grid};
    use core::f64::consts::PI;

    const TWO: Exponent = Exponent::Finite(2.0);

    #[test]
    fn lp_norm_examples() {
        let grid = Grid::torus(1, 64).unwrap();
        let one = GridFunction::constant(grid, 1.0);
        for p in [Exponent::Finite(1.0), TWO, Exponent::Finite(3.5), Exponent::Infinity] {
            assert!((lp_norm(&one, p) - 1.0).abs() < 1e-14);
        }
        let c = grid.sample(|x| x[0].cos());
        assert!((lp_norm(&c, TWO) - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((lp_norm(&c, Exponent::Infinity) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn besov_of_constant_and_single_mode() {
        let grid = Grid::torus(1, 64).unwrap();
        let part = DyadicPartition::for_grid(&grid, Profile::default());
        let prm = BesovParams::new(1.0, TWO, TWO).unwrap();
        let c = GridFunction::constant(grid, -3.0);
        assert!((besov_norm_lp(&c, &prm, &part).unwrap() - 3.0).abs() < 1e-13);
        let f = grid.sample(|x| (4.0 * x[0]).cos());
        assert!((besov_norm_lp(&f, &prm, &part).unwrap() - 2.0 * 2.0f64.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn short_partition_is_a_resolution_error() {
        let grid = Grid::torus(1, 64).unwrap();
        let part = build_partition(3, Profile::default()).unwrap();
        let f = grid.sample(|x| (20.0 * x[0]).cos());
        let prm = BesovParams::new(1.0, TWO, TWO).unwrap();
        assert!(matches!(besov_norm_lp(&f, &prm, &part), Err(Error::Resolution { .. })));
    }

    #[test]
    fn difference_examples() {
        let grid = Grid::torus(1, 32).unwrap();
        let c = GridFunction::constant(grid, 2.0);
        let d = iterated_difference(&c, &[grid.spacing() * 3.0], 1, DifferenceMode::Grid).unwrap();
        assert!(d.max_abs() < 1e-15);
        assert!(iterated_difference(&c, &[0.3], 1, DifferenceMode::Grid).is_err());
        assert!(iterated_difference(&c, &[0.3], 1, DifferenceMode::Spectral).is_ok());
    }

    #[test]
    fn spectral_and_grid_differences_agree_on_band_limited_data() {
        let grid = Grid::torus(2, 32).unwrap();
        let f = grid.sample(|x| (3.0 * x[0] - x[1]).sin() + (2.0 * x[1]).cos());
        let h = [2.0 * grid.spacing(), -grid.spacing()];
        for m in 1..=3 {
            let a = iterated_difference(&f, &h, m, DifferenceMode::Grid).unwrap();
            let b = iterated_difference(&f, &h, m, DifferenceMode::Spectral).unwrap();
            assert!(a.sub(&b).max_abs() < 1e-12);
        }
    }

    #[test]
    fn difference_norm_rejects_bad_input() {
        assert!(DifferenceNormParams::new(2.0, TWO, TWO).unwrap().with_order(2).is_err());
        let grid = Grid::centered_box(1, 256, 16.0).unwrap();
        let f = grid.sample(|x| (-x[0] * x[0] / 8.0).exp());
        let prm = DifferenceNormParams::new(0.5, TWO, TWO).unwrap();
        assert!(matches!(besov_norm_diff(&f, &prm), Err(Error::DomainTruncation(_))));
        assert_eq!(besov_norm_diff(&GridFunction::zeros(grid), &prm).unwrap(), 0.0);
    }

    #[test]
    fn holder_quotient_vanishes_for_linear_derivatives() {
        let grid = Grid::torus(2, 32).unwrap();
        let u = VelocityField::new(
            vec![GridFunction::constant(grid, 1.0), GridFunction::constant(grid, -2.0)],
            true,
        )
        .unwrap();
        assert!(holder_quotient_sup(&u, 0.5, 0.3).unwrap() < 1e-12);
        let v = VelocityField::new(vec![grid.sample(|x| x[1].sin()), GridFunction::zeros(grid)], true).unwrap();
        let q = holder_quotient_sup(&v, 0.5, PI).unwrap();
        assert!(q > 0.5 && q.is_finite());
    }
}
