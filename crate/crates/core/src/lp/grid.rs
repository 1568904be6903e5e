//! Uniform periodic grids, sampled functions and their Fourier spectra.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent f64 math shadows the trait when std is linked (tests)
use num_traits::Float;

use super::fft::NdFft;
use crate::error::{invalid, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// How integrals over the grid are weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    /// Probability measure: the whole box has mass one.
    Normalized,
    /// Plain Lebesgue measure of the box, used when the box stands in for R^d.
    Lebesgue,
}

/// A cube of side `side` sampled with `n` points per axis, starting at
/// `origin` in every coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    n: usize,
    side: f64,
    origin: f64,
    measure: Measure,
}

impl Grid {
    pub fn new(dim: usize, n: usize, side: f64, origin: f64, measure: Measure) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(invalid!("dimension {dim} outside 1..=3"));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(invalid!("points per axis {n} must be a power of two >= 2"));
        }
        if !(side.is_finite() && side > 0.0) {
            return Err(invalid!("box side {side} must be positive"));
        }
        Ok(Self { dim, n, side, origin, measure })
    }

    /// The torus `[0, 2 pi)^d` with normalized measure.
    pub fn torus(dim: usize, n: usize) -> Result<Self> {
        Self::new(dim, n, 2.0 * PI, 0.0, Measure::Normalized)
    }

    /// A box `[-side/2, side/2)^d` with Lebesgue measure.
    pub fn centered_box(dim: usize, n: usize, side: f64) -> Result<Self> {
        Self::new(dim, n, side, -0.5 * side, Measure::Lebesgue)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.side / self.n as f64
    }

    /// Total mass of the box under the grid's measure.
    pub fn volume(&self) -> f64 {
        match self.measure {
            Measure::Normalized => 1.0,
            Measure::Lebesgue => self.side.powi(self.dim as i32),
        }
    }

    /// Lattice spacing in frequency space.
    pub fn frequency_step(&self) -> f64 {
        2.0 * PI / self.side
    }

    /// Largest physical frequency representable along one axis.
    pub fn nyquist(&self) -> f64 {
        0.5 * self.n as f64 * self.frequency_step()
    }

    /// Largest physical frequency magnitude on the lattice.
    pub fn max_frequency(&self) -> f64 {
        self.nyquist() * (self.dim as f64).sqrt()
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.spacing()
    }

    /// Splits a flat row-major index into per-axis indices (unused axes are 0).
    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        let n = self.n;
        match self.dim {
            1 => [flat, 0, 0],
            2 => [flat / n, flat % n, 0],
            _ => [flat / (n * n), (flat / n) % n, flat % n],
        }
    }

    pub fn flat_index(&self, idx: [usize; 3]) -> usize {
        let n = self.n;
        match self.dim {
            1 => idx[0],
            2 => idx[0] * n + idx[1],
            _ => (idx[0] * n + idx[1]) * n + idx[2],
        }
    }

    pub fn point(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let mut x = [0.0; 3];
        for (a, xa) in x.iter_mut().enumerate().take(self.dim) {
            *xa = self.coordinate(idx[a]);
        }
        x
    }

    /// Signed lattice index of FFT bin `i`; the Nyquist bin maps to `-n/2`.
    pub fn signed_mode(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Physical wavenumbers of the FFT bins along one axis.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let step = self.frequency_step();
        (0..self.n).map(|i| self.signed_mode(i) as f64 * step).collect()
    }

    /// Wavenumbers for differentiation: the Nyquist bin is zeroed so that
    /// derivatives of real fields stay real.
    pub fn derivative_wavenumbers(&self) -> Vec<f64> {
        let mut k = self.wavenumbers();
        k[self.n / 2] = 0.0;
        k
    }

    /// Flat index of the mode `-k` for the mode at `flat`.
    pub fn mirror_index(&self, flat: usize) -> usize {
        let mut idx = self.multi_index(flat);
        for a in idx.iter_mut().take(self.dim) {
            *a = (self.n - *a) % self.n;
        }
        self.flat_index(idx)
    }

    /// Calls `visit(flat, k)` for every lattice mode, with `k` built from `table`.
    pub fn for_each_mode(&self, table: &[f64], mut visit: impl FnMut(usize, [f64; 3])) {
        let n = self.n;
        match self.dim {
            1 => (0..n).for_each(|i| visit(i, [table[i], 0.0, 0.0])),
            2 => {
                for i in 0..n {
                    for j in 0..n {
                        visit(i * n + j, [table[i], table[j], 0.0]);
                    }
                }
            }
            _ => {
                for i in 0..n {
                    for j in 0..n {
                        for l in 0..n {
                            visit((i * n + j) * n + l, [table[i], table[j], table[l]]);
                        }
                    }
                }
            }
        }
    }

    /// Samples a real function of the physical coordinates.
    pub fn sample(&self, f: impl Fn([f64; 3]) -> f64) -> GridFunction {
        let samples = (0..self.len()).map(|i| Complex64::new(f(self.point(i)), 0.0)).collect();
        GridFunction { grid: *self, samples }
    }

    /// Samples a complex function of the physical coordinates.
    pub fn sample_complex(&self, f: impl Fn([f64; 3]) -> Complex64) -> GridFunction {
        let samples = (0..self.len()).map(|i| f(self.point(i))).collect();
        GridFunction { grid: *self, samples }
    }

    pub(crate) fn plan(&self) -> NdFft {
        NdFft::new(self.dim, self.n).expect("grid dimensions are validated on construction")
    }
}

/// Samples of a scalar function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    samples: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: Grid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(invalid!("{} samples for a grid of {} points", samples.len(), grid.len()));
        }
        Ok(Self { grid, samples })
    }

    pub fn from_real(grid: Grid, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, samples: vec![ZERO; grid.len()] }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self { grid, samples: vec![Complex64::new(c, 0.0); grid.len()] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.samples.iter().map(|c| c.re).collect()
    }

    /// Largest imaginary part relative to the largest modulus.
    pub fn imaginary_fraction(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        self.samples.iter().fold(0.0f64, |m, c| m.max(c.im.abs())) / scale
    }

    /// Drops the imaginary parts.
    pub fn into_real(mut self) -> Self {
        for c in self.samples.iter_mut() {
            c.im = 0.0;
        }
        self
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |m, c| m.max(c.norm()))
    }

    /// Normalized Fourier coefficients `(1/N^d) sum f(x_j) e^{-i k j}`.
    pub fn spectrum(&self) -> Spectrum {
        let mut coeffs = self.samples.clone();
        self.grid.plan().forward(&mut coeffs);
        let scale = 1.0 / self.grid.len() as f64;
        for c in coeffs.iter_mut() {
            *c *= scale;
        }
        Spectrum { grid: self.grid, coeffs }
    }

    pub fn scale(mut self, a: f64) -> Self {
        for c in self.samples.iter_mut() {
            *c *= a;
        }
        self
    }

    /// `self + a * other`.
    pub fn axpy(mut self, a: f64, other: &GridFunction) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        for (c, o) in self.samples.iter_mut().zip(other.samples.iter()) {
            *c += o * a;
        }
        self
    }

    pub fn add(&self, other: &GridFunction) -> Self {
        self.clone().axpy(1.0, other)
    }

    pub fn sub(&self, other: &GridFunction) -> Self {
        self.clone().axpy(-1.0, other)
    }

    pub fn mul(&self, other: &GridFunction) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let samples = self.samples.iter().zip(other.samples.iter()).map(|(a, b)| a * b).collect();
        Self { grid: self.grid, samples }
    }
}

/// Normalized Fourier coefficients of a [`GridFunction`], in FFT bin order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(invalid!("{} coefficients for a grid of {} points", coeffs.len(), grid.len()));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, coeffs: vec![ZERO; grid.len()] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn to_function(&self) -> GridFunction {
        let mut samples = self.coeffs.clone();
        self.grid.plan().inverse(&mut samples);
        GridFunction { grid: self.grid, samples }
    }

    /// Multiplies each coefficient by `m(k)` at its physical frequency.
    pub fn apply_multiplier(&self, m: impl Fn([f64; 3]) -> Complex64) -> Spectrum {
        self.apply_multiplier_with(&self.grid.wavenumbers(), m)
    }

    pub(crate) fn apply_multiplier_with(&self, table: &[f64], m: impl Fn([f64; 3]) -> Complex64) -> Spectrum {
        let mut coeffs = self.coeffs.clone();
        self.grid.for_each_mode(table, |i, k| coeffs[i] *= m(k));
        Spectrum { grid: self.grid, coeffs }
    }

    /// Squared l2 norm of the coefficients.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn scale(mut self, a: f64) -> Self {
        for c in self.coeffs.iter_mut() {
            *c *= a;
        }
        self
    }

    pub fn axpy(mut self, a: f64, other: &Spectrum) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        for (c, o) in self.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *c += o * a;
        }
        self
    }

    /// Moves the coefficients onto a grid with `n` points per axis, zero
    /// padding or truncating; the Nyquist bins are dropped.
    pub fn resample(&self, n: usize) -> Result<Spectrum> {
        let g = &self.grid;
        let target = Grid::new(g.dim, n, g.side, g.origin, g.measure)?;
        let keep = (g.n.min(n) / 2) as i64;
        let mut out = Spectrum::zeros(target);
        let to_bin = |m: i64| if m >= 0 { m as usize } else { (n as i64 + m) as usize };
        for (flat, c) in self.coeffs.iter().enumerate() {
            let idx = g.multi_index(flat);
            let mut dst = [0usize; 3];
            let mut inside = true;
            for a in 0..g.dim {
                let m = g.signed_mode(idx[a]);
                if m.abs() >= keep {
                    inside = false;
                    break;
                }
                dst[a] = to_bin(m);
            }
            if inside {
                out.coeffs[target.flat_index(dst)] = *c;
            }
        }
        Ok(out)
    }
}

/// Coefficients of two real fields from a single complex transform of `a + i b`.
pub fn spectra_of_real_pair(a: &GridFunction, b: &GridFunction) -> (Spectrum, Spectrum) {
    assert_eq!(a.grid, b.grid, "grid mismatch");
    let grid = a.grid;
    let mut h: Vec<Complex64> = a
        .samples
        .iter()
        .zip(b.samples.iter())
        .map(|(x, y)| Complex64::new(x.re, y.re))
        .collect();
    grid.plan().forward(&mut h);
    let scale = 1.0 / grid.len() as f64;
    let mut sa = vec![ZERO; h.len()];
    let mut sb = vec![ZERO; h.len()];
    for i in 0..h.len() {
        let hk = h[i];
        let hm = h[grid.mirror_index(i)].conj();
        sa[i] = (hk + hm) * (0.5 * scale);
        let d = (hk - hm) * (0.5 * scale);
        sb[i] = Complex64::new(d.im, -d.re);
    }
    (Spectrum { grid, coeffs: sa }, Spectrum { grid, coeffs: sb })
}

/// Inverse of [`spectra_of_real_pair`]: both spectra must be Hermitian.
pub fn real_pair_from_spectra(sa: &Spectrum, sb: &Spectrum) -> (GridFunction, GridFunction) {
    assert_eq!(sa.grid, sb.grid, "grid mismatch");
    let grid = sa.grid;
    let mut h: Vec<Complex64> = sa
        .coeffs
        .iter()
        .zip(sb.coeffs.iter())
        .map(|(x, y)| x + Complex64::new(-y.im, y.re))
        .collect();
    grid.plan().inverse(&mut h);
    let a = h.iter().map(|c| Complex64::new(c.re, 0.0)).collect();
    let b = h.iter().map(|c| Complex64::new(c.im, 0.0)).collect();
    (GridFunction { grid, samples: a }, GridFunction { grid, samples: b })
}

/// `d f / d x_axis` computed by the Fourier multiplier `i k_axis`.
pub fn spectral_derivative(f: &GridFunction, axis: usize) -> Result<GridFunction> {
    Ok(spectral_derivative_of(&f.spectrum(), axis)?.to_function())
}

pub fn spectral_derivative_of(s: &Spectrum, axis: usize) -> Result<Spectrum> {
    if axis >= s.grid.dim {
        return Err(invalid!("axis {axis} out of range for dimension {}", s.grid.dim));
    }
    let table = s.grid.derivative_wavenumbers();
    Ok(s.apply_multiplier_with(&table, |k| Complex64::new(0.0, k[axis])))
}

/// A vector field whose components share one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    components: Vec<GridFunction>,
    divergence_free: bool,
}

impl VelocityField {
    pub fn new(components: Vec<GridFunction>, divergence_free: bool) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(invalid!("a velocity field needs at least one component"));
        };
        let grid = first.grid;
        if components.len() != grid.dim {
            return Err(invalid!("{} components on a {}-dimensional grid", components.len(), grid.dim));
        }
        if components.iter().any(|c| c.grid != grid) {
            return Err(invalid!("components live on different grids"));
        }
        Ok(Self { components, divergence_free })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { components: vec![GridFunction::zeros(grid); grid.dim], divergence_free: true }
    }

    pub fn grid(&self) -> &Grid {
        &self.components[0].grid
    }

    pub fn components(&self) -> &[GridFunction] {
        &self.components
    }

    pub fn components_mut(&mut self) -> &mut [GridFunction] {
        &mut self.components
    }

    pub fn into_components(self) -> Vec<GridFunction> {
        self.components
    }

    pub fn is_divergence_free(&self) -> bool {
        self.divergence_free
    }

    pub fn with_divergence_free(mut self, flag: bool) -> Self {
        self.divergence_free = flag;
        self
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> GridFunction {
        let grid = *self.grid();
        let samples = (0..grid.len())
            .map(|i| {
                let sq: f64 = self.components.iter().map(|c| c.samples[i].norm_sqr()).sum();
                Complex64::new(sq.sqrt(), 0.0)
            })
            .collect();
        GridFunction { grid, samples }
    }

    pub fn max_abs(&self) -> f64 {
        self.magnitude().max_abs()
    }

    /// Linear combination keeping the flag only when both inputs carry it.
    pub fn axpy(self, a: f64, other: &VelocityField) -> Self {
        let flag = self.divergence_free && other.divergence_free;
        let components = self
            .components
            .into_iter()
            .zip(other.components.iter())
            .map(|(c, o)| c.axpy(a, o))
            .collect();
        Self { components, divergence_free: flag }
    }

    pub fn sub(&self, other: &VelocityField) -> Self {
        self.clone().axpy(-1.0, other)
    }

    pub fn add(&self, other: &VelocityField) -> Self {
        self.clone().axpy(1.0, other)
    }

    pub fn scale(self, a: f64) -> Self {
        let flag = self.divergence_free;
        Self { components: self.components.into_iter().map(|c| c.scale(a)).collect(), divergence_free: flag }
    }
}
