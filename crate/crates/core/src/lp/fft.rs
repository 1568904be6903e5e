//! Radix-2 complex FFT for power-of-two lengths, plus the separable
//! multi-dimensional transform used by every spectral operator.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent f64 math shadows the trait when std is linked (tests)
use num_traits::Float;

use crate::error::{invalid, Result};

/// Precomputed plan for a 1D transform of length `n`.
#[derive(Debug, Clone)]
pub struct Fft {
    n: usize,
    twiddles: Vec<Complex64>,
    bitrev: Vec<u32>,
}

impl Fft {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(invalid!("FFT length {n} is not a power of two"));
        }
        // the twiddles of the stage of length `len` sit at `len/2..len`
        let mut twiddles = vec![Complex64::new(1.0, 0.0); n.max(2)];
        let mut half = 1;
        while half < n {
            for j in 0..half {
                let angle = -PI * (j as f64) / (half as f64);
                twiddles[half + j] = Complex64::new(angle.cos(), angle.sin());
            }
            half <<= 1;
        }
        let bits = n.trailing_zeros();
        let bitrev = (0..n as u32)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (32 - bits) })
            .collect();
        Ok(Self { n, twiddles, bitrev })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Unnormalized forward transform, kernel `exp(-2 pi i j k / n)`.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform::<false>(data);
    }

    /// Unnormalized inverse transform, kernel `exp(+2 pi i j k / n)`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform::<true>(data);
    }

    fn transform<const INVERSE: bool>(&self, data: &mut [Complex64]) {
        let n = self.n;
        debug_assert_eq!(data.len(), n);
        if n == 1 {
            return;
        }
        for i in 0..n {
            let j = self.bitrev[i] as usize;
            if j > i {
                data.swap(i, j);
            }
        }
        // length-2 butterflies need no twiddles
        for pair in data.chunks_exact_mut(2) {
            let (a, b) = (pair[0], pair[1]);
            pair[0] = a + b;
            pair[1] = a - b;
        }
        let mut len = 4;
        while len <= n {
            let half = len / 2;
            let tw = &self.twiddles[half..len];
            for block in data.chunks_exact_mut(len) {
                let (lo, hi) = block.split_at_mut(half);
                for ((a, b), w) in lo.iter_mut().zip(hi.iter_mut()).zip(tw) {
                    let w = if INVERSE { w.conj() } else { *w };
                    let t = *b * w;
                    *b = *a - t;
                    *a += t;
                }
            }
            len <<= 1;
        }
    }

    /// Transforms the `width` interleaved columns of an `n x width` block at
    /// once, so every butterfly sweeps two contiguous rows.
    fn transform_lines<const INVERSE: bool>(&self, block: &mut [Complex64], width: usize) {
        let n = self.n;
        debug_assert_eq!(block.len(), n * width);
        if n == 1 {
            return;
        }
        for i in 0..n {
            let j = self.bitrev[i] as usize;
            if j > i {
                let (lo, hi) = block.split_at_mut(j * width);
                lo[i * width..(i + 1) * width].swap_with_slice(&mut hi[..width]);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            for group in block.chunks_exact_mut(len * width) {
                let (lo, hi) = group.split_at_mut(half * width);
                for j in 0..half {
                    let w = self.twiddles[half + j];
                    let w = if INVERSE { w.conj() } else { w };
                    let a = &mut lo[j * width..(j + 1) * width];
                    let b = &mut hi[j * width..(j + 1) * width];
                    if j == 0 {
                        for (a, b) in a.iter_mut().zip(b.iter_mut()) {
                            let t = *b;
                            *b = *a - t;
                            *a += t;
                        }
                    } else {
                        for (a, b) in a.iter_mut().zip(b.iter_mut()) {
                            let t = *b * w;
                            *b = *a - t;
                            *a += t;
                        }
                    }
                }
            }
            len <<= 1;
        }
    }
}

/// Separable transform over a `dim`-dimensional cube with `n` points per
/// axis, stored row-major (last axis contiguous).
#[derive(Debug, Clone)]
pub struct NdFft {
    dim: usize,
    fft: Fft,
}

impl NdFft {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(invalid!("dimension {dim} outside 1..=3"));
        }
        Ok(Self { dim, fft: Fft::new(n)? })
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform::<false>(data);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform::<true>(data);
    }

    fn run<const INVERSE: bool>(&self, line: &mut [Complex64]) {
        if INVERSE {
            self.fft.inverse(line);
        } else {
            self.fft.forward(line);
        }
    }

    fn transform<const INVERSE: bool>(&self, data: &mut [Complex64]) {
        let n = self.fft.len();
        debug_assert_eq!(data.len(), n.pow(self.dim as u32));
        for row in data.chunks_exact_mut(n) {
            self.run::<INVERSE>(row);
        }
        if self.dim == 1 {
            return;
        }
        for axis in 0..self.dim - 1 {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            for block in data.chunks_exact_mut(n * stride) {
                self.fft.transform_lines::<INVERSE>(block, stride);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (j, v)| {
                    let a = -2.0 * PI * ((j * k) % n) as f64 / n as f64;
                    acc + v * Complex64::new(a.cos(), a.sin())
                })
            })
            .collect()
    }

    fn sample(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|j| Complex64::new((0.37 * j as f64).sin() + 0.1, (1.3 * j as f64).cos()))
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        for n in [1, 2, 4, 8, 32, 128] {
            let x = sample(n);
            let mut y = x.clone();
            Fft::new(n).unwrap().forward(&mut y);
            let z = naive_dft(&x);
            for (a, b) in y.iter().zip(z.iter()) {
                assert!((a - b).norm() < 1e-10, "n={n}");
            }
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(Fft::new(12).is_err());
        assert!(Fft::new(0).is_err());
    }

    #[test]
    fn nd_round_trip() {
        for dim in 1..=3 {
            let n = 8;
            let plan = NdFft::new(dim, n).unwrap();
            let x = sample(n.pow(dim as u32));
            let mut y = x.clone();
            plan.forward(&mut y);
            plan.inverse(&mut y);
            let scale = 1.0 / x.len() as f64;
            for (a, b) in x.iter().zip(y.iter()) {
                assert!((a - b * scale).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn two_dimensional_mode_lands_on_its_index() {
        let n = 16;
        let plan = NdFft::new(2, n).unwrap();
        let (k1, k2) = (3usize, 5usize);
        let mut x: Vec<Complex64> = (0..n * n)
            .map(|idx| {
                let (i, j) = (idx / n, idx % n);
                let a = 2.0 * PI * ((k1 * i + k2 * j) as f64) / n as f64;
                Complex64::new(a.cos(), a.sin())
            })
            .collect();
        plan.forward(&mut x);
        for (idx, v) in x.iter().enumerate() {
            let expected = if idx == k1 * n + k2 { (n * n) as f64 } else { 0.0 };
            assert!((v.re - expected).abs() < 1e-9 && v.im.abs() < 1e-9);
        }
    }
}
