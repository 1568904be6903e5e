//! Dyadic partitions of unity and the frequency restriction operators they define.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent f64 math shadows the trait when std is linked (tests)
use num_traits::Float;

use super::grid::{Grid, GridFunction, Spectrum};
use crate::error::{invalid, Error, Result};

/// Shape of the transition of the base bump on `1 < r < 2`.
///
/// The transition is `g(2 - r) / (g(2 - r) + g(r - 1))` with
/// `g(x) = exp(-sharpness / x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profile {
    sharpness: f64,
}

impl Default for Profile {
    fn default() -> Self {
        Self { sharpness: 1.0 }
    }
}

impl Profile {
    pub fn with_sharpness(sharpness: f64) -> Result<Self> {
        if !(sharpness.is_finite() && sharpness > 0.0) {
            return Err(invalid!("profile sharpness {sharpness} must be positive"));
        }
        Ok(Self { sharpness })
    }

    pub fn sharpness(&self) -> f64 {
        self.sharpness
    }

    /// Stable name recorded in reports.
    pub fn identifier(&self) -> String {
        format!("exp-ratio(a={})", self.sharpness)
    }

    /// The base bump as a function of the radius: 1 on `[0, 1]`, 0 on `[2, inf)`.
    pub fn phi0(&self, r: f64) -> f64 {
        if r <= 1.0 {
            1.0
        } else if r >= 2.0 {
            0.0
        } else {
            let a = (-self.sharpness / (2.0 - r)).exp();
            let b = (-self.sharpness / (r - 1.0)).exp();
            a / (a + b)
        }
    }
}

/// The symbols `phi_0, ..., phi_J` of a radial dyadic partition of unity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadicPartition {
    profile: Profile,
    blocks: usize,
}

pub fn build_partition(blocks: usize, profile: Profile) -> Result<DyadicPartition> {
    if blocks < 1 {
        return Err(invalid!("partition needs at least one dyadic block, got J = {blocks}"));
    }
    Ok(DyadicPartition { profile, blocks })
}

pub fn eval_block_symbol(partition: &DyadicPartition, j: usize, xi: &[f64]) -> Result<f64> {
    partition.eval(j, xi)
}

pub fn apply_block(f: &GridFunction, partition: &DyadicPartition, j: usize) -> Result<GridFunction> {
    partition.apply(f, j)
}

impl DyadicPartition {
    /// A partition whose last two blocks lie beyond every lattice frequency
    /// of `grid`, so the tail test of the Besov norm only fails for spectra
    /// that genuinely outrun the partition.
    pub fn for_grid(grid: &Grid, profile: Profile) -> Self {
        let kmax = grid.max_frequency();
        let mut blocks = 3;
        while ((1u64 << (blocks - 2)) as f64) <= kmax {
            blocks += 1;
        }
        Self { profile, blocks }
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    /// The index `J` of the last block.
    pub fn block_count(&self) -> usize {
        self.blocks
    }

    /// `phi_j` as a function of the radius; zero for `j > J`.
    pub fn radial_symbol(&self, j: usize, r: f64) -> f64 {
        if j > self.blocks {
            return 0.0;
        }
        if j == 0 {
            return self.profile.phi0(r);
        }
        let outer = self.profile.phi0(r / pow2(j));
        let inner = self.profile.phi0(r / pow2(j - 1));
        (outer - inner).max(0.0)
    }

    pub fn eval(&self, j: usize, xi: &[f64]) -> Result<f64> {
        if j > self.blocks {
            return Err(invalid!("block index {j} exceeds J = {}", self.blocks));
        }
        let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        Ok(self.radial_symbol(j, r))
    }

    /// The (at most two) blocks that are nonzero at radius `r`, with weights.
    ///
    /// For `2^{j-1} <= r < 2^j` only `phi_{j-1} = phi_0(r / 2^{j-1})` and
    /// `phi_j = 1 - phi_{j-1}` survive, so the weights always sum to one.
    pub fn active_blocks(&self, r: f64) -> [(usize, f64); 2] {
        if r <= 1.0 {
            return [(0, 1.0), (1, 0.0)];
        }
        let j = (r.log2().floor() as i64 + 1).max(1) as usize;
        // guard against log2 rounding at exact powers of two
        let j = if r >= pow2(j) { j + 1 } else if r < pow2(j - 1) { j - 1 } else { j };
        let v = self.profile.phi0(r / pow2(j - 1));
        [(j - 1, v), (j, 1.0 - v)]
    }

    /// `1 - sum_{j <= J-2} phi_j`: the symbol of the last two blocks plus
    /// everything the partition does not reach.
    pub fn tail_symbol(&self, r: f64) -> f64 {
        if self.blocks < 2 {
            return 1.0 - self.profile.phi0(r);
        }
        1.0 - self.profile.phi0(r / pow2(self.blocks - 2))
    }

    /// `phi_j` sampled on the lattice of `grid`, in FFT bin order.
    pub fn block_weights(&self, grid: &Grid, j: usize) -> Result<Vec<f64>> {
        if j > self.blocks {
            return Err(invalid!("block index {j} exceeds J = {}", self.blocks));
        }
        let mut w = vec![0.0; grid.len()];
        grid.for_each_mode(&grid.wavenumbers(), |i, k| {
            w[i] = self.radial_symbol(j, (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt());
        });
        Ok(w)
    }

    /// `phi_j(D) f` after checking that the grid represents the whole block.
    pub fn apply(&self, f: &GridFunction, j: usize) -> Result<GridFunction> {
        if j > self.blocks {
            return Err(invalid!("block index {j} exceeds J = {}", self.blocks));
        }
        let grid = f.grid();
        if pow2(j + 1) > grid.nyquist() {
            let step = grid.frequency_step();
            let required_n = ((2.0 * pow2(j + 1) / step).ceil() as usize).next_power_of_two();
            return Err(Error::Resolution {
                reason: format!(
                    "block {j} reaches frequency {} beyond the Nyquist frequency {}; requires N >= {required_n}",
                    pow2(j + 1),
                    grid.nyquist()
                ),
                required_n: Some(required_n),
            });
        }
        Ok(self.apply_to_spectrum(&f.spectrum(), j).to_function())
    }

    /// `phi_j` applied to a spectrum without any resolution check.
    pub fn apply_to_spectrum(&self, s: &Spectrum, j: usize) -> Spectrum {
        s.apply_multiplier(|k| {
            Complex64::new(self.radial_symbol(j, (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt()), 0.0)
        })
    }
}

pub(crate) fn pow2(j: usize) -> f64 {
    (2.0f64).powi(j as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn standard(j: usize) -> DyadicPartition {
        build_partition(j, Profile::default()).unwrap()
    }

    #[test]
    fn base_bump_support_and_plateau() {
        let p = Profile::default();
        assert_eq!(p.phi0(0.5), 1.0);
        assert_eq!(p.phi0(1.0), 1.0);
        assert_eq!(p.phi0(2.0), 0.0);
        assert!((p.phi0(1.5) - 0.5).abs() < 1e-15);
        assert!(p.phi0(1.2) > p.phi0(1.7));
    }

    #[test]
    fn symbol_examples() {
        let part = standard(8);
        assert_eq!(part.eval(1, &[2.0]).unwrap(), 1.0);
        assert_eq!(part.eval(3, &[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(part.eval(0, &[4.0]).unwrap(), 0.0);
        assert_eq!(part.eval(2, &[4.0]).unwrap(), 1.0);
        let total: f64 = (0..=8).map(|j| part.eval(j, &[3.7]).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(part.eval(9, &[1.0]).is_err());
        assert!(build_partition(0, Profile::default()).is_err());
    }

    #[test]
    fn active_blocks_agree_with_symbols() {
        let part = standard(12);
        for &r in &[0.0, 0.3, 1.0, 1.3, 2.0, 3.7, 4.0, 7.99, 8.0, 100.0, 1024.0, 1500.0] {
            let act = part.active_blocks(r);
            for j in 0..=12 {
                let expected = part.radial_symbol(j, r);
                let got: f64 = act.iter().filter(|(b, _)| *b == j).map(|(_, w)| *w).sum();
                assert!((expected - got).abs() < 1e-15, "r={r} j={j}");
            }
        }
    }

    #[test]
    fn apply_block_on_single_modes() {
        let grid = Grid::torus(1, 32).unwrap();
        let part = DyadicPartition::for_grid(&grid, Profile::default());
        let c = GridFunction::constant(grid, 1.7);
        assert!(part.apply(&c, 0).unwrap().sub(&c).max_abs() < 1e-14);
        assert!(part.apply(&c, 2).unwrap().max_abs() < 1e-14);
        let e = grid.sample_complex(|x| Complex64::new(0.0, 4.0 * x[0]).exp());
        let w = part.eval(2, &[4.0]).unwrap();
        let blocked = part.apply(&e, 2).unwrap();
        assert!(blocked.sub(&e.clone().scale(w)).max_abs() < 1e-13);
        match part.apply(&e, 4) {
            Err(Error::Resolution { required_n, .. }) => assert_eq!(required_n, Some(64)),
            other => panic!("expected a resolution error, got {other:?}"),
        }
    }

    #[test]
    fn for_grid_covers_lattice() {
        let grid = Grid::centered_box(2, 256, 8.0 * PI).unwrap();
        let part = DyadicPartition::for_grid(&grid, Profile::default());
        assert_eq!(part.tail_symbol(grid.max_frequency()), 0.0);
    }
}
