//! Grids, spectra and Littlewood-Paley blocks.

pub mod fft;
pub mod grid;
pub mod partition;

pub use grid::{
    real_pair_from_spectra, spectra_of_real_pair, spectral_derivative, spectral_derivative_of, Grid,
    GridFunction, Measure, Spectrum, VelocityField,
};
pub use partition::{apply_block, build_partition, eval_block_symbol, DyadicPartition, Profile};
