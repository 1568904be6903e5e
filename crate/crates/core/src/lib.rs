//! Numerical core: Littlewood-Paley blocks, Besov and Hölder norms, explicit
//! Euler solution families, a pseudo-spectral Euler solver and rate estimates.
//!
//! The crate is `no_std` and only needs an allocator.
#![no_std]
extern crate alloc;

mod error;
pub mod estimates;
pub mod euler;
pub mod families;
pub mod lp;
pub mod norms;

pub use error::{Error, Result};
