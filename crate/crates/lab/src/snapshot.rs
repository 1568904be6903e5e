//! Binary velocity snapshots.
//!
//! Layout, all little-endian: `d: u32`, `N: u32`, `L: f64`, `time: f64`,
//! then the `d` components one after another, each as `N^d` row-major `f64`
//! samples.

use std::fs;
use std::path::Path;

use nudlab_core::lp::{Grid, GridFunction, VelocityField};

use crate::error::{LabError, LabResult};

const HEADER: usize = 4 + 4 + 8 + 8;

pub fn encode_snapshot(u: &VelocityField, time: f64) -> Vec<u8> {
    let grid = u.grid();
    let mut out = Vec::with_capacity(HEADER + 8 * grid.len() * grid.dim());
    out.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.points_per_axis() as u32).to_le_bytes());
    out.extend_from_slice(&grid.side().to_le_bytes());
    out.extend_from_slice(&time.to_le_bytes());
    for c in u.components() {
        for v in c.samples() {
            out.extend_from_slice(&v.re.to_le_bytes());
        }
    }
    out
}

/// Decodes a snapshot. Box sides of `2 pi` come back as tori, anything
/// else as a centered box.
pub fn decode_snapshot(bytes: &[u8]) -> LabResult<(VelocityField, f64)> {
    let bad = |msg: String| LabError::Usage(format!("malformed snapshot: {msg}"));
    if bytes.len() < HEADER {
        return Err(bad(format!("{} bytes is shorter than the header", bytes.len())));
    }
    let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    let f64_at = |i: usize| f64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());
    let (dim, n, side, time) = (u32_at(0), u32_at(4), f64_at(8), f64_at(16));
    let grid = if side == 2.0 * std::f64::consts::PI {
        Grid::torus(dim, n)?
    } else {
        Grid::centered_box(dim, n, side)?
    };
    let expected = HEADER + 8 * dim * grid.len();
    if bytes.len() != expected {
        return Err(bad(format!("expected {expected} bytes for d={dim}, N={n}, got {}", bytes.len())));
    }
    let comps = (0..dim)
        .map(|c| {
            let start = HEADER + 8 * c * grid.len();
            let samples = (0..grid.len()).map(|i| f64_at(start + 8 * i)).collect::<Vec<_>>();
            GridFunction::from_real(grid, &samples)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((VelocityField::new(comps, false)?, time))
}

pub fn write_snapshot(path: &Path, u: &VelocityField, time: f64) -> LabResult<()> {
    fs::write(path, encode_snapshot(u, time)).map_err(|e| LabError::io(path, e))
}

pub fn read_snapshot(path: &Path) -> LabResult<(VelocityField, f64)> {
    decode_snapshot(&fs::read(path).map_err(|e| LabError::io(path, e))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let grid = Grid::centered_box(2, 4, 3.0).unwrap();
        let c = GridFunction::constant(grid, 1.5);
        let u = VelocityField::new(vec![c.clone(), c], true).unwrap();
        let bytes = encode_snapshot(&u, 0.25);
        assert_eq!(bytes.len(), 24 + 8 * 2 * 16);
        assert_eq!(&bytes[0..4], &2u32.to_le_bytes());
        assert_eq!(&bytes[4..8], &4u32.to_le_bytes());
        assert_eq!(&bytes[8..16], &3.0f64.to_le_bytes());
        assert_eq!(&bytes[16..24], &0.25f64.to_le_bytes());
        assert_eq!(&bytes[24..32], &1.5f64.to_le_bytes());
    }

    #[test]
    fn round_trip() {
        let grid = Grid::torus(2, 8).unwrap();
        let u1 = grid.sample(|x| x[0].sin() * x[1].cos());
        let u2 = grid.sample(|x| (2.0 * x[1]).cos());
        let u = VelocityField::new(vec![u1, u2], false).unwrap();
        let (v, t) = decode_snapshot(&encode_snapshot(&u, 0.5)).unwrap();
        assert_eq!(t, 0.5);
        assert_eq!(v.grid(), u.grid());
        assert_eq!(v.components(), u.components());
        assert!(decode_snapshot(&encode_snapshot(&u, 0.5)[..40]).is_err());
    }
}
