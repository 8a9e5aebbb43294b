//! Subcommand implementations. Each takes the parsed config plus the run
//! context and returns the stdout summary; artifacts land in `ctx.out`.

use std::path::PathBuf;

use anosov_core::lattice::{self, UnimodularMatrix};
use anosov_core::num_complex::Complex64;

use crate::emit::sig12;
use crate::error::{invalid, LabError};

pub mod algebra;
pub mod cohomology;
pub mod geometry;

pub struct Ctx {
    pub out: PathBuf,
    pub seed: u64,
    pub threads: usize,
}

/// Weakest expanding eigenvalue; errors when it is a complex pair.
pub fn weakest_unstable_real(m: &UnimodularMatrix) -> Result<f64, LabError> {
    let split = lattice::spectral_splitting(m)
        .map_err(|e| LabError::Numeric(format!("spectral splitting: {e}")))?;
    let mode = &split.modes[split.weakest_unstable()];
    if mode.value.im != 0.0 {
        return Err(invalid("weakest expanding eigenvalue is a complex pair"));
    }
    Ok(mode.value.re)
}

/// Stable/unstable unit eigenvectors of a hyperbolic 2x2 matrix.
pub fn plane_frame(m: &UnimodularMatrix) -> Result<(Vec<f64>, Vec<f64>), LabError> {
    if m.dim() != 2 {
        return Err(invalid("expected a 2x2 matrix"));
    }
    let split = lattice::spectral_splitting(m)
        .map_err(|e| LabError::Numeric(format!("spectral splitting: {e}")))?;
    let stable = split
        .real_vector(0)
        .ok_or_else(|| invalid("stable eigenvalue is complex"))?;
    let unstable = split
        .real_vector(1)
        .ok_or_else(|| invalid("unstable eigenvalue is complex"))?;
    Ok((stable, unstable))
}

pub fn complex_str(z: Complex64) -> String {
    format!("{}{}{}i", sig12(z.re), if z.im < 0.0 { "" } else { "+" }, sig12(z.im))
}

pub fn check_dim(name: &str, v: &[f64], dim: usize) -> Result<(), LabError> {
    if v.len() != dim {
        return Err(invalid(format!("{name} has {} coordinates, expected {dim}", v.len())));
    }
    Ok(())
}
