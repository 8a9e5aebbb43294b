//! Numerical and exact-arithmetic toolkit for hyperbolic automorphisms of
//! tori and their small perturbations.
//!
//! The crate is organized around the pipeline
//!
//! * [`lattice`]: exact integer linear algebra: characteristic polynomials,
//!   factorization over the integers, spectral splittings, invariant
//!   sublattices and periodic-point counting for linear automorphisms;
//! * [`maps`]: torus maps (linear part plus trigonometric-polynomial
//!   perturbation), skew products, derivative cocycles, finite-time
//!   invariant splittings and the linearizing conjugacy to the model;
//! * [`cohomology`]: fiber cohomological equations solved by convergent
//!   series and the exact Fourier-orbit evaluation of the Lipschitz
//!   obstruction;
//! * [`periodic`]: periodic orbits of skew products, return derivatives,
//!   Jordan-block bookkeeping and periodic-data comparison;
//! * [`regularity`]: directional Hölder/Lipschitz exponent estimation by
//!   multiscale increment regression;
//! * [`foliation`]: invariant-foliation leaves, density/minimality probes,
//!   affine leafwise distance, u-Gibbs empirical measures and the
//!   strong-foliation moduli.
//!
//! The crate is `no_std` (with `alloc`); all IO, configuration and file
//! formats live in the companion `anosov-lab` crate.

#![no_std]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod cohomology;
pub mod foliation;
pub mod lattice;
pub mod maps;
mod mat;
mod math;
pub mod periodic;
pub mod regularity;
pub mod sample;

pub use mat::Mat;

// Complex coefficients appear in public signatures; re-export the crate
// so downstream users match versions.
pub use num_complex;
