//! Numerical laboratory for damped quantum maps on the 2-torus.
//!
//! A damped quantum map is the subunitary propagator `M = Op_h(a) · U_h(κ)`
//! acting on the `N`-dimensional quantum torus (`h = 1/N`), where `U_h(κ)`
//! quantizes a perturbed cat map and `a` is a damping symbol with values in
//! `(0, 1]`. This crate builds those matrices, computes their full
//! (non-normal) spectra with an in-crate dense eigensolver and measures the
//! statistics that semiclassical Weyl laws make predictions about.
//!
//! Modules, bottom-up:
//!
//! * [`classical`]: torus dynamics, damping symbols, Birkhoff averages,
//!   large-deviation estimators.
//! * [`eigen`]: Hessenberg reduction, shifted QR, Hermitian eigensolver,
//!   singular values, LU.
//! * [`quantization`]: Weyl translations, `Op_h`, propagators, defect
//!   measurements.
//! * [`spectral`]: sorted spectra and the radial/angular statistics.
//! * [`harness`]: JSON experiment configs, cached grid runs, CSV and SVG
//!   output.

pub mod classical;
pub mod eigen;
mod error;
pub mod harness;
pub mod operator;
pub mod quantization;
pub mod spectral;

pub use error::{Error, Result};
pub use operator::DenseOperator;

pub use num_complex::Complex64;
