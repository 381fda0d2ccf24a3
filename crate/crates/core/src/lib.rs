//! Quadrature formulas that are exact on radial-basis-function (RBF)
//! approximation spaces.
//!
//! The crate builds interpolatory RBF quadrature rules over box domains in one
//! and two dimensions, diagnoses their stability (sum of absolute weights,
//! Lebesgue-constant estimates, weight positivity), and constructs provably
//! positive least-squares rules by oversampling the data points relative to
//! the kernel centers. Exact moments of translated kernels over boxes are
//! provided for Gaussian, polyharmonic-spline, and Wendland kernels, together
//! with an adaptive numerical moment oracle.
//!
//! The crate is `no_std` (with `alloc`); all floating-point special functions
//! go through [`libm`] so results are bit-reproducible across platforms.
//! File formats, experiment drivers, and the command line live in the
//! companion `rbfquad-cli` crate.

#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]
// Dense linear algebra reads more naturally with indexed loops.
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod gauss;
pub mod genz;
pub mod geometry;
pub mod kernels;
pub mod linalg;
pub mod lsquad;
pub mod math;
pub mod moments;
pub mod pointsets;
pub mod polybasis;
pub mod quadrature;
pub mod rbfsystem;
pub mod rng;

pub use kernels::Kernel;
pub use moments::MomentVector;
pub use pointsets::{Domain, PointSequence, PointSet};
pub use polybasis::PolyBasis;
pub use quadrature::QuadratureRule;
pub use rbfsystem::{RbfSpace, SaddleSystem, ShapePolicy};
