//! Tensor-ring decomposition fitted by alternating least squares, with
//! sketched variants (leverage sampling, KSRFT, TensorSketch) and the
//! benchmark harness that compares them.
//!
//! Indices in the public API are 1-based; storage is little-endian
//! (first index fastest).

pub mod error;
pub mod scalar;
pub mod tensor;
pub mod ring;
pub mod linalg;
pub mod sketch;
pub mod solvers;
pub mod harness;
pub mod verify;
pub mod cli;

pub use error::{Error, Result};
pub use scalar::{RealScalar, Scalar};

/// Default real scalar.
pub type Real = f64;
/// Default complex scalar.
pub type Cplx = num_complex::Complex64;

pub type RealTensor = tensor::DenseTensor<Real>;
pub type CplxTensor = tensor::DenseTensor<Cplx>;
pub type RealCores = ring::TrCores<Real>;
pub type CplxCores = ring::TrCores<Cplx>;
