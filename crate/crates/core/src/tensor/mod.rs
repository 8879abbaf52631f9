//! Dense and sparse tensor storage, index conventions, products and
//! unfoldings.

mod dense;
pub mod io;
mod matrix;
mod shape;
mod sparse;

pub use dense::{DenseTensor, UnfoldKind};
pub use matrix::{khatri_rao, kronecker, Matrix};
pub use shape::{Endian, Shape};
pub use sparse::SparseTensor;

pub(crate) use matrix::frobenius;
pub(crate) use shape::advance;

use std::borrow::Cow;

use crate::scalar::Scalar;

/// Input data of a fit: either storage kind.
#[derive(Debug, Clone, PartialEq)]
pub enum TensorData<T> {
    Dense(DenseTensor<T>),
    Sparse(SparseTensor<T>),
}

impl<T: Scalar> TensorData<T> {
    pub fn shape(&self) -> &Shape {
        match self {
            TensorData::Dense(x) => x.shape(),
            TensorData::Sparse(x) => x.shape(),
        }
    }

    pub fn dims(&self) -> &[usize] {
        self.shape().dims()
    }

    pub fn frobenius_norm(&self) -> T::Real {
        match self {
            TensorData::Dense(x) => x.frobenius_norm(),
            TensorData::Sparse(x) => x.frobenius_norm(),
        }
    }

    /// Dense view; sparse inputs are densified.
    pub fn to_dense(&self) -> Cow<'_, DenseTensor<T>> {
        match self {
            TensorData::Dense(x) => Cow::Borrowed(x),
            TensorData::Sparse(x) => Cow::Owned(x.to_dense()),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, TensorData::Sparse(_))
    }
}

impl<T> From<DenseTensor<T>> for TensorData<T> {
    fn from(x: DenseTensor<T>) -> Self {
        TensorData::Dense(x)
    }
}

impl<T> From<SparseTensor<T>> for TensorData<T> {
    fn from(x: SparseTensor<T>) -> Self {
        TensorData::Sparse(x)
    }
}
