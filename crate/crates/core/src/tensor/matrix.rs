use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::{ComplexOf, Scalar};

/// Dense column-major matrix. Element `(i, j)` (0-based) lives at
/// `i + j * rows`, which is the little-endian order on two indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dim(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row slices; convenient for literals in tests.
    pub fn from_rows(rows: &[&[T]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::dim("ragged rows"));
        }
        Ok(Self::from_fn(r, c, |i, j| rows[i][j]))
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn to_complex(&self) -> Matrix<ComplexOf<T>> {
        self.map(|x| ComplexOf::<T>::from_complex(x.to_complex()))
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::dim(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        T::gemm(
            self.rows,
            self.cols,
            rhs.cols,
            T::one(),
            &self.data,
            (1, self.rows as isize),
            &rhs.data,
            (1, rhs.rows as isize),
            T::zero(),
            &mut out.data,
            (1, self.rows as isize),
        );
        Ok(out)
    }

    /// `self^H * rhs`.
    pub fn adjoint_matmul(&self, rhs: &Self) -> Result<Self> {
        if self.rows != rhs.rows {
            return Err(Error::dim(format!(
                "cannot form A^H B with A {}x{} and B {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let conj;
        let a: &[T] = if T::IS_COMPLEX {
            conj = self.data.iter().map(|x| x.conj()).collect::<Vec<_>>();
            &conj
        } else {
            &self.data
        };
        let mut out = Self::zeros(self.cols, rhs.cols);
        T::gemm(
            self.cols,
            self.rows,
            rhs.cols,
            T::one(),
            a,
            (self.rows as isize, 1),
            &rhs.data,
            (1, rhs.rows as isize),
            T::zero(),
            &mut out.data,
            (1, self.cols as isize),
        );
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> T::Real {
        frobenius(&self.data)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        if (self.rows, self.cols) != (rhs.rows, rhs.cols) {
            return Err(Error::dim("matrix difference of unequal shapes"));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        })
    }

    /// Rows selected by `idx` (0-based), in order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), self.cols, |i, j| self[(idx[i], j)])
    }
}

/// Square root of the sum of squared magnitudes, with scaling against
/// overflow.
pub(crate) fn frobenius<T: Scalar>(data: &[T]) -> T::Real {
    use num_traits::{Float, Zero};
    let max = data
        .iter()
        .map(|x| x.modulus())
        .fold(T::Real::zero(), |a, b| a.max(b));
    if max.is_zero() || !max.is_finite() {
        return max;
    }
    let inv = max.recip();
    let sum: T::Real = data
        .iter()
        .map(|x| x.scale(inv).abs_sq())
        .fold(T::Real::zero(), |a, b| a + b);
    max * sum.sqrt()
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i + j * self.rows]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i + j * self.rows]
    }
}

/// Kronecker product `A ⊗ B`, so that
/// `(A ⊗ B)(i2 + I2 i1, j2 + J2 j1) = A(i1, j1) B(i2, j2)`.
pub fn kronecker<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let (i2, j2) = (b.rows, b.cols);
    Matrix::from_fn(a.rows * i2, a.cols * j2, |r, c| {
        a[(r / i2, c / j2)] * b[(r % i2, c % j2)]
    })
}

/// Column-wise Kronecker product `A ⊙ B`.
pub fn khatri_rao<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    if a.cols != b.cols {
        return Err(Error::dim(format!(
            "Khatri-Rao product needs equal column counts, got {} and {}",
            a.cols, b.cols
        )));
    }
    let i2 = b.rows;
    Ok(Matrix::from_fn(a.rows * i2, a.cols, |r, c| {
        a[(r / i2, c)] * b[(r % i2, c)]
    }))
}
