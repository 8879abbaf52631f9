use super::matrix::{frobenius, Matrix};
use super::shape::{advance, Shape};
use crate::error::{Error, Result};
use crate::scalar::{ComplexOf, Scalar};

/// Which mode-n matricization to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnfoldKind {
    /// Columns indexed by `i_{n+1} ... i_N i_1 ... i_{n-1}` (cyclic order).
    ModeN,
    /// Columns indexed by `i_1 ... i_{n-1} i_{n+1} ... i_N`.
    Classical,
}

impl UnfoldKind {
    /// 1-based modes spanning the column index, fastest first.
    pub fn column_modes(self, order: usize, n: usize) -> Vec<usize> {
        match self {
            UnfoldKind::ModeN => (n + 1..=order).chain(1..n).collect(),
            UnfoldKind::Classical => (1..n).chain(n + 1..=order).collect(),
        }
    }
}

/// N-dimensional array stored in little-endian order.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor<T> {
    shape: Shape,
    data: Vec<T>,
}

impl<T: Scalar> DenseTensor<T> {
    pub fn zeros(shape: Shape) -> Self {
        let data = vec![T::zero(); shape.len()];
        Self { shape, data }
    }

    pub fn from_vec(shape: Shape, data: Vec<T>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::dim(format!(
                "{} values for a tensor of {} elements",
                data.len(),
                shape.len()
            )));
        }
        Ok(Self { shape, data })
    }

    /// Fills the tensor from a function of the 1-based multi-index.
    pub fn from_fn(shape: Shape, mut f: impl FnMut(&[usize]) -> T) -> Self {
        let mut data = Vec::with_capacity(shape.len());
        let mut idx0 = vec![0; shape.order()];
        let mut idx1 = vec![1; shape.order()];
        loop {
            for (one, &zero) in idx1.iter_mut().zip(&idx0) {
                *one = zero + 1;
            }
            data.push(f(&idx1));
            if !advance(&mut idx0, shape.dims()) {
                break;
            }
        }
        Self { shape, data }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dims(&self) -> &[usize] {
        self.shape.dims()
    }

    pub fn order(&self) -> usize {
        self.shape.order()
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

    /// Element at a 1-based multi-index.
    pub fn get(&self, idx: &[usize]) -> Result<T> {
        let flat = self.shape.linearize(idx, super::Endian::Little)?;
        Ok(self.data[flat - 1])
    }

    pub fn set(&mut self, idx: &[usize], value: T) -> Result<()> {
        let flat = self.shape.linearize(idx, super::Endian::Little)?;
        self.data[flat - 1] = value;
        Ok(())
    }

    pub fn frobenius_norm(&self) -> T::Real {
        frobenius(&self.data)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> DenseTensor<U> {
        DenseTensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn to_complex(&self) -> DenseTensor<ComplexOf<T>> {
        self.map(|x| ComplexOf::<T>::from_complex(x.to_complex()))
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        if self.shape != rhs.shape {
            return Err(Error::dim("tensor difference of unequal shapes"));
        }
        Ok(Self {
            shape: self.shape.clone(),
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        })
    }

    /// Mode-n product `X ×_n U` with `U` of size `J × I_n` (`n` is 1-based).
    pub fn mode_n_product(&self, u: &Matrix<T>, n: usize) -> Result<Self> {
        self.shape.check_mode(n)?;
        let dims = self.dims();
        let i_n = dims[n - 1];
        if u.cols() != i_n {
            return Err(Error::dim(format!(
                "mode-{n} product needs a matrix with {i_n} columns, got {}",
                u.cols()
            )));
        }
        let j = u.rows();
        let left: usize = dims[..n - 1].iter().product();
        let right: usize = dims[n..].iter().product();
        let mut out_dims = dims.to_vec();
        out_dims[n - 1] = j;
        let mut out = Self::zeros(Shape::new(out_dims)?);
        for r in 0..right {
            let x = &self.data[r * left * i_n..(r + 1) * left * i_n];
            let y = &mut out.data[r * left * j..(r + 1) * left * j];
            // Y_r = X_r U^T where X_r is left x I_n
            T::gemm(
                left,
                i_n,
                j,
                T::one(),
                x,
                (1, left as isize),
                u.data(),
                (u.rows() as isize, 1),
                T::zero(),
                y,
                (1, left as isize),
            );
        }
        Ok(out)
    }

    /// Mode-n matricization (`n` is 1-based).
    pub fn unfold(&self, n: usize, kind: UnfoldKind) -> Result<Matrix<T>> {
        self.shape.check_mode(n)?;
        let cols = self.shape.len() / self.shape.dim(n);
        let mut out = Matrix::zeros(self.shape.dim(n), cols);
        let rows = out.rows();
        let (row_stride, col_strides) = self.matricization_strides(n, kind);
        let buf = out.data_mut();
        self.for_each_offset(|flat, idx0| {
            let col: usize = idx0.iter().zip(&col_strides).map(|(i, s)| i * s).sum();
            buf[idx0[n - 1] * row_stride + col * rows] = self.data[flat];
        });
        Ok(out)
    }

    /// Inverse of [`DenseTensor::unfold`].
    pub fn fold(m: &Matrix<T>, n: usize, shape: &Shape, kind: UnfoldKind) -> Result<Self> {
        shape.check_mode(n)?;
        let i_n = shape.dim(n);
        if m.rows() != i_n || m.cols() * i_n != shape.len() {
            return Err(Error::dim(format!(
                "a {}x{} matrix does not fold into mode {n} of {:?}",
                m.rows(),
                m.cols(),
                shape.dims()
            )));
        }
        let mut out = Self::zeros(shape.clone());
        let (row_stride, col_strides) = out.matricization_strides(n, kind);
        let rows = m.rows();
        let src = m.data();
        let mut vals = std::mem::take(&mut out.data);
        out.for_each_offset(|flat, idx0| {
            let col: usize = idx0.iter().zip(&col_strides).map(|(i, s)| i * s).sum();
            vals[flat] = src[idx0[n - 1] * row_stride + col * rows];
        });
        out.data = vals;
        Ok(out)
    }

    /// Per-mode column strides of the matricization (zero for mode `n`).
    fn matricization_strides(&self, n: usize, kind: UnfoldKind) -> (usize, Vec<usize>) {
        let mut col_strides = vec![0; self.order()];
        let mut acc = 1;
        for k in kind.column_modes(self.order(), n) {
            col_strides[k - 1] = acc;
            acc *= self.shape.dim(k);
        }
        (1, col_strides)
    }

    /// Visits every storage offset with its 0-based multi-index.
    fn for_each_offset(&self, mut f: impl FnMut(usize, &[usize])) {
        let mut idx0 = vec![0; self.order()];
        for flat in 0..self.shape.len() {
            f(flat, &idx0);
            advance(&mut idx0, self.shape.dims());
        }
    }

    /// Circularly shifts modes so that mode `k + 1` becomes the first mode.
    pub fn rotate_modes(&self, k: usize) -> Self {
        let order = self.order();
        let k = k % order;
        let dims = self.dims();
        let new_dims: Vec<usize> = (0..order).map(|j| dims[(j + k) % order]).collect();
        let shape = Shape::new(new_dims).expect("permuted valid shape");
        let mut idx = vec![0; order];
        Self::from_fn(shape, |new_idx| {
            for j in 0..order {
                idx[(j + k) % order] = new_idx[j];
            }
            self.get(&idx).expect("in range")
        })
    }
}
