//! The tensor-ring model: cores, reconstruction, subchain tensors and the
//! fitting objective.

mod archive;
mod products;

pub use archive::{read_cores, write_cores, AnyCores};
pub use products::{
    chain_subchain, design_matrix, lateral_slice, slices_hadamard, subchain_product,
};

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{ComplexOf, Scalar};
use crate::tensor::{DenseTensor, Matrix, Shape, TensorData, UnfoldKind};

/// Ordered TR-cores; core `n` has shape `R_n x I_n x R_{n+1}` with
/// `R_{N+1} = R_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrCores<T> {
    cores: Vec<DenseTensor<T>>,
}

impl<T: Scalar> TrCores<T> {
    pub fn new(cores: Vec<DenseTensor<T>>) -> Result<Self> {
        if cores.is_empty() {
            return Err(Error::arg("a tensor ring needs at least one core"));
        }
        let n = cores.len();
        for (k, c) in cores.iter().enumerate() {
            if c.order() != 3 {
                return Err(Error::dim(format!("core {} is not order 3", k + 1)));
            }
            let next = &cores[(k + 1) % n];
            if c.dims()[2] != next.dims()[0] {
                return Err(Error::dim(format!(
                    "core {} ends with rank {} but core {} starts with rank {}",
                    k + 1,
                    c.dims()[2],
                    (k + 1) % n + 1,
                    next.dims()[0]
                )));
            }
        }
        Ok(Self { cores })
    }

    /// Cores with independent standard normal entries. `ranks[k]` is
    /// `R_{k+1}`.
    pub fn random<R: Rng + ?Sized>(dims: &[usize], ranks: &[usize], rng: &mut R) -> Result<Self> {
        Self::from_fn(dims, ranks, |_, _| T::standard_normal(rng))
    }

    pub fn zeros(dims: &[usize], ranks: &[usize]) -> Result<Self> {
        Self::from_fn(dims, ranks, |_, _| T::zero())
    }

    /// Fills core entries in storage order; `f` receives the 1-based core
    /// number and the 1-based `(r, i, r')` index.
    pub fn from_fn(
        dims: &[usize],
        ranks: &[usize],
        mut f: impl FnMut(usize, &[usize]) -> T,
    ) -> Result<Self> {
        if dims.len() != ranks.len() {
            return Err(Error::dim(format!(
                "{} dimensions but {} ranks",
                dims.len(),
                ranks.len()
            )));
        }
        let n = dims.len();
        let cores = (0..n)
            .map(|k| {
                let s = Shape::new(vec![ranks[k], dims[k], ranks[(k + 1) % n]])?;
                Ok(DenseTensor::from_fn(s, |idx| f(k + 1, idx)))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(cores)
    }

    pub fn order(&self) -> usize {
        self.cores.len()
    }

    /// `(I_1, ..., I_N)`.
    pub fn dims(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.dims()[1]).collect()
    }

    /// `(R_1, ..., R_N)`.
    pub fn ranks(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.dims()[0]).collect()
    }

    /// Core `n` (1-based).
    pub fn core(&self, n: usize) -> &DenseTensor<T> {
        &self.cores[n - 1]
    }

    pub fn cores(&self) -> &[DenseTensor<T>] {
        &self.cores
    }

    pub fn into_cores(self) -> Vec<DenseTensor<T>> {
        self.cores
    }

    /// Replaces core `n` (1-based) by one of identical shape.
    pub fn set_core(&mut self, n: usize, core: DenseTensor<T>) -> Result<()> {
        let old = self
            .cores
            .get(n.wrapping_sub(1))
            .ok_or_else(|| Error::Domain(format!("core {n} outside 1..={}", self.order())))?;
        if old.dims() != core.dims() {
            return Err(Error::dim(format!(
                "core {n} has shape {:?}, replacement has {:?}",
                old.dims(),
                core.dims()
            )));
        }
        self.cores[n - 1] = core;
        Ok(())
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&DenseTensor<T>) -> DenseTensor<U>) -> Result<TrCores<U>> {
        TrCores::new(self.cores.iter().map(f).collect())
    }

    pub fn to_complex(&self) -> TrCores<ComplexOf<T>> {
        TrCores {
            cores: self.cores.iter().map(|c| c.to_complex()).collect(),
        }
    }

    /// Cores `n+1, ..., N, 1, ..., n-1` in ring order.
    pub fn others(&self, n: usize) -> Vec<&DenseTensor<T>> {
        let nn = self.order();
        (1..nn).map(|k| &self.cores[(n - 1 + k) % nn]).collect()
    }

    /// Subchain tensor `G^{≠n}` of shape `R_{n+1} x ∏_{j≠n} I_j x R_n`.
    pub fn subchain_tensor(&self, n: usize) -> Result<DenseTensor<T>> {
        if self.order() < 2 {
            return Err(Error::arg("subchain tensors need at least two cores"));
        }
        self.check_mode(n)?;
        chain_subchain(&self.others(n))
    }

    /// ALS design matrix `G_[2]^{≠n}` (`∏_{j≠n} I_j x R_n R_{n+1}`).
    pub fn design_matrix(&self, n: usize) -> Result<Matrix<T>> {
        design_matrix(&self.subchain_tensor(n)?)
    }

    fn check_mode(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.order() {
            return Err(Error::Domain(format!("mode {n} outside 1..={}", self.order())));
        }
        Ok(())
    }

    /// Full tensor with entries `trace(G_1(i_1) ... G_N(i_N))`.
    pub fn reconstruct(&self) -> DenseTensor<T> {
        let dims = self.dims();
        let shape = Shape::new(dims.clone()).expect("cores have valid dims");
        if self.order() == 1 {
            let c = &self.cores[0];
            let (r, i) = (c.dims()[0], c.dims()[1]);
            let data = (0..i)
                .map(|k| (0..r).map(|a| c.data()[a + r * k + r * i * a]).sum())
                .collect();
            return DenseTensor::from_vec(shape, data).expect("length matches");
        }
        // X_[1] = G_{1(2)} (G_[2]^{≠1})^T, whose column-major data is the
        // storage order of X.
        let a = self.design_matrix(1).expect("valid ring");
        let g = core_unknown(&self.cores[0]);
        let (i1, j, q) = (dims[0], a.rows(), a.cols());
        let mut out = vec![T::zero(); i1 * j];
        T::gemm(
            i1,
            q,
            j,
            T::one(),
            g.data(),
            (q as isize, 1),
            a.data(),
            (j as isize, 1),
            T::zero(),
            &mut out,
            (1, i1 as isize),
        );
        DenseTensor::from_vec(shape, out).expect("length matches")
    }

    /// Moves core `k + 1` to the front, keeping ring order.
    pub fn rotate(&self, k: usize) -> Self {
        let n = self.order();
        Self {
            cores: (0..n).map(|j| self.cores[(j + k) % n].clone()).collect(),
        }
    }
}

/// `‖TR(cores) − X‖_F / ‖X‖_F`.
pub fn relative_error<T: Scalar>(cores: &TrCores<T>, x: &TensorData<T>) -> Result<T::Real> {
    relative_error_with_norm(cores, x, x.frobenius_norm())
}

/// [`relative_error`] with a precomputed `‖X‖_F`.
pub fn relative_error_with_norm<T: Scalar>(
    cores: &TrCores<T>,
    x: &TensorData<T>,
    x_norm: T::Real,
) -> Result<T::Real> {
    if cores.dims() != x.dims() {
        return Err(Error::dim(format!(
            "cores describe {:?}, data has shape {:?}",
            cores.dims(),
            x.dims()
        )));
    }
    if x_norm == <T::Real as num_traits::Zero>::zero() {
        return Err(Error::Undefined("relative error against a zero tensor".into()));
    }
    let mut rec = cores.reconstruct();
    match x {
        TensorData::Dense(d) => {
            for (r, &v) in rec.data_mut().iter_mut().zip(d.data()) {
                *r -= v;
            }
        }
        TensorData::Sparse(s) => {
            let data = rec.data_mut();
            for (&o, &v) in s.offsets().iter().zip(s.values()) {
                data[o] -= v;
            }
        }
    }
    Ok(rec.frobenius_norm() / x_norm)
}

/// Classical mode-2 unfolding `G_{n(2)}` (`I_n x R_n R_{n+1}`), entry
/// `(i, a + R_n b) = G(a, i, b)`.
pub fn core_unfolding<T: Scalar>(core: &DenseTensor<T>) -> Matrix<T> {
    core.unfold(2, UnfoldKind::Classical)
        .expect("cores are order 3")
}

/// `G_{n(2)}^T` (`R_n R_{n+1} x I_n`): column `i` is the column-major
/// slice `G(:, i, :)`. This is the unknown of every ALS update.
pub fn core_unknown<T: Scalar>(core: &DenseTensor<T>) -> Matrix<T> {
    let d = core.dims();
    let (ra, i, rb) = (d[0], d[1], d[2]);
    let src = core.data();
    Matrix::from_fn(ra * rb, i, |q, k| {
        let (a, b) = (q % ra, q / ra);
        src[a + ra * k + ra * i * b]
    })
}

/// Inverse of [`core_unknown`].
pub fn core_from_unknown<T: Scalar>(w: &Matrix<T>, ra: usize, rb: usize) -> Result<DenseTensor<T>> {
    if w.rows() != ra * rb {
        return Err(Error::dim(format!(
            "unknown has {} rows, ranks {ra}x{rb} need {}",
            w.rows(),
            ra * rb
        )));
    }
    let i = w.cols();
    let shape = Shape::new(vec![ra, i, rb])?;
    Ok(DenseTensor::from_fn(shape, |idx| {
        w[(idx[0] - 1 + ra * (idx[2] - 1), idx[1] - 1)]
    }))
}

/// Largest imaginary magnitude over all core entries.
pub fn max_imag<T: Scalar>(cores: &TrCores<T>) -> T::Real {
    cores
        .cores()
        .iter()
        .flat_map(|c| c.data().iter())
        .map(|z| num_traits::Float::abs(z.im()))
        .fold(<T::Real as num_traits::Zero>::zero(), num_traits::Float::max)
}
