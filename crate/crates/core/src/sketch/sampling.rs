//! Joint slice sampling, the sampled subchain tensor, and sampled
//! right-hand sides.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use super::mixing::ModeMixer;
use crate::error::{Error, Result};
use crate::scalar::{RealScalar, Scalar};
use crate::tensor::{DenseTensor, Matrix, Shape};

/// `m` joint samples over an ordered list of modes. Column `k` holds the
/// indices drawn for `modes[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTable {
    modes: Vec<usize>,
    dims: Vec<usize>,
    /// 0-based indices, `cols[k][j]` for sample `j`.
    cols: Vec<Vec<usize>>,
}

impl SampleTable {
    /// From 1-based index columns.
    pub fn from_columns(modes: Vec<usize>, dims: Vec<usize>, cols: Vec<Vec<usize>>) -> Result<Self> {
        if modes.len() != dims.len() || cols.len() != dims.len() {
            return Err(Error::dim("sample table needs one column per mode"));
        }
        let m = cols.first().map_or(0, |c| c.len());
        let mut zero = Vec::with_capacity(cols.len());
        for (k, (col, &d)) in cols.iter().zip(&dims).enumerate() {
            if col.len() != m {
                return Err(Error::dim("ragged sample table"));
            }
            if let Some(&bad) = col.iter().find(|&&i| i == 0 || i > d) {
                return Err(Error::Domain(format!(
                    "sample index {bad} outside 1..={d} for mode {}",
                    modes[k]
                )));
            }
            zero.push(col.iter().map(|&i| i - 1).collect());
        }
        Ok(Self { modes, dims, cols: zero })
    }

    /// Every joint index exactly once, first mode fastest.
    pub fn exhaustive(modes: Vec<usize>, dims: Vec<usize>) -> Result<Self> {
        let shape = Shape::new(dims.clone())?;
        let mut cols = vec![Vec::with_capacity(shape.len()); dims.len()];
        let mut idx = vec![0; dims.len()];
        for _ in 0..shape.len() {
            for (c, &i) in cols.iter_mut().zip(&idx) {
                c.push(i);
            }
            crate::tensor::advance(&mut idx, &dims);
        }
        Ok(Self { modes, dims, cols })
    }

    pub fn len(&self) -> usize {
        self.cols.first().map_or(0, |c| c.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    /// 0-based index drawn for sample `j` in column `k`.
    #[inline]
    pub fn index0(&self, j: usize, k: usize) -> usize {
        self.cols[k][j]
    }

    /// 1-based sample row `j`.
    pub fn row(&self, j: usize) -> Vec<usize> {
        self.cols.iter().map(|c| c[j] + 1).collect()
    }

    /// Joint little-endian row index (0-based) of sample `j` over the
    /// table's modes.
    pub fn joint0(&self, j: usize) -> usize {
        let mut off = 0;
        let mut stride = 1;
        for (c, &d) in self.cols.iter().zip(&self.dims) {
            off += c[j] * stride;
            stride *= d;
        }
        off
    }

    pub fn describe(&self) -> String {
        format!("samples m={} modes={:?} dims={:?}", self.len(), self.modes, self.dims)
    }
}

/// Per-mode index distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum IndexDist<R> {
    Uniform(usize),
    Weighted(Vec<R>),
}

impl<R: RealScalar> IndexDist<R> {
    pub fn len(&self) -> usize {
        match self {
            IndexDist::Uniform(n) => *n,
            IndexDist::Weighted(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Probability of 0-based index `i`.
    pub fn prob(&self, i: usize) -> R {
        match self {
            IndexDist::Uniform(n) => R::of(*n as f64).recip(),
            IndexDist::Weighted(p) => p[i],
        }
    }
}

/// Draws `m` samples, each mode independently and with replacement.
pub fn draw_joint_samples<R: RealScalar, G: Rng + ?Sized>(
    modes: Vec<usize>,
    dists: &[IndexDist<R>],
    m: usize,
    rng: &mut G,
) -> Result<SampleTable> {
    if modes.len() != dists.len() {
        return Err(Error::dim("one distribution per sampled mode"));
    }
    let mut cols = Vec::with_capacity(dists.len());
    for d in dists {
        let col: Vec<usize> = match d {
            IndexDist::Uniform(n) => {
                if *n == 0 {
                    return Err(Error::arg("uniform distribution over an empty range"));
                }
                (0..m).map(|_| rng.random_range(0..*n)).collect()
            }
            IndexDist::Weighted(p) => {
                let w: Vec<f64> = p.iter().map(|x| x.to_f64_lossy()).collect();
                let wi = WeightedIndex::new(&w)
                    .map_err(|e| Error::arg(format!("invalid sampling distribution: {e}")))?;
                (0..m).map(|_| wi.sample(rng)).collect()
            }
        };
        cols.push(col);
    }
    Ok(SampleTable {
        modes,
        dims: dists.iter().map(IndexDist::len).collect(),
        cols,
    })
}

/// Sampled subchain tensor `R_{n+1} x m x R_n`: slice `j` is the product of
/// the slices selected by sample row `j`, taken over `cores` in order.
pub fn sampled_subchain<T: Scalar>(
    table: &SampleTable,
    cores: &[&DenseTensor<T>],
) -> Result<DenseTensor<T>> {
    if cores.len() != table.cols.len() || cores.is_empty() {
        return Err(Error::dim(format!(
            "{} cores for a table over {} modes",
            cores.len(),
            table.cols.len()
        )));
    }
    for (k, c) in cores.iter().enumerate() {
        if c.order() != 3 || c.dims()[1] != table.dims[k] {
            return Err(Error::dim(format!(
                "core {k} of shape {:?} does not match sampled extent {}",
                c.dims(),
                table.dims[k]
            )));
        }
        let next = cores.get(k + 1);
        if let Some(nx) = next {
            if c.dims()[2] != nx.dims()[0] {
                return Err(Error::dim("sampled cores do not chain"));
            }
        }
    }
    let m = table.len();
    if m == 0 {
        return Err(Error::arg("empty sample table"));
    }
    let r0 = cores[0].dims()[0];
    let rlast = cores[cores.len() - 1].dims()[2];
    let mut out = DenseTensor::zeros(Shape::new(vec![r0, m, rlast])?);
    let rmax = cores.iter().map(|c| c.dims()[2]).max().unwrap_or(1);
    let mut cur = vec![T::zero(); r0 * rmax];
    let mut nxt = vec![T::zero(); r0 * rmax];
    for j in 0..m {
        // cur = G_first(i) as r0 x c (column-major)
        let c0 = cores[0];
        let (ra, ii, mut cdim) = (c0.dims()[0], c0.dims()[1], c0.dims()[2]);
        let i = table.cols[0][j];
        for b in 0..cdim {
            for a in 0..ra {
                cur[a + ra * b] = c0.data()[a + ra * i + ra * ii * b];
            }
        }
        for (k, c) in cores.iter().enumerate().skip(1) {
            let (rk, ik, rn) = (c.dims()[0], c.dims()[1], c.dims()[2]);
            let i = table.cols[k][j];
            // slice G_k(i): rows stride 1 from offset rk*i, cols stride rk*ik
            T::gemm(
                r0,
                rk,
                rn,
                T::one(),
                &cur[..r0 * cdim],
                (1, r0 as isize),
                &c.data()[rk * i..],
                (1, (rk * ik) as isize),
                T::zero(),
                &mut nxt[..r0 * rn],
                (1, r0 as isize),
            );
            std::mem::swap(&mut cur, &mut nxt);
            cdim = rn;
        }
        let od = out.data_mut();
        for b in 0..rlast {
            for a in 0..r0 {
                od[a + r0 * j + r0 * m * b] = cur[a + r0 * b];
            }
        }
    }
    Ok(out)
}

/// Little-endian strides of `x` and the base offset of sample `j` with the
/// mode-`n` index set to zero.
fn sample_offsets<T>(x: &DenseTensor<T>, n: usize, table: &SampleTable) -> Result<(Vec<usize>, usize)>
where
    T: Scalar,
{
    let strides = x.shape().strides();
    for (&mode, &d) in table.modes.iter().zip(&table.dims) {
        if mode == 0 || mode > x.order() || mode == n || x.dims()[mode - 1] != d {
            return Err(Error::dim(format!(
                "sample table mode {mode} (extent {d}) does not fit mode-{n} rows of {:?}",
                x.dims()
            )));
        }
    }
    if table.modes.len() + 1 != x.order() {
        return Err(Error::dim("sample table must cover every mode except n"));
    }
    Ok((strides, x.dims()[n - 1]))
}

/// Rows of `X_[n]^T` selected by the joint samples (`m x I_n`).
pub fn sampled_rows<T: Scalar>(x: &DenseTensor<T>, n: usize, table: &SampleTable) -> Result<Matrix<T>> {
    x.shape().check_mode(n)?;
    let (strides, i_n) = sample_offsets(x, n, table)?;
    let m = table.len();
    let mut out = Matrix::zeros(m, i_n);
    let sn = strides[n - 1];
    for j in 0..m {
        let base: usize = table
            .modes
            .iter()
            .enumerate()
            .map(|(k, &mode)| table.cols[k][j] * strides[mode - 1])
            .sum();
        for i in 0..i_n {
            out[(j, i)] = x.data()[base + i * sn];
        }
    }
    Ok(out)
}

/// `S X̂_[n]^T (D_n F_n^*)^T`: sampled rows of the mixed tensor, each
/// unmixed along mode `n` when `unmix` is given.
pub fn ksrft_sketch_rhs<T: Scalar>(
    xhat: &DenseTensor<T>,
    n: usize,
    table: &SampleTable,
    unmix: Option<&ModeMixer<T::Real>>,
) -> Result<Matrix<T>> {
    let mut rows = sampled_rows(xhat, n, table)?;
    if let Some(mx) = unmix {
        if mx.len() != rows.cols() {
            return Err(Error::dim(format!(
                "unmixer of length {} for {} columns",
                mx.len(),
                rows.cols()
            )));
        }
        let (m, i_n) = (rows.rows(), rows.cols());
        let mut buf = vec![T::zero().to_complex(); i_n];
        for j in 0..m {
            for (i, b) in buf.iter_mut().enumerate() {
                *b = rows[(j, i)].to_complex();
            }
            mx.unmix_vec(&mut buf);
            for (i, &b) in buf.iter().enumerate() {
                rows[(j, i)] = T::from_complex(b);
            }
        }
    }
    Ok(rows)
}
