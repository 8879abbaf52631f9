//! Mode-2 slice products on order-3 tensors and the subchain tensor.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{DenseTensor, Matrix, Shape, UnfoldKind};

fn dims3<T: Scalar>(x: &DenseTensor<T>, what: &str) -> Result<(usize, usize, usize)> {
    match *x.dims() {
        [a, b, c] => Ok((a, b, c)),
        _ => Err(Error::dim(format!(
            "{what} must be order 3, got order {}",
            x.order()
        ))),
    }
}

/// Lateral slice `X(:, j, :)` (0-based `j`) of an order-3 tensor.
pub fn lateral_slice<T: Scalar>(x: &DenseTensor<T>, j: usize) -> Matrix<T> {
    let d = x.dims();
    let (r, jj) = (d[0], d[1]);
    Matrix::from_fn(r, d[2], |a, b| x.data()[a + r * j + r * jj * b])
}

/// Mode-2 subchain product `A ⊠₂ B`: slice `j1 + J1 j2` of the result is
/// `A(j1) B(j2)`.
pub fn subchain_product<T: Scalar>(
    a: &DenseTensor<T>,
    b: &DenseTensor<T>,
) -> Result<DenseTensor<T>> {
    let (i1, j1, k) = dims3(a, "left operand")?;
    let (k2, j2, i2) = dims3(b, "right operand")?;
    if k != k2 {
        return Err(Error::dim(format!(
            "subchain product inner ranks differ: {k} vs {k2}"
        )));
    }
    let mut out = DenseTensor::zeros(Shape::new(vec![i1, j1 * j2, i2])?);
    let rows = i1 * j1;
    let out_cs = (rows * j2) as isize;
    for jb in 0..j2 {
        // rows (r, j1) of A times slice B(jb) fill rows (r, j1 + J1 jb).
        T::gemm(
            rows,
            k,
            i2,
            T::one(),
            a.data(),
            (1, rows as isize),
            &b.data()[k * jb..],
            (1, (k * j2) as isize),
            T::zero(),
            &mut out.data_mut()[rows * jb..],
            (1, out_cs),
        );
    }
    Ok(out)
}

/// Mode-2 slices-Hadamard product `A ⊛₂ B`: slice `j` is `A(j) B(j)`.
pub fn slices_hadamard<T: Scalar>(
    a: &DenseTensor<T>,
    b: &DenseTensor<T>,
) -> Result<DenseTensor<T>> {
    let (i1, j, k) = dims3(a, "left operand")?;
    let (k2, j2, i2) = dims3(b, "right operand")?;
    if k != k2 || j != j2 {
        return Err(Error::dim(format!(
            "slices-Hadamard product needs matching slices: {:?} vs {:?}",
            a.dims(),
            b.dims()
        )));
    }
    let mut out = DenseTensor::zeros(Shape::new(vec![i1, j, i2])?);
    for s in 0..j {
        T::gemm(
            i1,
            k,
            i2,
            T::one(),
            &a.data()[i1 * s..],
            (1, (i1 * j) as isize),
            &b.data()[k * s..],
            (1, (k * j) as isize),
            T::zero(),
            &mut out.data_mut()[i1 * s..],
            (1, (i1 * j) as isize),
        );
    }
    Ok(out)
}

/// Chains `⊠₂` over the given cores in order.
pub fn chain_subchain<T: Scalar>(cores: &[&DenseTensor<T>]) -> Result<DenseTensor<T>> {
    let (first, rest) = cores
        .split_first()
        .ok_or_else(|| Error::arg("empty core chain"))?;
    rest.iter()
        .try_fold((*first).clone(), |acc, c| subchain_product(&acc, c))
}

/// Design matrix `G_[2]` of a subchain tensor `R_{n+1} x J x R_n`: the
/// `J x R_n R_{n+1}` matrix with entry `(j, a + R_n b) = P_j(b, a)`.
pub fn design_matrix<T: Scalar>(sub: &DenseTensor<T>) -> Result<Matrix<T>> {
    let (rb, j, ra) = dims3(sub, "subchain tensor")?;
    let src = sub.data();
    let mut out = Matrix::zeros(j, ra * rb);
    let dst = out.data_mut();
    for b in 0..rb {
        for a in 0..ra {
            let col = &mut dst[(a + ra * b) * j..(a + ra * b + 1) * j];
            for (jj, v) in col.iter_mut().enumerate() {
                *v = src[b + rb * jj + rb * j * a];
            }
        }
    }
    debug_assert_eq!(out, sub.unfold(2, UnfoldKind::ModeN)?);
    Ok(out)
}
