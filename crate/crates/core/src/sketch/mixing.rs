//! Per-mode mixing `F_j D_j`: a random sign flip followed by the unitary
//! DFT of length `I_j`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rand::Rng;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::{ComplexOf, RealScalar, Scalar};
use crate::tensor::{DenseTensor, Matrix};

/// Applies `f` to every mode-`n` fiber (1-based `n`) of little-endian data,
/// seen as `Complex<T::Real>`.
pub(crate) fn for_each_complex_fiber<T: Scalar>(
    data: &mut [T],
    dims: &[usize],
    n: usize,
    buf: &mut Vec<Complex<T::Real>>,
    mut f: impl FnMut(&mut [Complex<T::Real>]),
) {
    let len = dims[n - 1];
    let left: usize = dims[..n - 1].iter().product();
    let right: usize = dims[n..].iter().product();
    for r in 0..right {
        let base = r * left * len;
        for l in 0..left {
            buf.clear();
            buf.extend((0..len).map(|i| data[base + l + i * left].to_complex()));
            f(buf);
            for (i, &v) in buf.iter().enumerate() {
                data[base + l + i * left] = T::from_complex(v);
            }
        }
    }
}

/// Random sign-flip operator `D_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignFlip {
    signs: Vec<i8>,
}

impl SignFlip {
    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self {
            signs: (0..len).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect(),
        }
    }

    pub fn identity(len: usize) -> Self {
        Self { signs: vec![1; len] }
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    fn apply<R: RealScalar>(&self, x: &mut [Complex<R>]) {
        for (v, &s) in x.iter_mut().zip(&self.signs) {
            if s < 0 {
                *v = -*v;
            }
        }
    }
}

/// `F_j D_j` for one mode, with its inverse `D_j F_j^*`.
#[derive(Clone)]
pub struct ModeMixer<R: RealScalar> {
    sign: SignFlip,
    forward: Arc<dyn Fft<R>>,
    inverse: Arc<dyn Fft<R>>,
    scale: R,
}

impl<R: RealScalar> fmt::Debug for ModeMixer<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModeMixer")
            .field("len", &self.len())
            .field("signs", &self.sign.signs)
            .finish()
    }
}

impl<R: RealScalar> ModeMixer<R> {
    pub fn new(sign: SignFlip) -> Self {
        let mut planner = FftPlanner::new();
        let len = sign.len();
        Self {
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
            scale: R::of(len as f64).sqrt().recip(),
            sign,
        }
    }

    pub fn random<G: Rng + ?Sized>(len: usize, rng: &mut G) -> Self {
        Self::new(SignFlip::random(len, rng))
    }

    pub fn len(&self) -> usize {
        self.sign.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sign.is_empty()
    }

    pub fn sign(&self) -> &SignFlip {
        &self.sign
    }

    /// `x <- F D x`.
    pub fn mix_vec(&self, x: &mut [Complex<R>]) {
        self.sign.apply(x);
        self.forward.process(x);
        x.iter_mut().for_each(|v| *v = v.scale(self.scale));
    }

    /// `x <- D F^* x`.
    pub fn unmix_vec(&self, x: &mut [Complex<R>]) {
        self.inverse.process(x);
        x.iter_mut().for_each(|v| *v = v.scale(self.scale));
        self.sign.apply(x);
    }

    /// Dense `F D`, for oracles and diagnostics.
    pub fn matrix(&self) -> Matrix<R::Complex> {
        let n = self.len();
        let mut m = Matrix::zeros(n, n);
        let mut col = vec![Complex::new(R::zero(), R::zero()); n];
        for j in 0..n {
            col.iter_mut().for_each(|v| *v = Complex::new(R::zero(), R::zero()));
            col[j] = Complex::new(R::one(), R::zero());
            self.mix_vec(&mut col);
            for (d, &v) in m.col_mut(j).iter_mut().zip(&col) {
                *d = R::Complex::from_complex(v);
            }
        }
        m
    }
}

fn check_core<T: Scalar, R: RealScalar>(core: &DenseTensor<T>, mixer: &ModeMixer<R>) -> Result<()> {
    if core.order() != 3 || core.dims()[1] != mixer.len() {
        return Err(Error::dim(format!(
            "mixer of length {} cannot act on mode 2 of a {:?} core",
            mixer.len(),
            core.dims()
        )));
    }
    Ok(())
}

/// `Ĝ = G ×₂ (F D)`.
pub fn mix_core<T: Scalar>(
    core: &DenseTensor<T>,
    mixer: &ModeMixer<T::Real>,
) -> Result<DenseTensor<ComplexOf<T>>> {
    check_core(core, mixer)?;
    let mut out = core.to_complex();
    let dims = out.dims().to_vec();
    let mut buf = Vec::new();
    for_each_complex_fiber(out.data_mut(), &dims, 2, &mut buf, |f| mixer.mix_vec(f));
    Ok(out)
}

/// `G = Ĝ ×₂ (D F^*)`.
pub fn unmix_core<T: Scalar>(
    core: &DenseTensor<T>,
    mixer: &ModeMixer<T::Real>,
) -> Result<DenseTensor<ComplexOf<T>>> {
    check_core(core, mixer)?;
    let mut out = core.to_complex();
    let dims = out.dims().to_vec();
    let mut buf = Vec::new();
    for_each_complex_fiber(out.data_mut(), &dims, 2, &mut buf, |f| mixer.unmix_vec(f));
    Ok(out)
}

/// `X̂ = X ×₁ (F_1 D_1) ⋯ ×_N (F_N D_N)`.
pub fn mix_tensor<T: Scalar>(
    x: &DenseTensor<T>,
    mixers: &[ModeMixer<T::Real>],
) -> Result<DenseTensor<ComplexOf<T>>> {
    if mixers.len() != x.order() {
        return Err(Error::dim(format!(
            "{} mixers for an order-{} tensor",
            mixers.len(),
            x.order()
        )));
    }
    for (k, (m, &d)) in mixers.iter().zip(x.dims()).enumerate() {
        if m.len() != d {
            return Err(Error::dim(format!(
                "mixer {} has length {}, mode has {d}",
                k + 1,
                m.len()
            )));
        }
    }
    let mut out = x.to_complex();
    let dims = out.dims().to_vec();
    let mut buf = Vec::new();
    for (k, m) in mixers.iter().enumerate() {
        for_each_complex_fiber(out.data_mut(), &dims, k + 1, &mut buf, |f| m.mix_vec(f));
    }
    Ok(out)
}

/// Mixers for every mode of `dims`, drawn in mode order.
pub fn random_mixers<R: RealScalar, G: Rng + ?Sized>(dims: &[usize], rng: &mut G) -> Vec<ModeMixer<R>> {
    dims.iter().map(|&d| ModeMixer::random(d, rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{kronecker, Shape};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dense_dft(n: usize) -> Matrix<Complex64> {
        let s = 1.0 / (n as f64).sqrt();
        Matrix::from_fn(n, n, |k, l| {
            let th = -2.0 * std::f64::consts::PI * (k * l) as f64 / n as f64;
            Complex64::from_polar(s, th)
        })
    }

    fn diag(sf: &SignFlip) -> Matrix<Complex64> {
        let n = sf.len();
        Matrix::from_fn(n, n, |i, j| {
            if i == j { Complex64::new(sf.signs()[i] as f64, 0.0) } else { Complex64::default() }
        })
    }

    #[test]
    fn fast_transform_matches_dense_dft() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=16 {
            let m = ModeMixer::<f64>::random(n, &mut rng);
            let want = dense_dft(n).matmul(&diag(m.sign())).unwrap();
            assert!(m.matrix().sub(&want).unwrap().frobenius_norm() < 1e-12);
        }
    }

    #[test]
    fn length_one_is_sign_flip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = ModeMixer::<f64>::random(1, &mut rng);
        let core = DenseTensor::from_fn(Shape::new(vec![2, 1, 3]).unwrap(), |i| (i[0] + i[2]) as f64);
        let mixed = mix_core(&core, &m).unwrap();
        let s = m.sign().signs()[0] as f64;
        for (a, b) in mixed.data().iter().zip(core.data()) {
            assert!((a - Complex64::new(s * b, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn core_mixing_matches_dense_product_and_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let core = DenseTensor::<f64>::from_fn(Shape::new(vec![2, 4, 2]).unwrap(), |_| rng.random());
        let m = ModeMixer::random(4, &mut rng);
        let got = mix_core(&core, &m).unwrap();
        let want = core.to_complex().mode_n_product(&m.matrix(), 2).unwrap();
        assert!(got.sub(&want).unwrap().frobenius_norm() < 1e-12);
        let back = unmix_core(&got, &m).unwrap();
        assert!(back.sub(&core.to_complex()).unwrap().frobenius_norm() < 1e-12);
        let wrong = ModeMixer::<f64>::random(3, &mut rng);
        assert!(mix_core(&core, &wrong).is_err());
    }

    #[test]
    fn tensor_mixing_is_unitary_kronecker_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = DenseTensor::<f64>::from_fn(Shape::new(vec![4, 4, 4]).unwrap(), |_| rng.random());
        let ms = random_mixers::<f64, _>(&[4, 4, 4], &mut rng);
        let xh = mix_tensor(&x, &ms).unwrap();
        assert!((xh.frobenius_norm() - x.frobenius_norm()).abs() < 1e-12);

        let x = DenseTensor::<f64>::from_fn(Shape::new(vec![2, 2, 2]).unwrap(), |_| rng.random());
        let ms = random_mixers::<f64, _>(&[2, 2, 2], &mut rng);
        let xh = mix_tensor(&x, &ms).unwrap();
        // vec(X̂) = (M_3 ⊗ M_2 ⊗ M_1) vec(X) in little-endian order
        let k = kronecker(&kronecker(&ms[2].matrix(), &ms[1].matrix()), &ms[0].matrix());
        let v = Matrix::from_col_major(8, 1, x.to_complex().into_data()).unwrap();
        let want = k.matmul(&v).unwrap();
        for (a, b) in xh.data().iter().zip(want.data()) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(mix_tensor(&x, &ms[..2]).is_err());

        let ones = DenseTensor::<f64>::from_fn(Shape::new(vec![1, 1]).unwrap(), |_| 3.0);
        let ms = random_mixers::<f64, _>(&[1, 1], &mut rng);
        let s = (ms[0].sign().signs()[0] * ms[1].sign().signs()[0]) as f64;
        assert!((mix_tensor(&ones, &ms).unwrap().data()[0] - Complex64::new(3.0 * s, 0.0)).norm() < 1e-15);
    }
}
