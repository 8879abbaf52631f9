//! Scalar abstraction shared by every tensor and solver.
//!
//! All numerical code is written once against [`Scalar`], which covers the
//! real floating point types and their complex counterparts. Complex support
//! is not optional: the Fourier mixing used by the KSRFT solvers turns real
//! data complex.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::Neg;

use num_complex::Complex;
use num_traits::{Float, FromPrimitive, NumAssign};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftNum;

/// Real floating point types (`f32`, `f64`).
pub trait RealScalar:
    Scalar<Real = Self> + Float + FftNum + FromPrimitive + PartialOrd + Display
{
    /// The complex type over this precision; always `Complex<Self>`.
    type Complex: Scalar<Real = Self>;

    /// Rounds an `f64` constant into this precision.
    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite constant")
    }

    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

/// Complex counterpart of a scalar type.
pub type ComplexOf<T> = <<T as Scalar>::Real as RealScalar>::Complex;

/// A real or complex field element stored in a tensor.
pub trait Scalar:
    Copy + Debug + Default + PartialEq + Send + Sync + 'static + NumAssign + Neg<Output = Self> + Sum
{
    type Real: RealScalar;

    const IS_COMPLEX: bool;

    fn from_real(r: Self::Real) -> Self;

    /// Keeps the real part when `Self` is real.
    fn from_complex(c: Complex<Self::Real>) -> Self;

    fn to_complex(self) -> Complex<Self::Real>;

    fn re(self) -> Self::Real;

    fn im(self) -> Self::Real;

    fn conj(self) -> Self;

    /// Squared modulus.
    fn abs_sq(self) -> Self::Real;

    fn modulus(self) -> Self::Real {
        self.abs_sq().sqrt()
    }

    fn scale(self, r: Self::Real) -> Self;

    /// Standard normal sample; complex values draw real and imaginary parts
    /// independently from N(0, 1).
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// `C <- alpha * A * B + beta * C` on strided storage.
    ///
    /// `A` is `m x k`, `B` is `k x n`, `C` is `m x n`; strides are in
    /// elements. Panics if a slice is too short for its stride pattern.
    #[allow(clippy::too_many_arguments)]
    fn gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: &[Self],
        a_strides: (isize, isize),
        b: &[Self],
        b_strides: (isize, isize),
        beta: Self,
        c: &mut [Self],
        c_strides: (isize, isize),
    );
}

fn check_extent(len: usize, rows: usize, cols: usize, (rs, cs): (isize, isize)) {
    if rows == 0 || cols == 0 {
        return;
    }
    assert!(rs >= 0 && cs >= 0, "negative strides are not supported");
    let last = (rows - 1) * rs as usize + (cols - 1) * cs as usize;
    assert!(last < len, "strided view exceeds buffer ({last} >= {len})");
}

/// Below this many multiply-adds the packing overhead of the blocked kernel
/// dominates.
const SMALL_GEMM: usize = 512;

#[allow(clippy::too_many_arguments)]
#[inline]
fn naive_gemm<T: Scalar>(
    m: usize,
    k: usize,
    n: usize,
    alpha: T,
    a: &[T],
    (rsa, csa): (isize, isize),
    b: &[T],
    (rsb, csb): (isize, isize),
    beta: T,
    c: &mut [T],
    (rsc, csc): (isize, isize),
) {
    let (rsa, csa, rsb, csb) = (rsa as usize, csa as usize, rsb as usize, csb as usize);
    let (rsc, csc) = (rsc as usize, csc as usize);
    for j in 0..n {
        for i in 0..m {
            let mut acc = T::zero();
            for l in 0..k {
                acc += a[i * rsa + l * csa] * b[l * rsb + j * csb];
            }
            let dst = &mut c[i * rsc + j * csc];
            *dst = if beta == T::zero() {
                alpha * acc
            } else {
                alpha * acc + beta * *dst
            };
        }
    }
}

macro_rules! real_scalar {
    ($t:ty, $gemm:path) => {
        impl RealScalar for $t {
            type Complex = Complex<$t>;
        }

        impl Scalar for $t {
            type Real = $t;
            const IS_COMPLEX: bool = false;

            #[inline]
            fn from_real(r: $t) -> Self {
                r
            }
            #[inline]
            fn from_complex(c: Complex<$t>) -> Self {
                c.re
            }
            #[inline]
            fn to_complex(self) -> Complex<$t> {
                Complex::new(self, 0.0)
            }
            #[inline]
            fn re(self) -> $t {
                self
            }
            #[inline]
            fn im(self) -> $t {
                0.0
            }
            #[inline]
            fn conj(self) -> Self {
                self
            }
            #[inline]
            fn abs_sq(self) -> $t {
                self * self
            }
            #[inline]
            fn modulus(self) -> $t {
                self.abs()
            }
            #[inline]
            fn scale(self, r: $t) -> Self {
                self * r
            }
            fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                StandardNormal.sample(rng)
            }
            fn gemm(
                m: usize,
                k: usize,
                n: usize,
                alpha: Self,
                a: &[Self],
                (rsa, csa): (isize, isize),
                b: &[Self],
                (rsb, csb): (isize, isize),
                beta: Self,
                c: &mut [Self],
                (rsc, csc): (isize, isize),
            ) {
                check_extent(a.len(), m, k, (rsa, csa));
                check_extent(b.len(), k, n, (rsb, csb));
                check_extent(c.len(), m, n, (rsc, csc));
                if m == 0 || n == 0 {
                    return;
                }
                if m * k * n <= SMALL_GEMM {
                    naive_gemm(m, k, n, alpha, a, (rsa, csa), b, (rsb, csb), beta, c, (rsc, csc));
                    return;
                }
                // SAFETY: every accessed offset was bounds-checked above.
                unsafe {
                    $gemm(
                        m,
                        k,
                        n,
                        alpha,
                        a.as_ptr(),
                        rsa,
                        csa,
                        b.as_ptr(),
                        rsb,
                        csb,
                        beta,
                        c.as_mut_ptr(),
                        rsc,
                        csc,
                    )
                }
            }
        }
    };
}

real_scalar!(f32, matrixmultiply::sgemm);
real_scalar!(f64, matrixmultiply::dgemm);

macro_rules! complex_scalar {
    ($t:ty, $gemm:path, $raw:ty) => {
        impl Scalar for Complex<$t> {
            type Real = $t;
            const IS_COMPLEX: bool = true;

            #[inline]
            fn from_real(r: $t) -> Self {
                Complex::new(r, 0.0)
            }
            #[inline]
            fn from_complex(c: Complex<$t>) -> Self {
                c
            }
            #[inline]
            fn to_complex(self) -> Complex<$t> {
                self
            }
            #[inline]
            fn re(self) -> $t {
                self.re
            }
            #[inline]
            fn im(self) -> $t {
                self.im
            }
            #[inline]
            fn conj(self) -> Self {
                Complex::new(self.re, -self.im)
            }
            #[inline]
            fn abs_sq(self) -> $t {
                self.re * self.re + self.im * self.im
            }
            #[inline]
            fn modulus(self) -> $t {
                self.re.hypot(self.im)
            }
            #[inline]
            fn scale(self, r: $t) -> Self {
                Complex::new(self.re * r, self.im * r)
            }
            fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                let re: $t = StandardNormal.sample(rng);
                let im: $t = StandardNormal.sample(rng);
                Complex::new(re, im)
            }
            fn gemm(
                m: usize,
                k: usize,
                n: usize,
                alpha: Self,
                a: &[Self],
                (rsa, csa): (isize, isize),
                b: &[Self],
                (rsb, csb): (isize, isize),
                beta: Self,
                c: &mut [Self],
                (rsc, csc): (isize, isize),
            ) {
                check_extent(a.len(), m, k, (rsa, csa));
                check_extent(b.len(), k, n, (rsb, csb));
                check_extent(c.len(), m, n, (rsc, csc));
                if m == 0 || n == 0 {
                    return;
                }
                if m * k * n <= SMALL_GEMM {
                    naive_gemm(m, k, n, alpha, a, (rsa, csa), b, (rsb, csb), beta, c, (rsc, csc));
                    return;
                }
                use matrixmultiply::CGemmOption::Standard;
                // SAFETY: Complex<T> is repr(C) with layout [re, im], which is
                // exactly the kernel's element type; offsets checked above.
                unsafe {
                    $gemm(
                        Standard,
                        Standard,
                        m,
                        k,
                        n,
                        [alpha.re, alpha.im],
                        a.as_ptr() as *const $raw,
                        rsa,
                        csa,
                        b.as_ptr() as *const $raw,
                        rsb,
                        csb,
                        [beta.re, beta.im],
                        c.as_mut_ptr() as *mut $raw,
                        rsc,
                        csc,
                    )
                }
            }
        }
    };
}

complex_scalar!(f32, matrixmultiply::cgemm, [f32; 2]);
complex_scalar!(f64, matrixmultiply::zgemm, [f64; 2]);

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn naive<T: Scalar>(m: usize, k: usize, n: usize, a: &[T], b: &[T]) -> Vec<T> {
        let mut c = vec![T::zero(); m * n];
        for j in 0..n {
            for i in 0..m {
                let mut s = T::zero();
                for l in 0..k {
                    s += a[i + l * m] * b[l + j * k];
                }
                c[i + j * m] = s;
            }
        }
        c
    }

    #[test]
    fn gemm_matches_naive_real_and_complex() {
        for (m, k, n) in [(5, 3, 4), (17, 9, 11)] {
            gemm_case(m, k, n);
        }
    }

    fn gemm_case(m: usize, k: usize, n: usize) {
        let a: Vec<f64> = (0..m * k).map(|x| x as f64 * 0.5 - 2.0).collect();
        let b: Vec<f64> = (0..k * n).map(|x| 1.0 / (x as f64 + 1.0)).collect();
        let mut c = vec![0.0; m * n];
        f64::gemm(m, k, n, 1.0, &a, (1, m as isize), &b, (1, k as isize), 0.0, &mut c, (1, m as isize));
        for (x, y) in c.iter().zip(naive(m, k, n, &a, &b)) {
            assert!((x - y).abs() < 1e-12);
        }

        let ac: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, -x * 0.3)).collect();
        let bc: Vec<Complex64> = b.iter().map(|&x| Complex64::new(0.2, x)).collect();
        let mut cc = vec![Complex64::default(); m * n];
        Complex64::gemm(
            m,
            k,
            n,
            Complex64::new(1.0, 0.0),
            &ac,
            (1, m as isize),
            &bc,
            (1, k as isize),
            Complex64::new(0.0, 0.0),
            &mut cc,
            (1, m as isize),
        );
        for (x, y) in cc.iter().zip(naive(m, k, n, &ac, &bc)) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn complex_helpers() {
        let z = Complex64::new(3.0, -4.0);
        assert_eq!(z.abs_sq(), 25.0);
        assert_eq!(Scalar::modulus(z), 5.0);
        assert_eq!(Scalar::conj(z), Complex64::new(3.0, 4.0));
        assert_eq!(<f64 as Scalar>::from_complex(z), 3.0);
        assert_eq!(Scalar::im(2.5f64), 0.0);
    }
}
