//! Dense least-squares kernels.
//!
//! Full-rank overdetermined systems go through Householder QR. Rank
//! deficiency (smallest `|r_ii|` below `RANK_CUTOFF` times the largest) and
//! underdetermined systems fall back to the minimum-norm solution from a
//! one-sided Jacobi SVD, truncated at the same relative cutoff.

use num_traits::{Float, One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{RealScalar, Scalar};
use crate::tensor::Matrix;

/// Relative singular value cutoff of the rank-deficient path.
pub const RANK_CUTOFF: f64 = 1e-12;

/// Householder QR of a tall matrix, `A = Q R`, in compact form
/// `Q = I - V T V^H`.
struct Qr<T: Scalar> {
    /// Reflectors (p x q), zero above the diagonal.
    v: Matrix<T>,
    /// Upper triangular (q x q).
    t: Matrix<T>,
    r: Matrix<T>,
}

/// Panels of at most this many columns are factored column by column.
const QR_PANEL: usize = 8;

impl<T: Scalar> Qr<T> {
    fn new(mut a: Matrix<T>) -> Self {
        let (p, q) = (a.rows(), a.cols());
        let mut t = Matrix::zeros(q, q);
        let mut diag = vec![T::zero(); q];
        factor_block(&mut a, 0, q, &mut t, &mut diag);
        let v = Matrix::from_fn(p, q, |i, j| if i >= j { a[(i, j)] } else { T::zero() });
        let r = Matrix::from_fn(q, q, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Less => a[(i, j)],
            std::cmp::Ordering::Equal => diag[i],
            std::cmp::Ordering::Greater => T::zero(),
        });
        Self { v, t, r }
    }

    /// Ratio of the smallest to the largest `|r_ii|`.
    fn rcond_estimate(&self) -> T::Real {
        let q = self.r.cols();
        let mags = (0..q).map(|i| self.r[(i, i)].modulus());
        let (lo, hi) = mags.fold((T::Real::infinity(), T::Real::zero()), |(lo, hi), m| {
            (lo.min(m), hi.max(m))
        });
        if hi == T::Real::zero() {
            T::Real::zero()
        } else {
            lo / hi
        }
    }

    fn r(&self) -> &Matrix<T> {
        &self.r
    }

    /// Solves `R z = c` for the leading `q` rows of `c`.
    fn back_substitute(&self, c: &Matrix<T>) -> Matrix<T> {
        let q = self.r.cols();
        let mut z = Matrix::zeros(q, c.cols());
        for j in 0..c.cols() {
            for i in (0..q).rev() {
                let mut acc = c[(i, j)];
                for l in i + 1..q {
                    acc -= self.r[(i, l)] * z[(l, j)];
                }
                z[(i, j)] = acc / self.r[(i, i)];
            }
        }
        z
    }

    /// Leading `q` rows of `Q^H b = b - V T^H V^H b`.
    fn leading_qh(&self, b: &Matrix<T>) -> Matrix<T> {
        let q = self.v.cols();
        let y = self.v.adjoint_matmul(b).expect("same rows");
        let z = self.t.adjoint_matmul(&y).expect("q rows");
        let v1 = self.v.select_rows(&(0..q).collect::<Vec<_>>());
        let vz = v1.matmul(&z).expect("q cols");
        Matrix::from_fn(q, b.cols(), |i, j| b[(i, j)] - vz[(i, j)])
    }

    /// Thin unitary factor `Q` (p x q): `E - V (T V_1^H)` with `V_1` the
    /// leading `q` rows of `V`.
    fn thin_q(&self) -> Matrix<T> {
        let (p, q) = (self.v.rows(), self.v.cols());
        let v1h = self.v.select_rows(&(0..q).collect::<Vec<_>>()).adjoint();
        let vt = self.v.matmul(&self.t.matmul(&v1h).expect("q x q")).expect("q cols");
        Matrix::from_fn(p, q, |i, j| if i == j { T::one() - vt[(i, j)] } else { -vt[(i, j)] })
    }
}

/// Copy of the reflectors of columns `c0..c0+nc` restricted to rows `r0..`,
/// zero above the diagonal.
fn reflectors<T: Scalar>(a: &Matrix<T>, r0: usize, c0: usize, nc: usize) -> Matrix<T> {
    Matrix::from_fn(a.rows() - r0, nc, |i, j| {
        if r0 + i >= c0 + j {
            a[(r0 + i, c0 + j)]
        } else {
            T::zero()
        }
    })
}

/// Recursive QR of columns `c0..c0+nc` (rows `c0..`), `R` and reflectors in
/// place, filling the matching diagonal block of `t`.
fn factor_block<T: Scalar>(a: &mut Matrix<T>, c0: usize, nc: usize, t: &mut Matrix<T>, diag: &mut [T]) {
    if nc <= QR_PANEL {
        factor_panel(a, c0, nc, t, diag);
        return;
    }
    let p = a.rows();
    let n1 = nc / 2;
    let n2 = nc - n1;
    factor_block(a, c0, n1, t, diag);
    // A2 <- Q1^H A2 = A2 - V1 T1^H (V1^H A2) on rows c0..
    let v1 = reflectors(a, c0, c0, n1);
    let rows = p - c0;
    let mut w = Matrix::zeros(n1, n2);
    {
        let a2 = &a.data()[c0 + (c0 + n1) * p..];
        let v1c;
        let v1d: &[T] = if T::IS_COMPLEX {
            v1c = v1.data().iter().map(|x| x.conj()).collect::<Vec<_>>();
            &v1c
        } else {
            v1.data()
        };
        T::gemm(n1, rows, n2, T::one(), v1d, (rows as isize, 1), a2, (1, p as isize), T::zero(), w.data_mut(), (1, n1 as isize));
    }
    let t1 = Matrix::from_fn(n1, n1, |i, j| t[(c0 + i, c0 + j)]);
    let w = t1.adjoint_matmul(&w).expect("n1 rows");
    {
        let a2 = &mut a.data_mut()[c0 + (c0 + n1) * p..];
        T::gemm(rows, n1, n2, -T::one(), v1.data(), (1, rows as isize), w.data(), (1, n1 as isize), T::one(), a2, (1, p as isize));
    }
    factor_block(a, c0 + n1, n2, t, diag);
    // T12 = -T1 (V1^H V2) T2
    let v2 = reflectors(a, c0, c0 + n1, n2);
    let g = v1.adjoint_matmul(&v2).expect("same rows");
    let t2 = Matrix::from_fn(n2, n2, |i, j| t[(c0 + n1 + i, c0 + n1 + j)]);
    let t12 = t1.matmul(&g).and_then(|x| x.matmul(&t2)).expect("conformal");
    for j in 0..n2 {
        for i in 0..n1 {
            t[(c0 + i, c0 + n1 + j)] = -t12[(i, j)];
        }
    }
}

/// Column-by-column Householder QR of a narrow panel.
fn factor_panel<T: Scalar>(a: &mut Matrix<T>, c0: usize, nc: usize, t: &mut Matrix<T>, diag: &mut [T]) {
    let p = a.rows();
    for k in c0..c0 + nc {
        let col = &mut a.data_mut()[k * p + k..(k + 1) * p];
        let norm = crate::tensor::frobenius(col);
        let x0 = col[0];
        let tau = if norm == T::Real::zero() {
            diag[k] = T::zero();
            T::Real::zero()
        } else {
            // u = x + phase(x0) ‖x‖ e1, so H x = -phase(x0) ‖x‖ e1.
            let m0 = x0.modulus();
            let phase = if m0 == T::Real::zero() {
                T::one()
            } else {
                x0.scale(m0.recip())
            };
            col[0] = x0 + phase.scale(norm);
            diag[k] = -phase.scale(norm);
            // tau = 2 / u^H u = 1 / (‖x‖ (‖x‖ + |x0|))
            (norm * (norm + m0)).recip()
        };
        let (h, rest) = a.data_mut().split_at_mut((k + 1) * p);
        let u = &h[k * p + k..];
        if tau != T::Real::zero() {
            for j in k + 1..c0 + nc {
                reflect(u, tau, &mut rest[(j - k - 1) * p + k..(j - k) * p]);
            }
        }
        // T(c0..k, k) = -tau T(c0..k, c0..k) V(:, c0..k)^H u_k
        let tk = T::from_real(tau);
        let dots: Vec<T> = (c0..k)
            .map(|i| {
                let vi = &h[i * p + k..(i + 1) * p];
                vi.iter().zip(u).fold(T::zero(), |s, (&x, &y)| s + x.conj() * y)
            })
            .collect();
        for i in c0..k {
            let mut acc = T::zero();
            for l in i..k {
                acc += t[(i, l)] * dots[l - c0];
            }
            t[(i, k)] = -tk * acc;
        }
        t[(k, k)] = tk;
    }
}

/// `y <- (I - tau u u^H) y`.
#[inline]
fn reflect<T: Scalar>(u: &[T], tau: T::Real, y: &mut [T]) {
    let mut dot = T::zero();
    for (&ui, &yi) in u.iter().zip(y.iter()) {
        dot += ui.conj() * yi;
    }
    let w = dot.scale(tau);
    for (&ui, yi) in u.iter().zip(y.iter_mut()) {
        *yi -= ui * w;
    }
}

/// Thin singular value decomposition `A = U diag(s) V^H` by one-sided
/// Jacobi rotations; `U` is returned unnormalized as `A V` (columns of
/// norm `s_i`).
pub struct Svd<T: Scalar> {
    pub av: Matrix<T>,
    pub v: Matrix<T>,
    pub s: Vec<T::Real>,
}

impl<T: Scalar> Svd<T> {
    pub fn new(a: &Matrix<T>) -> Self {
        let (p, q) = (a.rows(), a.cols());
        let mut w = a.clone();
        let mut v = Matrix::<T>::identity(q);
        let eps = T::Real::epsilon();
        // columns below this squared norm are numerically zero
        let floor = {
            let f = eps * a.frobenius_norm();
            f * f
        };
        for _sweep in 0..80 {
            let mut rotated = false;
            for i in 0..q {
                for j in i + 1..q {
                    let (ci, cj) = (w.col(i), w.col(j));
                    let alpha: T::Real = ci.iter().map(|x| x.abs_sq()).fold(Zero::zero(), |s, x| s + x);
                    let beta: T::Real = cj.iter().map(|x| x.abs_sq()).fold(Zero::zero(), |s, x| s + x);
                    let gamma: T = ci.iter().zip(cj).map(|(&x, &y)| x.conj() * y).sum();
                    let g = gamma.modulus();
                    if alpha <= floor || beta <= floor || g <= eps * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let phase = gamma.scale(g.recip()).conj();
                    let zeta = (beta - alpha) / (g * T::Real::of(2.0));
                    let sign = if zeta < T::Real::zero() { -T::Real::one() } else { T::Real::one() };
                    let t = sign / (zeta.abs() + (T::Real::one() + zeta * zeta).sqrt());
                    let c = (T::Real::one() + t * t).sqrt().recip();
                    let s = c * t;
                    rotate_cols(w.data_mut(), p, i, j, phase, c, s);
                    rotate_cols(v.data_mut(), q, i, j, phase, c, s);
                }
            }
            if !rotated {
                break;
            }
        }
        let s = (0..q).map(|j| crate::tensor::frobenius(w.col(j))).collect();
        Self { av: w, v, s }
    }

    /// Minimum-norm solution of `A z = b` truncating singular values below
    /// `cutoff * max(s)`.
    pub fn solve(&self, b: &Matrix<T>, cutoff: T::Real) -> Matrix<T> {
        let q = self.v.rows();
        let smax = self.s.iter().copied().fold(T::Real::zero(), Float::max);
        let mut z = Matrix::zeros(q, b.cols());
        if smax == T::Real::zero() {
            return z;
        }
        for (k, &sk) in self.s.iter().enumerate() {
            if sk <= cutoff * smax {
                continue;
            }
            let inv = (sk * sk).recip();
            let uk = self.av.col(k);
            for j in 0..b.cols() {
                let coef: T = uk.iter().zip(b.col(j)).map(|(&u, &y)| u.conj() * y).sum();
                let coef = coef.scale(inv);
                for (zi, &vi) in z.col_mut(j).iter_mut().zip(self.v.col(k)) {
                    *zi += vi * coef;
                }
            }
        }
        z
    }

    /// Orthonormal basis of the numerical range (columns with
    /// `s > cutoff * max(s)`).
    pub fn range_basis(&self, cutoff: T::Real) -> Matrix<T> {
        let smax = self.s.iter().copied().fold(T::Real::zero(), Float::max);
        let keep: Vec<usize> = (0..self.s.len())
            .filter(|&k| smax > T::Real::zero() && self.s[k] > cutoff * smax)
            .collect();
        let p = self.av.rows();
        Matrix::from_fn(p, keep.len(), |i, j| {
            let k = keep[j];
            self.av[(i, k)].scale(self.s[k].recip())
        })
    }
}

/// Columns `i, j` of a column-major buffer with `rows` rows:
/// `c_j <- phase c_j`, then the real rotation
/// `(c_i, c_j) <- (c c_i - s c_j, s c_i + c c_j)`.
fn rotate_cols<T: Scalar>(
    d: &mut [T],
    rows: usize,
    i: usize,
    j: usize,
    phase: T,
    c: T::Real,
    s: T::Real,
) {
    let (lo, hi) = d.split_at_mut(j * rows);
    let ci = &mut lo[i * rows..(i + 1) * rows];
    let cj = &mut hi[..rows];
    for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
        let yp = *y * phase;
        let xn = x.scale(c) - yp.scale(s);
        *y = x.scale(s) + yp.scale(c);
        *x = xn;
    }
}

fn check_ls<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<()> {
    if a.rows() == 0 || a.cols() == 0 || b.cols() == 0 {
        return Err(Error::arg("least squares with an empty operand"));
    }
    if a.rows() != b.rows() {
        return Err(Error::dim(format!(
            "A has {} rows but B has {}",
            a.rows(),
            b.rows()
        )));
    }
    Ok(())
}

/// `argmin_Z ‖A Z − B‖_F`, minimum-norm when `A` is rank deficient.
pub fn solve_ls<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    check_ls(a, b)?;
    let cutoff = T::Real::of(RANK_CUTOFF);
    if a.rows() < a.cols() {
        return Ok(Svd::new(a).solve(b, cutoff));
    }
    let qr = Qr::new(a.clone());
    let lead = qr.leading_qh(b);
    if qr.rcond_estimate() > cutoff {
        Ok(qr.back_substitute(&lead))
    } else {
        // ‖A z − b‖² = ‖R z − c_1‖² + ‖c_2‖²
        Ok(Svd::new(qr.r()).solve(&lead, cutoff))
    }
}

/// Real `Z` minimizing `‖A Z − B‖_F` for complex `A`, `B`: the stacked
/// system `[Re A; Im A] Z = [Re B; Im B]`.
pub fn solve_ls_real<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T::Real>> {
    check_ls(a, b)?;
    let stack = |m: &Matrix<T>| {
        let p = m.rows();
        Matrix::from_fn(2 * p, m.cols(), |i, j| {
            if i < p {
                m[(i, j)].re()
            } else {
                m[(i - p, j)].im()
            }
        })
    };
    solve_ls(&stack(a), &stack(b))
}

/// Statistical leverage scores of the rows of `a`: squared row norms of an
/// orthonormal basis of its column space.
pub fn leverage_scores<T: Scalar>(a: &Matrix<T>) -> Vec<T::Real> {
    let cutoff = T::Real::of(RANK_CUTOFF);
    let basis = if a.rows() >= a.cols() {
        let qr = Qr::new(a.clone());
        if qr.rcond_estimate() > cutoff {
            qr.thin_q()
        } else {
            Svd::new(a).range_basis(cutoff)
        }
    } else {
        Svd::new(a).range_basis(cutoff)
    };
    (0..a.rows())
        .map(|i| {
            (0..basis.cols())
                .map(|j| basis[(i, j)].abs_sq())
                .fold(T::Real::zero(), |s, x| s + x)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn randm<T: Scalar>(p: usize, q: usize, rng: &mut ChaCha8Rng) -> Matrix<T> {
        Matrix::from_fn(p, q, |_, _| T::standard_normal(rng))
    }

    fn residual<T: Scalar>(a: &Matrix<T>, z: &Matrix<T>, b: &Matrix<T>) -> f64 {
        a.matmul(z).unwrap().sub(b).unwrap().frobenius_norm().to_f64_lossy()
    }

    fn to_na(m: &Matrix<f64>) -> DMatrix<f64> {
        DMatrix::from_column_slice(m.rows(), m.cols(), m.data())
    }

    fn to_na_c(m: &Matrix<Complex64>) -> DMatrix<Complex64> {
        DMatrix::from_column_slice(m.rows(), m.cols(), m.data())
    }

    #[test]
    fn identity_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = randm::<f64>(4, 3, &mut rng);
        let z = solve_ls(&Matrix::identity(4), &b).unwrap();
        assert!(z.sub(&b).unwrap().frobenius_norm() < 1e-14);
    }

    #[test]
    fn planted_solutions_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = randm::<f64>(30, 7, &mut rng);
        let z0 = randm::<f64>(7, 3, &mut rng);
        let z = solve_ls(&a, &a.matmul(&z0).unwrap()).unwrap();
        assert!(z.sub(&z0).unwrap().frobenius_norm() < 1e-10);

        let a = randm::<Complex64>(25, 6, &mut rng);
        let z0 = randm::<Complex64>(6, 2, &mut rng);
        let z = solve_ls(&a, &a.matmul(&z0).unwrap()).unwrap();
        assert!(z.sub(&z0).unwrap().frobenius_norm() < 1e-10);
    }

    #[test]
    fn rank_deficient_matches_svd_minimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let base = randm::<f64>(12, 4, &mut rng);
        let a = Matrix::from_fn(12, 5, |i, j| base[(i, if j == 4 { 1 } else { j })]);
        let b = randm::<f64>(12, 2, &mut rng);
        let z = solve_ls(&a, &b).unwrap();
        let oracle = to_na(&a).svd(true, true).solve(&to_na(&b), 1e-10).unwrap();
        let zo = Matrix::from_col_major(5, 2, oracle.as_slice().to_vec()).unwrap();
        assert!((residual(&a, &z, &b) - residual(&a, &zo, &b)).abs() < 1e-10);
        assert!(z.sub(&zo).unwrap().frobenius_norm() < 1e-9);
    }

    #[test]
    fn underdetermined_is_minimum_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = randm::<Complex64>(3, 7, &mut rng);
        let b = randm::<Complex64>(3, 2, &mut rng);
        let z = solve_ls(&a, &b).unwrap();
        assert!(residual(&a, &z, &b) < 1e-12);
        let pinv = to_na_c(&a).pseudo_inverse(1e-12).unwrap() * to_na_c(&b);
        let zo = Matrix::from_col_major(7, 2, pinv.as_slice().to_vec()).unwrap();
        assert!(z.sub(&zo).unwrap().frobenius_norm() < 1e-10);
    }

    #[test]
    fn empty_and_mismatched_inputs() {
        let a = Matrix::<f64>::zeros(0, 2);
        assert!(solve_ls(&a, &Matrix::zeros(0, 1)).is_err());
        assert!(solve_ls(&Matrix::<f64>::identity(3), &Matrix::zeros(2, 1)).is_err());
        let z = solve_ls(&Matrix::<f64>::zeros(3, 2), &Matrix::identity(3)).unwrap();
        assert_eq!(z.frobenius_norm(), 0.0);
    }

    #[test]
    fn real_constrained_solves() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = randm::<f64>(10, 3, &mut rng);
        let b = randm::<f64>(10, 2, &mut rng);
        let z1 = solve_ls(&a, &b).unwrap();
        let z2 = solve_ls_real(&a.to_complex(), &b.to_complex()).unwrap();
        assert!(z1.sub(&z2).unwrap().frobenius_norm() < 1e-12);

        // real A, complex B: the imaginary block of A vanishes, so only
        // Re B is fitted; checked against the explicit stacked system
        let bi = randm::<f64>(10, 2, &mut rng);
        let bc = Matrix::from_fn(10, 2, |i, j| Complex64::new(b[(i, j)], bi[(i, j)]));
        let z = solve_ls_real(&a.to_complex(), &bc).unwrap();
        let sa = Matrix::from_fn(20, 3, |i, j| if i < 10 { a[(i, j)] } else { 0.0 });
        let sb = Matrix::from_fn(20, 2, |i, j| if i < 10 { b[(i, j)] } else { bi[(i - 10, j)] });
        let oracle = to_na(&sa).svd(true, true).solve(&to_na(&sb), 1e-14).unwrap();
        let oracle = Matrix::from_col_major(3, 2, oracle.as_slice().to_vec()).unwrap();
        assert!(z.sub(&oracle).unwrap().frobenius_norm() < 1e-12);
        assert!(z.sub(&z1).unwrap().frobenius_norm() < 1e-12);

        // complex A with planted real Z
        let ac = randm::<Complex64>(12, 4, &mut rng);
        let z0 = randm::<f64>(4, 3, &mut rng);
        let z = solve_ls_real(&ac, &ac.matmul(&z0.to_complex()).unwrap()).unwrap();
        assert!(z.sub(&z0).unwrap().frobenius_norm() < 1e-10);
    }

    #[test]
    fn blocked_factorization_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (p, q) in [(40, 9), (60, 25), (33, 33)] {
            let a = randm::<Complex64>(p, q, &mut rng);
            let b = randm::<Complex64>(p, 3, &mut rng);
            let z = solve_ls(&a, &b).unwrap();
            let zo = to_na_c(&a).pseudo_inverse(1e-12).unwrap() * to_na_c(&b);
            let zo = Matrix::from_col_major(q, 3, zo.as_slice().to_vec()).unwrap();
            assert!(z.sub(&zo).unwrap().frobenius_norm() < 1e-9 * zo.frobenius_norm().max(1.0));
            let qr = Qr::new(a.clone());
            let qm = qr.thin_q();
            let ortho = qm.adjoint_matmul(&qm).unwrap().sub(&Matrix::identity(q)).unwrap();
            assert!(ortho.frobenius_norm() < 1e-12);
            let rec = qm.matmul(qr.r()).unwrap().sub(&a).unwrap();
            assert!(rec.frobenius_norm() < 1e-12 * a.frobenius_norm());
        }
        let a = randm::<f64>(50, 20, &mut rng);
        let b = randm::<f64>(50, 2, &mut rng);
        let zo = to_na(&a).pseudo_inverse(1e-12).unwrap() * to_na(&b);
        let zo = Matrix::from_col_major(20, 2, zo.as_slice().to_vec()).unwrap();
        assert!(solve_ls(&a, &b).unwrap().sub(&zo).unwrap().frobenius_norm() < 1e-10);
    }

    #[test]
    fn leverage_examples() {
        // orthonormal columns with equal row norms
        let h = Matrix::<f64>::from_rows(&[&[1.0, 1.0], &[1.0, -1.0], &[1.0, 1.0], &[1.0, -1.0]]).unwrap();
        let l = leverage_scores(&h);
        assert!(l.iter().all(|&x| (x - 0.5).abs() < 1e-14));
        // rank one, all mass on row 0
        let r1 = Matrix::from_fn(5, 4, |i, j| if i == 0 { (j + 1) as f64 } else { 0.0 });
        let l = leverage_scores(&r1);
        assert!((l[0] - 1.0).abs() < 1e-12 && l[1..].iter().all(|&x| x.abs() < 1e-12));
        // wide matrix
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let w = randm::<f64>(3, 8, &mut rng);
        assert!(leverage_scores(&w).iter().all(|&x| (x - 1.0).abs() < 1e-10));
    }

    proptest! {
        #[test]
        fn matches_svd_oracle(p in 1usize..12, q in 1usize..6, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = randm::<f64>(p, q, &mut rng);
            let b = randm::<f64>(p, 2, &mut rng);
            let z = solve_ls(&a, &b).unwrap();
            let zo = to_na(&a).pseudo_inverse(1e-12).unwrap() * to_na(&b);
            let zo = Matrix::from_col_major(q, 2, zo.as_slice().to_vec()).unwrap();
            let scale = zo.frobenius_norm().max(1.0);
            prop_assert!(z.sub(&zo).unwrap().frobenius_norm() < 1e-8 * scale);
        }

        #[test]
        fn jacobi_singular_values(p in 1usize..9, q in 1usize..9, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = randm::<Complex64>(p, q, &mut rng);
            let svd = Svd::new(&a);
            let mut s = svd.s.clone();
            s.sort_by(|x, y| y.partial_cmp(x).unwrap());
            let so = to_na_c(&a).singular_values();
            for k in 0..p.min(q) {
                prop_assert!((s[k] - so[k]).abs() < 1e-10 * so[0].max(1.0));
            }
            let rec = svd.av.matmul(&svd.v.adjoint()).unwrap();
            prop_assert!(rec.sub(&a).unwrap().frobenius_norm() < 1e-10 * a.frobenius_norm());
        }
    }
}
