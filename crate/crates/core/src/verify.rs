//! Randomized checks of the algebraic identities the sketched solvers rely
//! on. Every suite compares the library route against an index-loop oracle
//! that shares no code with it beyond tensor storage.

use std::fmt;
use std::time::Instant;

use num_complex::{Complex, Complex64};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::ring::{design_matrix, slices_hadamard, subchain_product, TrCores};
use crate::scalar::{RealScalar, Scalar};
use crate::sketch::{
    draw_joint_samples, mix_core, random_mixers, sampled_subchain, tensorsketch_matrix,
    tensorsketch_subchain, IndexDist, TensorSketch,
};
use crate::tensor::{khatri_rao, kronecker, DenseTensor, Matrix, Shape, UnfoldKind};

/// Largest accepted relative deviation.
pub const TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// `(A ×₂ A) ⊠₂ (B ×₂ B) = (A ⊠₂ B) ×₂ (B ⊗ A)`.
    SubchainKronecker,
    /// `(A ×₂ A) ⊛₂ (B ×₂ B) = (A ⊠₂ B) ×₂ (Bᵀ ⊙ Aᵀ)ᵀ`.
    SlicesHadamardKhatriRao,
    /// The FFT evaluation of `P ×₂ T` for a chain `P` and TensorSketch `T`.
    TensorSketchFft,
    /// `⊠₂` over cores `n+1, ..., n-1` equals the slice-product subchain.
    SubchainChain,
    /// Sampling mixed cores equals the Khatri-Rao SRFT applied to the design.
    KsrftFactorization,
    /// Both mode-product unfolding laws.
    UnfoldingLaws,
    /// `H` as a mod-sum and `S` as a product of per-mode hashes.
    CombinedHash,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::SubchainKronecker,
        Suite::SlicesHadamardKhatriRao,
        Suite::TensorSketchFft,
        Suite::SubchainChain,
        Suite::KsrftFactorization,
        Suite::UnfoldingLaws,
        Suite::CombinedHash,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::SubchainKronecker => "subchain-kronecker",
            Suite::SlicesHadamardKhatriRao => "slices-hadamard-khatri-rao",
            Suite::TensorSketchFft => "tensorsketch-fft",
            Suite::SubchainChain => "subchain-chain",
            Suite::KsrftFactorization => "ksrft-factorization",
            Suite::UnfoldingLaws => "unfolding-laws",
            Suite::CombinedHash => "combined-hash",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub instances: usize,
    pub max_deviation: f64,
    pub seconds: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.max_deviation <= TOLERANCE
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<28} {} instances, max deviation {:.3e} (tol {:.0e}), {:.2}s",
            if self.passed() { "PASS" } else { "FAIL" },
            self.suite.name(),
            self.instances,
            self.max_deviation,
            TOLERANCE,
            self.seconds
        )
    }
}

/// Runs `instances` random cases; even cases are real, odd cases complex
/// wherever the identity admits complex data.
pub fn run_suite(suite: Suite, instances: usize, seed: u64) -> Result<SuiteReport> {
    let clock = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((suite as u64) << 32));
    let mut worst = 0.0f64;
    for k in 0..instances {
        let complex = k % 2 == 1;
        let d = match (suite, complex) {
            (Suite::SubchainKronecker, false) => subchain_kronecker::<f64>(&mut rng)?,
            (Suite::SubchainKronecker, true) => subchain_kronecker::<Complex64>(&mut rng)?,
            (Suite::SlicesHadamardKhatriRao, false) => hadamard_khatri_rao::<f64>(&mut rng)?,
            (Suite::SlicesHadamardKhatriRao, true) => hadamard_khatri_rao::<Complex64>(&mut rng)?,
            (Suite::TensorSketchFft, false) => tensorsketch_fft::<f64>(&mut rng)?,
            (Suite::TensorSketchFft, true) => tensorsketch_fft::<Complex64>(&mut rng)?,
            (Suite::SubchainChain, false) => subchain_chain::<f64>(&mut rng)?,
            (Suite::SubchainChain, true) => subchain_chain::<Complex64>(&mut rng)?,
            (Suite::KsrftFactorization, _) => ksrft_factorization(&mut rng)?,
            (Suite::UnfoldingLaws, false) => unfolding_laws::<f64>(&mut rng)?,
            (Suite::UnfoldingLaws, true) => unfolding_laws::<Complex64>(&mut rng)?,
            (Suite::CombinedHash, _) => combined_hash(&mut rng)?,
        };
        worst = worst.max(if d.is_nan() { f64::INFINITY } else { d });
    }
    Ok(SuiteReport {
        suite,
        instances,
        max_deviation: worst,
        seconds: clock.elapsed().as_secs_f64(),
    })
}

pub fn run_all(instances: usize, seed: u64) -> Result<Vec<SuiteReport>> {
    Suite::ALL.iter().map(|&s| run_suite(s, instances, seed)).collect()
}

fn rel<T: Scalar>(got: &[T], want: &[T]) -> f64 {
    if got.len() != want.len() {
        return f64::INFINITY;
    }
    let num: f64 = got.iter().zip(want).map(|(a, b)| (*a - *b).abs_sq().to_f64_lossy()).sum();
    let den: f64 = want.iter().map(|b| b.abs_sq().to_f64_lossy()).sum();
    (num / den.max(f64::MIN_POSITIVE)).sqrt()
}

fn rand_tensor<T: Scalar>(dims: &[usize], rng: &mut impl Rng) -> DenseTensor<T> {
    DenseTensor::from_fn(Shape::new(dims.to_vec()).expect("positive dims"), |_| T::standard_normal(rng))
}

fn rand_matrix<T: Scalar>(r: usize, c: usize, rng: &mut impl Rng) -> Matrix<T> {
    Matrix::from_fn(r, c, |_, _| T::standard_normal(rng))
}

// ---- index-loop oracles on order-3 data `x(a, j, b) = data[a + A j + A J b]`

fn at<T: Scalar>(x: &DenseTensor<T>, a: usize, j: usize, b: usize) -> T {
    let d = x.dims();
    x.data()[a + d[0] * j + d[0] * d[1] * b]
}

fn build3<T: Scalar>(d0: usize, d1: usize, d2: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> DenseTensor<T> {
    let mut data = Vec::with_capacity(d0 * d1 * d2);
    for b in 0..d2 {
        for j in 0..d1 {
            for a in 0..d0 {
                data.push(f(a, j, b));
            }
        }
    }
    DenseTensor::from_vec(Shape::new(vec![d0, d1, d2]).expect("positive"), data).expect("sized")
}

fn o_mode2<T: Scalar>(x: &DenseTensor<T>, u: &Matrix<T>) -> DenseTensor<T> {
    let d = x.dims();
    build3(d[0], u.rows(), d[2], |a, r, b| (0..d[1]).map(|j| at(x, a, j, b) * u[(r, j)]).sum())
}

fn o_subchain<T: Scalar>(x: &DenseTensor<T>, y: &DenseTensor<T>) -> DenseTensor<T> {
    let (dx, dy) = (x.dims().to_vec(), y.dims().to_vec());
    build3(dx[0], dx[1] * dy[1], dy[2], |a, j, b| {
        let (j1, j2) = (j % dx[1], j / dx[1]);
        (0..dx[2]).map(|k| at(x, a, j1, k) * at(y, k, j2, b)).sum()
    })
}

fn o_hadamard<T: Scalar>(x: &DenseTensor<T>, y: &DenseTensor<T>) -> DenseTensor<T> {
    let (dx, dy) = (x.dims().to_vec(), y.dims().to_vec());
    build3(dx[0], dx[1], dy[2], |a, j, b| (0..dx[2]).map(|k| at(x, a, j, k) * at(y, k, j, b)).sum())
}

/// `(A ⊗ B)(i2 + I2 i1, j2 + J2 j1) = A(i1, j1) B(i2, j2)`.
fn o_kron<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let mut out = Matrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    for i1 in 0..a.rows() {
        for j1 in 0..a.cols() {
            for i2 in 0..b.rows() {
                for j2 in 0..b.cols() {
                    out[(i2 + b.rows() * i1, j2 + b.cols() * j1)] = a[(i1, j1)] * b[(i2, j2)];
                }
            }
        }
    }
    out
}

fn o_matmul<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    Matrix::from_fn(a.rows(), b.cols(), |i, j| (0..a.cols()).map(|k| a[(i, k)] * b[(k, j)]).sum())
}

fn o_transpose<T: Scalar>(a: &Matrix<T>) -> Matrix<T> {
    Matrix::from_fn(a.cols(), a.rows(), |i, j| a[(j, i)])
}

/// Design matrix of an `R' x J x R` subchain: `(j, a + R b) = P(b, j, a)`.
fn o_design<T: Scalar>(p: &DenseTensor<T>) -> Matrix<T> {
    let d = p.dims();
    Matrix::from_fn(d[1], d[0] * d[2], |j, q| at(p, q / d[2], j, q % d[2]))
}

fn o_slice<T: Scalar>(x: &DenseTensor<T>, j: usize) -> Matrix<T> {
    let d = x.dims();
    Matrix::from_fn(d[0], d[2], |a, b| at(x, a, j, b))
}

/// `P(:, j, :) = ∏_k G_k(i_k)` with `j` little-endian over the chain.
fn o_chain<T: Scalar>(cores: &[&DenseTensor<T>]) -> DenseTensor<T> {
    let dims: Vec<usize> = cores.iter().map(|c| c.dims()[1]).collect();
    let total: usize = dims.iter().product();
    let (r0, rl) = (cores[0].dims()[0], cores[cores.len() - 1].dims()[2]);
    let slices: Vec<Matrix<T>> = (0..total)
        .map(|mut j| {
            let mut acc: Option<Matrix<T>> = None;
            for (c, &d) in cores.iter().zip(&dims) {
                let s = o_slice(c, j % d);
                j /= d;
                acc = Some(match acc {
                    None => s,
                    Some(a) => o_matmul(&a, &s),
                });
            }
            acc.expect("non-empty chain")
        })
        .collect();
    build3(r0, total, rl, |a, j, b| slices[j][(a, b)])
}

// ---- suites

fn small(rng: &mut impl Rng, hi: usize) -> usize {
    rng.random_range(1..=hi)
}

fn subchain_kronecker<T: Scalar>(rng: &mut impl Rng) -> Result<f64> {
    let (i1, j1, k, j2, i2) = (small(rng, 3), small(rng, 4), small(rng, 3), small(rng, 4), small(rng, 3));
    let (r1, r2) = (small(rng, 4), small(rng, 4));
    let a = rand_tensor::<T>(&[i1, j1, k], rng);
    let b = rand_tensor::<T>(&[k, j2, i2], rng);
    let am = rand_matrix::<T>(r1, j1, rng);
    let bm = rand_matrix::<T>(r2, j2, rng);
    let lhs = subchain_product(&a.mode_n_product(&am, 2)?, &b.mode_n_product(&bm, 2)?)?;
    let rhs = subchain_product(&a, &b)?.mode_n_product(&kronecker(&bm, &am), 2)?;
    let oracle = o_mode2(&o_subchain(&a, &b), &o_kron(&bm, &am));
    let brute_lhs = o_subchain(&o_mode2(&a, &am), &o_mode2(&b, &bm));
    Ok(rel(lhs.data(), oracle.data())
        .max(rel(rhs.data(), oracle.data()))
        .max(rel(brute_lhs.data(), oracle.data())))
}

fn hadamard_khatri_rao<T: Scalar>(rng: &mut impl Rng) -> Result<f64> {
    let (i1, j1, k, j2, i2) = (small(rng, 3), small(rng, 4), small(rng, 3), small(rng, 4), small(rng, 3));
    let m = small(rng, 6);
    let a = rand_tensor::<T>(&[i1, j1, k], rng);
    let b = rand_tensor::<T>(&[k, j2, i2], rng);
    let am = rand_matrix::<T>(m, j1, rng);
    let bm = rand_matrix::<T>(m, j2, rng);
    let lhs = slices_hadamard(&a.mode_n_product(&am, 2)?, &b.mode_n_product(&bm, 2)?)?;
    let kr = khatri_rao(&bm.transpose(), &am.transpose())?.transpose();
    let rhs = subchain_product(&a, &b)?.mode_n_product(&kr, 2)?;
    let o_kr = Matrix::from_fn(m, j1 * j2, |r, c| bm[(r, c / j1)] * am[(r, c % j1)]);
    let oracle = o_mode2(&o_subchain(&a, &b), &o_kr);
    let brute_lhs = o_hadamard(&o_mode2(&a, &am), &o_mode2(&b, &bm));
    Ok(rel(lhs.data(), oracle.data())
        .max(rel(rhs.data(), oracle.data()))
        .max(rel(brute_lhs.data(), oracle.data())))
}

fn random_chain<T: Scalar>(len: usize, rng: &mut impl Rng) -> Vec<DenseTensor<T>> {
    let ranks: Vec<usize> = (0..=len).map(|_| small(rng, 3)).collect();
    (0..len)
        .map(|k| rand_tensor::<T>(&[ranks[k], small(rng, 4), ranks[k + 1]], rng))
        .collect()
}

fn tensorsketch_fft<T: Scalar>(rng: &mut impl Rng) -> Result<f64> {
    let len = rng.random_range(2..=4);
    let m = rng.random_range(2..=7);
    let cores = random_chain::<T>(len, rng);
    let refs: Vec<&DenseTensor<T>> = cores.iter().collect();
    let dims: Vec<usize> = cores.iter().map(|c| c.dims()[1]).collect();
    let ts = TensorSketch::random(&dims, m, rng)?;
    let modes: Vec<usize> = (1..=len).collect();
    let got = tensorsketch_subchain(&refs, &modes, &ts)?;
    let total: usize = dims.iter().product();
    let mut t = Matrix::<T>::zeros(m, total);
    for c in 0..total {
        let (mut h, mut s, mut rest) = (0usize, T::one(), c);
        for (k, &d) in dims.iter().enumerate() {
            let i = rest % d + 1;
            rest /= d;
            h += ts.bucket(k + 1, i) - 1;
            if ts.sign(k + 1, i) < 0 {
                s = -s;
            }
        }
        t[(h % m, c)] = s;
    }
    let oracle = o_mode2(&o_chain(&refs), &t);
    Ok(rel(got.data(), oracle.data()))
}

fn random_ring<T: Scalar>(order: usize, rng: &mut impl Rng) -> Result<TrCores<T>> {
    let dims: Vec<usize> = (0..order).map(|_| small(rng, 4)).collect();
    let ranks: Vec<usize> = (0..order).map(|_| small(rng, 3)).collect();
    TrCores::random(&dims, &ranks, rng)
}

fn ring_order(cores_len: usize, n: usize) -> Vec<usize> {
    (1..cores_len).map(|k| (n - 1 + k) % cores_len).collect()
}

fn subchain_chain<T: Scalar>(rng: &mut impl Rng) -> Result<f64> {
    let order = rng.random_range(3..=4);
    let ring = random_ring::<T>(order, rng)?;
    let mut worst = 0.0f64;
    for n in 1..=order {
        let others: Vec<&DenseTensor<T>> = ring_order(order, n).into_iter().map(|k| ring.core(k + 1)).collect();
        let oracle = o_chain(&others);
        let got = ring.subchain_tensor(n)?;
        worst = worst
            .max(rel(got.data(), oracle.data()))
            .max(rel(ring.design_matrix(n)?.data(), o_design(&oracle).data()));
    }
    Ok(worst)
}

/// Unitary DFT times the sign flip, entry by entry.
fn o_mixer(len: usize, signs: &[i8]) -> Matrix<Complex64> {
    let s = 1.0 / (len as f64).sqrt();
    Matrix::from_fn(len, len, |k, l| {
        let th = -2.0 * std::f64::consts::PI * ((k * l) % len) as f64 / len as f64;
        Complex::from_polar(s * signs[l] as f64, th)
    })
}

fn ksrft_factorization(rng: &mut ChaCha8Rng) -> Result<f64> {
    let ring = random_ring::<f64>(3, rng)?;
    let dims = ring.dims();
    let mixers = random_mixers::<f64, _>(&dims, rng);
    let n = rng.random_range(1..=3);
    let m = rng.random_range(1..=6);
    let order = ring_order(3, n);
    let modes: Vec<usize> = order.iter().map(|k| k + 1).collect();
    let dists: Vec<IndexDist<f64>> = order.iter().map(|&k| IndexDist::Uniform(dims[k])).collect();
    let table = draw_joint_samples(modes, &dists, m, rng)?;
    let mixed: Vec<DenseTensor<Complex64>> = order
        .iter()
        .map(|&k| mix_core(ring.core(k + 1), &mixers[k]))
        .collect::<Result<_>>()?;
    let refs: Vec<&DenseTensor<Complex64>> = mixed.iter().collect();
    let got = design_matrix(&sampled_subchain(&table, &refs)?)?;

    let mats: Vec<Matrix<Complex64>> = order
        .iter()
        .map(|&k| o_mixer(dims[k], mixers[k].sign().signs()))
        .collect();
    let total: usize = order.iter().map(|&k| dims[k]).product();
    let sk = Matrix::from_fn(m, total, |s, c| {
        let mut rest = c;
        let mut v = Complex64::new(1.0, 0.0);
        for (p, &k) in order.iter().enumerate() {
            let col = rest % dims[k];
            rest /= dims[k];
            v *= mats[p][(table.index0(s, p), col)];
        }
        v
    });
    let plain: Vec<DenseTensor<Complex64>> = order.iter().map(|&k| ring.core(k + 1).to_complex()).collect();
    let plain_refs: Vec<&DenseTensor<Complex64>> = plain.iter().collect();
    let oracle = o_matmul(&sk, &o_design(&o_chain(&plain_refs)));
    Ok(rel(got.data(), oracle.data()))
}

/// Brute unfolding: row `i_n`, columns little-endian over `col_modes`.
fn o_unfold<T: Scalar>(x: &DenseTensor<T>, n: usize, col_modes: &[usize]) -> Matrix<T> {
    let dims = x.dims();
    let cols: usize = col_modes.iter().map(|&k| dims[k - 1]).product();
    let strides = x.shape().strides();
    Matrix::from_fn(dims[n - 1], cols, |i, c| {
        let mut off = i * strides[n - 1];
        let mut rest = c;
        for &k in col_modes {
            off += (rest % dims[k - 1]) * strides[k - 1];
            rest /= dims[k - 1];
        }
        x.data()[off]
    })
}

fn o_kron_chain<T: Scalar>(us: &[Matrix<T>], slow_to_fast: &[usize]) -> Matrix<T> {
    slow_to_fast[1..]
        .iter()
        .fold(us[slow_to_fast[0] - 1].clone(), |acc, &k| o_kron(&acc, &us[k - 1]))
}

fn unfolding_laws<T: Scalar>(rng: &mut impl Rng) -> Result<f64> {
    let order = rng.random_range(3..=4);
    let dims: Vec<usize> = (0..order).map(|_| small(rng, 5)).collect();
    let x = rand_tensor::<T>(&dims, rng);
    let us: Vec<Matrix<T>> = dims.iter().map(|&d| rand_matrix(small(rng, 4), d, rng)).collect();
    let mut xh = x.clone();
    for (k, u) in us.iter().enumerate() {
        xh = xh.mode_n_product(u, k + 1)?;
    }
    let mut worst = 0.0f64;
    for n in 1..=order {
        let cyclic: Vec<usize> = (n + 1..=order).chain(1..n).collect();
        let classical: Vec<usize> = (1..n).chain(n + 1..=order).collect();
        for (kind, cols) in [(UnfoldKind::ModeN, cyclic), (UnfoldKind::Classical, classical)] {
            let slow_to_fast: Vec<usize> = cols.iter().rev().copied().collect();
            let want = o_matmul(
                &o_matmul(&us[n - 1], &o_unfold(&x, n, &cols)),
                &o_transpose(&o_kron_chain(&us, &slow_to_fast)),
            );
            worst = worst.max(rel(xh.unfold(n, kind)?.data(), want.data()));
        }
    }
    Ok(worst)
}

fn combined_hash(rng: &mut ChaCha8Rng) -> Result<f64> {
    let order = rng.random_range(2..=4);
    let dims: Vec<usize> = (0..order).map(|_| small(rng, 4)).collect();
    let m = rng.random_range(1..=7);
    let ts = TensorSketch::random(&dims, m, rng)?;
    let n = rng.random_range(1..=order);
    let modes: Vec<usize> = ring_order(order, n).into_iter().map(|k| k + 1).collect();
    let sub: Vec<usize> = modes.iter().map(|&k| dims[k - 1]).collect();
    let total: usize = sub.iter().product();
    let t = tensorsketch_matrix::<f64>(&ts, &modes)?;
    let split = rng.random_range(1..modes.len().max(2)).min(modes.len());
    let mut bad = 0usize;
    for c in 0..total {
        let mut idx = Vec::with_capacity(sub.len());
        let mut rest = c;
        for &d in &sub {
            idx.push(rest % d + 1);
            rest /= d;
        }
        let sum: usize = modes.iter().zip(&idx).map(|(&k, &i)| ts.bucket(k, i) - 1).sum();
        let sign: i32 = modes.iter().zip(&idx).map(|(&k, &i)| ts.sign(k, i) as i32).product();
        let (h, s) = ts.combined(&modes, &idx);
        if h != sum % m + 1 || s as i32 != sign {
            bad += 1;
        }
        let (ha, sa) = ts.combined(&modes[..split], &idx[..split]);
        let (hb, sb) = ts.combined(&modes[split..], &idx[split..]);
        let (ha, hb) = (ha - 1, if split < modes.len() { hb - 1 } else { 0 });
        let sb = if split < modes.len() { sb } else { 1 };
        if h != (ha + hb) % m + 1 || s != sa * sb {
            bad += 1;
        }
        let col: Vec<f64> = (0..m).map(|r| t[(r, c)]).collect();
        let want: Vec<f64> = (0..m).map(|r| if r == h - 1 { sign as f64 } else { 0.0 }).collect();
        if col != want {
            bad += 1;
        }
    }
    Ok(bad as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_suite_passes_a_few_instances() {
        for r in run_all(6, 11).unwrap() {
            assert!(r.passed(), "{r}");
            assert_eq!(r.instances, 6);
        }
    }

    #[test]
    fn oracles_detect_a_wrong_kronecker_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = rand_tensor::<f64>(&[2, 3, 2], &mut rng);
        let b = rand_tensor::<f64>(&[2, 2, 3], &mut rng);
        let am = rand_matrix::<f64>(2, 3, &mut rng);
        let bm = rand_matrix::<f64>(3, 2, &mut rng);
        let right = o_mode2(&o_subchain(&a, &b), &o_kron(&bm, &am));
        let wrong = o_mode2(&o_subchain(&a, &b), &o_kron(&am, &bm));
        assert!(rel(wrong.data(), right.data()) > 1e-3);
    }
}
