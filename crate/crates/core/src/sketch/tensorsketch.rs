//! k-wise independent hashing, CountSketch and TensorSketch.

use rand::Rng;
use rustfft::FftPlanner;

use super::mixing::for_each_complex_fiber;
use crate::error::{Error, Result};
use crate::ring::slices_hadamard;
use crate::scalar::{ComplexOf, RealScalar, Scalar};
use crate::tensor::{advance, DenseTensor, Matrix, Shape, TensorData};

/// Mersenne prime `2^61 - 1`.
pub const HASH_PRIME: u64 = (1 << 61) - 1;

#[inline]
fn mulmod(a: u64, b: u64) -> u64 {
    let p = a as u128 * b as u128;
    let lo = (p as u64) & HASH_PRIME;
    let hi = (p >> 61) as u64;
    let s = lo + hi;
    if s >= HASH_PRIME {
        s - HASH_PRIME
    } else {
        s
    }
}

/// Degree-`(k-1)` polynomial with uniform coefficients over `GF(2^61 - 1)`;
/// a `k`-wise independent family on keys below the prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KWiseHash {
    coeffs: Vec<u64>,
}

impl KWiseHash {
    pub fn random<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Self {
        Self {
            coeffs: (0..k).map(|_| rng.random_range(0..HASH_PRIME)).collect(),
        }
    }

    pub fn from_coeffs(coeffs: Vec<u64>) -> Self {
        Self {
            coeffs: coeffs.into_iter().map(|c| c % HASH_PRIME).collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    /// Field value at `key`, by Horner's rule.
    pub fn eval(&self, key: u64) -> u64 {
        let x = key % HASH_PRIME;
        self.coeffs
            .iter()
            .rev()
            .fold(0u64, |acc, &c| {
                let v = mulmod(acc, x) + c;
                if v >= HASH_PRIME {
                    v - HASH_PRIME
                } else {
                    v
                }
            })
    }

    /// Bucket in `1..=m`.
    pub fn bucket(&self, key: u64, m: usize) -> usize {
        (self.eval(key) % m as u64) as usize + 1
    }

    /// `+1` or `-1` from the parity of the field value.
    pub fn sign(&self, key: u64) -> i8 {
        if self.eval(key) & 1 == 0 {
            1
        } else {
            -1
        }
    }
}

/// Per-mode CountSketch maps `H_j: [I_j] -> [m]` (3-wise) and
/// `S_j: [I_j] -> {±1}` (4-wise), tabulated.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorSketch {
    m: usize,
    /// 0-based buckets per mode.
    buckets: Vec<Vec<usize>>,
    signs: Vec<Vec<i8>>,
    hashes: Option<Vec<(KWiseHash, KWiseHash)>>,
}

impl TensorSketch {
    /// Draws one hash pair per mode of `dims`, in mode order.
    pub fn random<R: Rng + ?Sized>(dims: &[usize], m: usize, rng: &mut R) -> Result<Self> {
        if m == 0 {
            return Err(Error::arg("embedding size must be positive"));
        }
        let mut hashes = Vec::with_capacity(dims.len());
        let mut buckets = Vec::with_capacity(dims.len());
        let mut signs = Vec::with_capacity(dims.len());
        for &d in dims {
            let h = KWiseHash::random(3, rng);
            let s = KWiseHash::random(4, rng);
            buckets.push((1..=d as u64).map(|i| h.bucket(i, m) - 1).collect());
            signs.push((1..=d as u64).map(|i| s.sign(i)).collect());
            hashes.push((h, s));
        }
        Ok(Self { m, buckets, signs, hashes: Some(hashes) })
    }

    /// Mixed-radix digit maps `H_j(i) = (I_1 ⋯ I_{j-1}) (i - 1) + 1` with
    /// `m = ∏ I_j` and unit signs: the combined map over any subset of
    /// modes is injective.
    pub fn injective(dims: &[usize]) -> Result<Self> {
        let m = Shape::new(dims.to_vec())?.len();
        let mut stride = 1;
        let mut buckets = Vec::with_capacity(dims.len());
        for &d in dims {
            buckets.push((0..d).map(|i| i * stride).collect());
            stride *= d;
        }
        Ok(Self {
            m,
            buckets,
            signs: dims.iter().map(|&d| vec![1; d]).collect(),
            hashes: None,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn order(&self) -> usize {
        self.buckets.len()
    }

    /// `H_j(i)` in `1..=m` (1-based `j`, `i`).
    pub fn bucket(&self, j: usize, i: usize) -> usize {
        self.buckets[j - 1][i - 1] + 1
    }

    /// `S_j(i)`.
    pub fn sign(&self, j: usize, i: usize) -> i8 {
        self.signs[j - 1][i - 1]
    }

    /// Combined `H(i) = (Σ_k (H_k(i_k) − 1) mod m) + 1` and sign
    /// `∏ S_k(i_k)` over `modes` (1-based indices).
    pub fn combined(&self, modes: &[usize], idx: &[usize]) -> (usize, i8) {
        let mut h = 0;
        let mut s = 1i8;
        for (&j, &i) in modes.iter().zip(idx) {
            h = (h + self.buckets[j - 1][i - 1]) % self.m;
            s *= self.signs[j - 1][i - 1];
        }
        (h + 1, s)
    }

    pub fn describe(&self) -> String {
        let mut out = format!("tensorsketch m={} modes={}", self.m, self.order());
        match &self.hashes {
            Some(hs) => {
                for (j, (h, s)) in hs.iter().enumerate() {
                    out.push_str(&format!(
                        "\n  mode {}: H coeffs {:?}, S coeffs {:?}",
                        j + 1,
                        h.coeffs(),
                        s.coeffs()
                    ));
                }
            }
            None => out.push_str(" (injective digit maps)"),
        }
        out
    }

    fn check_mode(&self, j: usize, len: usize) -> Result<()> {
        if j == 0 || j > self.order() || self.buckets[j - 1].len() != len {
            return Err(Error::dim(format!(
                "no hash of domain size {len} for mode {j}"
            )));
        }
        Ok(())
    }
}

/// `G ×₂ (Ω_j D_j)`: slice `h` of the `R x m x R'` output accumulates
/// `S_j(i) G(:, i, :)` over `H_j(i) = h`.
pub fn countsketch_core<T: Scalar>(
    core: &DenseTensor<T>,
    ts: &TensorSketch,
    mode: usize,
) -> Result<DenseTensor<T>> {
    if core.order() != 3 {
        return Err(Error::dim("CountSketch acts on order-3 cores"));
    }
    let (ra, ii, rb) = (core.dims()[0], core.dims()[1], core.dims()[2]);
    ts.check_mode(mode, ii)?;
    let m = ts.m;
    let mut out = DenseTensor::zeros(Shape::new(vec![ra, m, rb])?);
    let (bk, sg) = (&ts.buckets[mode - 1], &ts.signs[mode - 1]);
    let src = core.data();
    let dst = out.data_mut();
    for b in 0..rb {
        for i in 0..ii {
            let h = bk[i];
            let neg = sg[i] < 0;
            let s = &src[ra * i + ra * ii * b..][..ra];
            let d = &mut dst[ra * h + ra * m * b..][..ra];
            for (x, &y) in d.iter_mut().zip(s) {
                if neg {
                    *x -= y;
                } else {
                    *x += y;
                }
            }
        }
    }
    Ok(out)
}

/// `(⊠₂ chain of cores) ×₂ T` for the TensorSketch over `modes`, computed
/// as `IFFT(⊛₂ FFT(G_k ×₂ Ω_k D_k))` along mode 2.
pub fn tensorsketch_subchain<T: Scalar>(
    cores: &[&DenseTensor<T>],
    modes: &[usize],
    ts: &TensorSketch,
) -> Result<DenseTensor<T>> {
    if cores.len() != modes.len() || cores.is_empty() {
        return Err(Error::dim("one core per sketched mode"));
    }
    let m = ts.m;
    let mut planner = FftPlanner::<T::Real>::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    let mut buf = Vec::with_capacity(m);
    let mut acc: Option<DenseTensor<ComplexOf<T>>> = None;
    for (c, &j) in cores.iter().zip(modes) {
        let mut z = countsketch_core(c, ts, j)?.to_complex();
        let dims = z.dims().to_vec();
        for_each_complex_fiber(z.data_mut(), &dims, 2, &mut buf, |f| fwd.process(f));
        acc = Some(match acc {
            None => z,
            Some(a) => slices_hadamard(&a, &z)?,
        });
    }
    let mut acc = acc.expect("non-empty");
    let dims = acc.dims().to_vec();
    let scale = num_traits::Float::recip(T::Real::of(m as f64));
    for_each_complex_fiber(acc.data_mut(), &dims, 2, &mut buf, |f| {
        inv.process(f);
        f.iter_mut().for_each(|v| *v = v.scale(scale));
    });
    DenseTensor::from_vec(
        acc.shape().clone(),
        acc.into_data().into_iter().map(|v| T::from_complex(v.to_complex())).collect(),
    )
}

/// `T_{≠n} X_[n]^T` (`m x I_n`), with the sketch over modes
/// `n+1, ..., N, 1, ..., n-1`. Sparse inputs cost `O(nnz N)`.
pub fn tensorsketch_rhs<T: Scalar>(x: &TensorData<T>, n: usize, ts: &TensorSketch) -> Result<Matrix<T>> {
    let dims = x.dims().to_vec();
    x.shape().check_mode(n)?;
    for (j, &d) in dims.iter().enumerate() {
        if j + 1 != n {
            ts.check_mode(j + 1, d)?;
        }
    }
    let m = ts.m;
    let mut out = Matrix::zeros(m, dims[n - 1]);
    let mut add = |idx0: &[usize], v: T| {
        let mut h = 0;
        let mut neg = false;
        for (j, &i) in idx0.iter().enumerate() {
            if j + 1 != n {
                h += ts.buckets[j][i];
                neg ^= ts.signs[j][i] < 0;
            }
        }
        let cell = &mut out[(h % m, idx0[n - 1])];
        if neg {
            *cell -= v;
        } else {
            *cell += v;
        }
    };
    match x {
        TensorData::Dense(d) => {
            let mut idx0 = vec![0; dims.len()];
            for &v in d.data() {
                if v != T::zero() {
                    add(&idx0, v);
                }
                advance(&mut idx0, &dims);
            }
        }
        TensorData::Sparse(s) => {
            let mut idx0 = vec![0; dims.len()];
            for (&o, &v) in s.offsets().iter().zip(s.values()) {
                let mut rest = o;
                for (k, &d) in dims.iter().enumerate() {
                    idx0[k] = rest % d;
                    rest /= d;
                }
                add(&idx0, v);
            }
        }
    }
    Ok(out)
}

/// Explicit `m x ∏_{k} I_{modes[k]}` TensorSketch matrix `Ω D` over the
/// given modes, columns in little-endian order of `modes`.
pub fn tensorsketch_matrix<T: Scalar>(ts: &TensorSketch, modes: &[usize]) -> Result<Matrix<T>> {
    let dims: Vec<usize> = modes
        .iter()
        .map(|&j| {
            if j == 0 || j > ts.order() {
                Err(Error::Domain(format!("mode {j} has no hash")))
            } else {
                Ok(ts.buckets[j - 1].len())
            }
        })
        .collect::<Result<_>>()?;
    let cols = Shape::new(dims.clone())?;
    let mut out = Matrix::zeros(ts.m, cols.len());
    let mut idx0 = vec![0; dims.len()];
    for c in 0..cols.len() {
        let idx1: Vec<usize> = idx0.iter().map(|i| i + 1).collect();
        let (h, s) = ts.combined(modes, &idx1);
        out[(h - 1, c)] = if s > 0 { T::one() } else { -T::one() };
        advance(&mut idx0, &dims);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{design_matrix, TrCores};
    use crate::tensor::{SparseTensor, UnfoldKind};
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hash_is_pure_and_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = KWiseHash::random(3, &mut rng);
        assert_eq!(h.degree(), 2);
        for key in 1..200 {
            let b = h.bucket(key, 7);
            assert!((1..=7).contains(&b));
            assert_eq!(b, h.bucket(key, 7));
        }
        let c = KWiseHash::from_coeffs(vec![5, 3]); // 5 + 3x
        assert_eq!(c.eval(4), 17);
        assert_eq!(c.sign(4), -1);
        let big = KWiseHash::from_coeffs(vec![0, HASH_PRIME - 1]);
        assert_eq!(big.eval(2), HASH_PRIME - 2);
    }

    #[test]
    fn pairwise_collisions_near_one_over_m() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = 16;
        let trials = 20_000;
        let mut hits = 0;
        for _ in 0..trials {
            let h = KWiseHash::random(3, &mut rng);
            let (a, b) = (rng.random_range(1..1_000_000u64), rng.random_range(1..1_000_000u64));
            if a != b && h.bucket(a, m) == h.bucket(b, m) {
                hits += 1;
            }
        }
        let p = 1.0 / m as f64;
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        assert!((hits as f64 - trials as f64 * p).abs() < 4.0 * sigma);
    }

    #[test]
    fn countsketch_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let core = DenseTensor::<f64>::from_fn(Shape::new(vec![2, 5, 3]).unwrap(), |_| rng.random());
        let inj = TensorSketch::injective(&[5]).unwrap();
        assert_eq!(countsketch_core(&core, &inj, 1).unwrap(), core);

        let one = TensorSketch::random(&[5], 1, &mut rng).unwrap();
        let cs = countsketch_core(&core, &one, 1).unwrap();
        for a in 1..=2 {
            for b in 1..=3 {
                let want: f64 = (1..=5).map(|i| one.sign(1, i) as f64 * core.get(&[a, i, b]).unwrap()).sum();
                assert!((cs.get(&[a, 1, b]).unwrap() - want).abs() < 1e-14);
            }
        }

        let ts = TensorSketch::random(&[5], 3, &mut rng).unwrap();
        let om = tensorsketch_matrix::<f64>(&ts, &[1]).unwrap();
        let want = core.mode_n_product(&om, 2).unwrap();
        assert!(countsketch_core(&core, &ts, 1).unwrap().sub(&want).unwrap().frobenius_norm() < 1e-14);
    }

    #[test]
    fn combined_hash_laws() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ts = TensorSketch::random(&[3, 4, 5], 7, &mut rng).unwrap();
        for i in 1..=3 {
            for k in 1..=5 {
                let (h, s) = ts.combined(&[3, 1], &[k, i]);
                let want_h = (ts.bucket(3, k) - 1 + ts.bucket(1, i) - 1) % 7 + 1;
                assert_eq!(h, want_h);
                assert_eq!(s, ts.sign(3, k) * ts.sign(1, i));
            }
        }
        let inj = TensorSketch::injective(&[3, 4, 5]).unwrap();
        let mut seen = std::collections::HashSet::new();
        for i in 1..=4 {
            for k in 1..=5 {
                assert!(seen.insert(inj.combined(&[2, 3], &[i, k]).0));
            }
        }
    }

    #[test]
    fn rank_one_cores_give_vector_tensorsketch() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = TrCores::<f64>::random(&[3, 4, 2], &[1, 1, 1], &mut rng).unwrap();
        let ts = TensorSketch::random(&[3, 4, 2], 5, &mut rng).unwrap();
        let modes = [2, 3];
        let got = tensorsketch_subchain(&c.others(1), &modes, &ts).unwrap();
        // direct hashing of the Khatri-Rao-structured vector
        let mut want = vec![0.0; 5];
        for i2 in 1..=4 {
            for i3 in 1..=2 {
                let (h, s) = ts.combined(&modes, &[i2, i3]);
                want[h - 1] += s as f64 * c.core(2).data()[i2 - 1] * c.core(3).data()[i3 - 1];
            }
        }
        for (a, b) in got.data().iter().zip(&want) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn single_factor_is_countsketch() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let c = TrCores::<f64>::random(&[3, 4], &[2, 3], &mut rng).unwrap();
        let ts = TensorSketch::random(&[3, 4], 6, &mut rng).unwrap();
        let a = tensorsketch_subchain(&c.others(1), &[2], &ts).unwrap();
        let b = countsketch_core(c.core(2), &ts, 2).unwrap();
        assert!(a.sub(&b).unwrap().frobenius_norm() < 1e-13);
    }

    #[test]
    fn rhs_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = DenseTensor::<f64>::from_fn(Shape::new(vec![3, 3, 3]).unwrap(), |_| rng.random());
        let xd = TensorData::Dense(x.clone());
        let one = TensorSketch::random(&[3, 3, 3], 1, &mut rng).unwrap();
        let r = tensorsketch_rhs(&xd, 2, &one).unwrap();
        let xt = x.unfold(2, UnfoldKind::ModeN).unwrap().transpose();
        let om = tensorsketch_matrix::<f64>(&one, &[3, 1]).unwrap();
        assert!(r.sub(&om.matmul(&xt).unwrap()).unwrap().frobenius_norm() < 1e-13);

        let ts = TensorSketch::random(&[3, 3, 3], 4, &mut rng).unwrap();
        for n in 1..=3 {
            let modes: Vec<usize> = (1..3).map(|k| (n - 1 + k) % 3 + 1).collect();
            let om = tensorsketch_matrix::<f64>(&ts, &modes).unwrap();
            let want = om.matmul(&x.unfold(n, UnfoldKind::ModeN).unwrap().transpose()).unwrap();
            let got = tensorsketch_rhs(&xd, n, &ts).unwrap();
            assert!(got.sub(&want).unwrap().frobenius_norm() < 1e-13);
            let sp = TensorData::Sparse(SparseTensor::from_dense(&x));
            assert!(tensorsketch_rhs(&sp, n, &ts).unwrap().sub(&want).unwrap().frobenius_norm() < 1e-13);
        }

        let single = SparseTensor::from_entries(Shape::new(vec![3, 3, 3]).unwrap(), vec![(vec![2, 1, 3], 2.5)]).unwrap();
        let r = tensorsketch_rhs(&TensorData::Sparse(single), 1, &ts).unwrap();
        let (h, s) = ts.combined(&[2, 3], &[1, 3]);
        assert_eq!(r[(h - 1, 1)], 2.5 * s as f64);
        assert_eq!(r.data().iter().filter(|v| **v != 0.0).count(), 1);
    }

    fn prop36<T: Scalar>(seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_modes = rng.random_range(3..=4);
        let dims: Vec<usize> = (0..n_modes).map(|_| rng.random_range(1..=4)).collect();
        let ranks: Vec<usize> = (0..n_modes).map(|_| rng.random_range(1..=3)).collect();
        let m = rng.random_range(2..=7);
        let c = TrCores::<T>::random(&dims, &ranks, &mut rng).unwrap();
        let ts = TensorSketch::random(&dims, m, &mut rng).unwrap();
        let n = rng.random_range(1..=n_modes);
        let modes: Vec<usize> = (1..n_modes).map(|k| (n - 1 + k) % n_modes + 1).collect();
        let got = design_matrix(&tensorsketch_subchain(&c.others(n), &modes, &ts).unwrap()).unwrap();
        let om = tensorsketch_matrix::<T>(&ts, &modes).unwrap();
        let want = om.matmul(&c.design_matrix(n).unwrap()).unwrap();
        let scale = want.frobenius_norm().to_f64_lossy().max(1e-300);
        got.sub(&want).unwrap().frobenius_norm().to_f64_lossy() / scale
    }

    proptest! {
        #[test]
        fn fft_formula_is_exact(seed in any::<u64>()) {
            prop_assert!(prop36::<f64>(seed) < 1e-10);
            prop_assert!(prop36::<Complex64>(seed) < 1e-10);
        }
    }
}
