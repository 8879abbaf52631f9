//! Leverage-score distributions and embedding-size heuristics.

use crate::error::{Error, Result};
use crate::linalg::leverage_scores;
use crate::ring::core_unfolding;
use crate::scalar::Scalar;
use crate::tensor::DenseTensor;

use super::sampling::IndexDist;

/// Sampling distribution over `I_n` proportional to the leverage scores of
/// the classical mode-2 unfolding `G_{n(2)}` (`I_n x R_n R_{n+1}`).
pub fn leverage_distribution<T: Scalar>(core: &DenseTensor<T>) -> Result<IndexDist<T::Real>> {
    if core.order() != 3 {
        return Err(Error::dim("leverage scores need an order-3 core"));
    }
    if core.frobenius_norm() == <T::Real as num_traits::Zero>::zero() {
        return Err(Error::Domain("leverage scores of a zero core".into()));
    }
    let l = leverage_scores(&core_unfolding(core));
    let total = l.iter().fold(<T::Real as num_traits::Zero>::zero(), |a, &b| a + b);
    if !(total > <T::Real as num_traits::Zero>::zero()) {
        return Err(Error::Domain("leverage scores vanish".into()));
    }
    Ok(IndexDist::Weighted(l.into_iter().map(|x| x / total).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SketchKind {
    Ksrft,
    TensorSketch,
}

/// Dominant term of the sufficient sketch size for a `(1 ± ε)` residual with
/// failure probability `η`, all hidden constants set to 1, capped at
/// `∏_{j≠n} I_j`. A heuristic, not a guarantee.
///
/// KSRFT: `ε⁻¹ r^{2(N−1)} L^{2N−3} log⁴(L r/ε) log ∏_{j≠n} I_j` with
/// `r = R_n R_{n+1}` and `L = log(r/ε)`; each logarithm is floored at 1.
/// TensorSketch: `(r 3^{N−1})(r + ε⁻²)/η`.
pub fn recommend_embedding_size(
    kind: SketchKind,
    rn: usize,
    rn1: usize,
    dims: &[usize],
    n: usize,
    eps: f64,
    eta: f64,
) -> Result<usize> {
    let order = dims.len();
    if n == 0 || n > order {
        return Err(Error::Domain(format!("mode {n} out of range 1..={order}")));
    }
    if !(eps > 0.0 && eps <= 1.0) || !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Domain(format!("need ε, η in (0, 1], got {eps}, {eta}")));
    }
    if rn == 0 || rn1 == 0 {
        return Err(Error::arg("ranks must be positive"));
    }
    let cap: f64 = dims
        .iter()
        .enumerate()
        .filter(|&(j, _)| j + 1 != n)
        .map(|(_, &d)| d as f64)
        .product();
    let r = (rn * rn1) as f64;
    let nn = order as f64;
    let lg = |x: f64| x.ln().max(1.0);
    let raw = match kind {
        SketchKind::TensorSketch => r * 3f64.powf(nn - 1.0) * (r + 1.0 / (eps * eps)) / eta,
        SketchKind::Ksrft => {
            let l = lg(r / eps);
            r.powf(2.0 * (nn - 1.0)) / eps
                * l.powf((2.0 * nn - 3.0).max(0.0))
                * lg(r / eps * l).powi(4)
                * lg(cap)
        }
    };
    Ok(raw.min(cap).ceil().max(1.0) as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Shape;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn probs(d: &IndexDist<f64>) -> Vec<f64> {
        (0..d.len()).map(|i| d.prob(i)).collect()
    }

    #[test]
    fn uniform_and_point_mass() {
        // G_{n(2)} = [I; I] / √2 has orthonormal columns and equal row norms.
        let core = DenseTensor::<f64>::from_fn(Shape::new(vec![1, 4, 2]).unwrap(), |idx| {
            if (idx[1] - 1) % 2 == idx[2] - 1 {
                1.0
            } else {
                0.0
            }
        });
        assert!(probs(&leverage_distribution(&core).unwrap()).iter().all(|p| (p - 0.25).abs() < 1e-12));

        let core = DenseTensor::<f64>::from_fn(Shape::new(vec![2, 5, 2]).unwrap(), |idx| {
            if idx[1] == 1 {
                (idx[0] + 2 * idx[2]) as f64
            } else {
                0.0
            }
        });
        let p = probs(&leverage_distribution(&core).unwrap());
        assert!((p[0] - 1.0).abs() < 1e-12 && p[1..].iter().all(|x| x.abs() < 1e-12));

        let zero = DenseTensor::<f64>::zeros(Shape::new(vec![2, 3, 2]).unwrap());
        assert!(leverage_distribution(&zero).is_err());
    }

    #[test]
    fn matches_svd_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let core = DenseTensor::<f64>::from_fn(Shape::new(vec![2, 5, 2]).unwrap(), |_| rng.random::<f64>() - 0.5);
        let a = core_unfolding(&core);
        let na = nalgebra::DMatrix::from_column_slice(a.rows(), a.cols(), a.data());
        let svd = na.svd(true, false);
        let u = svd.u.unwrap();
        let lev: Vec<f64> = (0..5).map(|i| u.row(i).norm_squared()).collect();
        let tot: f64 = lev.iter().sum();
        let p = probs(&leverage_distribution(&core).unwrap());
        for (x, y) in p.iter().zip(&lev) {
            assert!((x - y / tot).abs() < 1e-10);
        }
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn embedding_size_rules() {
        let ts = recommend_embedding_size(SketchKind::TensorSketch, 1, 1, &[100, 100], 1, 1.0, 1.0).unwrap();
        assert_eq!(ts, 6);
        assert_eq!(recommend_embedding_size(SketchKind::TensorSketch, 5, 5, &[4, 3, 5], 2, 0.1, 0.1).unwrap(), 20);
        for kind in [SketchKind::Ksrft, SketchKind::TensorSketch] {
            let mut prev = 0;
            for eps in [0.9, 0.5, 0.2, 0.1, 0.05, 0.01] {
                let m = recommend_embedding_size(kind, 3, 3, &[60, 60, 60], 1, eps, 0.5).unwrap();
                assert!(m >= prev && m <= 3600 && m >= 1);
                prev = m;
            }
            assert!(recommend_embedding_size(kind, 2, 2, &[5, 5], 1, 0.0, 0.5).is_err());
            assert!(recommend_embedding_size(kind, 2, 2, &[5, 5], 1, 0.5, 1.5).is_err());
        }
    }
}
