use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trsketch::ring::TrCores;
use trsketch::scalar::{RealScalar, Scalar};
use trsketch::sketch::{mix_core, mix_tensor, random_mixers};
use trsketch::solvers::*;
use trsketch::tensor::TensorData;

fn exact<T: Scalar>(dims: &[usize], ranks: &[usize], seed: u64) -> TensorData<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    TensorData::Dense(TrCores::<T>::random(dims, ranks, &mut rng).unwrap().reconstruct())
}

fn max_core_diff<T: Scalar>(a: &TrCores<T>, b: &TrCores<T>) -> f64 {
    a.cores()
        .iter()
        .zip(b.cores())
        .map(|(x, y)| {
            let d = x.sub(y).unwrap().frobenius_norm();
            (d / y.frobenius_norm()).to_f64_lossy()
        })
        .fold(0.0, f64::max)
}

#[test]
fn tr_als_recovers_exact_ring() {
    let x = exact::<f64>(&[20, 20, 20], &[3, 3, 3], 11);
    let best = (0..5)
        .map(|s| tr_als(&x, &FitConfig::new(vec![3, 3, 3]).seed(s)).unwrap().final_error)
        .fold(f64::INFINITY, f64::min);
    assert!(best < 1e-3, "best restart error {best}");
}

#[test]
fn tr_als_objective_is_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut noisy = TrCores::<f64>::random(&[8, 7, 6], &[3, 2, 2], &mut rng).unwrap().reconstruct();
    noisy.data_mut().iter_mut().for_each(|v| *v += 0.05 * f64::standard_normal(&mut rng));
    let x = TensorData::Dense(noisy);
    let r = tr_als(&x, &FitConfig::new(vec![2, 2, 2]).max_iters(60).seed(1)).unwrap();
    assert_eq!(r.errors.len(), r.iterations);
    for w in r.errors.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "{} then {}", w[0], w[1]);
    }
}

#[test]
fn tr_als_rank_one() {
    let x = exact::<f64>(&[5, 6, 4, 3], &[1, 1, 1, 1], 13);
    let r = tr_als(&x, &FitConfig::new(vec![1, 1, 1, 1]).max_iters(50).seed(2)).unwrap();
    assert!(r.final_error < 1e-8, "{}", r.final_error);
}

fn degenerate<T: Scalar>(x: &TensorData<T>, solver: Solver) -> f64 {
    let cfg = FitConfig::new(vec![2, 2, 2]).max_iters(1).seed(5);
    let reference = tr_als(x, &cfg).unwrap();
    let r = solver.fit(x, &cfg.clone().regime(SketchRegime::Identity)).unwrap();
    max_core_diff(&r.cores, &reference.cores)
}

#[test]
fn identity_sketches_reproduce_exact_sweep() {
    let x = exact::<f64>(&[4, 4, 4], &[2, 2, 2], 14);
    for s in Solver::ALL.into_iter().filter(|s| s.is_randomized()) {
        let d = degenerate(&x, s);
        assert!(d < 1e-8, "{s}: {d}");
    }
    let xc = exact::<Complex64>(&[4, 4, 4], &[2, 2, 2], 15);
    for s in [Solver::TrAlsSampled, Solver::TrKsrftAlsPremix, Solver::TrTsAls] {
        let d = degenerate(&xc, s);
        assert!(d < 1e-8, "{s} complex: {d}");
    }
}

#[test]
fn ksrft_cores_are_real_and_complex_data_is_rejected() {
    let x = exact::<f64>(&[6, 5, 4], &[2, 2, 2], 16);
    let r = tr_ksrft_als(&x, &FitConfig::new(vec![2, 2, 2]).m(20).max_iters(5)).unwrap();
    assert_eq!(r.cores.dims(), vec![6, 5, 4]);
    let xc = exact::<Complex64>(&[6, 5, 4], &[2, 2, 2], 16);
    assert!(tr_ksrft_als(&xc, &FitConfig::new(vec![2, 2, 2])).is_err());
}

#[test]
fn premix_identity_run_on_real_data_is_real() {
    let x = exact::<f64>(&[4, 4, 4], &[2, 2, 2], 17);
    let cfg = FitConfig::new(vec![2, 2, 2]).max_iters(3).regime(SketchRegime::Identity);
    let r = tr_ksrft_als_premix(&x, &cfg).unwrap();
    assert!(r.max_imag.unwrap() < 1e-8);
}

#[test]
fn mixed_cores_reconstruct_the_mixed_tensor() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let c = TrCores::<Complex64>::random(&[3, 5, 4], &[2, 3, 2], &mut rng).unwrap();
    let ms = random_mixers::<f64, _>(&[3, 5, 4], &mut rng);
    let mixed = TrCores::new(
        c.cores().iter().zip(&ms).map(|(g, m)| mix_core(g, m).unwrap()).collect(),
    )
    .unwrap();
    let want = mix_tensor(&c.reconstruct(), &ms).unwrap();
    let d = mixed.reconstruct().sub(&want).unwrap().frobenius_norm() / want.frobenius_norm();
    assert!(d < 1e-10);
}

#[test]
fn runs_are_deterministic() {
    let x = exact::<f64>(&[7, 6, 5], &[2, 2, 2], 19);
    let xc = exact::<Complex64>(&[7, 6, 5], &[2, 2, 2], 19);
    let cfg = FitConfig::new(vec![2, 2, 2]).m(30).max_iters(4).seed(9);
    for s in Solver::ALL {
        let a = s.fit(&x, &cfg).unwrap();
        let b = s.fit(&x, &cfg).unwrap();
        assert_eq!(a.errors, b.errors, "{s}");
        assert_eq!(a.cores, b.cores, "{s}");
        let c = s.fit(&x, &cfg.clone().seed(10)).unwrap();
        assert_ne!(a.cores, c.cores, "{s}");
        if s != Solver::TrKsrftAls {
            assert_eq!(s.fit(&xc, &cfg).unwrap().cores, s.fit(&xc, &cfg).unwrap().cores);
        }
    }
}

#[test]
fn shapes_and_closure_are_preserved() {
    let x = exact::<f64>(&[5, 4, 6, 3], &[2, 3, 1, 2], 20);
    let cfg = FitConfig::new(vec![2, 3, 1, 2]).m(15).max_iters(2).tracking(ErrorTracking::FinalOnly);
    for s in Solver::ALL {
        let r = s.fit(&x, &cfg).unwrap();
        assert_eq!(r.cores.ranks(), vec![2, 3, 1, 2]);
        assert_eq!(r.cores.dims(), vec![5, 4, 6, 3]);
        assert!(r.errors.is_empty() && r.iterations == 2 && r.final_error.is_finite());
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let x = exact::<f64>(&[4, 4, 4], &[2, 2, 2], 21);
    assert!(tr_als(&x, &FitConfig::new(vec![2, 2])).is_err());
    assert!(tr_als(&x, &FitConfig::new(vec![2, 0, 2])).is_err());
    assert!(tr_als(&x, &FitConfig::new(vec![2, 2, 2]).max_iters(0)).is_err());
    assert!(tr_ts_als(&x, &FitConfig::new(vec![2, 2, 2]).m(0)).is_err());
    assert!("tr-foo".parse::<Solver>().is_err());
    assert_eq!("tr-ts-als".parse::<Solver>().unwrap(), Solver::TrTsAls);
}

#[test]
fn sparse_input_matches_dense_for_tensorsketch() {
    let d = exact::<f64>(&[5, 4, 3], &[2, 2, 2], 22);
    let TensorData::Dense(dense) = &d else { unreachable!() };
    let sp = TensorData::Sparse(trsketch::tensor::SparseTensor::from_dense(dense));
    let cfg = FitConfig::new(vec![2, 2, 2]).m(25).max_iters(3).seed(4);
    let a = tr_ts_als(&d, &cfg).unwrap();
    let b = tr_ts_als(&sp, &cfg).unwrap();
    assert!(max_core_diff(&a.cores, &b.cores) < 1e-12);
    assert!((a.final_error - b.final_error).abs() < 1e-12);
}
