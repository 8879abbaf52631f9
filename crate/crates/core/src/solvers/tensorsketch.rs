use super::{
    finish, initial_cores, iterate, other_modes, rel_error, solve_core, Clock, FitConfig,
    FitResult, SketchRegime, Stream,
};
use crate::error::Result;
use crate::ring::design_matrix;
use crate::scalar::Scalar;
use crate::sketch::{tensorsketch_rhs, tensorsketch_subchain, TensorSketch};
use crate::tensor::{Matrix, TensorData};

/// Sketched ALS with TensorSketch: one hash family drawn upfront and shared
/// by all modes, the sketched right-hand sides `T_{≠n} X_[n]^T` computed
/// once (in `O(nnz)` for sparse data), and each sketched design built by the
/// FFT formula.
pub fn tr_ts_als<T: Scalar>(x: &TensorData<T>, cfg: &FitConfig) -> Result<FitResult<T>> {
    let dims = x.dims().to_vec();
    cfg.validate(&dims, true)?;
    let clock = Clock::start();
    let norm = x.frobenius_norm();
    let order = dims.len();
    let ts = match cfg.regime {
        SketchRegime::Random => TensorSketch::random(&dims, cfg.m, &mut cfg.rng(Stream::Operator))?,
        SketchRegime::Identity => TensorSketch::injective(&dims)?,
    };
    let rhs = (1..=order)
        .map(|n| tensorsketch_rhs(x, n, &ts))
        .collect::<Result<Vec<Matrix<T>>>>()?;
    let mut cores = initial_cores::<T>(&dims, cfg)?;
    let trace = iterate(
        cfg,
        &mut cores,
        |c| {
            for n in 1..=order {
                let modes = other_modes(order, n);
                let a = design_matrix(&tensorsketch_subchain(&c.others(n), &modes, &ts)?)?;
                let g = solve_core(c, n, &a, &rhs[n - 1])?;
                c.set_core(n, g)?;
            }
            Ok(())
        },
        |c| rel_error(c, x, norm),
    )?;
    finish(cores, x, norm, trace, clock, cfg, None)
}
