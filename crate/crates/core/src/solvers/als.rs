use super::{
    exact_update, finish, initial_cores, iterate, other_modes, rel_error, solve_core, unfolded_rhs,
    Clock, FitConfig, FitResult, SketchRegime, Stream,
};
use crate::error::Result;
use crate::ring::design_matrix;
use crate::scalar::{RealScalar, Scalar};
use crate::sketch::{
    draw_joint_samples, leverage_distribution, sampled_rows, sampled_subchain, IndexDist,
    SampleTable,
};
use crate::tensor::{Matrix, TensorData};

/// Exact alternating least squares.
pub fn tr_als<T: Scalar>(x: &TensorData<T>, cfg: &FitConfig) -> Result<FitResult<T>> {
    let dims = x.dims().to_vec();
    cfg.validate(&dims, false)?;
    let clock = Clock::start();
    let norm = x.frobenius_norm();
    let dense = x.to_dense();
    let order = dims.len();
    let rhs: Vec<Matrix<T>> = (1..=order).map(|n| unfolded_rhs(&dense, n)).collect();
    let mut cores = initial_cores::<T>(&dims, cfg)?;
    let trace = iterate(
        cfg,
        &mut cores,
        |c| {
            for n in 1..=order {
                let g = exact_update(c, n, &rhs[n - 1])?;
                c.set_core(n, g)?;
            }
            Ok(())
        },
        |c| rel_error(c, x, norm),
    )?;
    finish(cores, x, norm, trace, clock, cfg, None)
}

/// Importance weight `1 / sqrt(m ∏_k p_k(i_k))` of every sampled row.
fn sample_weights<R: RealScalar>(table: &SampleTable, dists: &[&IndexDist<R>]) -> Vec<R> {
    let m = R::of(table.len() as f64);
    (0..table.len())
        .map(|j| {
            let p = dists
                .iter()
                .enumerate()
                .fold(R::one(), |acc, (k, d)| acc * d.prob(table.index0(j, k)));
            (m * p).sqrt().recip()
        })
        .collect()
}

fn scale_rows<T: Scalar>(a: &mut Matrix<T>, w: &[T::Real]) {
    for c in 0..a.cols() {
        for (v, &s) in a.col_mut(c).iter_mut().zip(w) {
            *v = v.scale(s);
        }
    }
}

/// ALS on rows drawn from the leverage-score distributions of the other
/// cores' classical mode-2 unfoldings, each mode independently, reweighted
/// for unbiasedness. The distribution of core `n` is refreshed right after
/// its update.
pub fn tr_als_sampled<T: Scalar>(x: &TensorData<T>, cfg: &FitConfig) -> Result<FitResult<T>> {
    let dims = x.dims().to_vec();
    cfg.validate(&dims, true)?;
    let clock = Clock::start();
    let norm = x.frobenius_norm();
    let dense = x.to_dense();
    let order = dims.len();
    let mut rng = cfg.rng(Stream::Samples);
    let cores = initial_cores::<T>(&dims, cfg)?;
    let dists = cores
        .cores()
        .iter()
        .map(leverage_distribution)
        .collect::<Result<Vec<_>>>()?;
    let mut state = (cores, dists);
    let trace = iterate(
        cfg,
        &mut state,
        |(c, dists)| {
            for n in 1..=order {
                let modes = other_modes(order, n);
                let (table, weights) = match cfg.regime {
                    SketchRegime::Identity => {
                        let md = modes.iter().map(|&j| dims[j - 1]).collect();
                        (SampleTable::exhaustive(modes.clone(), md)?, None)
                    }
                    SketchRegime::Random => {
                        let ds: Vec<_> = modes.iter().map(|&j| dists[j - 1].clone()).collect();
                        let t = draw_joint_samples(modes.clone(), &ds, cfg.m, &mut rng)?;
                        let refs: Vec<_> = ds.iter().collect();
                        let w = sample_weights(&t, &refs);
                        (t, Some(w))
                    }
                };
                let mut a = design_matrix(&sampled_subchain(&table, &c.others(n))?)?;
                let mut b = sampled_rows(&dense, n, &table)?;
                if let Some(w) = &weights {
                    scale_rows(&mut a, w);
                    scale_rows(&mut b, w);
                }
                let g = solve_core(c, n, &a, &b)?;
                dists[n - 1] = leverage_distribution(&g)?;
                c.set_core(n, g)?;
            }
            Ok(())
        },
        |(c, _)| rel_error(c, x, norm),
    )?;
    finish(state.0, x, norm, trace, clock, cfg, None)
}

