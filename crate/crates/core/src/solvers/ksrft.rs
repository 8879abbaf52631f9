use super::{
    finish, initial_cores, iterate, other_modes, rel_error, ring_ranks, Clock, FitConfig, FitResult,
    SketchRegime, Stream,
};
use crate::error::{Error, Result};
use crate::linalg::{solve_ls, solve_ls_real};
use crate::ring::{core_from_unknown, design_matrix, max_imag, TrCores};
use crate::scalar::{ComplexOf, RealScalar, Scalar};
use crate::sketch::{
    draw_joint_samples, ksrft_sketch_rhs, mix_core, mix_tensor, random_mixers, sampled_subchain,
    unmix_core, IndexDist, ModeMixer, SampleTable,
};
use crate::tensor::{DenseTensor, TensorData};

/// Imaginary parts below this are rounding residue of a real fit.
pub const IMAG_TOLERANCE: f64 = 1e-8;

/// Uniform joint samples over the modes other than `n`, or every joint
/// index once in the identity regime.
fn uniform_table<G: rand::Rng>(
    cfg: &FitConfig,
    dims: &[usize],
    n: usize,
    rng: &mut G,
) -> Result<SampleTable> {
    let modes = other_modes(dims.len(), n);
    let md: Vec<usize> = modes.iter().map(|&j| dims[j - 1]).collect();
    match cfg.regime {
        SketchRegime::Identity => SampleTable::exhaustive(modes, md),
        SketchRegime::Random => {
            let ds: Vec<IndexDist<f64>> = md.iter().map(|&d| IndexDist::Uniform(d)).collect();
            draw_joint_samples(modes, &ds, cfg.m, rng)
        }
    }
}

fn mixed_others<C: Scalar>(mixed: &[DenseTensor<C>], n: usize) -> Vec<&DenseTensor<C>> {
    other_modes(mixed.len(), n).into_iter().map(|j| &mixed[j - 1]).collect()
}

/// One mixer per mode, drawn from the operator stream.
fn mixers<R: RealScalar>(dims: &[usize], cfg: &FitConfig) -> Vec<ModeMixer<R>> {
    random_mixers(dims, &mut cfg.rng(Stream::Operator))
}

/// Sketched ALS with Kronecker-SRFT row sampling and real-constrained
/// updates: `X` and the cores are mixed once, each update solves the
/// stacked real system against unmixed sampled rows, and the new core is
/// remixed.
pub fn tr_ksrft_als<T: Scalar>(x: &TensorData<T>, cfg: &FitConfig) -> Result<FitResult<T>> {
    if T::IS_COMPLEX {
        return Err(Error::arg(
            "tr-ksrft-als fits real cores; use tr-ksrft-als-premix for complex data",
        ));
    }
    let dims = x.dims().to_vec();
    cfg.validate(&dims, true)?;
    let clock = Clock::start();
    let norm = x.frobenius_norm();
    let order = dims.len();
    let mx = mixers::<T::Real>(&dims, cfg);
    let xhat = mix_tensor(&x.to_dense(), &mx)?;
    let mut rng = cfg.rng(Stream::Samples);
    let cores = initial_cores::<T>(&dims, cfg)?;
    let mixed = cores
        .cores()
        .iter()
        .zip(&mx)
        .map(|(c, m)| mix_core(c, m))
        .collect::<Result<Vec<_>>>()?;
    let mut state = (cores, mixed);
    let trace = iterate(
        cfg,
        &mut state,
        |(c, mixed)| {
            for n in 1..=order {
                let table = uniform_table(cfg, &dims, n, &mut rng)?;
                let a = design_matrix(&sampled_subchain(&table, &mixed_others(mixed, n))?)?;
                let b = ksrft_sketch_rhs(&xhat, n, &table, Some(&mx[n - 1]))?;
                let w = solve_ls_real(&a, &b)?.map(T::from_real);
                let (ra, rb) = ring_ranks(c, n);
                let g = core_from_unknown(&w, ra, rb)?;
                mixed[n - 1] = mix_core(&g, &mx[n - 1])?;
                c.set_core(n, g)?;
            }
            Ok(())
        },
        |(c, _)| rel_error(c, x, norm),
    )?;
    finish(state.0, x, norm, trace, clock, cfg, None)
}

/// Sketched ALS entirely in the mixed domain: the unknown of update `n` is
/// the mixed core `G_n ×₂ (F_n D_n)`, solved by ordinary complex least
/// squares; all cores are unmixed once at the end. Real data keeps only the
/// real parts of the unmixed cores.
pub fn tr_ksrft_als_premix<T: Scalar>(x: &TensorData<T>, cfg: &FitConfig) -> Result<FitResult<T>> {
    let dims = x.dims().to_vec();
    cfg.validate(&dims, true)?;
    let clock = Clock::start();
    let norm = x.frobenius_norm();
    let order = dims.len();
    let mx = mixers::<T::Real>(&dims, cfg);
    let xhat = TensorData::Dense(mix_tensor(&x.to_dense(), &mx)?);
    let TensorData::Dense(xh) = &xhat else {
        unreachable!()
    };
    let mut rng = cfg.rng(Stream::Samples);
    let init = initial_cores::<T>(&dims, cfg)?;
    let mut mixed: TrCores<ComplexOf<T>> = TrCores::new(
        init.cores()
            .iter()
            .zip(&mx)
            .map(|(c, m)| mix_core(c, m))
            .collect::<Result<Vec<_>>>()?,
    )?;
    // ‖TR(Ĝ) − X̂‖ = ‖TR(G) − X‖ since the mixing is unitary.
    let trace = iterate(
        cfg,
        &mut mixed,
        |c| {
            for n in 1..=order {
                let table = uniform_table(cfg, &dims, n, &mut rng)?;
                let a = design_matrix(&sampled_subchain(&table, &c.others(n))?)?;
                let b = ksrft_sketch_rhs(xh, n, &table, None)?;
                let w = solve_ls(&a, &b)?;
                let (ra, rb) = ring_ranks(c, n);
                c.set_core(n, core_from_unknown(&w, ra, rb)?)?;
            }
            Ok(())
        },
        |c| rel_error(c, &xhat, norm),
    )?;
    let unmixed = TrCores::new(
        mixed
            .cores()
            .iter()
            .zip(&mx)
            .map(|(c, m)| unmix_core(c, m))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let (cores, imag) = if T::IS_COMPLEX {
        (unmixed.map(|c| c.map(|v| T::from_complex(v.to_complex())))?, None)
    } else {
        let im = max_imag(&unmixed).to_f64_lossy();
        if im >= IMAG_TOLERANCE {
            log::warn!("unmixed cores carry imaginary parts up to {im:e}; keeping real parts");
        }
        (unmixed.map(|c| c.map(|v| T::from_complex(v.to_complex())))?, Some(im))
    };
    finish(cores, x, norm, trace, clock, cfg, imag)
}
