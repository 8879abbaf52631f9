//! The four synthetic ring generators and the noise model.

use rand::seq::index;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ring::TrCores;
use crate::scalar::{RealScalar, Scalar};
use crate::tensor::{DenseTensor, SparseTensor, TensorData};

/// Value planted once per core by experiments 1 and 4.
pub const SPIKE: f64 = 20.0;

/// Parameters of one synthetic tensor: `N` cores of shape
/// `R_true x I x R_true`.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    /// 1 spiked normal, 2 sparse, 3 outlier columns, 4 complex spiked.
    pub experiment: u8,
    pub i: usize,
    pub n: usize,
    pub r_true: usize,
    /// Fraction of stored core entries in experiment 2.
    pub density: f64,
    /// Rows per outlier column in experiment 3.
    pub spread: usize,
    /// Outlier value in experiment 3; `None` means `I/4 - 10`.
    pub magnitude: Option<f64>,
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(experiment: u8, i: usize, r_true: usize, seed: u64) -> Self {
        Self {
            experiment,
            i,
            n: 3,
            r_true,
            density: 0.05,
            spread: 15,
            magnitude: None,
            seed,
        }
    }

    pub fn is_complex(&self) -> bool {
        self.experiment == 4
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude.unwrap_or(self.i as f64 / 4.0 - 10.0)
    }

    pub fn dims(&self) -> Vec<usize> {
        vec![self.i; self.n]
    }

    pub fn ranks(&self) -> Vec<usize> {
        vec![self.r_true; self.n]
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=4).contains(&self.experiment) {
            return Err(Error::arg(format!("unknown experiment {}", self.experiment)));
        }
        if self.i == 0 || self.n == 0 || self.r_true == 0 {
            return Err(Error::arg("I, N and R_true must be positive"));
        }
        match self.experiment {
            2 if !(0.0..=1.0).contains(&self.density) => {
                Err(Error::arg(format!("density {} outside [0, 1]", self.density)))
            }
            3 => {
                if self.n < 3 {
                    return Err(Error::arg("experiment 3 alters core 3 and needs N >= 3"));
                }
                if self.r_true * self.r_true < 3 {
                    return Err(Error::arg("experiment 3 needs at least 3 unfolding columns"));
                }
                if self.spread == 0 || 3 * self.spread > self.i {
                    return Err(Error::arg(format!(
                        "spread {} does not fit 3 staggered blocks in I = {}",
                        self.spread, self.i
                    )));
                }
                if !self.magnitude().is_finite() {
                    return Err(Error::arg("magnitude must be finite"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Ground-truth cores and `X_true = TR(cores)`; experiment 2 returns sparse
/// storage. `T` must be complex exactly for experiment 4.
pub fn gen_synthetic<T: Scalar>(spec: &SynthSpec) -> Result<(TrCores<T>, TensorData<T>)> {
    spec.validate()?;
    if T::IS_COMPLEX != spec.is_complex() {
        return Err(Error::arg(format!(
            "experiment {} is {}-valued",
            spec.experiment,
            if spec.is_complex() { "complex" } else { "real" }
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (dims, ranks) = (spec.dims(), spec.ranks());
    let cores = match spec.experiment {
        1 | 4 => spiked(TrCores::random(&dims, &ranks, &mut rng)?, &mut rng)?,
        2 => sparse_cores(&dims, &ranks, spec.density, &mut rng)?,
        _ => outlier_cores(TrCores::random(&dims, &ranks, &mut rng)?, spec)?,
    };
    let x = cores.reconstruct();
    let x = if spec.experiment == 2 {
        TensorData::Sparse(SparseTensor::from_dense(&x))
    } else {
        TensorData::Dense(x)
    };
    Ok((cores, x))
}

fn spiked<T: Scalar>(cores: TrCores<T>, rng: &mut impl Rng) -> Result<TrCores<T>> {
    let mut cs = cores.into_cores();
    for c in &mut cs {
        let k = rng.random_range(0..c.data().len());
        c.data_mut()[k] = T::from_real(T::Real::of(SPIKE));
    }
    TrCores::new(cs)
}

fn sparse_cores<T: Scalar>(
    dims: &[usize],
    ranks: &[usize],
    density: f64,
    rng: &mut impl Rng,
) -> Result<TrCores<T>> {
    let mut cs = TrCores::<T>::zeros(dims, ranks)?.into_cores();
    for c in &mut cs {
        let len = c.data().len();
        let nnz = ((density * len as f64).round() as usize).min(len);
        let mut at = index::sample(rng, len, nnz).into_vec();
        at.sort_unstable();
        for k in at {
            c.data_mut()[k] = T::standard_normal(rng);
        }
    }
    TrCores::new(cs)
}

/// Core 3 keeps only its first `spread` lateral slices; then every core's
/// first three mode-2 unfolding columns are replaced by staggered blocks of
/// `spread` entries equal to the magnitude.
fn outlier_cores<T: Scalar>(cores: TrCores<T>, spec: &SynthSpec) -> Result<TrCores<T>> {
    let mag = T::from_real(T::Real::of(spec.magnitude()));
    let mut cs = cores.into_cores();
    zero_slices_from(&mut cs[2], spec.spread);
    for c in &mut cs {
        let (ra, ii) = (c.dims()[0], c.dims()[1]);
        for col in 0..3 {
            let (a, b) = (col % ra, col / ra);
            for i in 0..ii {
                let in_block = i / spec.spread == col;
                c.data_mut()[a + ra * i + ra * ii * b] = if in_block { mag } else { T::zero() };
            }
        }
    }
    TrCores::new(cs)
}

fn zero_slices_from<T: Scalar>(c: &mut DenseTensor<T>, keep: usize) {
    let d = c.dims().to_vec();
    let (ra, ii) = (d[0], d[1]);
    for (k, v) in c.data_mut().iter_mut().enumerate() {
        if (k / ra) % ii >= keep {
            *v = T::zero();
        }
    }
}

/// `X = X_true + noise (‖X_true‖/‖N‖) N` with standard normal `N` (complex
/// normal for complex data). Sparse inputs perturb stored entries only.
pub fn add_noise<T: Scalar>(x: &TensorData<T>, noise: f64, seed: u64) -> Result<TensorData<T>> {
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::arg(format!("noise level {noise} must be finite and nonnegative")));
    }
    if noise == 0.0 {
        return Ok(x.clone());
    }
    let norm = x.frobenius_norm().to_f64_lossy();
    if norm == 0.0 {
        return Err(Error::Undefined("relative noise on a zero tensor".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = x.clone();
    let values = match &mut out {
        TensorData::Dense(d) => d.data_mut(),
        TensorData::Sparse(s) => s.values_mut(),
    };
    let draw: Vec<T> = (0..values.len()).map(|_| T::standard_normal(&mut rng)).collect();
    let dn = crate::tensor::frobenius(&draw).to_f64_lossy();
    if dn == 0.0 {
        return Err(Error::Undefined("degenerate noise draw".into()));
    }
    let s = T::Real::of(noise * norm / dn);
    for (v, e) in values.iter_mut().zip(draw) {
        *v += e.scale(s);
    }
    Ok(out)
}
