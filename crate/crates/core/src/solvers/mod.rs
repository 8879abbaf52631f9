//! ALS fitting of tensor rings: the exact baseline, leverage-score sampling,
//! the two Kronecker-SRFT variants and TensorSketch.
//!
//! Every solver initializes all `N` cores from the same seeded standard
//! normal draw, so runs with equal seeds start from the same ring. One
//! iteration is a full sweep `n = 1, ..., N`.

mod als;
mod ksrft;
mod tensorsketch;

pub use als::{tr_als, tr_als_sampled};
pub use ksrft::{tr_ksrft_als, tr_ksrft_als_premix};
pub use tensorsketch::tr_ts_als;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ring::{relative_error_with_norm, TrCores};
use crate::scalar::{RealScalar, Scalar};
use crate::tensor::{DenseTensor, Matrix, TensorData, UnfoldKind};

/// When the full-reconstruction relative error is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorTracking {
    /// After every sweep; enables the tolerance test.
    EveryIteration,
    /// Once, after the last sweep; runs stop on the iteration cap only.
    FinalOnly,
}

/// How the randomized solvers build their sketches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SketchRegime {
    Random,
    /// Exhaustive sampling of every joint index once (sampling solvers) or
    /// injective digit hashes (TensorSketch). `m` is ignored.
    Identity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// `ranks[k]` is `R_{k+1}`.
    pub ranks: Vec<usize>,
    pub max_iters: usize,
    /// Stop once the tracked relative error drops below this.
    pub tol: f64,
    /// Embedding size of the randomized solvers.
    pub m: usize,
    pub seed: u64,
    pub tracking: ErrorTracking,
    pub regime: SketchRegime,
}

impl FitConfig {
    pub fn new(ranks: Vec<usize>) -> Self {
        Self {
            ranks,
            max_iters: 500,
            tol: 1e-6,
            m: 500,
            seed: 0,
            tracking: ErrorTracking::EveryIteration,
            regime: SketchRegime::Random,
        }
    }

    pub fn max_iters(mut self, v: usize) -> Self {
        self.max_iters = v;
        self
    }

    pub fn tol(mut self, v: f64) -> Self {
        self.tol = v;
        self
    }

    pub fn m(mut self, v: usize) -> Self {
        self.m = v;
        self
    }

    pub fn seed(mut self, v: u64) -> Self {
        self.seed = v;
        self
    }

    pub fn tracking(mut self, v: ErrorTracking) -> Self {
        self.tracking = v;
        self
    }

    pub fn regime(mut self, v: SketchRegime) -> Self {
        self.regime = v;
        self
    }

    fn validate(&self, dims: &[usize], sketched: bool) -> Result<()> {
        if self.ranks.len() != dims.len() {
            return Err(Error::dim(format!(
                "{} ranks for an order-{} tensor",
                self.ranks.len(),
                dims.len()
            )));
        }
        if self.ranks.contains(&0) {
            return Err(Error::arg("ranks must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::arg("at least one iteration is required"));
        }
        if sketched && self.regime == SketchRegime::Random {
            if self.m == 0 {
                return Err(Error::arg("embedding size must be positive"));
            }
            let n = self.ranks.len();
            let need = (0..n).map(|k| self.ranks[k] * self.ranks[(k + 1) % n]).max().unwrap_or(1);
            if self.m < need {
                log::warn!(
                    "embedding size {} is below max R_n R_(n+1) = {need}; sketched systems are underdetermined",
                    self.m
                );
            }
        }
        Ok(())
    }

    /// Generator for one named purpose of this run.
    fn rng(&self, stream: Stream) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream as u64);
        rng
    }
}

#[derive(Clone, Copy)]
enum Stream {
    Init = 0,
    Operator = 1,
    Samples = 2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<T> {
    pub cores: TrCores<T>,
    /// Relative error after each sweep when tracked.
    pub errors: Vec<f64>,
    /// Relative error of the returned cores.
    pub final_error: f64,
    pub iterations: usize,
    pub seconds: f64,
    pub seed: u64,
    /// Largest imaginary magnitude discarded from real-input premixed runs.
    pub max_imag: Option<f64>,
}

/// The five solvers, by their command-line names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Solver {
    TrAls,
    TrAlsSampled,
    TrKsrftAls,
    TrKsrftAlsPremix,
    TrTsAls,
}

impl Solver {
    pub const ALL: [Solver; 5] = [
        Solver::TrAls,
        Solver::TrAlsSampled,
        Solver::TrKsrftAls,
        Solver::TrKsrftAlsPremix,
        Solver::TrTsAls,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Solver::TrAls => "tr-als",
            Solver::TrAlsSampled => "tr-als-sampled",
            Solver::TrKsrftAls => "tr-ksrft-als",
            Solver::TrKsrftAlsPremix => "tr-ksrft-als-premix",
            Solver::TrTsAls => "tr-ts-als",
        }
    }

    pub fn is_randomized(self) -> bool {
        self != Solver::TrAls
    }

    /// Runs on any scalar type; TR-KSRFT-ALS constrains cores to be real and
    /// is rejected for complex data.
    pub fn fit<T: Scalar>(self, x: &TensorData<T>, cfg: &FitConfig) -> Result<FitResult<T>> {
        match self {
            Solver::TrAls => tr_als(x, cfg),
            Solver::TrAlsSampled => tr_als_sampled(x, cfg),
            Solver::TrKsrftAls => tr_ksrft_als(x, cfg),
            Solver::TrKsrftAlsPremix => tr_ksrft_als_premix(x, cfg),
            Solver::TrTsAls => tr_ts_als(x, cfg),
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Solver::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::arg(format!("unknown solver `{s}`")))
    }
}

/// Modes other than `n`, in ring order `n+1, ..., N, 1, ..., n-1`.
pub(crate) fn other_modes(order: usize, n: usize) -> Vec<usize> {
    (1..order).map(|k| (n - 1 + k) % order + 1).collect()
}

/// `X_[n]^T` (`∏_{j≠n} I_j x I_n`).
pub(crate) fn unfolded_rhs<T: Scalar>(x: &DenseTensor<T>, n: usize) -> Matrix<T> {
    x.unfold(n, UnfoldKind::ModeN)
        .expect("valid mode")
        .transpose()
}

/// Exact update of core `n`: `argmin_Z ‖G_[2]^{≠n} Z_(2)^T − X_[n]^T‖`.
pub(crate) fn exact_update<T: Scalar>(cores: &TrCores<T>, n: usize, rhs: &Matrix<T>) -> Result<DenseTensor<T>> {
    let a = cores.design_matrix(n)?;
    solve_core(cores, n, &a, rhs)
}

/// Core `n` from a solved design `a` and right-hand side.
pub(crate) fn solve_core<T: Scalar>(
    cores: &TrCores<T>,
    n: usize,
    a: &Matrix<T>,
    rhs: &Matrix<T>,
) -> Result<DenseTensor<T>> {
    let w = crate::linalg::solve_ls(a, rhs)?;
    let (ra, rb) = ring_ranks(cores, n);
    crate::ring::core_from_unknown(&w, ra, rb)
}

pub(crate) fn ring_ranks<T: Scalar>(cores: &TrCores<T>, n: usize) -> (usize, usize) {
    let d = cores.core(n).dims();
    (d[0], d[2])
}

pub(crate) fn initial_cores<T: Scalar>(dims: &[usize], cfg: &FitConfig) -> Result<TrCores<T>> {
    TrCores::random(dims, &cfg.ranks, &mut cfg.rng(Stream::Init))
}

/// The sweep loop shared by every solver: runs `sweep` until the iteration
/// cap, or until `error` falls below the tolerance when tracked.
pub(crate) fn iterate<S>(
    cfg: &FitConfig,
    state: &mut S,
    mut sweep: impl FnMut(&mut S) -> Result<()>,
    error: impl Fn(&S) -> Result<f64>,
) -> Result<(Vec<f64>, usize)> {
    let mut errors = Vec::new();
    let mut iters = 0;
    while iters < cfg.max_iters {
        sweep(state)?;
        iters += 1;
        if cfg.tracking == ErrorTracking::EveryIteration {
            let e = error(state)?;
            errors.push(e);
            if e < cfg.tol {
                break;
            }
        }
    }
    Ok((errors, iters))
}

pub(crate) fn rel_error<T: Scalar>(cores: &TrCores<T>, x: &TensorData<T>, norm: T::Real) -> Result<f64> {
    Ok(relative_error_with_norm(cores, x, norm)?.to_f64_lossy())
}

pub(crate) struct Clock(Instant);

impl Clock {
    pub(crate) fn start() -> Self {
        Clock(Instant::now())
    }

    pub(crate) fn seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// Assembles a result, computing the final error unless the last tracked
/// value already is it. The clock stops before that evaluation.
pub(crate) fn finish<T: Scalar>(
    cores: TrCores<T>,
    x: &TensorData<T>,
    norm: T::Real,
    (errors, iterations): (Vec<f64>, usize),
    clock: Clock,
    cfg: &FitConfig,
    max_imag: Option<f64>,
) -> Result<FitResult<T>> {
    let seconds = clock.seconds();
    let final_error = match (errors.last(), max_imag) {
        (Some(&e), None) => e,
        _ => rel_error(&cores, x, norm)?,
    };
    Ok(FitResult {
        cores,
        errors,
        final_error,
        iterations,
        seconds,
        seed: cfg.seed,
        max_imag,
    })
}
