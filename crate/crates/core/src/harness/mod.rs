//! Synthetic data, noise injection, the two-stage benchmark protocol and
//! its file outputs.

mod config;
mod protocol;
mod report;
mod synth;

pub use config::{DataSource, SweepConfig, SweepMode};
pub use protocol::{
    experimental_stage, median, preparation_stage, record_seed, summarize, threshold_search,
    ExperimentRecord, PrepConfig, SummaryRow, SweepSpec, ThresholdHit, ThresholdReport,
};
pub use report::{summary_rows, write_records, Timing, RECORD_HEADER, SUMMARY_HEADER};
pub use synth::{add_noise, gen_synthetic, SynthSpec, SPIKE};

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::error::Result;
use crate::scalar::Scalar;
use crate::tensor::io::{read_dense, read_sparse, write_dense, write_sparse, AnyDense};
use crate::tensor::TensorData;

/// SplitMix64 folded over `parts`; deterministic child seeds.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    parts.iter().fold(mix(base), |acc, &p| mix(acc ^ mix(p)))
}

/// A tensor file's contents, whichever scalar kind and storage it holds.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyTensor {
    Real(TensorData<f64>),
    Complex(TensorData<Complex64>),
}

impl AnyTensor {
    /// Reads a DTEN file, or the sparse text format when the magic is absent.
    pub fn load(path: &Path) -> Result<Self> {
        let mut f = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        let n = f.read(&mut magic)?;
        let f = BufReader::new(File::open(path)?);
        if n == 4 && &magic == b"DTEN" {
            Ok(match read_dense(f)? {
                AnyDense::Real(x) => AnyTensor::Real(x.into()),
                AnyDense::Complex(x) => AnyTensor::Complex(x.into()),
            })
        } else {
            Ok(AnyTensor::Real(read_sparse(f)?.into()))
        }
    }

    /// Dense data as DTEN, sparse data as coordinate text.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        match self {
            AnyTensor::Real(TensorData::Dense(x)) => write_dense(x, &mut w)?,
            AnyTensor::Real(TensorData::Sparse(x)) => write_sparse(x, &mut w)?,
            AnyTensor::Complex(TensorData::Dense(x)) => write_dense(x, &mut w)?,
            AnyTensor::Complex(TensorData::Sparse(x)) => write_dense(&x.to_dense(), &mut w)?,
        }
        w.flush()?;
        Ok(())
    }

    pub fn dims(&self) -> &[usize] {
        match self {
            AnyTensor::Real(x) => x.dims(),
            AnyTensor::Complex(x) => x.dims(),
        }
    }
}

/// Results for one noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseOutcome {
    pub noise: f64,
    /// Preparation Stage iterations.
    pub t: usize,
    pub records: Vec<ExperimentRecord>,
    /// Threshold mode only.
    pub threshold: Option<ThresholdReport>,
}

/// Runs the configured sweep for every noise level.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<NoiseOutcome>> {
    let data = match &cfg.source {
        DataSource::File(p) => AnyTensor::load(p)?,
        DataSource::Synthetic(s) if s.is_complex() => AnyTensor::Complex(gen_synthetic(s)?.1),
        DataSource::Synthetic(s) => AnyTensor::Real(gen_synthetic(s)?.1),
    };
    match &data {
        AnyTensor::Real(x) => run_on(x, cfg),
        AnyTensor::Complex(x) => run_on(x, cfg),
    }
}

fn run_on<T: Scalar>(x_true: &TensorData<T>, cfg: &SweepConfig) -> Result<Vec<NoiseOutcome>> {
    let ranks = cfg.ranks_for(x_true.dims().len())?;
    let mut out = Vec::new();
    for (k, &noise) in cfg.sweep.noise.iter().enumerate() {
        let k = k as u64;
        let x = add_noise(x_true, noise, derive_seed(cfg.seed, &[1, k]))?;
        let base = derive_seed(cfg.seed, &[3, k]);
        let outcome = match cfg.mode {
            SweepMode::Protocol => {
                let t = preparation_stage(&x, &ranks, cfg.sweep.prep, derive_seed(cfg.seed, &[2, k]))?;
                let records = experimental_stage(&x, &ranks, &cfg.sweep, t, base)?;
                NoiseOutcome { noise, t, records, threshold: None }
            }
            SweepMode::Threshold => {
                let (t, rep) = threshold_search(&x, &ranks, &cfg.sweep, cfg.threshold, base)?;
                NoiseOutcome { noise, t, records: rep.records.clone(), threshold: Some(rep) }
            }
        };
        log::info!("noise {noise}: T = {}, {} records", outcome.t, outcome.records.len());
        out.push(outcome);
    }
    Ok(out)
}

pub fn records_path(dir: &Path, noise: f64) -> PathBuf {
    dir.join(format!("records-noise-{noise}.csv"))
}

/// Writes `records-noise-<δ>.csv` per level, `summary.csv`, and in
/// threshold mode `threshold.csv`. Returns the files written.
pub fn write_outcomes(dir: &Path, outcomes: &[NoiseOutcome], timing: Timing) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let mut summary = format!("{SUMMARY_HEADER}\n");
    let mut threshold = String::from("noise,T,solver,m,median_rel_error,tr_als_error\n");
    for o in outcomes {
        let p = records_path(dir, o.noise);
        let mut w = BufWriter::new(File::create(&p)?);
        write_records(&o.records, timing, &mut w)?;
        w.flush()?;
        files.push(p);
        summary.push_str(&summary_rows(o.noise, o.t, &summarize(&o.records), timing));
        if let Some(rep) = &o.threshold {
            for h in &rep.hits {
                threshold.push_str(&format!(
                    "{},{},{},{},{},{:e}\n",
                    o.noise,
                    o.t,
                    h.solver,
                    h.m.map_or_else(String::new, |m| m.to_string()),
                    h.median_error.map_or_else(String::new, |e| format!("{e:e}")),
                    rep.reference_error
                ));
            }
        }
    }
    let p = dir.join("summary.csv");
    fs::write(&p, summary)?;
    files.push(p);
    if outcomes.iter().any(|o| o.threshold.is_some()) {
        let p = dir.join("threshold.csv");
        fs::write(&p, threshold)?;
        files.push(p);
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_differ_and_repeat() {
        let a = derive_seed(7, &[1, 0]);
        assert_eq!(a, derive_seed(7, &[1, 0]));
        assert_ne!(a, derive_seed(7, &[1, 1]));
        assert_ne!(a, derive_seed(8, &[1, 0]));
        assert_ne!(derive_seed(7, &[0, 1]), derive_seed(7, &[1, 0]));
    }

    #[test]
    fn tensor_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let (_, x) = gen_synthetic::<f64>(&SynthSpec::new(1, 5, 2, 1)).unwrap();
        let p = dir.path().join("x.dten");
        AnyTensor::Real(x.clone()).save(&p).unwrap();
        assert_eq!(AnyTensor::load(&p).unwrap(), AnyTensor::Real(x));

        let mut s = SynthSpec::new(2, 6, 2, 1);
        s.density = 0.5;
        let (_, sp) = gen_synthetic::<f64>(&s).unwrap();
        let p = dir.path().join("s.txt");
        AnyTensor::Real(sp.clone()).save(&p).unwrap();
        assert_eq!(AnyTensor::load(&p).unwrap(), AnyTensor::Real(sp));

        let (_, z) = gen_synthetic::<Complex64>(&SynthSpec::new(4, 4, 2, 1)).unwrap();
        let p = dir.path().join("z.dten");
        AnyTensor::Complex(z.clone()).save(&p).unwrap();
        assert_eq!(AnyTensor::load(&p).unwrap(), AnyTensor::Complex(z));
    }

    #[test]
    fn small_sweep_writes_stable_files() {
        let text = "exp = 1\nI = 6\nR_true = 2\nsolvers = tr-als, tr-ts-als\nj_init = 8\nj_inc = 8\nj_fin = 16\ntrials = 2\nnoise = 0, 0.1\nprep_max_iters = 5\nseed = 3\n";
        let cfg = SweepConfig::parse(text).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let first = write_outcomes(dir.path(), &run_sweep(&cfg).unwrap(), cfg.timing).unwrap();
        let bytes: Vec<Vec<u8>> = first.iter().map(|p| fs::read(p).unwrap()).collect();
        let again = write_outcomes(dir.path(), &run_sweep(&cfg).unwrap(), cfg.timing).unwrap();
        assert_eq!(first, again);
        for (p, b) in again.iter().zip(&bytes) {
            assert_eq!(&fs::read(p).unwrap(), b);
        }
        let rec = String::from_utf8(bytes[0].clone()).unwrap();
        assert_eq!(rec.lines().next(), Some(RECORD_HEADER));
        assert_eq!(rec.lines().count(), 1 + 2 + 2 * 2);
    }
}
