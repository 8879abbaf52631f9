//! The two-stage protocol: a TR-ALS run fixes the iteration budget `T`,
//! then every solver runs `2T` sweeps over a grid of embedding sizes.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::solvers::{tr_als, ErrorTracking, FitConfig, Solver};
use crate::tensor::TensorData;

use super::derive_seed;

/// Stopping rule of the Preparation Stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrepConfig {
    pub max_iters: usize,
    pub tol: f64,
}

impl PrepConfig {
    /// Synthetic protocol: `M = 500`, `ε = 1e-6`.
    pub const PROTOCOL: PrepConfig = PrepConfig { max_iters: 500, tol: 1e-6 };
    /// Threshold search on arbitrary inputs: `M = 100`, `ε = 1e-3`.
    pub const THRESHOLD: PrepConfig = PrepConfig { max_iters: 100, tol: 1e-3 };
}

impl Default for PrepConfig {
    fn default() -> Self {
        Self::PROTOCOL
    }
}

/// Solvers, the `m` grid and repetitions of the Experimental Stage.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// TR-ALS runs only if listed.
    pub solvers: Vec<Solver>,
    pub j_init: usize,
    pub j_inc: usize,
    pub j_fin: usize,
    pub trials: usize,
    pub noise: Vec<f64>,
    pub prep: PrepConfig,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            solvers: vec![Solver::TrAls, Solver::TrAlsSampled, Solver::TrKsrftAls, Solver::TrTsAls],
            j_init: 100,
            j_inc: 100,
            j_fin: 1000,
            trials: 10,
            noise: vec![0.0, 0.01, 0.1],
            prep: PrepConfig::PROTOCOL,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.solvers.is_empty() {
            return Err(Error::arg("no solvers selected"));
        }
        if self.j_init == 0 || self.j_inc == 0 || self.j_init > self.j_fin {
            return Err(Error::arg(format!(
                "embedding grid {}:{}:{} needs 1 <= J_init <= J_fin and J_inc >= 1",
                self.j_init, self.j_inc, self.j_fin
            )));
        }
        if self.trials == 0 {
            return Err(Error::arg("at least one trial per point"));
        }
        if self.noise.is_empty() {
            return Err(Error::arg("no noise levels"));
        }
        if self.prep.max_iters == 0 {
            return Err(Error::arg("preparation stage needs an iteration cap"));
        }
        Ok(())
    }

    pub fn m_grid(&self) -> Vec<usize> {
        (self.j_init..=self.j_fin).step_by(self.j_inc).collect()
    }

    fn randomized(&self) -> impl Iterator<Item = Solver> + '_ {
        self.solvers.iter().copied().filter(|s| s.is_randomized())
    }

    fn has_tr_als(&self) -> bool {
        self.solvers.contains(&Solver::TrAls)
    }
}

/// One solver run of the Experimental Stage.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub solver: Solver,
    /// `None` for TR-ALS.
    pub m: Option<usize>,
    pub trial: usize,
    pub seed: u64,
    pub rel_error: f64,
    pub iters: usize,
    pub seconds: f64,
}

impl ExperimentRecord {
    /// Canonical row order: solver, then `m`, then trial.
    pub fn key(&self) -> (Solver, usize, usize) {
        (self.solver, self.m.unwrap_or(0), self.trial)
    }
}

/// Iterations `T` of a TR-ALS run stopped at `prep.max_iters` or once the
/// relative error drops below `prep.tol`.
pub fn preparation_stage<T: Scalar>(
    x: &TensorData<T>,
    ranks: &[usize],
    prep: PrepConfig,
    seed: u64,
) -> Result<usize> {
    let cfg = FitConfig::new(ranks.to_vec())
        .max_iters(prep.max_iters)
        .tol(prep.tol)
        .seed(seed)
        .tracking(ErrorTracking::EveryIteration);
    Ok(tr_als(x, &cfg)?.iterations)
}

/// Seed of one sweep point; distinct points get unrelated streams.
pub fn record_seed(base: u64, solver: Solver, m: Option<usize>, trial: usize) -> u64 {
    derive_seed(base, &[solver as u64, m.unwrap_or(0) as u64, trial as u64])
}

fn run_point<T: Scalar>(
    x: &TensorData<T>,
    ranks: &[usize],
    solver: Solver,
    m: Option<usize>,
    trial: usize,
    cap: usize,
    base: u64,
) -> Result<ExperimentRecord> {
    let seed = record_seed(base, solver, m, trial);
    let cfg = FitConfig::new(ranks.to_vec())
        .max_iters(cap)
        .m(m.unwrap_or(1))
        .seed(seed)
        .tracking(ErrorTracking::FinalOnly);
    let fit = solver.fit(x, &cfg)?;
    Ok(ExperimentRecord {
        solver,
        m,
        trial,
        seed,
        rel_error: fit.final_error,
        iters: fit.iterations,
        seconds: fit.seconds,
    })
}

/// Every (solver, m, trial) point with a `2T` iteration cap, in canonical
/// order.
pub fn experimental_stage<T: Scalar>(
    x: &TensorData<T>,
    ranks: &[usize],
    sweep: &SweepSpec,
    t: usize,
    base_seed: u64,
) -> Result<Vec<ExperimentRecord>> {
    sweep.validate()?;
    let cap = 2 * t.max(1);
    let mut out = Vec::new();
    if sweep.has_tr_als() {
        for trial in 1..=sweep.trials {
            out.push(run_point(x, ranks, Solver::TrAls, None, trial, cap, base_seed)?);
        }
    }
    for solver in sweep.randomized() {
        for m in sweep.m_grid() {
            for trial in 1..=sweep.trials {
                out.push(run_point(x, ranks, solver, Some(m), trial, cap, base_seed)?);
            }
        }
    }
    out.sort_by_key(ExperimentRecord::key);
    Ok(out)
}

/// Trial statistics of one (solver, m) point.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub solver: Solver,
    pub m: Option<usize>,
    pub trials: usize,
    pub median_error: f64,
    pub mean_error: f64,
    pub mean_seconds: f64,
}

pub fn median(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let h = s.len() / 2;
    if s.len() % 2 == 1 {
        s[h]
    } else {
        0.5 * (s[h - 1] + s[h])
    }
}

pub fn summarize(records: &[ExperimentRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(Solver, usize), (Option<usize>, Vec<&ExperimentRecord>)> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.solver, r.m.unwrap_or(0)))
            .or_insert_with(|| (r.m, Vec::new()))
            .1
            .push(r);
    }
    groups
        .into_iter()
        .map(|((solver, _), (m, rs))| {
            let errs: Vec<f64> = rs.iter().map(|r| r.rel_error).collect();
            let n = rs.len() as f64;
            SummaryRow {
                solver,
                m,
                trials: rs.len(),
                median_error: median(&errs),
                mean_error: errs.iter().sum::<f64>() / n,
                mean_seconds: rs.iter().map(|r| r.seconds).sum::<f64>() / n,
            }
        })
        .collect()
}

/// Outcome of the threshold search for one randomized solver.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdHit {
    pub solver: Solver,
    /// Smallest grid `m` whose median error is within the factor.
    pub m: Option<usize>,
    pub median_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdReport {
    pub reference_error: f64,
    pub hits: Vec<ThresholdHit>,
    pub records: Vec<ExperimentRecord>,
}

/// Fixes the iteration budget with TR-ALS, then increases `m` per
/// randomized solver until its median error is at most
/// `factor x` the median TR-ALS error under the same budget.
pub fn threshold_search<T: Scalar>(
    x: &TensorData<T>,
    ranks: &[usize],
    sweep: &SweepSpec,
    factor: f64,
    base_seed: u64,
) -> Result<(usize, ThresholdReport)> {
    sweep.validate()?;
    if !(factor.is_finite() && factor > 0.0) {
        return Err(Error::arg(format!("threshold factor {factor} must be positive")));
    }
    let t = preparation_stage(x, ranks, sweep.prep, derive_seed(base_seed, &[u64::MAX]))?;
    let mut records = Vec::new();
    for trial in 1..=sweep.trials {
        records.push(run_point(x, ranks, Solver::TrAls, None, trial, t, base_seed)?);
    }
    let reference = median(&records.iter().map(|r| r.rel_error).collect::<Vec<_>>());
    let mut hits = Vec::new();
    for solver in sweep.randomized() {
        let mut hit = ThresholdHit { solver, m: None, median_error: None };
        for m in sweep.m_grid() {
            let mut errs = Vec::with_capacity(sweep.trials);
            for trial in 1..=sweep.trials {
                let r = run_point(x, ranks, solver, Some(m), trial, t, base_seed)?;
                errs.push(r.rel_error);
                records.push(r);
            }
            let med = median(&errs);
            if med <= factor * reference {
                hit = ThresholdHit { solver, m: Some(m), median_error: Some(med) };
                break;
            }
        }
        hits.push(hit);
    }
    records.sort_by_key(ExperimentRecord::key);
    Ok((t, ThresholdReport { reference_error: reference, hits, records }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{gen_synthetic, SynthSpec};

    fn small() -> TensorData<f64> {
        gen_synthetic::<f64>(&SynthSpec::new(1, 8, 2, 1)).unwrap().1
    }

    #[test]
    fn preparation_respects_cap_and_seed() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let truth = crate::ring::TrCores::<f64>::random(&[10, 10, 10], &[2, 2, 2], &mut rng).unwrap();
        let x = TensorData::Dense(truth.reconstruct());
        let one = PrepConfig { max_iters: 1, tol: 1e-6 };
        assert_eq!(preparation_stage(&x, &[2, 2, 2], one, 3).unwrap(), 1);
        let t = preparation_stage(&x, &[2, 2, 2], PrepConfig::PROTOCOL, 3).unwrap();
        assert!(t < 500, "T = {t}");
        assert_eq!(preparation_stage(&x, &[2, 2, 2], PrepConfig::PROTOCOL, 3).unwrap(), t);
    }

    #[test]
    fn record_count_matches_grid() {
        let x = small();
        let mut s = SweepSpec {
            solvers: vec![Solver::TrTsAls],
            j_init: 20,
            j_inc: 10,
            j_fin: 20,
            trials: 1,
            ..SweepSpec::default()
        };
        assert_eq!(experimental_stage(&x, &[2, 2, 2], &s, 2, 0).unwrap().len(), 1);
        s.solvers = vec![Solver::TrAls, Solver::TrAlsSampled, Solver::TrKsrftAls, Solver::TrTsAls];
        s.j_fin = 40;
        s.trials = 2;
        let recs = experimental_stage(&x, &[2, 2, 2], &s, 2, 0).unwrap();
        assert_eq!(recs.len(), 3 * 3 * 2 + 2);
        assert!(recs.windows(2).all(|w| w[0].key() < w[1].key()));
        assert!(recs.iter().all(|r| r.iters == 4 && r.rel_error >= 0.0));
        let seeds: std::collections::BTreeSet<u64> = recs.iter().map(|r| r.seed).collect();
        assert_eq!(seeds.len(), recs.len());
    }

    #[test]
    fn sweep_validation() {
        let bad = SweepSpec { j_init: 5, j_fin: 4, ..SweepSpec::default() };
        assert!(bad.validate().is_err());
        let bad = SweepSpec { j_inc: 0, ..SweepSpec::default() };
        assert!(bad.validate().is_err());
        assert_eq!(SweepSpec::default().m_grid().len(), 10);
    }

    #[test]
    fn median_and_summary() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        let rec = |trial, e| ExperimentRecord {
            solver: Solver::TrTsAls,
            m: Some(10),
            trial,
            seed: 0,
            rel_error: e,
            iters: 1,
            seconds: 1.0,
        };
        let rows = summarize(&[rec(1, 0.1), rec(2, 0.3), rec(3, 0.2)]);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].median_error, 0.2);
        assert!((rows[0].mean_error - 0.2).abs() < 1e-15);
    }

    #[test]
    fn threshold_finds_an_embedding_size() {
        let x = small();
        let s = SweepSpec {
            solvers: vec![Solver::TrAls, Solver::TrTsAls],
            j_init: 16,
            j_inc: 16,
            j_fin: 64,
            trials: 3,
            prep: PrepConfig::THRESHOLD,
            ..SweepSpec::default()
        };
        let (t, rep) = threshold_search(&x, &[2, 2, 2], &s, 1e6, 0).unwrap();
        assert!((1..=100).contains(&t));
        assert_eq!(rep.hits.len(), 1);
        assert_eq!(rep.hits[0].m, Some(16));
        assert_eq!(rep.records.len(), 6);
    }
}
