//! Flat `key = value` sweep configuration.
//!
//! One pair per line; `#` starts a comment. Recognized keys:
//!
//! | key | meaning | default |
//! |---|---|---|
//! | `exp` | synthetic experiment 1..4 | required unless `input` |
//! | `input` | tensor file (DTEN or sparse text) instead of `exp` | |
//! | `I`, `N`, `R_true` | synthetic sizes | 60, 3, 5 |
//! | `density` | experiment 2 fraction | 0.05 |
//! | `spread`, `magnitude` | experiment 3 outliers | 15, `I/4 - 10` |
//! | `rank` | target ranks, one value or one per mode | `R_true` |
//! | `solvers` | comma list of solver names | all but the premixed one |
//! | `j_init`, `j_inc`, `j_fin` | embedding grid | 100, 100, 1000 |
//! | `trials` | runs per point | 10 |
//! | `noise` | comma list of levels | `0, 0.01, 0.1` |
//! | `mode` | `protocol` or `threshold` | `protocol` |
//! | `threshold` | error factor of the threshold search | 1.1 |
//! | `prep_max_iters`, `prep_tol` | Preparation Stage rule | 500, 1e-6 (threshold: 100, 1e-3) |
//! | `timing` | `off` or `wall` | `off` |
//! | `seed` | base seed | 0 |
//! | `out` | output directory | `sweep-out` |

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use super::protocol::{PrepConfig, SweepSpec};
use super::report::Timing;
use super::synth::SynthSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Synthetic(SynthSpec),
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    Protocol,
    Threshold,
}

impl FromStr for SweepMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "protocol" => Ok(SweepMode::Protocol),
            "threshold" => Ok(SweepMode::Threshold),
            _ => Err(Error::arg(format!("unknown sweep mode `{s}`"))),
        }
    }
}

impl FromStr for Timing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "off" => Ok(Timing::Off),
            "wall" => Ok(Timing::Wall),
            _ => Err(Error::arg(format!("timing must be `off` or `wall`, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub source: DataSource,
    /// Empty means one rank per mode equal to `R_true`.
    pub ranks: Vec<usize>,
    pub sweep: SweepSpec,
    pub mode: SweepMode,
    pub threshold: f64,
    pub timing: Timing,
    pub seed: u64,
    pub out: PathBuf,
}

const KEYS: &[&str] = &[
    "exp", "input", "I", "N", "R_true", "density", "spread", "magnitude", "rank", "solvers",
    "j_init", "j_inc", "j_fin", "trials", "noise", "mode", "threshold", "prep_max_iters",
    "prep_tol", "timing", "seed", "out",
];

fn field<V: FromStr>(key: &str, v: &str) -> Result<V> {
    v.parse()
        .map_err(|_| Error::Format(format!("bad value `{v}` for `{key}`")))
}

fn list<V: FromStr>(key: &str, v: &str) -> Result<Vec<V>> {
    v.split(',').map(|s| field(key, s.trim())).collect()
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv: BTreeMap<&str, &str> = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("line {}: expected `key = value`", no + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(Error::Format(format!("line {}: unknown key `{k}`", no + 1)));
            }
            if kv.insert(k, v).is_some() {
                return Err(Error::Format(format!("line {}: duplicate key `{k}`", no + 1)));
            }
        }
        let get = |k: &str| kv.get(k).copied();
        let seed = get("seed").map_or(Ok(0), |v| field("seed", v))?;

        let source = match (get("exp"), get("input")) {
            (Some(_), Some(_)) => return Err(Error::Format("`exp` and `input` are exclusive".into())),
            (None, None) => return Err(Error::Format("one of `exp` or `input` is required".into())),
            (None, Some(p)) => DataSource::File(PathBuf::from(p)),
            (Some(e), None) => {
                let mut s = SynthSpec::new(
                    field("exp", e)?,
                    get("I").map_or(Ok(60), |v| field("I", v))?,
                    get("R_true").map_or(Ok(5), |v| field("R_true", v))?,
                    seed,
                );
                if let Some(v) = get("N") {
                    s.n = field("N", v)?;
                }
                if let Some(v) = get("density") {
                    s.density = field("density", v)?;
                }
                if let Some(v) = get("spread") {
                    s.spread = field("spread", v)?;
                }
                if let Some(v) = get("magnitude") {
                    s.magnitude = Some(field("magnitude", v)?);
                }
                s.validate()?;
                DataSource::Synthetic(s)
            }
        };

        let mode: SweepMode = get("mode").map_or(Ok(SweepMode::Protocol), |v| v.parse())?;
        let mut prep = match mode {
            SweepMode::Protocol => PrepConfig::PROTOCOL,
            SweepMode::Threshold => PrepConfig::THRESHOLD,
        };
        if let Some(v) = get("prep_max_iters") {
            prep.max_iters = field("prep_max_iters", v)?;
        }
        if let Some(v) = get("prep_tol") {
            prep.tol = field("prep_tol", v)?;
        }
        let d = SweepSpec::default();
        let sweep = SweepSpec {
            solvers: get("solvers").map_or(Ok(d.solvers.clone()), |v| list("solvers", v))?,
            j_init: get("j_init").map_or(Ok(d.j_init), |v| field("j_init", v))?,
            j_inc: get("j_inc").map_or(Ok(d.j_inc), |v| field("j_inc", v))?,
            j_fin: get("j_fin").map_or(Ok(d.j_fin), |v| field("j_fin", v))?,
            trials: get("trials").map_or(Ok(d.trials), |v| field("trials", v))?,
            noise: get("noise").map_or(Ok(d.noise.clone()), |v| list("noise", v))?,
            prep,
        };
        sweep.validate()?;
        if sweep.noise.iter().any(|&n: &f64| !(n >= 0.0 && n.is_finite())) {
            return Err(Error::arg("noise levels must be finite and nonnegative"));
        }
        let ranks = get("rank").map_or(Ok(Vec::new()), |v| list("rank", v))?;
        if matches!(source, DataSource::File(_)) && ranks.is_empty() {
            return Err(Error::Format("`rank` is required with `input`".into()));
        }
        Ok(Self {
            source,
            ranks,
            sweep,
            mode,
            threshold: get("threshold").map_or(Ok(1.1), |v| field("threshold", v))?,
            timing: get("timing").map_or(Ok(Timing::Off), |v| v.parse())?,
            seed,
            out: PathBuf::from(get("out").unwrap_or("sweep-out")),
        })
    }

    /// Target ranks for an order-`order` tensor.
    pub fn ranks_for(&self, order: usize) -> Result<Vec<usize>> {
        let r = match (&self.source, self.ranks.len()) {
            (DataSource::Synthetic(s), 0) => vec![s.r_true; order],
            (_, 1) => vec![self.ranks[0]; order],
            (_, k) if k == order => self.ranks.clone(),
            (_, k) => {
                return Err(Error::dim(format!("{k} ranks for an order-{order} tensor")));
            }
        };
        Ok(r)
    }
}
