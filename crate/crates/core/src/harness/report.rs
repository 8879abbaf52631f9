//! CSV emission. Floats use shortest round-trip formatting so files are
//! bit-stable for fixed seeds.

use std::io::Write;

use super::protocol::{ExperimentRecord, SummaryRow};
use crate::error::Result;

pub const RECORD_HEADER: &str = "solver,m,trial,seed,rel_error,iters,seconds";
pub const SUMMARY_HEADER: &str = "noise,T,solver,m,trials,median_rel_error,mean_rel_error,mean_seconds";

/// Whether wall-clock seconds are written. Off keeps output reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Timing {
    #[default]
    Off,
    Wall,
}

fn m_field(m: Option<usize>) -> String {
    m.map_or_else(String::new, |v| v.to_string())
}

fn secs(timing: Timing, s: f64) -> String {
    match timing {
        Timing::Off => String::new(),
        Timing::Wall => format!("{s:e}"),
    }
}

/// Header plus one row per record, in canonical order. An empty `m` marks
/// TR-ALS; an empty `seconds` marks timing off.
pub fn write_records<W: Write>(records: &[ExperimentRecord], timing: Timing, mut w: W) -> Result<()> {
    let mut rows: Vec<&ExperimentRecord> = records.iter().collect();
    rows.sort_by_key(|r| r.key());
    let mut out = String::from(RECORD_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{:e},{},{}\n",
            r.solver,
            m_field(r.m),
            r.trial,
            r.seed,
            r.rel_error,
            r.iters,
            secs(timing, r.seconds)
        ));
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}

/// One block of summary rows under noise level `noise` and budget `t`.
pub fn summary_rows(noise: f64, t: usize, rows: &[SummaryRow], timing: Timing) -> String {
    let mut out = String::new();
    for r in rows {
        out.push_str(&format!(
            "{noise},{t},{},{},{},{:e},{:e},{}\n",
            r.solver,
            m_field(r.m),
            r.trials,
            r.median_error,
            r.mean_error,
            secs(timing, r.mean_seconds)
        ));
    }
    out
}
