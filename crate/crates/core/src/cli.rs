//! The `trsketch` command line.
//!
//! Exit codes: 0 success, 1 runtime failure (including failed checks),
//! 2 bad arguments or unreadable/malformed files.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::harness::{
    add_noise, gen_synthetic, run_sweep, write_outcomes, AnyTensor, SweepConfig, SweepMode,
    SynthSpec,
};
use crate::ring::{read_cores, write_cores, AnyCores};
use crate::scalar::Scalar;
use crate::solvers::{FitConfig, FitResult, Solver};
use crate::tensor::io::DtenScalar;
use crate::tensor::TensorData;
use crate::verify::run_all;

#[derive(Debug, Parser)]
#[command(name = "trsketch", version, about = "Randomized tensor-ring decomposition by sketched ALS")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic tensor and its ground-truth cores.
    Gen {
        #[arg(long)]
        exp: u8,
        #[arg(long = "I", default_value_t = 60)]
        i: usize,
        #[arg(long = "R", default_value_t = 5)]
        r: usize,
        #[arg(long = "N", default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 0.05)]
        density: f64,
        #[arg(long, default_value_t = 15)]
        spread: usize,
        #[arg(long)]
        magnitude: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Tensor file; cores go next to it with extension `trcr`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit one solver to a tensor file.
    Fit {
        input: PathBuf,
        #[arg(long, default_value = "tr-als")]
        solver: Solver,
        /// One rank for every mode, or a comma list.
        #[arg(long, value_delimiter = ',', required = true)]
        rank: Vec<usize>,
        #[arg(long, default_value_t = 500)]
        m: usize,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Independent starts with seeds `seed, seed+1, ...`; the best is kept.
        #[arg(long, default_value_t = 1)]
        restarts: usize,
        /// Cores archive of the best restart.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the two-stage protocol (or threshold search) from a config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        mode: Option<SweepMode>,
        /// Output directory, overriding the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the randomized identity suites.
    Verify {
        #[arg(long, default_value_t = 50)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print metadata of a tensor file or cores archive.
    Info { path: PathBuf },
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let mut out = std::io::stdout().lock();
    match dispatch(cli.command, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) | Error::Format(_) => 2,
                _ => 1,
            }
        }
    }
}

fn dispatch(cmd: Command, out: &mut impl Write) -> Result<i32> {
    match cmd {
        Command::Gen { exp, i, r, n, density, spread, magnitude, noise, seed, out: path } => {
            let spec = SynthSpec { experiment: exp, i, n, r_true: r, density, spread, magnitude, seed };
            let cores_path = path.with_extension("trcr");
            if spec.is_complex() {
                let (cores, x) = gen_synthetic::<num_complex::Complex64>(&spec)?;
                let x = add_noise(&x, noise, seed.wrapping_add(1))?;
                AnyTensor::Complex(x).save(&path)?;
                save_cores(&cores, &cores_path)?;
            } else {
                let (cores, x) = gen_synthetic::<f64>(&spec)?;
                let x = add_noise(&x, noise, seed.wrapping_add(1))?;
                AnyTensor::Real(x).save(&path)?;
                save_cores(&cores, &cores_path)?;
            }
            writeln!(out, "wrote {} and {}", path.display(), cores_path.display())?;
            Ok(0)
        }
        Command::Fit { input, solver, rank, m, noise, seed, max_iters, tol, restarts, out: dest } => {
            let opts = FitOpts { solver, rank, m, noise, seed, max_iters, tol, restarts, dest };
            match AnyTensor::load(&input)? {
                AnyTensor::Real(x) => fit(&x, &opts, out),
                AnyTensor::Complex(x) => fit(&x, &opts, out),
            }
        }
        Command::Sweep { config, mode, out: dir } => {
            let text = fs::read_to_string(&config)?;
            let mut cfg = SweepConfig::parse(&text)?;
            if let Some(m) = mode {
                if m == SweepMode::Threshold && cfg.mode != m && !text.contains("prep_") {
                    cfg.sweep.prep = crate::harness::PrepConfig::THRESHOLD;
                }
                cfg.mode = m;
            }
            if let Some(d) = dir {
                cfg.out = d;
            }
            let outcomes = run_sweep(&cfg)?;
            for o in &outcomes {
                writeln!(out, "noise {}: T = {}, {} records", o.noise, o.t, o.records.len())?;
                if let Some(rep) = &o.threshold {
                    for h in &rep.hits {
                        match h.m {
                            Some(m) => writeln!(out, "  {} reaches the threshold at m = {m}", h.solver)?,
                            None => writeln!(out, "  {} never reaches the threshold", h.solver)?,
                        }
                    }
                }
            }
            for f in write_outcomes(&cfg.out, &outcomes, cfg.timing)? {
                writeln!(out, "wrote {}", f.display())?;
            }
            Ok(0)
        }
        Command::Verify { instances, seed } => {
            let reports = run_all(instances, seed)?;
            for r in &reports {
                writeln!(out, "{r}")?;
            }
            Ok(if reports.iter().all(|r| r.passed()) { 0 } else { 1 })
        }
        Command::Info { path } => {
            info(&path, out)?;
            Ok(0)
        }
    }
}

fn save_cores<T: DtenScalar>(cores: &crate::ring::TrCores<T>, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_cores(cores, &mut w)?;
    w.flush()?;
    Ok(())
}

struct FitOpts {
    solver: Solver,
    rank: Vec<usize>,
    m: usize,
    noise: f64,
    seed: u64,
    max_iters: usize,
    tol: f64,
    restarts: usize,
    dest: Option<PathBuf>,
}

fn fit<T: DtenScalar>(x: &TensorData<T>, o: &FitOpts, out: &mut impl Write) -> Result<i32> {
    let order = x.dims().len();
    let ranks = match o.rank.len() {
        1 => vec![o.rank[0]; order],
        k if k == order => o.rank.clone(),
        k => return Err(Error::arg(format!("{k} ranks for an order-{order} tensor"))),
    };
    if o.restarts == 0 {
        return Err(Error::arg("at least one restart"));
    }
    let x = add_noise(x, o.noise, o.seed.wrapping_add(u64::MAX / 2))?;
    let mut best: Option<FitResult<T>> = None;
    for k in 0..o.restarts {
        let cfg = FitConfig::new(ranks.clone())
            .max_iters(o.max_iters)
            .tol(o.tol)
            .m(o.m)
            .seed(o.seed.wrapping_add(k as u64));
        let r = o.solver.fit(&x, &cfg)?;
        writeln!(
            out,
            "{} seed={} rel_error={:e} iters={} seconds={:.3}",
            o.solver, r.seed, r.final_error, r.iterations, r.seconds
        )?;
        if let Some(im) = r.max_imag {
            writeln!(out, "  discarded imaginary parts up to {im:e}")?;
        }
        if best.as_ref().is_none_or(|b| r.final_error < b.final_error) {
            best = Some(r);
        }
    }
    let best = best.expect("at least one restart");
    writeln!(out, "best rel_error={:e} (seed {})", best.final_error, best.seed)?;
    if let Some(d) = &o.dest {
        save_cores(&best.cores, d)?;
        writeln!(out, "wrote {}", d.display())?;
    }
    Ok(0)
}

fn info(path: &Path, out: &mut impl Write) -> Result<()> {
    let mut magic = [0u8; 4];
    let n = File::open(path)?.read(&mut magic)?;
    if n == 4 && &magic == b"TRCR" {
        let (kind, dims, ranks) = match read_cores(File::open(path)?)? {
            AnyCores::Real(c) => ("real", c.dims(), c.ranks()),
            AnyCores::Complex(c) => ("complex", c.dims(), c.ranks()),
        };
        writeln!(out, "cores archive: {kind} f64, order {}", dims.len())?;
        writeln!(out, "dims  {dims:?}")?;
        writeln!(out, "ranks {ranks:?}")?;
        return Ok(());
    }
    match AnyTensor::load(path)? {
        AnyTensor::Real(x) => describe(&x, "real", out),
        AnyTensor::Complex(x) => describe(&x, "complex", out),
    }
}

fn describe<T: Scalar>(x: &TensorData<T>, kind: &str, out: &mut impl Write) -> Result<()> {
    use crate::scalar::RealScalar;
    let storage = match x {
        TensorData::Dense(_) => "dense".to_string(),
        TensorData::Sparse(s) => format!("sparse, {} stored entries", s.nnz()),
    };
    writeln!(out, "tensor: {kind} f64, {storage}")?;
    writeln!(out, "dims  {:?}", x.dims())?;
    writeln!(out, "frobenius norm {:e}", x.frobenius_norm().to_f64_lossy())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_cli(args: &[&str]) -> i32 {
        run(std::iter::once("trsketch").chain(args.iter().copied()))
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_cli(&["bogus"]), 2);
        assert_eq!(run_cli(&["fit"]), 2);
        assert_eq!(run_cli(&["info", "/nonexistent/file"]), 2);
        assert_eq!(run_cli(&["fit", "x", "--solver", "nope", "--rank", "2"]), 2);
    }

    #[test]
    fn gen_info_fit_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let t = dir.path().join("t.dten");
        let ts = t.to_str().unwrap();
        assert_eq!(run_cli(&["gen", "--exp", "1", "--I", "8", "--R", "2", "--seed", "7", "--out", ts]), 0);
        let first = fs::read(&t).unwrap();
        assert_eq!(run_cli(&["gen", "--exp", "1", "--I", "8", "--R", "2", "--seed", "7", "--out", ts]), 0);
        assert_eq!(fs::read(&t).unwrap(), first);
        assert!(dir.path().join("t.trcr").exists());
        assert_eq!(run_cli(&["info", ts]), 0);
        assert_eq!(run_cli(&["info", dir.path().join("t.trcr").to_str().unwrap()]), 0);
        let c = dir.path().join("fit.trcr");
        assert_eq!(
            run_cli(&["fit", ts, "--solver", "tr-ts-als", "--rank", "2", "--m", "40", "--max-iters", "5", "--out", c.to_str().unwrap()]),
            0
        );
        assert!(c.exists());
        assert_eq!(run_cli(&["fit", ts, "--rank", "2,2"]), 1);
    }
}
