//! `TRCR` cores archive: magic `b"TRCR"`, `u32` version (1), `u32` number
//! of cores, then every core as a `DTEN` record.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::TrCores;
use crate::error::{Error, Result};
use crate::tensor::io::{read_dense, write_dense, AnyDense, DtenScalar};

const MAGIC: &[u8; 4] = b"TRCR";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum AnyCores {
    Real(TrCores<f64>),
    Complex(TrCores<Complex64>),
}

pub fn write_cores<T: DtenScalar, W: Write>(cores: &TrCores<T>, mut w: W) -> Result<()> {
    let mut head = Vec::with_capacity(12);
    head.extend_from_slice(MAGIC);
    head.extend_from_slice(&VERSION.to_le_bytes());
    head.extend_from_slice(&(cores.order() as u32).to_le_bytes());
    w.write_all(&head)?;
    for c in cores.cores() {
        write_dense(c, &mut w)?;
    }
    Ok(())
}

pub fn read_cores<R: Read>(mut r: R) -> Result<AnyCores> {
    let mut head = [0u8; 12];
    r.read_exact(&mut head)
        .map_err(|_| Error::Format("truncated cores archive".into()))?;
    if &head[..4] != MAGIC {
        return Err(Error::Format("missing TRCR magic".into()));
    }
    let version = u32::from_le_bytes(head[4..8].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(Error::Format(format!("unsupported TRCR version {version}")));
    }
    let n = u32::from_le_bytes(head[8..12].try_into().expect("4 bytes")) as usize;
    if n == 0 || n > 64 {
        return Err(Error::Format(format!("implausible core count {n}")));
    }
    let mut real = Vec::new();
    let mut complex = Vec::new();
    for _ in 0..n {
        match read_dense(&mut r)? {
            AnyDense::Real(c) => real.push(c),
            AnyDense::Complex(c) => complex.push(c),
        }
    }
    let format = |e: Error| Error::Format(e.to_string());
    match (real.is_empty(), complex.is_empty()) {
        (false, true) => Ok(AnyCores::Real(TrCores::new(real).map_err(format)?)),
        (true, false) => Ok(AnyCores::Complex(TrCores::new(complex).map_err(format)?)),
        _ => Err(Error::Format("archive mixes real and complex cores".into())),
    }
}
