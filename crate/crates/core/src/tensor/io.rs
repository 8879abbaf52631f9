//! Binary dense format (`DTEN`) and the sparse coordinate text format.
//!
//! `DTEN` layout, all integers little-endian:
//! magic `b"DTEN"`, `u32` version (1), `u32` order, `order` x `u64` dims,
//! `u32` scalar tag (1 = f64, 2 = complex f64 as `re, im` pairs), then the
//! payload in storage order.
//!
//! Sparse text: a header `order I_1 ... I_N nnz`, then one line
//! `i_1 ... i_N value` per entry with 1-based indices. Lines starting with
//! `#` are ignored.

use std::io::{BufRead, Read, Write};

use num_complex::Complex64;

use super::dense::DenseTensor;
use super::shape::Shape;
use super::sparse::SparseTensor;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const DTEN_MAGIC: &[u8; 4] = b"DTEN";
const DTEN_VERSION: u32 = 1;

/// Payload encoding of a [`DenseTensor`] in the `DTEN` format.
pub trait DtenScalar: Scalar {
    const TAG: u32;
    const WIDTH: usize;
    fn put(self, out: &mut Vec<u8>);
    fn take(bytes: &[u8]) -> Self;
}

impl DtenScalar for f64 {
    const TAG: u32 = 1;
    const WIDTH: usize = 8;
    fn put(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn take(b: &[u8]) -> Self {
        f64::from_le_bytes(b[..8].try_into().expect("8 bytes"))
    }
}

impl DtenScalar for Complex64 {
    const TAG: u32 = 2;
    const WIDTH: usize = 16;
    fn put(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.re.to_le_bytes());
        out.extend_from_slice(&self.im.to_le_bytes());
    }
    fn take(b: &[u8]) -> Self {
        Complex64::new(f64::take(&b[..8]), f64::take(&b[8..16]))
    }
}

/// A dense tensor read from disk, whichever scalar kind it holds.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyDense {
    Real(DenseTensor<f64>),
    Complex(DenseTensor<Complex64>),
}

pub fn write_dense<T: DtenScalar, W: Write>(x: &DenseTensor<T>, mut w: W) -> Result<()> {
    let mut buf = Vec::with_capacity(16 + 8 * x.order() + T::WIDTH * x.data().len());
    buf.extend_from_slice(DTEN_MAGIC);
    buf.extend_from_slice(&DTEN_VERSION.to_le_bytes());
    buf.extend_from_slice(&(x.order() as u32).to_le_bytes());
    for &d in x.dims() {
        buf.extend_from_slice(&(d as u64).to_le_bytes());
    }
    buf.extend_from_slice(&T::TAG.to_le_bytes());
    for &v in x.data() {
        v.put(&mut buf);
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u64::from_le_bytes(b))
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Format("unexpected end of tensor data".into())
    } else {
        Error::Io(e)
    }
}

/// Reads one `DTEN` record; the reader is left just past its payload.
pub fn read_dense<R: Read>(mut r: R) -> Result<AnyDense> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(truncated)?;
    if &magic != DTEN_MAGIC {
        return Err(Error::Format("missing DTEN magic".into()));
    }
    let version = read_u32(&mut r)?;
    if version != DTEN_VERSION {
        return Err(Error::Format(format!("unsupported DTEN version {version}")));
    }
    let order = read_u32(&mut r)? as usize;
    if order == 0 || order > 64 {
        return Err(Error::Format(format!("implausible tensor order {order}")));
    }
    let mut dims = Vec::with_capacity(order);
    for _ in 0..order {
        let d = read_u64(&mut r)?;
        dims.push(usize::try_from(d).map_err(|_| Error::Format("dimension overflow".into()))?);
    }
    let shape = Shape::new(dims).map_err(|e| Error::Format(e.to_string()))?;
    match read_u32(&mut r)? {
        f64::TAG => Ok(AnyDense::Real(read_payload(&mut r, shape)?)),
        Complex64::TAG => Ok(AnyDense::Complex(read_payload(&mut r, shape)?)),
        tag => Err(Error::Format(format!("unknown scalar tag {tag}"))),
    }
}

fn read_payload<T: DtenScalar, R: Read>(r: &mut R, shape: Shape) -> Result<DenseTensor<T>> {
    let bytes = shape
        .len()
        .checked_mul(T::WIDTH)
        .ok_or_else(|| Error::Format("payload size overflow".into()))?;
    let mut buf = Vec::new();
    r.take(bytes as u64).read_to_end(&mut buf)?;
    if buf.len() != bytes {
        return Err(Error::Format("unexpected end of tensor data".into()));
    }
    let data = buf.chunks_exact(T::WIDTH).map(T::take).collect();
    DenseTensor::from_vec(shape, data)
}

/// Writes the sparse text format with shortest round-trip value formatting.
pub fn write_sparse<W: Write>(x: &SparseTensor<f64>, mut w: W) -> Result<()> {
    let mut out = String::new();
    out.push_str(&x.order().to_string());
    for d in x.dims() {
        out.push(' ');
        out.push_str(&d.to_string());
    }
    out.push_str(&format!(" {}\n", x.nnz()));
    for (idx, v) in x.entries() {
        for i in idx {
            out.push_str(&i.to_string());
            out.push(' ');
        }
        out.push_str(&format!("{v:e}\n"));
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}

pub fn read_sparse<R: BufRead>(r: R) -> Result<SparseTensor<f64>> {
    let mut lines = r
        .lines()
        .enumerate()
        .map(|(k, l)| l.map(|s| (k + 1, s)))
        .filter(|l| {
            l.as_ref()
                .map_or(true, |(_, s)| !s.trim().is_empty() && !s.trim_start().starts_with('#'))
        });
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Format("empty sparse tensor file".into()))??;
    let head = parse_ints(&header, 1)?;
    let order = *head.first().ok_or_else(|| Error::Format("empty header".into()))?;
    if order == 0 || head.len() != order + 2 {
        return Err(Error::Format(format!(
            "header must read `order dims... nnz`, got `{header}`"
        )));
    }
    let shape = Shape::new(head[1..=order].to_vec()).map_err(|e| Error::Format(e.to_string()))?;
    let nnz = head[order + 1];
    let mut entries = Vec::with_capacity(nnz);
    for line in lines {
        let (no, line) = line?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != order + 1 {
            return Err(Error::Format(format!(
                "line {no}: expected {} fields, found {}",
                order + 1,
                fields.len()
            )));
        }
        let idx = parse_ints(&fields[..order].join(" "), no)?;
        let v: f64 = fields[order]
            .parse()
            .map_err(|_| Error::Format(format!("line {no}: bad value `{}`", fields[order])))?;
        entries.push((idx, v));
    }
    if entries.len() != nnz {
        return Err(Error::Format(format!(
            "header promises {nnz} entries, file has {}",
            entries.len()
        )));
    }
    SparseTensor::from_entries(shape, entries).map_err(|e| Error::Format(e.to_string()))
}

fn parse_ints(s: &str, line: usize) -> Result<Vec<usize>> {
    s.split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| Error::Format(format!("line {line}: bad integer `{t}`")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_round_trip_real_and_complex() {
        let s = Shape::new(vec![2, 3, 2]).unwrap();
        let x = DenseTensor::from_fn(s.clone(), |i| (i[0] * 7 + i[1] * 3 + i[2]) as f64 / 3.0);
        let mut buf = Vec::new();
        write_dense(&x, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"DTEN");
        assert_eq!(read_dense(&buf[..]).unwrap(), AnyDense::Real(x.clone()));

        let z = x.map(|v| Complex64::new(v, -v * v));
        let mut buf = Vec::new();
        write_dense(&z, &mut buf).unwrap();
        assert_eq!(read_dense(&buf[..]).unwrap(), AnyDense::Complex(z));
    }

    #[test]
    fn dense_rejects_corruption() {
        let x = DenseTensor::<f64>::zeros(Shape::new(vec![2, 2]).unwrap());
        let mut buf = Vec::new();
        write_dense(&x, &mut buf).unwrap();
        assert!(matches!(read_dense(&buf[..buf.len() - 1]), Err(Error::Format(_))));
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_dense(&bad[..]), Err(Error::Format(_))));
        let mut bad = buf;
        let tag_at = 4 + 4 + 4 + 16;
        bad[tag_at] = 9;
        assert!(matches!(read_dense(&bad[..]), Err(Error::Format(_))));
    }

    #[test]
    fn sparse_round_trip() {
        let s = Shape::new(vec![3, 2, 4]).unwrap();
        let x = SparseTensor::from_entries(
            s,
            vec![(vec![1, 2, 3], 0.1), (vec![3, 1, 4], -2.5e-7), (vec![2, 2, 1], 1e300)],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_sparse(&x, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("3 3 2 4 3\n"));
        assert_eq!(read_sparse(&buf[..]).unwrap(), x);
    }

    #[test]
    fn sparse_rejects_bad_input() {
        assert!(read_sparse(&b"2 2 2 1\n1 1\n"[..]).is_err());
        assert!(read_sparse(&b"2 2 2 2\n1 1 1.0\n"[..]).is_err());
        assert!(read_sparse(&b"2 2 2 1\n3 1 1.0\n"[..]).is_err());
        assert!(read_sparse(&b"# comment\n1 3 1\n2 4.5\n"[..]).is_ok());
    }
}
