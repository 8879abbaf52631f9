use crate::error::{Error, Result};

/// Multi-index linearization order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Endian {
    /// `i_1 + (i_2 - 1) I_1 + (i_3 - 1) I_1 I_2 + ...`; the first index
    /// varies fastest. This is the storage order of every dense tensor.
    #[default]
    Little,
    /// `i_N + (i_{N-1} - 1) I_N + ...`; the last index varies fastest.
    Big,
}

/// Dimensions `(I_1, ..., I_N)` of a tensor.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Shape {
    dims: Vec<usize>,
    len: usize,
}

impl Shape {
    pub fn new(dims: impl Into<Vec<usize>>) -> Result<Self> {
        let dims = dims.into();
        if dims.is_empty() {
            return Err(Error::arg("a tensor needs at least one mode"));
        }
        if let Some(pos) = dims.iter().position(|&d| d == 0) {
            return Err(Error::arg(format!("dimension {} is zero", pos + 1)));
        }
        let len = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::arg("number of elements overflows usize"))?;
        Ok(Self { dims, len })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    /// Number of elements.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Extent of mode `n` (1-based).
    pub fn dim(&self, n: usize) -> usize {
        self.dims[n - 1]
    }

    /// Little-endian strides (0-based offsets) of every mode.
    pub fn strides(&self) -> Vec<usize> {
        let mut s = Vec::with_capacity(self.dims.len());
        let mut acc = 1;
        for &d in &self.dims {
            s.push(acc);
            acc *= d;
        }
        s
    }

    pub(crate) fn check_mode(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.order() {
            return Err(Error::Domain(format!(
                "mode {n} is outside 1..={}",
                self.order()
            )));
        }
        Ok(())
    }

    /// Flat position (1-based) of a 1-based multi-index.
    pub fn linearize(&self, idx: &[usize], endian: Endian) -> Result<usize> {
        if idx.len() != self.order() {
            return Err(Error::dim(format!(
                "multi-index has {} components, tensor has order {}",
                idx.len(),
                self.order()
            )));
        }
        for (k, (&i, &d)) in idx.iter().zip(&self.dims).enumerate() {
            if i == 0 || i > d {
                return Err(Error::Domain(format!(
                    "component {} of the multi-index is {i}, expected 1..={d}",
                    k + 1
                )));
            }
        }
        let mut flat = 0;
        let mut stride = 1;
        let mut visit = |i: usize, d: usize| {
            flat += (i - 1) * stride;
            stride *= d;
        };
        match endian {
            Endian::Little => idx.iter().zip(&self.dims).for_each(|(&i, &d)| visit(i, d)),
            Endian::Big => idx
                .iter()
                .zip(&self.dims)
                .rev()
                .for_each(|(&i, &d)| visit(i, d)),
        }
        Ok(flat + 1)
    }

    /// Inverse of [`Shape::linearize`].
    pub fn delinearize(&self, flat: usize, endian: Endian) -> Result<Vec<usize>> {
        if flat == 0 || flat > self.len {
            return Err(Error::Domain(format!(
                "flat index {flat} is outside 1..={}",
                self.len
            )));
        }
        let mut rest = flat - 1;
        let mut idx = vec![0; self.order()];
        let mut take = |k: usize| {
            let d = self.dims[k];
            idx[k] = rest % d + 1;
            rest /= d;
        };
        match endian {
            Endian::Little => (0..self.order()).for_each(&mut take),
            Endian::Big => (0..self.order()).rev().for_each(&mut take),
        }
        Ok(idx)
    }
}

/// Advances a 0-based little-endian odometer; returns `false` after the last
/// position.
#[inline]
pub(crate) fn advance(idx: &mut [usize], dims: &[usize]) -> bool {
    for (i, &d) in idx.iter_mut().zip(dims) {
        *i += 1;
        if *i < d {
            return true;
        }
        *i = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn linearize_examples() {
        let s = Shape::new(vec![3, 4, 5]).unwrap();
        assert_eq!(s.linearize(&[1, 1, 1], Endian::Little).unwrap(), 1);
        assert_eq!(s.linearize(&[2, 3, 1], Endian::Little).unwrap(), 8);
        assert_eq!(s.linearize(&[2, 3, 1], Endian::Big).unwrap(), 31);
    }

    #[test]
    fn delinearize_examples() {
        let s = Shape::new(vec![3, 4, 5]).unwrap();
        assert_eq!(s.delinearize(1, Endian::Little).unwrap(), vec![1, 1, 1]);
        assert_eq!(s.delinearize(8, Endian::Little).unwrap(), vec![2, 3, 1]);
        assert_eq!(s.delinearize(60, Endian::Little).unwrap(), vec![3, 4, 5]);
        assert_eq!(s.delinearize(31, Endian::Big).unwrap(), vec![2, 3, 1]);
    }

    #[test]
    fn out_of_range_is_domain_error() {
        let s = Shape::new(vec![3, 4, 5]).unwrap();
        assert!(matches!(s.linearize(&[4, 1, 1], Endian::Little), Err(Error::Domain(_))));
        assert!(matches!(s.linearize(&[0, 1, 1], Endian::Big), Err(Error::Domain(_))));
        assert!(matches!(s.delinearize(0, Endian::Little), Err(Error::Domain(_))));
        assert!(matches!(s.delinearize(61, Endian::Little), Err(Error::Domain(_))));
        assert!(s.linearize(&[1, 1], Endian::Little).is_err());
    }

    #[test]
    fn invalid_shapes() {
        assert!(Shape::new(vec![]).is_err());
        assert!(Shape::new(vec![2, 0]).is_err());
        assert!(Shape::new(vec![usize::MAX, 2]).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(dims in prop::collection::vec(1usize..5, 1..=5), seed in any::<u64>(), big in any::<bool>()) {
            let s = Shape::new(dims).unwrap();
            let endian = if big { Endian::Big } else { Endian::Little };
            let flat = (seed as usize) % s.len() + 1;
            let idx = s.delinearize(flat, endian).unwrap();
            prop_assert_eq!(s.linearize(&idx, endian).unwrap(), flat);
        }

        #[test]
        fn every_position_round_trips(dims in prop::collection::vec(1usize..4, 1..=5)) {
            let s = Shape::new(dims).unwrap();
            for flat in 1..=s.len() {
                for endian in [Endian::Little, Endian::Big] {
                    let idx = s.delinearize(flat, endian).unwrap();
                    prop_assert_eq!(s.linearize(&idx, endian).unwrap(), flat);
                }
            }
        }
    }
}
