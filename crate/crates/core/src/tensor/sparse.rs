use super::dense::DenseTensor;
use super::matrix::frobenius;
use super::shape::{Endian, Shape};
use crate::error::Result;
use crate::scalar::Scalar;

/// Coordinate-format tensor. Entries are kept sorted by storage offset with
/// no duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseTensor<T> {
    shape: Shape,
    offsets: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> SparseTensor<T> {
    pub fn empty(shape: Shape) -> Self {
        Self {
            shape,
            offsets: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds from 1-based `(multi-index, value)` pairs; duplicate indices
    /// are summed.
    pub fn from_entries<I>(shape: Shape, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, T)>,
    {
        let mut pairs = Vec::new();
        for (idx, v) in entries {
            pairs.push((shape.linearize(&idx, Endian::Little)? - 1, v));
        }
        Ok(Self::from_offsets(shape, pairs))
    }

    /// Builds from 0-based storage offsets; duplicates are summed.
    pub(crate) fn from_offsets(shape: Shape, mut pairs: Vec<(usize, T)>) -> Self {
        pairs.sort_by_key(|p| p.0);
        let mut offsets: Vec<usize> = Vec::with_capacity(pairs.len());
        let mut values: Vec<T> = Vec::with_capacity(pairs.len());
        for (off, v) in pairs {
            debug_assert!(off < shape.len());
            if offsets.last() == Some(&off) {
                *values.last_mut().expect("paired") += v;
            } else {
                offsets.push(off);
                values.push(v);
            }
        }
        Self {
            shape,
            offsets,
            values,
        }
    }

    /// Stores every nonzero entry of `x`.
    pub fn from_dense(x: &DenseTensor<T>) -> Self {
        let (offsets, values) = x
            .data()
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != T::zero())
            .map(|(i, &v)| (i, v))
            .unzip();
        Self {
            shape: x.shape().clone(),
            offsets,
            values,
        }
    }

    pub fn to_dense(&self) -> DenseTensor<T> {
        let mut out = DenseTensor::zeros(self.shape.clone());
        let data = out.data_mut();
        for (&o, &v) in self.offsets.iter().zip(&self.values) {
            data[o] = v;
        }
        out
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dims(&self) -> &[usize] {
        self.shape.dims()
    }

    pub fn order(&self) -> usize {
        self.shape.order()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// 0-based storage offsets, strictly increasing.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    /// Entries as 1-based multi-indices with values.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<usize>, T)> + '_ {
        self.offsets.iter().zip(&self.values).map(|(&o, &v)| {
            let idx = self
                .shape
                .delinearize(o + 1, Endian::Little)
                .expect("stored offset in range");
            (idx, v)
        })
    }

    pub fn frobenius_norm(&self) -> T::Real {
        frobenius(&self.values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{Matrix, UnfoldKind};
    use proptest::prelude::*;

    #[test]
    fn duplicates_are_summed() {
        let s = Shape::new(vec![2, 3]).unwrap();
        let t = SparseTensor::from_entries(
            s,
            vec![(vec![2, 3], 1.0), (vec![1, 1], 2.0), (vec![2, 3], 0.5)],
        )
        .unwrap();
        assert_eq!(t.nnz(), 2);
        assert_eq!(t.offsets(), &[0, 5]);
        assert_eq!(t.values(), &[2.0, 1.5]);
        let e: Vec<_> = t.entries().collect();
        assert_eq!(e[1], (vec![2, 3], 1.5));
    }

    #[test]
    fn out_of_range_rejected() {
        let s = Shape::new(vec![2, 3]).unwrap();
        assert!(SparseTensor::from_entries(s, vec![(vec![3, 1], 1.0)]).is_err());
    }

    proptest! {
        #[test]
        fn densification_agrees(
            dims in prop::collection::vec(1usize..4, 2..=4),
            raw in prop::collection::vec((any::<u32>(), -2.0f64..2.0), 0..20),
        ) {
            let shape = Shape::new(dims).unwrap();
            let pairs: Vec<_> = raw.iter().map(|&(o, v)| (o as usize % shape.len(), v)).collect();
            let sp = SparseTensor::from_offsets(shape.clone(), pairs.clone());
            let mut dense = DenseTensor::zeros(shape.clone());
            for &(o, v) in &pairs {
                dense.data_mut()[o] += v;
            }
            prop_assert_eq!(&sp.to_dense(), &dense);
            prop_assert!((sp.frobenius_norm() - dense.frobenius_norm()).abs() < 1e-12);
            let back = SparseTensor::from_dense(&sp.to_dense());
            prop_assert_eq!(back.to_dense(), dense.clone());
            let u = Matrix::from_fn(2, shape.dim(1), |i, j| (i + 2 * j) as f64 - 1.0);
            let y = sp.to_dense().mode_n_product(&u, 1).unwrap();
            prop_assert_eq!(y, dense.mode_n_product(&u, 1).unwrap());
            prop_assert_eq!(
                sp.to_dense().unfold(2, UnfoldKind::ModeN).unwrap(),
                dense.unfold(2, UnfoldKind::ModeN).unwrap()
            );
        }
    }
}
