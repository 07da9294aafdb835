//! Dense row-major f32 tensors and the handful of neural primitives the
//! fusion module is assembled from.
//!
//! Everything here is a pure function of its inputs. Shapes are checked on
//! entry and mismatches surface as [`Error::InvalidInput`].

mod conv;
mod norm;
pub mod weights;

pub use conv::{conv2d, ConvSpec};
pub use norm::{batchnorm_infer, BatchNormSpec};

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f32>,
}

/// Reduction applied along one axis by [`Tensor::reduce`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReduceMode {
    Max,
    Avg,
}

/// Splits a shape around `axis` into (outer, axis length, inner) extents.
fn split_axis(shape: &[usize], axis: usize) -> (usize, usize, usize) {
    let outer = shape[..axis].iter().product();
    let inner = shape[axis + 1..].iter().product();
    (outer, shape[axis], inner)
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::input(format!(
                "tensor shape {shape:?} needs {expected} values, got {}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Self::full(shape, 0.0)
    }

    pub fn full(shape: &[usize], value: f32) -> Self {
        Self {
            shape: shape.to_vec(),
            data: vec![value; shape.iter().product()],
        }
    }

    /// Samples every entry independently from `U[lo, hi)`.
    pub fn random_uniform<R: Rng + ?Sized>(shape: &[usize], lo: f32, hi: f32, rng: &mut R) -> Self {
        let n = shape.iter().product();
        let data = (0..n).map(|_| rng.random_range(lo..hi)).collect();
        Self {
            shape: shape.to_vec(),
            data,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    /// Row-major flat offset of a multi-index. Panics when out of bounds.
    pub fn offset(&self, index: &[usize]) -> usize {
        assert_eq!(index.len(), self.shape.len(), "index rank mismatch");
        index
            .iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &d)| {
                assert!(i < d, "index {i} out of bounds for dim {d}");
                acc * d + i
            })
    }

    pub fn at(&self, index: &[usize]) -> f32 {
        self.data[self.offset(index)]
    }

    pub fn reshape(self, shape: &[usize]) -> Result<Self> {
        Self::new(shape.to_vec(), self.data)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f32) -> f32) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn sigmoid(&self) -> Self {
        self.map(sigmoid)
    }

    pub fn scale(&self, k: f32) -> Self {
        self.map(|v| v * k)
    }

    fn zip_with(&self, other: &Tensor, what: &str, f: impl Fn(f32, f32) -> f32) -> Result<Self> {
        if self.shape != other.shape {
            return Err(Error::input(format!(
                "{what}: shape {:?} does not match {:?}",
                self.shape, other.shape
            )));
        }
        Ok(Self {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Tensor) -> Result<Self> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn mul(&self, other: &Tensor) -> Result<Self> {
        self.zip_with(other, "mul", |a, b| a * b)
    }

    /// Elementwise maximum.
    pub fn maximum(&self, other: &Tensor) -> Result<Self> {
        self.zip_with(other, "maximum", f32::max)
    }

    /// Elementwise mean of two tensors, `0.5 * (a + b)`. Commutative bit-for-bit.
    pub fn mean_with(&self, other: &Tensor) -> Result<Self> {
        self.zip_with(other, "mean", |a, b| 0.5 * (a + b))
    }

    /// Multiplies a (C, ...) tensor by a per-channel factor of length C.
    pub fn mul_channels(&self, factors: &[f32]) -> Result<Self> {
        if self.rank() == 0 || self.shape[0] != factors.len() {
            return Err(Error::input(format!(
                "channel gate of length {} does not match shape {:?}",
                factors.len(),
                self.shape
            )));
        }
        let plane = self.len() / factors.len().max(1);
        let mut data = self.data.clone();
        for (chunk, &g) in data.chunks_mut(plane.max(1)).zip(factors) {
            chunk.iter_mut().for_each(|v| *v *= g);
        }
        Ok(Self {
            shape: self.shape.clone(),
            data,
        })
    }

    fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.rank() {
            return Err(Error::input(format!(
                "axis {axis} out of range for shape {:?}",
                self.shape
            )));
        }
        if self.shape[axis] == 0 {
            return Err(Error::input(format!("axis {axis} has zero length")));
        }
        Ok(())
    }

    /// Numerically stable softmax over every 1-D slice along `axis`.
    pub fn softmax_over(&self, axis: usize) -> Result<Self> {
        self.check_axis(axis)?;
        let (outer, n, inner) = split_axis(&self.shape, axis);
        let mut out = vec![0.0f32; self.len()];
        for o in 0..outer {
            for i in 0..inner {
                let idx = |k: usize| (o * n + k) * inner + i;
                let max = (0..n).map(|k| self.data[idx(k)]).fold(f32::NEG_INFINITY, f32::max);
                let mut sum = 0.0f32;
                for k in 0..n {
                    let e = (self.data[idx(k)] - max).exp();
                    out[idx(k)] = e;
                    sum += e;
                }
                for k in 0..n {
                    out[idx(k)] /= sum;
                }
            }
        }
        Ok(Self {
            shape: self.shape.clone(),
            data: out,
        })
    }

    /// Reduces `axis` away with max or mean.
    pub fn reduce(&self, axis: usize, mode: ReduceMode) -> Result<Self> {
        self.check_axis(axis)?;
        let (outer, n, inner) = split_axis(&self.shape, axis);
        let mut out = Vec::with_capacity(outer * inner);
        for o in 0..outer {
            for i in 0..inner {
                let slice = (0..n).map(|k| self.data[(o * n + k) * inner + i]);
                out.push(match mode {
                    ReduceMode::Max => slice.fold(f32::NEG_INFINITY, f32::max),
                    ReduceMode::Avg => slice.sum::<f32>() / n as f32,
                });
            }
        }
        let mut shape = self.shape.clone();
        shape.remove(axis);
        Ok(Self { shape, data: out })
    }

    /// Concatenates tensors along `axis`; all other dimensions must agree.
    pub fn concat(xs: &[&Tensor], axis: usize) -> Result<Self> {
        let first = xs
            .first()
            .ok_or_else(|| Error::input("concat of zero tensors"))?;
        if axis >= first.rank() {
            return Err(Error::input(format!(
                "concat axis {axis} out of range for shape {:?}",
                first.shape
            )));
        }
        for x in xs {
            let same_rank = x.rank() == first.rank();
            let conformable = same_rank
                && x.shape
                    .iter()
                    .zip(&first.shape)
                    .enumerate()
                    .all(|(d, (a, b))| d == axis || a == b);
            if !conformable {
                return Err(Error::input(format!(
                    "concat: shape {:?} not conformable with {:?} along axis {axis}",
                    x.shape, first.shape
                )));
            }
        }
        let outer: usize = first.shape[..axis].iter().product();
        let inner: usize = first.shape[axis + 1..].iter().product();
        let mut data = Vec::with_capacity(xs.iter().map(|x| x.len()).sum());
        for o in 0..outer {
            for x in xs {
                let block = x.shape[axis] * inner;
                data.extend_from_slice(&x.data[o * block..(o + 1) * block]);
            }
        }
        let mut shape = first.shape.clone();
        shape[axis] = xs.iter().map(|x| x.shape[axis]).sum();
        Ok(Self { shape, data })
    }
}

#[inline]
pub fn sigmoid(x: f32) -> f32 {
    1.0 / (1.0 + (-x).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn new_rejects_wrong_length() {
        assert!(Tensor::new(vec![2, 3], vec![0.0; 5]).is_err());
        assert!(Tensor::new(vec![2, 3], vec![0.0; 6]).is_ok());
    }

    #[test]
    fn sigmoid_symmetry_point() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-1000.0).is_finite());
        assert!(sigmoid(1000.0).is_finite());
    }

    #[test]
    fn softmax_uniform_slice() {
        let t = Tensor::full(&[2, 7], 3.25);
        let s = t.softmax_over(1).unwrap();
        for v in s.data() {
            assert!((v - 1.0 / 7.0).abs() < 1e-7);
        }
    }

    #[test]
    fn reduce_matches_direct_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = Tensor::random_uniform(&[3, 4, 5], -2.0, 2.0, &mut rng);
        let max = t.reduce(0, ReduceMode::Max).unwrap();
        let avg = t.reduce(0, ReduceMode::Avg).unwrap();
        assert_eq!(max.shape(), &[4, 5]);
        for y in 0..4 {
            for x in 0..5 {
                let mut m = f32::NEG_INFINITY;
                let mut s = 0.0f32;
                for c in 0..3 {
                    m = m.max(t.at(&[c, y, x]));
                    s += t.at(&[c, y, x]);
                }
                assert_eq!(max.at(&[y, x]), m);
                assert_eq!(avg.at(&[y, x]), s / 3.0);
            }
        }
    }

    #[test]
    fn concat_interleaves_outer_blocks() {
        let a = Tensor::new(vec![2, 1], vec![1.0, 2.0]).unwrap();
        let b = Tensor::new(vec![2, 2], vec![3.0, 4.0, 5.0, 6.0]).unwrap();
        let c = Tensor::concat(&[&a, &b], 1).unwrap();
        assert_eq!(c.shape(), &[2, 3]);
        assert_eq!(c.data(), &[1.0, 3.0, 4.0, 2.0, 5.0, 6.0]);
        let d = Tensor::concat(&[&a, &a], 0).unwrap();
        assert_eq!(d.data(), &[1.0, 2.0, 1.0, 2.0]);
    }

    #[test]
    fn nonconformable_shapes_rejected() {
        let a = Tensor::zeros(&[2, 3]);
        let b = Tensor::zeros(&[3, 2]);
        assert!(a.add(&b).is_err());
        assert!(Tensor::concat(&[&a, &b], 0).is_err());
        assert!(a.reduce(2, ReduceMode::Max).is_err());
        assert!(a.mul_channels(&[1.0, 2.0, 3.0]).is_err());
    }

    proptest! {
        #[test]
        fn softmax_slices_sum_to_one(vals in prop::collection::vec(-30.0f32..30.0, 24)) {
            let t = Tensor::new(vec![2, 3, 4], vals).unwrap();
            for axis in 0..3 {
                let s = t.softmax_over(axis).unwrap();
                let summed = s.reduce(axis, ReduceMode::Avg).unwrap();
                let n = t.shape()[axis] as f32;
                for v in summed.data() {
                    prop_assert!((v * n - 1.0).abs() < 1e-5);
                }
                prop_assert!(s.data().iter().all(|&v| v > 0.0));
            }
        }

        #[test]
        fn sigmoid_is_monotone(a in prop::collection::vec(-50.0f32..50.0, 16), d in prop::collection::vec(0.0f32..10.0, 16)) {
            let x = Tensor::new(vec![16], a.clone()).unwrap();
            let y = Tensor::new(vec![16], a.iter().zip(&d).map(|(a, d)| a + d).collect()).unwrap();
            let sx = x.sigmoid();
            let sy = y.sigmoid();
            for (p, q) in sx.data().iter().zip(sy.data()) {
                prop_assert!(p <= q);
            }
        }
    }
}
