use alloc::vec::Vec;
use core::fmt;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Shape of an [`NdArray`] of rank 0 to 3.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Shape {
    rank: u8,
    dims: [usize; 3],
}

impl Shape {
    #[must_use]
    pub const fn scalar() -> Self {
        Self { rank: 0, dims: [1, 1, 1] }
    }

    #[must_use]
    pub const fn vector(n: usize) -> Self {
        Self { rank: 1, dims: [n, 1, 1] }
    }

    #[must_use]
    pub const fn matrix(n: usize, m: usize) -> Self {
        Self { rank: 2, dims: [n, m, 1] }
    }

    #[must_use]
    pub const fn rank3(a: usize, b: usize, c: usize) -> Self {
        Self { rank: 3, dims: [a, b, c] }
    }

    /// Builds a shape from a slice of at most three dimensions.
    pub fn from_dims(dims: &[usize]) -> Result<Self> {
        match *dims {
            [] => Ok(Self::scalar()),
            [a] => Ok(Self::vector(a)),
            [a, b] => Ok(Self::matrix(a, b)),
            [a, b, c] => Ok(Self::rank3(a, b, c)),
            _ => Err(Error::Shape(alloc::format!("rank {} not supported", dims.len()))),
        }
    }

    #[must_use]
    pub fn rank(&self) -> usize {
        self.rank as usize
    }

    #[must_use]
    pub fn dims(&self) -> &[usize] {
        &self.dims[..self.rank as usize]
    }

    /// Number of entries.
    #[must_use]
    pub fn size(&self) -> usize {
        self.dims().iter().product()
    }

    /// Broadcast two shapes of equal rank with singleton expansion.
    pub fn broadcast(&self, other: &Shape) -> Result<Shape> {
        if self.rank != other.rank {
            return Err(Error::Shape(alloc::format!("cannot broadcast {self:?} with {other:?}")));
        }
        let mut dims = [1; 3];
        for k in 0..self.rank() {
            let (a, b) = (self.dims[k], other.dims[k]);
            dims[k] = if a == b || b == 1 {
                a
            } else if a == 1 {
                b
            } else {
                return Err(Error::Shape(alloc::format!("cannot broadcast {self:?} with {other:?}")));
            };
        }
        Ok(Shape { rank: self.rank, dims })
    }
}

impl fmt::Debug for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, d) in self.dims().iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        if self.rank == 1 {
            write!(f, ",")?;
        }
        write!(f, ")")
    }
}

/// A dense array of rank 0 to 3, stored row-major.
#[derive(Clone, PartialEq)]
pub struct NdArray<T> {
    shape: Shape,
    data: Vec<T>,
}

impl<T> Default for NdArray<T> {
    fn default() -> Self {
        Self {
            shape: Shape::vector(0),
            data: Vec::new(),
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for NdArray<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NdArray{:?}{:?}", self.shape, self.data)
    }
}

impl<T> NdArray<T> {
    #[must_use]
    pub fn filled(shape: Shape, value: T) -> Self
    where
        T: Clone,
    {
        Self {
            shape,
            data: alloc::vec![value; shape.size()],
        }
    }

    pub fn from_vec(shape: Shape, data: Vec<T>) -> Result<Self> {
        if data.len() != shape.size() {
            return Err(Error::LengthMismatch {
                expected: shape.size(),
                found: data.len(),
            });
        }
        Ok(Self { shape, data })
    }

    #[must_use]
    pub fn from_vector(data: Vec<T>) -> Self {
        Self {
            shape: Shape::vector(data.len()),
            data,
        }
    }

    #[inline]
    #[must_use]
    pub fn shape(&self) -> Shape {
        self.shape
    }

    #[inline]
    #[must_use]
    pub fn dims(&self) -> &[usize] {
        self.shape.dims()
    }

    #[inline]
    #[must_use]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    #[must_use]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    #[must_use]
    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    /// Entry `(i, j)` of a rank-2 array.
    #[inline]
    #[must_use]
    pub fn at2(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.shape.dims[1] + j]
    }

    #[inline]
    pub fn at2_mut(&mut self, i: usize, j: usize) -> &mut T {
        let m = self.shape.dims[1];
        &mut self.data[i * m + j]
    }

    /// Reshapes in place, filling with `value`. Reuses the existing
    /// allocation when its capacity suffices.
    pub fn reset(&mut self, shape: Shape, value: T)
    where
        T: Clone,
    {
        self.shape = shape;
        self.data.clear();
        self.data.resize(shape.size(), value);
    }

    /// Reshapes in place and refills from an iterator of exactly
    /// `shape.size()` items, reserving once.
    pub fn refill(&mut self, shape: Shape, items: impl Iterator<Item = T>) {
        self.shape = shape;
        self.data.clear();
        self.data.reserve_exact(shape.size());
        self.data.extend(items);
        debug_assert_eq!(self.data.len(), shape.size());
    }

    /// Capacity of the underlying buffer.
    #[must_use]
    pub fn capacity(&self) -> usize {
        self.data.capacity()
    }
}

impl<T> Index<usize> for NdArray<T> {
    type Output = T;
    #[inline]
    fn index(&self, k: usize) -> &T {
        &self.data[k]
    }
}

impl<T> IndexMut<usize> for NdArray<T> {
    #[inline]
    fn index_mut(&mut self, k: usize) -> &mut T {
        &mut self.data[k]
    }
}

/// A buffer that changes shape cheaply by keeping one allocation per shape
/// seen so far.
#[derive(Clone, Debug, Default)]
pub struct CachedArray<T> {
    pool: Vec<NdArray<T>>,
    current: usize,
    allocations: usize,
}

impl<T: Clone + Default> CachedArray<T> {
    #[must_use]
    pub fn new() -> Self {
        Self {
            pool: Vec::new(),
            current: 0,
            allocations: 0,
        }
    }

    /// Makes the current buffer have `shape`. Previously seen shapes are
    /// served from the pool without allocating.
    pub fn resize(&mut self, shape: Shape) -> &mut NdArray<T> {
        match self.pool.iter().position(|a| a.shape == shape) {
            Some(k) => self.current = k,
            None => {
                self.pool.push(NdArray::filled(shape, T::default()));
                if shape.size() > 0 {
                    self.allocations += 1;
                }
                self.current = self.pool.len() - 1;
            }
        }
        &mut self.pool[self.current]
    }

    /// Current buffer.
    ///
    /// # Panics
    /// Panics if [`CachedArray::resize`] was never called.
    #[must_use]
    pub fn current(&self) -> &NdArray<T> {
        &self.pool[self.current]
    }

    pub fn current_mut(&mut self) -> &mut NdArray<T> {
        &mut self.pool[self.current]
    }

    /// Number of buffers allocated so far.
    #[must_use]
    pub fn allocations(&self) -> usize {
        self.allocations
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pool_reuses_shapes() {
        let mut c = CachedArray::<f64>::new();
        c.resize(Shape::matrix(3, 3));
        c.resize(Shape::matrix(4, 4));
        c.resize(Shape::matrix(3, 3));
        assert_eq!(c.allocations(), 2);
        assert_eq!(c.current().shape(), Shape::matrix(3, 3));
        let mut d = CachedArray::<f64>::new();
        d.resize(Shape::vector(5));
        d.resize(Shape::vector(5));
        assert_eq!(d.allocations(), 1);
    }

    #[test]
    fn alternating_shapes() {
        let mut c = CachedArray::<f64>::new();
        for k in 0..10_000 {
            let s = if k % 2 == 0 { Shape::matrix(2, 2) } else { Shape::vector(5) };
            assert_eq!(c.resize(s).shape(), s);
        }
        assert_eq!(c.allocations(), 2);
    }

    #[test]
    fn broadcast_shapes() {
        let a = Shape::matrix(3, 1);
        let b = Shape::matrix(1, 4);
        assert_eq!(a.broadcast(&b).unwrap(), Shape::matrix(3, 4));
        assert!(Shape::vector(2).broadcast(&Shape::vector(3)).is_err());
        assert!(Shape::vector(2).broadcast(&Shape::matrix(2, 1)).is_err());
    }
}
