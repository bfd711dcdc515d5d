//! Cell arrays and the cache-based access protocol.
//!
//! Every cell-wise quantity is a [`CellArray`]. Entries are read with
//! [`CellArray::getindex`], which takes a cache obtained once from
//! [`CellArray::array_cache`]. Arrays that compute their entries on the fly
//! (for instance [`LazyMap2`]) keep their scratch buffers inside the cache, so
//! a full sweep over the array performs no per-entry heap allocation. A cache
//! is a single-consumer object: concurrent readers create one cache each.
//!
//! Indices are 0-based.

mod boxed;
mod cached;
mod compressed;
mod fill;
mod lazy;
mod table;

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

pub use boxed::BoxedArray;
pub use cached::{CachedArray, NdArray, Shape};
pub use compressed::CompressedArray;
pub use fill::FillArray;
pub use lazy::{lazy_map, lazy_map2, lazy_map3, lazy_map4, LazyMap1, LazyMap2, LazyMap3, LazyMap4};
pub use table::JaggedTable;

use crate::error::{Error, Result};

/// An immutable, indexable collection of cell data read through a cache.
pub trait CellArray: Send + Sync {
    /// Entry type. Unsized entries (such as rows of a [`JaggedTable`]) are
    /// returned as borrowed slices.
    type Item: ?Sized;
    /// Scratch state used by [`CellArray::getindex`]. `()` for plain arrays.
    type Cache;

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Creates a fresh cache for this array.
    fn array_cache(&self) -> Self::Cache;

    /// Returns entry `i`. The reference may point into `cache`.
    ///
    /// # Panics
    /// Panics if `i >= self.len()`.
    fn getindex<'a>(&'a self, cache: &'a mut Self::Cache, i: usize) -> &'a Self::Item;

    /// Bounds-checked variant of [`CellArray::getindex`].
    fn try_getindex<'a>(&'a self, cache: &'a mut Self::Cache, i: usize) -> Result<&'a Self::Item> {
        let len = self.len();
        if i >= len {
            return Err(Error::IndexOutOfBounds { index: i, len });
        }
        Ok(self.getindex(cache, i))
    }

    /// Appends the operation tree of this array to `out`, indented by `depth`.
    fn write_tree(&self, out: &mut String, depth: usize) {
        tree_line(out, depth, &short_type_name::<Self>());
    }
}

/// Renders the operation tree of `a`: one line per node, children indented.
pub fn print_op_tree<A: CellArray + ?Sized>(a: &A) -> String {
    let mut s = String::new();
    a.write_tree(&mut s, 0);
    s
}

/// Reads every entry of `a` with a single cache and clones it into a `Vec`.
pub fn collect<A>(a: &A) -> Vec<A::Item>
where
    A: CellArray + ?Sized,
    A::Item: Clone + Sized,
{
    let mut cache = a.array_cache();
    (0..a.len()).map(|i| a.getindex(&mut cache, i).clone()).collect()
}

pub(crate) fn tree_line(out: &mut String, depth: usize, label: &str) {
    for _ in 0..depth {
        out.push_str("  ");
    }
    out.push_str(label);
    out.push('\n');
}

/// `core::any::type_name` with module paths stripped.
pub fn short_type_name<T: ?Sized>() -> String {
    let full = core::any::type_name::<T>();
    let mut out = String::with_capacity(full.len());
    let mut segment = String::new();
    for ch in full.chars() {
        if ch.is_alphanumeric() || ch == '_' || ch == ':' {
            segment.push(ch);
        } else {
            out.push_str(segment.rsplit("::").next().unwrap_or(""));
            segment.clear();
            out.push(ch);
        }
    }
    out.push_str(segment.rsplit("::").next().unwrap_or(""));
    out
}

impl<T: Send + Sync> CellArray for [T] {
    type Item = T;
    type Cache = ();

    #[inline]
    fn len(&self) -> usize {
        <[T]>::len(self)
    }

    #[inline]
    fn array_cache(&self) {}

    #[inline]
    fn getindex<'a>(&'a self, _: &'a mut (), i: usize) -> &'a T {
        &self[i]
    }

    fn write_tree(&self, out: &mut String, depth: usize) {
        tree_line(out, depth, &alloc::format!("[{}]", short_type_name::<T>()));
    }
}

impl<T: Send + Sync> CellArray for Vec<T> {
    type Item = T;
    type Cache = ();

    #[inline]
    fn len(&self) -> usize {
        Vec::len(self)
    }

    #[inline]
    fn array_cache(&self) {}

    #[inline]
    fn getindex<'a>(&'a self, _: &'a mut (), i: usize) -> &'a T {
        &self[i]
    }

    fn write_tree(&self, out: &mut String, depth: usize) {
        tree_line(out, depth, &alloc::format!("Vec<{}>", short_type_name::<T>()));
    }
}

impl<A: CellArray + ?Sized> CellArray for Arc<A> {
    type Item = A::Item;
    type Cache = A::Cache;

    #[inline]
    fn len(&self) -> usize {
        (**self).len()
    }

    #[inline]
    fn array_cache(&self) -> A::Cache {
        (**self).array_cache()
    }

    #[inline]
    fn getindex<'a>(&'a self, cache: &'a mut A::Cache, i: usize) -> &'a A::Item {
        (**self).getindex(cache, i)
    }

    fn write_tree(&self, out: &mut String, depth: usize) {
        (**self).write_tree(out, depth);
    }
}

impl<A: CellArray + ?Sized> CellArray for &A {
    type Item = A::Item;
    type Cache = A::Cache;

    #[inline]
    fn len(&self) -> usize {
        (**self).len()
    }

    #[inline]
    fn array_cache(&self) -> A::Cache {
        (**self).array_cache()
    }

    #[inline]
    fn getindex<'a>(&'a self, cache: &'a mut A::Cache, i: usize) -> &'a A::Item {
        (**self).getindex(cache, i)
    }

    fn write_tree(&self, out: &mut String, depth: usize) {
        (**self).write_tree(out, depth);
    }
}

/// The identity range `0..n` as a cell array of indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IdentityArray {
    len: usize,
}

impl IdentityArray {
    #[must_use]
    pub fn new(len: usize) -> Self {
        Self { len }
    }
}

impl CellArray for IdentityArray {
    type Item = usize;
    type Cache = usize;

    fn len(&self) -> usize {
        self.len
    }

    fn array_cache(&self) -> usize {
        0
    }

    #[inline]
    fn getindex<'a>(&'a self, cache: &'a mut usize, i: usize) -> &'a usize {
        assert!(i < self.len, "index {i} out of bounds for length {}", self.len);
        *cache = i;
        cache
    }

    fn write_tree(&self, out: &mut String, depth: usize) {
        tree_line(out, depth, "IdentityArray");
    }
}
