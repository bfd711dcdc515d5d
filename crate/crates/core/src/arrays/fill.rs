use alloc::format;
use alloc::string::String;

use super::{short_type_name, tree_line, CellArray};

/// An array of `len` copies of one value, stored once.
#[derive(Clone, Debug, PartialEq)]
pub struct FillArray<T> {
    value: T,
    len: usize,
}

impl<T> FillArray<T> {
    #[must_use]
    pub fn new(value: T, len: usize) -> Self {
        Self { value, len }
    }

    #[must_use]
    pub fn value(&self) -> &T {
        &self.value
    }
}

impl<T: Send + Sync> CellArray for FillArray<T> {
    type Item = T;
    type Cache = ();

    #[inline]
    fn len(&self) -> usize {
        self.len
    }

    #[inline]
    fn array_cache(&self) {}

    #[inline]
    fn getindex<'a>(&'a self, _: &'a mut (), i: usize) -> &'a T {
        assert!(i < self.len, "index {i} out of bounds for length {}", self.len);
        &self.value
    }

    fn write_tree(&self, out: &mut String, depth: usize) {
        tree_line(out, depth, &format!("Fill<{}>", short_type_name::<T>()));
    }
}
