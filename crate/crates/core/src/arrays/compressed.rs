use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{short_type_name, tree_line, CellArray};
use crate::error::{Error, Result};

/// A long array whose entries are drawn from a short list of values:
/// entry `i` is `values[index[i]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CompressedArray<T> {
    values: Vec<T>,
    index: Vec<u32>,
}

impl<T> CompressedArray<T> {
    /// Fails if an index entry does not address `values`.
    pub fn new(values: Vec<T>, index: Vec<u32>) -> Result<Self> {
        if let Some(&bad) = index.iter().find(|&&j| j as usize >= values.len()) {
            return Err(Error::IndexOutOfBounds {
                index: bad as usize,
                len: values.len(),
            });
        }
        Ok(Self { values, index })
    }

    #[must_use]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[must_use]
    pub fn index_map(&self) -> &[u32] {
        &self.index
    }
}

impl<T: Send + Sync> CellArray for CompressedArray<T> {
    type Item = T;
    type Cache = ();

    #[inline]
    fn len(&self) -> usize {
        self.index.len()
    }

    #[inline]
    fn array_cache(&self) {}

    #[inline]
    fn getindex<'a>(&'a self, _: &'a mut (), i: usize) -> &'a T {
        &self.values[self.index[i] as usize]
    }

    fn write_tree(&self, out: &mut String, depth: usize) {
        tree_line(out, depth, &format!("Compressed<{}>", short_type_name::<T>()));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn reads_through_index_map() {
        let a = CompressedArray::new(vec!['A', 'B'], vec![0, 1, 1, 0]).unwrap();
        let got: Vec<char> = (0..4).map(|i| *a.getindex(&mut (), i)).collect();
        assert_eq!(got, vec!['A', 'B', 'B', 'A']);
        let b = CompressedArray::new(vec!['x'], vec![0, 0, 0]).unwrap();
        assert_eq!(crate::arrays::collect(&b), vec!['x'; 3]);
    }

    #[test]
    fn no_copy_for_heap_values() {
        let a = CompressedArray::new(vec![vec![1.0; 8], vec![2.0; 8]], vec![1, 0, 1]).unwrap();
        assert!(core::ptr::eq(a.getindex(&mut (), 0), a.getindex(&mut (), 2)));
    }

    #[test]
    fn rejects_bad_index() {
        assert!(CompressedArray::new(vec![1], vec![0, 1]).is_err());
        let a = CompressedArray::new(vec![1], vec![0]).unwrap();
        assert!(a.try_getindex(&mut (), 1).is_err());
    }
}
