use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{short_type_name, tree_line, CellArray};
use crate::error::{Error, Result};

/// A jagged array stored as one flat buffer plus row offsets.
///
/// Row `i` is `data[ptrs[i]..ptrs[i + 1]]`; `ptrs[0] == 0` and the last offset
/// equals `data.len()`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct JaggedTable<T> {
    data: Vec<T>,
    ptrs: Vec<usize>,
}

impl<T> JaggedTable<T> {
    /// Validates offsets: non-decreasing, starting at 0, ending at `data.len()`.
    pub fn from_parts(data: Vec<T>, ptrs: Vec<usize>) -> Result<Self> {
        let ok = !ptrs.is_empty()
            && ptrs[0] == 0
            && *ptrs.last().unwrap() == data.len()
            && ptrs.windows(2).all(|w| w[0] <= w[1]);
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "invalid row offsets for a table with {} entries",
                data.len()
            )));
        }
        Ok(Self { data, ptrs })
    }

    /// Table with `nrows` rows of identical length `width`.
    pub fn uniform(data: Vec<T>, width: usize) -> Result<Self> {
        if width == 0 || data.len() % width != 0 {
            return Err(Error::InvalidArgument(format!(
                "{} entries cannot be split into rows of {width}",
                data.len()
            )));
        }
        let ptrs = (0..=data.len() / width).map(|r| r * width).collect();
        Ok(Self { data, ptrs })
    }

    #[must_use]
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Self
    where
        T: Clone,
    {
        let mut ptrs = Vec::with_capacity(rows.len() + 1);
        let mut data = Vec::new();
        ptrs.push(0);
        for r in rows {
            data.extend_from_slice(r.as_ref());
            ptrs.push(data.len());
        }
        Self { data, ptrs }
    }

    #[inline]
    #[must_use]
    pub fn num_rows(&self) -> usize {
        self.ptrs.len() - 1
    }

    #[inline]
    #[must_use]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[self.ptrs[i]..self.ptrs[i + 1]]
    }

    #[must_use]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[must_use]
    pub fn ptrs(&self) -> &[usize] {
        &self.ptrs
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.ptrs.windows(2).map(move |w| &self.data[w[0]..w[1]])
    }

    /// Applies `f` to every entry, keeping the row structure.
    #[must_use]
    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> JaggedTable<U> {
        JaggedTable {
            data: self.data.iter().map(f).collect(),
            ptrs: self.ptrs.clone(),
        }
    }
}

impl<T: Send + Sync> CellArray for JaggedTable<T> {
    type Item = [T];
    type Cache = ();

    #[inline]
    fn len(&self) -> usize {
        self.num_rows()
    }

    #[inline]
    fn array_cache(&self) {}

    #[inline]
    fn getindex<'a>(&'a self, _: &'a mut (), i: usize) -> &'a [T] {
        self.row(i)
    }

    fn write_tree(&self, out: &mut String, depth: usize) {
        tree_line(out, depth, &format!("JaggedTable<{}>", short_type_name::<T>()));
    }
}
