//! Block arrays with a touched mask.
//!
//! An [`ArrayBlock`] is a 0-, 1- or 2-dimensional grid of entries where only
//! the touched positions hold meaningful values. Untouched positions carry a
//! default placeholder that is never read by the block operations, so their
//! sizes need not be known.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::arrays::{NdArray, Shape};
use crate::error::{Error, Result};

/// Operations an entry of a block array must support.
pub trait BlockEntry: Clone + Default {
    /// `self += s * other`.
    fn axpy(&mut self, s: f64, other: &Self) -> Result<()>;
    /// `s * self`.
    fn scaled(&self, s: f64) -> Self;
    /// Short size description for [`ArrayBlock::display`].
    fn describe(&self, out: &mut String, indent: usize);
}

impl BlockEntry for NdArray<f64> {
    fn axpy(&mut self, s: f64, other: &Self) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::Shape(format!(
                "cannot add arrays of sizes {:?} and {:?}",
                self.shape(),
                other.shape()
            )));
        }
        for (a, b) in self.data_mut().iter_mut().zip(other.data()) {
            *a += s * b;
        }
        Ok(())
    }

    fn scaled(&self, s: f64) -> Self {
        let mut c = self.clone();
        c.data_mut().iter_mut().for_each(|x| *x *= s);
        c
    }

    fn describe(&self, out: &mut String, _indent: usize) {
        let dims = self.dims();
        let kind = match dims.len() {
            0 => "scalar",
            1 => "vector",
            _ => "matrix",
        };
        let sizes: Vec<String> = dims.iter().map(|d| format!("{d}")).collect();
        let _ = write!(out, "{}-element {kind} ({})", self.len(), sizes.join("×"));
    }
}

/// A grid of entries with a mask of touched positions.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrayBlock<T> {
    shape: Shape,
    array: Vec<T>,
    touched: Vec<bool>,
}

impl<T: Default> Default for ArrayBlock<T> {
    fn default() -> Self {
        Self {
            shape: Shape::scalar(),
            array: vec![T::default()],
            touched: vec![false],
        }
    }
}

impl<T> ArrayBlock<T> {
    /// An all-untouched block grid.
    pub fn new(dims: &[usize]) -> Result<Self>
    where
        T: Default,
    {
        if dims.len() > 2 {
            return Err(Error::Shape(format!("block grids have rank ≤ 2, got {}", dims.len())));
        }
        let shape = Shape::from_dims(dims)?;
        let n = shape.size();
        Ok(Self {
            shape,
            array: (0..n).map(|_| T::default()).collect(),
            touched: vec![false; n],
        })
    }

    /// Block grid with the listed positions touched.
    pub fn make(dims: &[usize], entries: Vec<(Vec<usize>, T)>) -> Result<Self>
    where
        T: Default,
    {
        let mut b = Self::new(dims)?;
        for (pos, v) in entries {
            let i = b.linear(&pos)?;
            if b.touched[i] {
                return Err(Error::BlockPosition(format!("duplicate position {pos:?}")));
            }
            b.array[i] = v;
            b.touched[i] = true;
        }
        Ok(b)
    }

    fn linear(&self, pos: &[usize]) -> Result<usize> {
        let dims = self.shape.dims();
        if pos.len() != dims.len() || pos.iter().zip(dims).any(|(p, d)| p >= d) {
            return Err(Error::BlockPosition(format!(
                "position {pos:?} outside block grid {:?}",
                self.shape
            )));
        }
        Ok(match pos.len() {
            0 => 0,
            1 => pos[0],
            _ => pos[0] * dims[1] + pos[1],
        })
    }

    #[must_use]
    pub fn dims(&self) -> &[usize] {
        self.shape.dims()
    }

    #[must_use]
    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// Number of positions.
    #[must_use]
    pub fn len(&self) -> usize {
        self.array.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.array.is_empty()
    }

    #[must_use]
    pub fn touched(&self) -> &[bool] {
        &self.touched
    }

    #[must_use]
    pub fn is_touched(&self, pos: &[usize]) -> bool {
        self.linear(pos).map(|i| self.touched[i]).unwrap_or(false)
    }

    /// Entry at `pos`, `None` when untouched or outside the grid.
    #[must_use]
    pub fn get(&self, pos: &[usize]) -> Option<&T> {
        let i = self.linear(pos).ok()?;
        self.touched[i].then(|| &self.array[i])
    }

    /// Entry at linear position `i`, `None` when untouched.
    #[inline]
    #[must_use]
    pub fn get_linear(&self, i: usize) -> Option<&T> {
        self.touched[i].then(|| &self.array[i])
    }

    /// Marks `pos` touched and returns its entry for writing. The entry keeps
    /// its previous contents, which lets callers reuse buffers.
    pub fn touch(&mut self, pos: &[usize]) -> Result<&mut T> {
        let i = self.linear(pos)?;
        self.touched[i] = true;
        Ok(&mut self.array[i])
    }

    /// Like [`ArrayBlock::touch`] with a linear position.
    #[inline]
    pub fn touch_linear(&mut self, i: usize) -> &mut T {
        self.touched[i] = true;
        &mut self.array[i]
    }

    /// Marks every position untouched, keeping entry storage.
    pub fn clear_mask(&mut self) {
        self.touched.iter_mut().for_each(|t| *t = false);
    }

    /// Reshapes the grid, keeping entry storage where possible.
    pub fn reset(&mut self, dims: &[usize]) -> Result<()>
    where
        T: Default,
    {
        let shape = Shape::from_dims(dims)?;
        if shape != self.shape {
            self.shape = shape;
            self.array.resize_with(shape.size(), T::default);
            self.touched.resize(shape.size(), false);
        }
        self.clear_mask();
        Ok(())
    }

    /// Touched entries with their linear positions.
    pub fn iter_touched(&self) -> impl Iterator<Item = (usize, &T)> {
        self.array
            .iter()
            .enumerate()
            .filter(move |(i, _)| self.touched[*i])
    }

    /// Row and column of a linear position in a matrix grid.
    #[must_use]
    pub fn position(&self, i: usize) -> (usize, usize) {
        match self.shape.dims() {
            [_, n] => (i / n, i % n),
            _ => (i, 0),
        }
    }
}

impl<T: BlockEntry> ArrayBlock<T> {
    fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::Shape(format!(
                "block grids {:?} and {:?} differ",
                self.shape, other.shape
            )));
        }
        Ok(())
    }

    /// `a + s b` with mask `a.touched OR b.touched`.
    pub fn combine(&self, s: f64, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let mut out = Self::new(self.dims())?;
        for i in 0..self.len() {
            match (self.get_linear(i), other.get_linear(i)) {
                (Some(a), Some(b)) => {
                    let mut c = a.clone();
                    c.axpy(s, b)?;
                    *out.touch_linear(i) = c;
                }
                (Some(a), None) => *out.touch_linear(i) = a.clone(),
                (None, Some(b)) => *out.touch_linear(i) = b.scaled(s),
                (None, None) => {}
            }
        }
        Ok(out)
    }

    /// `self += s * other`, touching positions of `other`.
    pub fn axpy_blocks(&mut self, s: f64, other: &Self) -> Result<()> {
        self.check_same_grid(other)?;
        for i in 0..self.len() {
            if let Some(b) = other.get_linear(i) {
                if self.touched[i] {
                    self.array[i].axpy(s, b)?;
                } else {
                    self.array[i] = b.scaled(s);
                    self.touched[i] = true;
                }
            }
        }
        Ok(())
    }

    /// Indented listing of sizes, with `empty` at untouched positions.
    #[must_use]
    pub fn display(&self) -> String {
        let mut s = String::new();
        self.describe(&mut s, 0);
        s
    }
}

impl<T: BlockEntry> BlockEntry for ArrayBlock<T> {
    fn axpy(&mut self, s: f64, other: &Self) -> Result<()> {
        self.axpy_blocks(s, other)
    }

    fn scaled(&self, s: f64) -> Self {
        let mut c = self.clone();
        for i in 0..c.len() {
            if c.touched[i] {
                c.array[i] = c.array[i].scaled(s);
            }
        }
        c
    }

    fn describe(&self, out: &mut String, indent: usize) {
        let kind = match self.dims().len() {
            0 => "ScalarBlock",
            1 => "VectorBlock",
            _ => "MatrixBlock",
        };
        let _ = write!(out, "{kind} {:?}", self.shape);
        for i in 0..self.len() {
            out.push('\n');
            for _ in 0..indent + 1 {
                out.push_str("  ");
            }
            let pos = match self.dims().len() {
                0 => String::from("()"),
                1 => format!("({})", i),
                _ => {
                    let (r, c) = self.position(i);
                    format!("({r},{c})")
                }
            };
            let _ = write!(out, "{pos}: ");
            match self.get_linear(i) {
                Some(v) => v.describe(out, indent + 1),
                None => out.push_str("empty"),
            }
        }
    }
}

impl<T: BlockEntry> core::ops::Add for &ArrayBlock<T> {
    type Output = Result<ArrayBlock<T>>;

    fn add(self, rhs: Self) -> Result<ArrayBlock<T>> {
        self.combine(1.0, rhs)
    }
}

impl<T: BlockEntry> core::ops::Sub for &ArrayBlock<T> {
    type Output = Result<ArrayBlock<T>>;

    fn sub(self, rhs: Self) -> Result<ArrayBlock<T>> {
        self.combine(-1.0, rhs)
    }
}

/// Block matrix times block vector. Block `I` of the result is touched when
/// some `A_IJ` and `b_J` are both touched; its size comes from those
/// operands.
pub fn block_matvec(a: &ArrayBlock<NdArray<f64>>, b: &ArrayBlock<NdArray<f64>>) -> Result<ArrayBlock<NdArray<f64>>> {
    let (m, n) = match a.dims() {
        [m, n] => (*m, *n),
        _ => return Err(Error::Shape("block_matvec needs a matrix block grid".into())),
    };
    if b.dims() != [n] {
        return Err(Error::Shape(format!("block grid {:?} times {:?}", a.shape(), b.shape())));
    }
    let mut out = ArrayBlock::<NdArray<f64>>::new(&[m])?;
    for i in 0..m {
        for j in 0..n {
            let (Some(aij), Some(bj)) = (a.get(&[i, j]), b.get(&[j])) else {
                continue;
            };
            let (r, c) = match aij.dims() {
                [r, c] => (*r, *c),
                _ => return Err(Error::Shape("matrix block entries must be matrices".into())),
            };
            if bj.len() != c {
                return Err(Error::Shape(format!("block ({i},{j}) has {c} columns, vector has {}", bj.len())));
            }
            let mut y = NdArray::filled(Shape::vector(r), 0.0);
            for rr in 0..r {
                y[rr] = (0..c).map(|cc| aij.data()[rr * c + cc] * bj[cc]).sum();
            }
            if out.is_touched(&[i]) {
                out.touch(&[i])?.axpy(1.0, &y)?;
            } else {
                *out.touch(&[i])? = y;
            }
        }
    }
    Ok(out)
}
