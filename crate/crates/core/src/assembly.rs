//! Global sparse assembly of cell contributions.
//!
//! Assembly runs in two phases. [`allocate_pattern`] computes a frozen CSR
//! pattern from the cell DOF tables, then values are scattered into it in
//! cell order and local row-major order. Dirichlet DOFs are eliminated: their
//! columns are moved to the right-hand side using the same cell matrices.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use crate::arrays::{CellArray, JaggedTable, NdArray};
use crate::blocks::ArrayBlock;
use crate::cell_data::DomainContribution;
use crate::error::{Error, Result};
use crate::fe_spaces::{FESpace, MultiFieldFESpace};

static NEXT_PLAN: AtomicU64 = AtomicU64::new(1);

/// Compressed-row sparse matrix with sorted column indices.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    ptr: Vec<usize>,
    idx: Vec<usize>,
    vals: Vec<f64>,
    plan: u64,
}

impl SparseMatrix {
    /// Matrix from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        if let Some(&(i, j, _)) = triplets.iter().find(|(i, j, _)| *i >= nrows || *j >= ncols) {
            return Err(Error::IndexOutOfBounds {
                index: if i >= nrows { i } else { j },
                len: if i >= nrows { nrows } else { ncols },
            });
        }
        let mut t = triplets.to_vec();
        t.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut ptr = vec![0; nrows + 1];
        let mut idx = Vec::new();
        let mut vals: Vec<f64> = Vec::new();
        let mut last = None;
        for (i, j, v) in t {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                idx.push(j);
                vals.push(v);
                ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..nrows {
            ptr[i + 1] += ptr[i];
        }
        Ok(Self {
            nrows,
            ncols,
            ptr,
            idx,
            vals,
            plan: 0,
        })
    }

    /// Matrix holding the nonzeros of a row-major dense array.
    pub fn from_dense(a: &[f64], nrows: usize, ncols: usize) -> Result<Self> {
        if a.len() != nrows * ncols {
            return Err(Error::LengthMismatch {
                expected: nrows * ncols,
                found: a.len(),
            });
        }
        let t: Vec<_> = (0..nrows)
            .flat_map(|i| (0..ncols).map(move |j| (i, j)))
            .filter_map(|(i, j)| (a[i * ncols + j] != 0.0).then(|| (i, j, a[i * ncols + j])))
            .collect();
        Self::from_triplets(nrows, ncols, &t)
    }

    #[must_use]
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    #[must_use]
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[must_use]
    pub fn nnz(&self) -> usize {
        self.idx.len()
    }

    #[must_use]
    pub fn row_ptr(&self) -> &[usize] {
        &self.ptr
    }

    #[must_use]
    pub fn col_indices(&self) -> &[usize] {
        &self.idx
    }

    #[must_use]
    pub fn values(&self) -> &[f64] {
        &self.vals
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.vals
    }

    /// Columns and values of row `i`.
    #[must_use]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.ptr[i]..self.ptr[i + 1];
        (&self.idx[r.clone()], &self.vals[r])
    }

    /// Entry `(i, j)`, zero outside the pattern.
    #[must_use]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (c, v) = self.row(i);
        c.binary_search(&j).map_or(0.0, |k| v[k])
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols, "matvec input length");
        assert_eq!(y.len(), self.nrows, "matvec output length");
        for (i, yi) in y.iter_mut().enumerate() {
            let r = self.ptr[i]..self.ptr[i + 1];
            *yi = self.idx[r.clone()].iter().zip(&self.vals[r]).map(|(&j, &a)| a * x[j]).sum();
        }
    }

    #[must_use]
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec(x, &mut y);
        y
    }

    #[must_use]
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    /// Row-major dense copy.
    #[must_use]
    pub fn to_dense(&self) -> Vec<f64> {
        let mut a = vec![0.0; self.nrows * self.ncols];
        for i in 0..self.nrows {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                a[i * self.ncols + j] = x;
            }
        }
        a
    }

    /// Writes one `row col value` line per stored entry, 0-based.
    pub fn write_coo<W: core::fmt::Write>(&self, out: &mut W) -> core::fmt::Result {
        for i in 0..self.nrows {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                writeln!(out, "{i} {j} {x:e}")?;
            }
        }
        Ok(())
    }
}

/// Signed cell DOF tables of one or more fields with their global offsets
/// and Dirichlet values.
#[derive(Clone, Debug)]
pub struct DofLayout {
    cell_dofs: Vec<Arc<JaggedTable<i64>>>,
    offsets: Vec<usize>,
    dirichlet: Vec<Arc<Vec<f64>>>,
}

impl DofLayout {
    /// One `(cell_dofs, num_free, dirichlet_values)` per field.
    pub fn new(fields: Vec<(Arc<JaggedTable<i64>>, usize, Arc<Vec<f64>>)>) -> Result<Self> {
        let Some(ncells) = fields.first().map(|f| f.0.num_rows()) else {
            return Err(Error::InvalidArgument("a layout needs at least one field".into()));
        };
        let mut offsets = vec![0];
        for (dofs, nfree, dir) in &fields {
            if dofs.num_rows() != ncells {
                return Err(Error::LengthMismatch {
                    expected: ncells,
                    found: dofs.num_rows(),
                });
            }
            for &g in dofs.rows().flatten() {
                let (k, len) = if g >= 0 { (g as usize, *nfree) } else { ((-g - 1) as usize, dir.len()) };
                if k >= len {
                    return Err(Error::IndexOutOfBounds { index: k, len });
                }
            }
            offsets.push(offsets.last().unwrap() + nfree);
        }
        let (cell_dofs, dirichlet) = fields.into_iter().map(|(c, _, d)| (c, d)).unzip();
        Ok(Self {
            cell_dofs,
            offsets,
            dirichlet,
        })
    }

    #[must_use]
    pub fn from_space<const D: usize>(space: &FESpace<D>) -> Self {
        Self {
            cell_dofs: vec![space.cell_dofs().clone()],
            offsets: vec![0, space.num_free_dofs()],
            dirichlet: vec![space.dirichlet_values().clone()],
        }
    }

    #[must_use]
    pub fn from_multi<const D: usize>(mf: &MultiFieldFESpace<D>) -> Self {
        Self {
            cell_dofs: mf.spaces().iter().map(|s| s.cell_dofs().clone()).collect(),
            offsets: mf.offsets().to_vec(),
            dirichlet: mf.spaces().iter().map(|s| s.dirichlet_values().clone()).collect(),
        }
    }

    #[must_use]
    pub fn num_fields(&self) -> usize {
        self.cell_dofs.len()
    }

    /// Total number of free DOFs.
    #[must_use]
    pub fn len(&self) -> usize {
        self.offsets[self.cell_dofs.len()]
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[must_use]
    pub fn num_cells(&self) -> usize {
        self.cell_dofs[0].num_rows()
    }

    #[must_use]
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }
}

/// Frozen sparsity pattern and DOF layouts for repeated assembly.
#[derive(Clone, Debug)]
pub struct AssemblyPlan {
    id: u64,
    rows: DofLayout,
    cols: DofLayout,
    mask: Vec<bool>,
    ptr: Vec<usize>,
    idx: Vec<usize>,
    #[cfg_attr(not(feature = "std"), allow(dead_code))]
    threads: usize,
}

/// Pattern of all free×free pairs of every cell, restricted to the field
/// blocks enabled in `mask` (row-major `nfields_rows × nfields_cols`,
/// default all).
pub fn allocate_pattern(rows: &DofLayout, cols: &DofLayout, mask: Option<&[bool]>) -> Result<AssemblyPlan> {
    let (nfr, nfc) = (rows.num_fields(), cols.num_fields());
    let mask = match mask {
        Some(m) if m.len() != nfr * nfc => {
            return Err(Error::LengthMismatch {
                expected: nfr * nfc,
                found: m.len(),
            })
        }
        Some(m) => m.to_vec(),
        None => vec![true; nfr * nfc],
    };
    if rows.num_cells() != cols.num_cells() {
        return Err(Error::LengthMismatch {
            expected: rows.num_cells(),
            found: cols.num_cells(),
        });
    }
    let nrows = rows.len();

    // Cells touching each global row.
    let mut count = vec![0usize; nrows + 1];
    for (i, t) in rows.cell_dofs.iter().enumerate() {
        for &g in t.rows().flatten().filter(|g| **g >= 0) {
            count[rows.offsets[i] + g as usize + 1] += 1;
        }
    }
    for r in 0..nrows {
        count[r + 1] += count[r];
    }
    let mut fill = count.clone();
    let mut row_cells = vec![0u32; count[nrows]];
    for (i, t) in rows.cell_dofs.iter().enumerate() {
        for (e, row) in t.rows().enumerate() {
            for &g in row.iter().filter(|g| **g >= 0) {
                let r = rows.offsets[i] + g as usize;
                row_cells[fill[r]] = e as u32;
                fill[r] += 1;
            }
        }
    }

    let mut ptr = Vec::with_capacity(nrows + 1);
    let mut idx = Vec::new();
    let mut buf = Vec::new();
    ptr.push(0);
    let mut field = 0;
    for r in 0..nrows {
        while r >= rows.offsets[field + 1] {
            field += 1;
        }
        buf.clear();
        for &e in &row_cells[count[r]..count[r + 1]] {
            for (j, t) in cols.cell_dofs.iter().enumerate() {
                if mask[field * nfc + j] {
                    let o = cols.offsets[j];
                    buf.extend(t.row(e as usize).iter().filter(|g| **g >= 0).map(|&g| o + g as usize));
                }
            }
        }
        buf.sort_unstable();
        buf.dedup();
        idx.extend_from_slice(&buf);
        ptr.push(idx.len());
    }
    Ok(AssemblyPlan {
        id: NEXT_PLAN.fetch_add(1, Ordering::Relaxed),
        rows: rows.clone(),
        cols: cols.clone(),
        mask,
        ptr,
        idx,
        threads: 1,
    })
}

type Block = ArrayBlock<NdArray<f64>>;

impl AssemblyPlan {
    /// Plan for a bilinear form on `trial × test` with all blocks enabled.
    pub fn for_spaces<const D: usize>(test: &FESpace<D>, trial: &FESpace<D>) -> Result<Self> {
        allocate_pattern(&DofLayout::from_space(test), &DofLayout::from_space(trial), None)
    }

    /// Plan for multi-field spaces; `mask` as in [`allocate_pattern`].
    pub fn for_multi<const D: usize>(
        test: &MultiFieldFESpace<D>,
        trial: &MultiFieldFESpace<D>,
        mask: Option<&[bool]>,
    ) -> Result<Self> {
        allocate_pattern(&DofLayout::from_multi(test), &DofLayout::from_multi(trial), mask)
    }

    /// Number of worker threads used for scattering. The result does not
    /// depend on it beyond round-off.
    #[cfg(feature = "std")]
    #[must_use]
    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }

    #[must_use]
    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    #[must_use]
    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    #[must_use]
    pub fn nnz(&self) -> usize {
        self.idx.len()
    }

    #[must_use]
    pub fn rows(&self) -> &DofLayout {
        &self.rows
    }

    #[must_use]
    pub fn cols(&self) -> &DofLayout {
        &self.cols
    }

    /// Zero matrix with the plan's pattern.
    #[must_use]
    pub fn new_matrix(&self) -> SparseMatrix {
        SparseMatrix {
            nrows: self.nrows(),
            ncols: self.ncols(),
            ptr: self.ptr.clone(),
            idx: self.idx.clone(),
            vals: vec![0.0; self.idx.len()],
            plan: self.id,
        }
    }

    fn check_grid(&self, blk: &Block, matrix: bool) -> Result<()> {
        let want: &[usize] = if matrix {
            &[self.rows.num_fields(), self.cols.num_fields()]
        } else {
            &[self.rows.num_fields()]
        };
        if blk.dims() != want {
            return Err(Error::Shape(format!(
                "cell contribution with block grid {:?}, expected {want:?}",
                blk.dims()
            )));
        }
        Ok(())
    }

    fn add_matrix(&self, e: usize, blk: &Block, vals: &mut [f64], rhs: Option<&mut [f64]>) -> Result<()> {
        self.check_grid(blk, true)?;
        let nfc = self.cols.num_fields();
        let mut rhs = rhs;
        for (pos, m) in blk.iter_touched() {
            let (i, j) = (pos / nfc, pos % nfc);
            if !self.mask[pos] {
                return Err(Error::BlockPosition(format!("block ({i}, {j}) is outside the pattern")));
            }
            let rows = self.rows.cell_dofs[i].row(e);
            let cols = self.cols.cell_dofs[j].row(e);
            if m.dims() != [rows.len(), cols.len()] {
                return Err(Error::Shape(format!(
                    "cell {e} block ({i}, {j}) is {:?}, expected [{}, {}]",
                    m.dims(),
                    rows.len(),
                    cols.len()
                )));
            }
            let (ro, co) = (self.rows.offsets[i], self.cols.offsets[j]);
            let dir = &self.cols.dirichlet[j];
            let nc = cols.len();
            for (a, &ga) in rows.iter().enumerate() {
                if ga < 0 {
                    continue;
                }
                let r = ro + ga as usize;
                let s = self.ptr[r];
                let pattern = &self.idx[s..self.ptr[r + 1]];
                let mrow = &m.data()[a * nc..(a + 1) * nc];
                let mut lift = 0.0;
                for (&gb, &v) in cols.iter().zip(mrow) {
                    if gb >= 0 {
                        let k = pattern
                            .binary_search(&(co + gb as usize))
                            .map_err(|_| Error::InvalidArgument(format!("cell {e} is not covered by the pattern")))?;
                        vals[s + k] += v;
                    } else {
                        lift += v * dir[(-gb - 1) as usize];
                    }
                }
                if let Some(b) = rhs.as_deref_mut() {
                    b[r] -= lift;
                }
            }
        }
        Ok(())
    }

    fn add_vector(&self, e: usize, blk: &Block, b: &mut [f64]) -> Result<()> {
        self.check_grid(blk, false)?;
        for (i, v) in blk.iter_touched() {
            let rows = self.rows.cell_dofs[i].row(e);
            if v.len() != rows.len() {
                return Err(Error::Shape(format!(
                    "cell {e} block {i} has {} entries, expected {}",
                    v.len(),
                    rows.len()
                )));
            }
            let o = self.rows.offsets[i];
            for (&g, &x) in rows.iter().zip(v.data()) {
                if g >= 0 {
                    b[o + g as usize] += x;
                }
            }
        }
        Ok(())
    }

    /// Scatters cells `range` of every term.
    fn scatter_range<const D: usize>(
        &self,
        a: Option<&DomainContribution<D>>,
        l: Option<&DomainContribution<D>>,
        lift: bool,
        part: (usize, usize),
        vals: &mut [f64],
        rhs: &mut [f64],
    ) -> Result<()> {
        if let Some(a) = a {
            for (trian, cells) in a.iter() {
                let mut c = cells.array_cache();
                for i in chunk(cells.len(), part) {
                    let blk = cells.getindex(&mut c, i);
                    let r = if lift { Some(&mut *rhs) } else { None };
                    self.add_matrix(trian.parent_cell(i), blk, vals, r)?;
                }
            }
        }
        if let Some(l) = l {
            for (trian, cells) in l.iter() {
                let mut c = cells.array_cache();
                for i in chunk(cells.len(), part) {
                    self.add_vector(trian.parent_cell(i), cells.getindex(&mut c, i), rhs)?;
                }
            }
        }
        Ok(())
    }

    fn check_terms<const D: usize>(&self, dc: Option<&DomainContribution<D>>) -> Result<()> {
        for (trian, cells) in dc.into_iter().flat_map(DomainContribution::iter) {
            if cells.len() != trian.num_cells() {
                return Err(Error::LengthMismatch {
                    expected: trian.num_cells(),
                    found: cells.len(),
                });
            }
            if trian.model().num_cells() != self.rows.num_cells() {
                return Err(Error::LengthMismatch {
                    expected: self.rows.num_cells(),
                    found: trian.model().num_cells(),
                });
            }
        }
        Ok(())
    }

    fn scatter<const D: usize>(
        &self,
        a: Option<&DomainContribution<D>>,
        l: Option<&DomainContribution<D>>,
        lift: bool,
        vals: &mut [f64],
        rhs: &mut [f64],
    ) -> Result<()> {
        self.check_terms(a)?;
        self.check_terms(l)?;
        vals.fill(0.0);
        rhs.fill(0.0);
        #[cfg(feature = "std")]
        if self.threads > 1 {
            return self.scatter_parallel(a, l, lift, vals, rhs);
        }
        self.scatter_range(a, l, lift, (0, 1), vals, rhs)
    }

    #[cfg(feature = "std")]
    fn scatter_parallel<const D: usize>(
        &self,
        a: Option<&DomainContribution<D>>,
        l: Option<&DomainContribution<D>>,
        lift: bool,
        vals: &mut [f64],
        rhs: &mut [f64],
    ) -> Result<()> {
        let n = self.threads;
        let (nv, nb) = (vals.len(), rhs.len());
        let parts: Vec<Result<(Vec<f64>, Vec<f64>)>> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..n)
                .map(|p| {
                    s.spawn(move || {
                        let mut v = vec![0.0; nv];
                        let mut b = vec![0.0; nb];
                        self.scatter_range(a, l, lift, (p, n), &mut v, &mut b)?;
                        Ok((v, b))
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("assembly worker panicked"))
                .collect()
        });
        for part in parts {
            let (v, b) = part?;
            vals.iter_mut().zip(&v).for_each(|(x, y)| *x += y);
            rhs.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
        }
        Ok(())
    }
}

/// Contiguous part `p` of `n` of `0..len`.
fn chunk(len: usize, (p, n): (usize, usize)) -> core::ops::Range<usize> {
    (len * p / n)..(len * (p + 1) / n)
}

/// Global matrix of a bilinear form's cell contributions.
pub fn assemble_matrix<const D: usize>(plan: &AssemblyPlan, a: &DomainContribution<D>) -> Result<SparseMatrix> {
    let mut m = plan.new_matrix();
    let mut rhs = vec![0.0; plan.nrows()];
    plan.scatter(Some(a), None, false, &mut m.vals, &mut rhs)?;
    Ok(m)
}

/// Global vector of a linear form's cell contributions. When the cell
/// matrices `lift` are given, the Dirichlet columns times the trial
/// Dirichlet values are subtracted.
pub fn assemble_vector<const D: usize>(
    plan: &AssemblyPlan,
    l: &DomainContribution<D>,
    lift: Option<&DomainContribution<D>>,
) -> Result<Vec<f64>> {
    let mut vals = vec![0.0; if lift.is_some() { plan.nnz() } else { 0 }];
    let mut rhs = vec![0.0; plan.nrows()];
    if lift.is_some() {
        plan.scatter(lift, Some(l), true, &mut vals, &mut rhs)?;
    } else {
        plan.scatter(None, Some(l), false, &mut vals, &mut rhs)?;
    }
    Ok(rhs)
}

/// Matrix and Dirichlet-corrected right-hand side in one pass.
pub fn assemble_system<const D: usize>(
    plan: &AssemblyPlan,
    a: &DomainContribution<D>,
    l: &DomainContribution<D>,
) -> Result<(SparseMatrix, Vec<f64>)> {
    let mut m = plan.new_matrix();
    let mut b = vec![0.0; plan.nrows()];
    plan.scatter(Some(a), Some(l), true, &mut m.vals, &mut b)?;
    Ok((m, b))
}

/// Overwrites the values of `m` and `b` with a fresh assembly, reusing
/// their storage.
pub fn reassemble_in_place<const D: usize>(
    plan: &AssemblyPlan,
    m: &mut SparseMatrix,
    b: &mut [f64],
    a: &DomainContribution<D>,
    l: &DomainContribution<D>,
) -> Result<()> {
    if m.plan != plan.id {
        return Err(Error::ForeignMatrix);
    }
    if b.len() != plan.nrows() {
        return Err(Error::LengthMismatch {
            expected: plan.nrows(),
            found: b.len(),
        });
    }
    plan.scatter(Some(a), Some(l), true, &mut m.vals, b)
}

/// Touched block mask of the first cell of every term of `a`, the natural
/// `mask` for [`allocate_pattern`].
pub fn block_mask<const D: usize>(a: &DomainContribution<D>) -> Option<Vec<bool>> {
    let mut mask: Option<Vec<bool>> = None;
    for (_, cells) in a.iter() {
        if cells.len() == 0 {
            continue;
        }
        let mut c = cells.array_cache();
        let t = cells.getindex(&mut c, 0).touched();
        match &mut mask {
            None => mask = Some(t.to_vec()),
            Some(m) if m.len() == t.len() => m.iter_mut().zip(t).for_each(|(x, y)| *x |= y),
            Some(_) => return None,
        }
    }
    mask
}
