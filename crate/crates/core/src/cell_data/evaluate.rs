use alloc::string::String;
use alloc::vec::Vec;

use super::program::{Program, ProgramCache};
use super::{CellField, CellPoint};
use crate::arrays::{tree_line, CellArray};
use crate::error::{Error, Result};
use crate::fields::Value;
use crate::geometry::common_triangulation;

/// Values of a cell field at the points of one entry, stored
/// `[point][row][col]`. Test bases give `n × 1` blocks, trial bases
/// `1 × n`, plain fields `1 × 1`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointValues<const D: usize> {
    pub npoints: usize,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Value<D>>,
}

impl<const D: usize> PointValues<D> {
    #[must_use]
    pub fn get(&self, q: usize, i: usize, j: usize) -> &Value<D> {
        &self.data[(q * self.rows + i) * self.cols + j]
    }

    /// Values at point `q`, row-major.
    #[must_use]
    pub fn at(&self, q: usize) -> &[Value<D>] {
        let n = self.rows * self.cols;
        &self.data[q * n..(q + 1) * n]
    }
}

/// Lazy per-entry evaluation of a cell field at cell points.
pub struct CellValues<const D: usize> {
    program: Program<D>,
    tree: String,
}

pub struct CellValuesCache<const D: usize> {
    pc: ProgramCache<D>,
    out: PointValues<D>,
}

impl<const D: usize> CellArray for CellValues<D> {
    type Item = PointValues<D>;
    type Cache = CellValuesCache<D>;

    fn len(&self) -> usize {
        self.program.triangulation().num_cells()
    }

    fn array_cache(&self) -> CellValuesCache<D> {
        CellValuesCache {
            pc: self.program.cache(),
            out: PointValues::default(),
        }
    }

    fn getindex<'a>(&'a self, c: &'a mut CellValuesCache<D>, i: usize) -> &'a PointValues<D> {
        let p = &self.program;
        p.setup(&mut c.pc, i);
        let nq = p.num_points(&c.pc);
        let (r, cc) = p.root_shape(&c.pc, 0);
        c.out.npoints = nq;
        c.out.rows = r;
        c.out.cols = cc;
        c.out.data.clear();
        for q in 0..nq {
            p.eval_point(&mut c.pc, q);
            c.out.data.extend_from_slice(p.root_values(&c.pc, 0));
        }
        &c.out
    }

    fn write_tree(&self, out: &mut String, depth: usize) {
        tree_line(out, depth, "evaluate");
        for line in self.tree.lines() {
            tree_line(out, depth + 1, line);
        }
    }
}

/// Evaluates `f` at the points `x` of every entry of `x`'s triangulation.
///
/// Reference points are mapped through the cell geometry for physical
/// fields, and bulk fields are restricted to boundary entries through the
/// parent cell.
pub fn evaluate_cell<const D: usize>(f: &CellField<D>, x: &CellPoint<D>) -> Result<CellValues<D>> {
    let common = common_triangulation(f.triangulation(), x.triangulation())?;
    if common.id() != x.triangulation().id() {
        return Err(Error::IncompatibleTriangulations);
    }
    if f.block_keys().len() != 1 {
        return Err(Error::Unsupported("evaluation of a multi-block field".into()));
    }
    let program = Program::compile(f.expr(), x.triangulation(), x.sets(), false)?;
    Ok(CellValues { program, tree: f.tree() })
}
