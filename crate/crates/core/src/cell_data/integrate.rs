use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::program::{Arity, Program, ProgramCache};
use super::{CellField, CellPoint};
use crate::arrays::{lazy_map, lazy_map2, tree_line, BoxedArray, CellArray, NdArray};
use crate::blocks::ArrayBlock;
use crate::error::{Error, Result};
use crate::fields::ValueKind;
use crate::geometry::Triangulation;
use crate::maps::{Map1, Map2};
use crate::reffe::{facet_quadrature, make_quadrature};

/// Quadrature points and weights on every entry of a triangulation.
#[derive(Clone, Debug)]
pub struct Measure<const D: usize> {
    points: CellPoint<D>,
    weights: Arc<Vec<Option<Vec<f64>>>>,
    degree: usize,
}

/// Measure exact for polynomials of degree `degree` on every cell, or on
/// every facet of a boundary triangulation.
pub fn measure<const D: usize>(trian: &Arc<Triangulation<D>>, degree: usize) -> Result<Measure<D>> {
    let model = trian.model();
    let mut points = Vec::with_capacity(trian.num_point_sets());
    let mut weights = Vec::with_capacity(trian.num_point_sets());
    for key in 0..trian.num_point_sets() {
        let (ti, facet) = trian.point_set_parts(key);
        let t = model.geometry_fe(ti).topology();
        let rule = match facet {
            None => Some(make_quadrature::<D>(t, degree)?),
            Some(f) if f < t.num_facets() => Some(facet_quadrature::<D>(t, f, degree)?),
            Some(_) => None,
        };
        match rule {
            Some(r) => {
                points.push(Some(r.points));
                weights.push(Some(r.weights));
            }
            None => {
                points.push(None);
                weights.push(None);
            }
        }
    }
    Ok(Measure {
        points: CellPoint::new(trian, points)?,
        weights: Arc::new(weights),
        degree,
    })
}

impl<const D: usize> Measure<D> {
    /// A measure from explicit reference points and positive weights per
    /// point-set key.
    pub fn from_parts(points: CellPoint<D>, weights: Vec<Option<Vec<f64>>>) -> Result<Self> {
        for (p, w) in points.sets().iter().zip(&weights) {
            match (p, w) {
                (Some(p), Some(w)) if p.len() == w.len() => {
                    if w.iter().any(|&x| !(x > 0.0)) {
                        return Err(Error::InvalidArgument("quadrature weights must be positive".into()));
                    }
                }
                (None, None) => {}
                _ => return Err(Error::InvalidArgument("points and weights do not match".into())),
            }
        }
        if weights.len() != points.sets().len() {
            return Err(Error::LengthMismatch {
                expected: points.sets().len(),
                found: weights.len(),
            });
        }
        Ok(Self {
            points,
            weights: Arc::new(weights),
            degree: 0,
        })
    }

    #[must_use]
    pub fn triangulation(&self) -> &Arc<Triangulation<D>> {
        self.points.triangulation()
    }

    #[must_use]
    pub fn points(&self) -> &CellPoint<D> {
        &self.points
    }

    /// Weights of point-set key `key`.
    #[must_use]
    pub fn weights(&self, key: usize) -> Option<&[f64]> {
        self.weights[key].as_deref()
    }

    #[must_use]
    pub fn degree(&self) -> usize {
        self.degree
    }
}

/// Per-entry integration results: block grids of scalars, vectors or
/// matrices.
pub type CellContributions = BoxedArray<ArrayBlock<NdArray<f64>>>;

struct Integrand<const D: usize> {
    program: Program<D>,
    weights: Arc<Vec<Option<Vec<f64>>>>,
    arity: Arity,
    keys: Vec<super::BlockKey>,
    tree: String,
}

struct IntegrandCache<const D: usize> {
    pc: ProgramCache<D>,
    out: ArrayBlock<NdArray<f64>>,
}

impl<const D: usize> CellArray for Integrand<D> {
    type Item = ArrayBlock<NdArray<f64>>;
    type Cache = IntegrandCache<D>;

    fn len(&self) -> usize {
        self.program.triangulation().num_cells()
    }

    fn array_cache(&self) -> IntegrandCache<D> {
        IntegrandCache {
            pc: self.program.cache(),
            out: ArrayBlock::new(&self.arity.grid()).expect("rank ≤ 2"),
        }
    }

    fn getindex<'a>(&'a self, c: &'a mut IntegrandCache<D>, i: usize) -> &'a ArrayBlock<NdArray<f64>> {
        let p = &self.program;
        p.setup(&mut c.pc, i);
        c.out.clear_mask();
        for &k in &self.keys {
            let shape = Program::block_shape(&c.pc, k, self.arity);
            c.out.touch_linear(self.arity.position(k)).reset(shape, 0.0);
        }
        let w = self.weights[c.pc.key].as_deref().expect("weights of every point set");
        let root = p.root();
        for (q, &wq) in w.iter().enumerate() {
            p.eval_point(&mut c.pc, q);
            let s = wq * c.pc.geom.dv[q];
            p.accumulate(&c.pc, root, s, &mut c.out, self.arity);
        }
        &c.out
    }

    fn write_tree(&self, out: &mut String, depth: usize) {
        tree_line(out, depth, "integrate");
        for line in self.tree.lines() {
            tree_line(out, depth + 1, line);
        }
    }
}

/// `∫ f dm` on every entry of the measure's triangulation.
///
/// The result is lazy: cell values are computed when read.
pub fn integrate<const D: usize>(f: &CellField<D>, m: &Measure<D>) -> Result<DomainContribution<D>> {
    let trian = m.triangulation();
    if !f.triangulation().contains(trian) {
        return Err(Error::IncompatibleTriangulations);
    }
    if f.kind() != ValueKind::Scalar {
        return Err(Error::Shape(alloc::format!("cannot integrate a {:?} field", f.kind())));
    }
    let program = Program::compile(f.expr(), trian, m.points.sets(), true)?;
    let keys = program.root_keys().to_vec();
    let arity = Arity::of(&keys, program.nfields())?;
    let a = Integrand {
        program,
        weights: m.weights.clone(),
        arity,
        keys,
        tree: f.tree(),
    };
    let mut dc = DomainContribution::new();
    dc.insert(trian, BoxedArray::new(a))?;
    Ok(dc)
}

/// `a + s b` per entry, touching the union of both masks.
#[derive(Clone, Copy, Debug)]
struct BlockAxpy(f64);

fn copy_block(dst: &mut NdArray<f64>, src: &NdArray<f64>, s: f64) {
    dst.reset(src.shape(), 0.0);
    for (d, x) in dst.data_mut().iter_mut().zip(src.data()) {
        *d = s * x;
    }
}

impl Map2<ArrayBlock<NdArray<f64>>, ArrayBlock<NdArray<f64>>> for BlockAxpy {
    type Out = ArrayBlock<NdArray<f64>>;
    type Cache = ArrayBlock<NdArray<f64>>;

    fn return_cache(&self) -> Self::Cache {
        ArrayBlock::default()
    }

    fn evaluate<'c>(
        &'c self,
        out: &'c mut Self::Cache,
        a: &ArrayBlock<NdArray<f64>>,
        b: &ArrayBlock<NdArray<f64>>,
    ) -> &'c Self::Out {
        out.reset(a.dims()).expect("rank ≤ 2");
        for (i, x) in a.iter_touched() {
            copy_block(out.touch_linear(i), x, 1.0);
        }
        for (i, y) in b.iter_touched() {
            if a.get_linear(i).is_some() {
                let o = out.touch_linear(i);
                for (d, v) in o.data_mut().iter_mut().zip(y.data()) {
                    *d += self.0 * v;
                }
            } else {
                copy_block(out.touch_linear(i), y, self.0);
            }
        }
        out
    }

    fn name(&self) -> String {
        if self.0 < 0.0 { "-".into() } else { "+".into() }
    }
}

#[derive(Clone, Copy, Debug)]
struct BlockScale(f64);

impl Map1<ArrayBlock<NdArray<f64>>> for BlockScale {
    type Out = ArrayBlock<NdArray<f64>>;
    type Cache = ArrayBlock<NdArray<f64>>;

    fn return_cache(&self) -> Self::Cache {
        ArrayBlock::default()
    }

    fn evaluate<'c>(&'c self, out: &'c mut Self::Cache, a: &ArrayBlock<NdArray<f64>>) -> &'c Self::Out {
        out.reset(a.dims()).expect("rank ≤ 2");
        for (i, x) in a.iter_touched() {
            copy_block(out.touch_linear(i), x, self.0);
        }
        out
    }

    fn name(&self) -> String {
        alloc::format!("scale({})", self.0)
    }
}

/// Integration results per triangulation.
#[derive(Clone, Default)]
pub struct DomainContribution<const D: usize> {
    terms: Vec<(Arc<Triangulation<D>>, CellContributions)>,
}

impl<const D: usize> core::fmt::Debug for DomainContribution<D> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_list()
            .entries(self.terms.iter().map(|(t, a)| (t.id(), a.len())))
            .finish()
    }
}

fn first_grid(a: &CellContributions) -> Option<Vec<usize>> {
    if a.is_empty() {
        return None;
    }
    let mut c = a.array_cache();
    Some(a.getindex(&mut c, 0).dims().to_vec())
}

impl<const D: usize> DomainContribution<D> {
    #[must_use]
    pub fn new() -> Self {
        Self { terms: Vec::new() }
    }

    /// Adds `cells` on `trian`, summing lazily with an existing entry for
    /// the same triangulation.
    pub fn insert(&mut self, trian: &Arc<Triangulation<D>>, cells: CellContributions) -> Result<()> {
        self.insert_scaled(trian, 1.0, cells)
    }

    fn insert_scaled(&mut self, trian: &Arc<Triangulation<D>>, s: f64, cells: CellContributions) -> Result<()> {
        if cells.len() != trian.num_cells() {
            return Err(Error::LengthMismatch {
                expected: trian.num_cells(),
                found: cells.len(),
            });
        }
        match self.terms.iter_mut().find(|(t, _)| t.id() == trian.id()) {
            Some((_, existing)) => {
                if first_grid(existing) != first_grid(&cells) {
                    return Err(Error::Shape("contributions of different form arity".into()));
                }
                let sum = lazy_map2(BlockAxpy(s), existing.clone(), cells)?;
                *existing = BoxedArray::new(sum);
            }
            None => {
                let cells = if s == 1.0 { cells } else { BoxedArray::new(lazy_map(BlockScale(s), cells)) };
                self.terms.push((trian.clone(), cells));
            }
        }
        Ok(())
    }

    /// `self + s other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        for (t, a) in &other.terms {
            out.insert_scaled(t, s, a.clone())?;
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    #[must_use]
    pub fn scale(&self, s: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(t, a)| (t.clone(), BoxedArray::new(lazy_map(BlockScale(s), a.clone()))))
                .collect(),
        }
    }

    /// Cell contributions on `trian`.
    #[must_use]
    pub fn get(&self, trian: &Triangulation<D>) -> Option<&CellContributions> {
        self.terms.iter().find(|(t, _)| t.id() == trian.id()).map(|(_, a)| a)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Arc<Triangulation<D>>, &CellContributions)> {
        self.terms.iter().map(|(t, a)| (t, a))
    }

    #[must_use]
    pub fn num_domains(&self) -> usize {
        self.terms.len()
    }

    /// Sum of every entry of every touched block over all cells; the value
    /// of the integral for scalar integrands.
    #[must_use]
    pub fn sum(&self) -> f64 {
        let mut total = 0.0;
        for (_, a) in &self.terms {
            let mut c = a.array_cache();
            for i in 0..a.len() {
                for (_, blk) in a.getindex(&mut c, i).iter_touched() {
                    total += blk.data().iter().sum::<f64>();
                }
            }
        }
        total
    }
}
