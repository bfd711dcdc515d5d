//! Conforming Lagrangian FE spaces, FE functions and multi-field spaces.
//!
//! Global DOFs are numbered entity by entity: vertices, then edges, faces
//! and cell interiors, each in entity-id order. Nodes interior to an entity
//! are numbered in the local order of the first cell containing it and
//! matched by coordinates in the other cells. Components of a node are
//! numbered consecutively.
//!
//! Cell DOF tables hold signed ids: `k ≥ 0` is free DOF `k` and `-(k + 1)`
//! is Dirichlet DOF `k`.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::arrays::JaggedTable;
use crate::cell_data::{BasisRole, CellFes, CellField};
use crate::error::{Error, Result};
use crate::fields::{FieldRef, Value, ValueKind};
use crate::geometry::{DiscreteModel, Triangulation};
use crate::reffe::{make_reference_fe, ReferenceFE};
use crate::tensors::Point;

/// A boundary tag whose DOFs are constrained, optionally only for some
/// components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirichletTag {
    pub tag: String,
    /// Constrained components; `None` constrains all of them.
    pub mask: Option<Vec<bool>>,
}

impl DirichletTag {
    #[must_use]
    pub fn all(tag: &str) -> Self {
        Self {
            tag: tag.to_string(),
            mask: None,
        }
    }

    #[must_use]
    pub fn masked(tag: &str, mask: &[bool]) -> Self {
        Self {
            tag: tag.to_string(),
            mask: Some(mask.to_vec()),
        }
    }
}

const NO_TAG: u16 = u16::MAX;

/// A global conforming FE space.
#[derive(Clone)]
pub struct FESpace<const D: usize> {
    model: Arc<DiscreteModel<D>>,
    trian: Arc<Triangulation<D>>,
    fes: CellFes<D>,
    cell_dofs: Arc<JaggedTable<i64>>,
    dirichlet_values: Arc<Vec<f64>>,
    tags: Vec<DirichletTag>,
    free_nodes: Vec<(Point<D>, u8)>,
    dir_nodes: Vec<(Point<D>, u8)>,
    dir_tag: Vec<u16>,
}

impl<const D: usize> core::fmt::Debug for FESpace<D> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("FESpace")
            .field("free", &self.num_free_dofs())
            .field("dirichlet", &self.num_dirichlet_dofs())
            .field("tags", &self.tags)
            .finish()
    }
}

/// Lagrangian space of order `order` on every cell of `model`, with the
/// DOFs on `dirichlet` tags constrained (to zero until a trial space sets
/// values).
pub fn make_fespace<const D: usize>(
    model: &Arc<DiscreteModel<D>>,
    order: usize,
    kind: ValueKind,
    dirichlet: &[DirichletTag],
) -> Result<FESpace<D>> {
    let fes = model
        .cell_types()
        .values()
        .iter()
        .map(|&t| make_reference_fe::<D>(t, order, kind).map(Arc::new))
        .collect::<Result<Vec<_>>>()?;
    FESpace::with_elements(model, Arc::new(fes), dirichlet)
}

impl<const D: usize> FESpace<D> {
    /// Space with the given element per cell type.
    pub fn with_elements(model: &Arc<DiscreteModel<D>>, fes: CellFes<D>, dirichlet: &[DirichletTag]) -> Result<Self> {
        let types = model.cell_types().values();
        if fes.len() != types.len() || fes.iter().zip(types).any(|(fe, t)| fe.topology() != *t) {
            return Err(Error::InvalidArgument("one element per cell type is required".into()));
        }
        let ncomp = fes[0].num_components();
        if fes.iter().any(|fe| fe.num_components() != ncomp) {
            return Err(Error::InvalidArgument("elements differ in value kind".into()));
        }
        if dirichlet.len() >= NO_TAG as usize {
            return Err(Error::InvalidArgument("too many Dirichlet tags".into()));
        }
        for d in dirichlet {
            model.tag_facets(&d.tag)?;
            if let Some(m) = &d.mask {
                if m.len() != ncomp {
                    return Err(Error::InvalidArgument(alloc::format!(
                        "mask of tag {:?} has {} entries for {ncomp} components",
                        d.tag,
                        m.len()
                    )));
                }
            }
        }
        let b = Builder::new(model, &fes, dirichlet)?;
        Ok(Self {
            model: model.clone(),
            trian: Triangulation::bulk(model),
            fes,
            cell_dofs: Arc::new(b.cell_dofs),
            dirichlet_values: Arc::new(vec![0.0; b.dir_nodes.len()]),
            tags: dirichlet.to_vec(),
            free_nodes: b.free_nodes,
            dir_nodes: b.dir_nodes,
            dir_tag: b.dir_tag,
        })
    }

    #[must_use]
    pub fn model(&self) -> &Arc<DiscreteModel<D>> {
        &self.model
    }

    /// Bulk triangulation on which bases and functions of this space live.
    #[must_use]
    pub fn triangulation(&self) -> &Arc<Triangulation<D>> {
        &self.trian
    }

    #[must_use]
    pub fn elements(&self) -> &CellFes<D> {
        &self.fes
    }

    #[must_use]
    pub fn cell_dofs(&self) -> &Arc<JaggedTable<i64>> {
        &self.cell_dofs
    }

    #[must_use]
    pub fn num_free_dofs(&self) -> usize {
        self.free_nodes.len()
    }

    #[must_use]
    pub fn num_dirichlet_dofs(&self) -> usize {
        self.dir_nodes.len()
    }

    #[must_use]
    pub fn dirichlet_values(&self) -> &Arc<Vec<f64>> {
        &self.dirichlet_values
    }

    #[must_use]
    pub fn dirichlet_tags(&self) -> &[DirichletTag] {
        &self.tags
    }

    #[must_use]
    pub fn num_components(&self) -> usize {
        self.fes[0].num_components()
    }

    #[must_use]
    pub fn value_kind(&self) -> ValueKind {
        self.fes[0].value_kind()
    }

    /// Physical node and component of free DOF `k`.
    #[must_use]
    pub fn free_dof_node(&self, k: usize) -> (Point<D>, usize) {
        let (x, c) = self.free_nodes[k];
        (x, c as usize)
    }

    /// Physical node and component of Dirichlet DOF `k`.
    #[must_use]
    pub fn dirichlet_dof_node(&self, k: usize) -> (Point<D>, usize) {
        let (x, c) = self.dir_nodes[k];
        (x, c as usize)
    }

    /// Basis of test or trial functions.
    #[must_use]
    pub fn basis(&self, role: BasisRole) -> CellField<D> {
        CellField::basis(&self.trian, self.fes.clone(), role, 0, 1).expect("elements checked at construction")
    }
}

fn nodal<const D: usize>(g: &FieldRef<D>, x: &Point<D>, c: usize) -> f64 {
    let v = g.evaluate(x);
    match v {
        Value::Scalar(s) => s,
        _ => v.component(c),
    }
}

/// Same numbering as `test`, with Dirichlet values obtained by evaluating
/// `g` at the constrained nodes. `g` holds one function for all tags or one
/// per tag; a DOF on several tags takes the function of the first.
pub fn trial_space<const D: usize>(test: &FESpace<D>, g: &[FieldRef<D>]) -> Result<FESpace<D>> {
    if g.len() != 1 && g.len() != test.tags.len() {
        return Err(Error::LengthMismatch {
            expected: test.tags.len(),
            found: g.len(),
        });
    }
    let want = test.value_kind();
    if let Some(f) = g.iter().find(|f| f.kind() != want) {
        return Err(Error::Shape(alloc::format!(
            "Dirichlet function of kind {:?} for a {want:?} space",
            f.kind()
        )));
    }
    let values = test
        .dir_nodes
        .iter()
        .zip(&test.dir_tag)
        .map(|((x, c), &t)| {
            let f = if g.len() == 1 { &g[0] } else { &g[t as usize] };
            nodal(f, x, *c as usize)
        })
        .collect();
    let mut s = test.clone();
    s.dirichlet_values = Arc::new(values);
    Ok(s)
}

/// Test or trial basis of `space`.
#[must_use]
pub fn fe_basis<const D: usize>(space: &FESpace<D>, role: BasisRole) -> CellField<D> {
    space.basis(role)
}

/// A function of an FE space given by its free DOF values and the
/// Dirichlet values.
#[derive(Clone, Debug)]
pub struct FEFunction<const D: usize> {
    space: Arc<FESpace<D>>,
    free: Arc<Vec<f64>>,
    dirichlet: Arc<Vec<f64>>,
    field: CellField<D>,
}

impl<const D: usize> FEFunction<D> {
    fn build(space: &Arc<FESpace<D>>, free: Arc<Vec<f64>>, dirichlet: Arc<Vec<f64>>) -> Result<Self> {
        let field = CellField::fe_values(
            &space.trian,
            space.fes.clone(),
            space.cell_dofs.clone(),
            free.clone(),
            dirichlet.clone(),
        )?;
        Ok(Self {
            space: space.clone(),
            free,
            dirichlet,
            field,
        })
    }

    #[must_use]
    pub fn space(&self) -> &Arc<FESpace<D>> {
        &self.space
    }

    #[must_use]
    pub fn free_values(&self) -> &[f64] {
        &self.free
    }

    #[must_use]
    pub fn dirichlet_values(&self) -> &[f64] {
        &self.dirichlet
    }

    /// The function as a cell field on the space's triangulation.
    #[must_use]
    pub fn cell_field(&self) -> &CellField<D> {
        &self.field
    }

    /// Local DOF values of cell `e`.
    #[must_use]
    pub fn cell_values(&self, e: usize) -> Vec<f64> {
        self.space
            .cell_dofs
            .row(e)
            .iter()
            .map(|&g| if g >= 0 { self.free[g as usize] } else { self.dirichlet[(-g - 1) as usize] })
            .collect()
    }
}

/// FE function with the given free values and the space's Dirichlet values.
pub fn fe_function<const D: usize>(space: &Arc<FESpace<D>>, free: Vec<f64>) -> Result<FEFunction<D>> {
    if free.len() != space.num_free_dofs() {
        return Err(Error::LengthMismatch {
            expected: space.num_free_dofs(),
            found: free.len(),
        });
    }
    FEFunction::build(space, Arc::new(free), space.dirichlet_values.clone())
}

/// Nodal interpolant of `g`, including the Dirichlet slots.
pub fn interpolate<const D: usize>(g: &FieldRef<D>, space: &Arc<FESpace<D>>) -> Result<FEFunction<D>> {
    if g.kind() != space.value_kind() {
        return Err(Error::Shape(alloc::format!(
            "cannot interpolate a {:?} field into a {:?} space",
            g.kind(),
            space.value_kind()
        )));
    }
    let free = space.free_nodes.iter().map(|(x, c)| nodal(g, x, *c as usize)).collect();
    let dir = space.dir_nodes.iter().map(|(x, c)| nodal(g, x, *c as usize)).collect();
    FEFunction::build(space, Arc::new(free), Arc::new(dir))
}

/// Cartesian product of single-field spaces with field-major global
/// numbering.
#[derive(Clone, Debug)]
pub struct MultiFieldFESpace<const D: usize> {
    spaces: Vec<Arc<FESpace<D>>>,
    offsets: Vec<usize>,
}

pub fn multi_field<const D: usize>(spaces: Vec<Arc<FESpace<D>>>) -> Result<MultiFieldFESpace<D>> {
    if spaces.is_empty() || spaces.len() > u8::MAX as usize {
        return Err(Error::InvalidArgument(alloc::format!("{} fields", spaces.len())));
    }
    if spaces.iter().any(|s| !Arc::ptr_eq(&s.model, &spaces[0].model)) {
        return Err(Error::InvalidArgument("fields defined on different models".into()));
    }
    let mut offsets = Vec::with_capacity(spaces.len() + 1);
    let mut o = 0;
    for s in &spaces {
        offsets.push(o);
        o += s.num_free_dofs();
    }
    offsets.push(o);
    Ok(MultiFieldFESpace { spaces, offsets })
}

impl<const D: usize> MultiFieldFESpace<D> {
    #[must_use]
    pub fn spaces(&self) -> &[Arc<FESpace<D>>] {
        &self.spaces
    }

    #[must_use]
    pub fn num_fields(&self) -> usize {
        self.spaces.len()
    }

    /// Start of each field's free DOFs, followed by the total.
    #[must_use]
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    #[must_use]
    pub fn num_free_dofs(&self) -> usize {
        self.offsets[self.spaces.len()]
    }

    #[must_use]
    pub fn triangulation(&self) -> &Arc<Triangulation<D>> {
        self.spaces[0].triangulation()
    }
}

/// Per-field bases; field `i` lands in block `i` of integrated forms.
pub fn mf_basis<const D: usize>(mf: &MultiFieldFESpace<D>, role: BasisRole) -> Result<Vec<CellField<D>>> {
    let n = mf.spaces.len();
    let trian = mf.triangulation();
    mf.spaces
        .iter()
        .enumerate()
        .map(|(i, s)| CellField::basis(trian, s.fes.clone(), role, i, n))
        .collect()
}

/// Splits a global free vector into per-field FE functions.
pub fn mf_function<const D: usize>(mf: &MultiFieldFESpace<D>, free: &[f64]) -> Result<Vec<FEFunction<D>>> {
    if free.len() != mf.num_free_dofs() {
        return Err(Error::LengthMismatch {
            expected: mf.num_free_dofs(),
            found: free.len(),
        });
    }
    mf.spaces
        .iter()
        .enumerate()
        .map(|(i, s)| fe_function(s, free[mf.offsets[i]..mf.offsets[i + 1]].to_vec()))
        .collect()
}

struct Builder<const D: usize> {
    cell_dofs: JaggedTable<i64>,
    free_nodes: Vec<(Point<D>, u8)>,
    dir_nodes: Vec<(Point<D>, u8)>,
    dir_tag: Vec<u16>,
}

impl<const D: usize> Builder<D> {
    fn new(model: &DiscreteModel<D>, fes: &[Arc<ReferenceFE<D>>], dirichlet: &[DirichletTag]) -> Result<Self> {
        let ncomp = fes[0].num_components();
        let ncells = model.num_cells();
        let entities = |d: usize, e: usize| -> &[usize] {
            if d == D {
                core::slice::from_ref(&0)
            } else {
                model.cell_entities(d).row(e)
            }
        };
        let global = |d: usize, e: usize, le: usize| if d == D { e } else { entities(d, e)[le] };

        // Geometry shape values at the element nodes, per cell type.
        let geo: Vec<(usize, Vec<f64>)> = fes
            .iter()
            .enumerate()
            .map(|(ti, fe)| {
                let g = model.geometry_fe(ti);
                let (vals, _) = g.tabulate(fe.nodes());
                (g.num_dofs(), vals.iter().map(Value::scalar).collect())
            })
            .collect();
        let node_x = |e: usize, n: usize| -> Point<D> {
            let (nv, tab) = &geo[model.cell_type_index(e)];
            let mut x = Point::zero();
            for (a, &v) in model.cells().row(e).iter().enumerate() {
                x += model.nodes()[v] * tab[n * nv + a];
            }
            x
        };

        // Smallest constraining tag per entity and component.
        let mut marks: Vec<Vec<[u16; 3]>> = (0..D).map(|d| vec![[NO_TAG; 3]; model.num_entities(d)]).collect();
        for (ti, dt) in dirichlet.iter().enumerate() {
            for &f in model.tag_facets(&dt.tag)? {
                let (cell, lf) = model.facet_cells(f)[0];
                let t = model.cell_type(cell);
                let fverts = &t.facets()[lf as usize];
                for (d, mark) in marks.iter_mut().enumerate() {
                    for (le, verts) in t.entities(d).iter().enumerate() {
                        if !verts.iter().all(|v| fverts.contains(v)) {
                            continue;
                        }
                        let g = entities(d, cell)[le];
                        for c in 0..ncomp {
                            if dt.mask.as_ref().is_none_or(|m| m[c]) {
                                mark[g][c] = mark[g][c].min(ti as u16);
                            }
                        }
                    }
                }
            }
        }

        // First cell containing each entity.
        let mut owner: Vec<Vec<(u32, u8)>> = (0..D).map(|d| vec![(u32::MAX, 0); model.num_entities(d)]).collect();
        for e in 0..ncells {
            for (d, own) in owner.iter_mut().enumerate() {
                for (le, &g) in entities(d, e).iter().enumerate() {
                    if own[g].0 == u32::MAX {
                        own[g] = (e as u32, le as u8);
                    }
                }
            }
        }

        let mut free_nodes = Vec::new();
        let mut dir_nodes = Vec::new();
        let mut dir_tag = Vec::new();
        let mut entity_ptr: Vec<Vec<usize>> = Vec::with_capacity(D + 1);
        let mut entity_ids: Vec<Vec<i64>> = Vec::with_capacity(D + 1);
        for d in 0..=D {
            let n = model.num_entities(d);
            let mut ptr = Vec::with_capacity(n + 1);
            let mut ids = Vec::new();
            ptr.push(0);
            for g in 0..n {
                let (e, le) = if d == D { (g, 0) } else { (owner[d][g].0 as usize, owner[d][g].1 as usize) };
                if e == u32::MAX as usize {
                    ptr.push(ids.len());
                    continue;
                }
                let fe = &fes[model.cell_type_index(e)];
                for &node in fe.entity_nodes(d, le) {
                    let x = node_x(e, node);
                    for c in 0..ncomp {
                        let tag = if d < D { marks[d][g][c] } else { NO_TAG };
                        if tag == NO_TAG {
                            ids.push(free_nodes.len() as i64);
                            free_nodes.push((x, c as u8));
                        } else {
                            ids.push(-(dir_nodes.len() as i64) - 1);
                            dir_nodes.push((x, c as u8));
                            dir_tag.push(tag);
                        }
                    }
                }
                ptr.push(ids.len());
            }
            entity_ptr.push(ptr);
            entity_ids.push(ids);
        }

        let coord_of = |id: i64| if id >= 0 { free_nodes[id as usize].0 } else { dir_nodes[(-id - 1) as usize].0 };
        let mut data = Vec::new();
        let mut ptrs = Vec::with_capacity(ncells + 1);
        ptrs.push(0);
        for e in 0..ncells {
            let fe = &fes[model.cell_type_index(e)];
            let t = fe.topology();
            let base = data.len();
            data.resize(base + fe.num_dofs(), 0);
            for d in 0..=D {
                let nle = if d == D { 1 } else { t.num_entities(d) };
                for le in 0..nle {
                    let g = global(d, e, le);
                    let ids = &entity_ids[d][entity_ptr[d][g]..entity_ptr[d][g + 1]];
                    let local = fe.entity_nodes(d, le);
                    let owned = d == D || owner[d][g] == (e as u32, le as u8);
                    for (k, &n) in local.iter().enumerate() {
                        let slot = if owned || local.len() == 1 {
                            k
                        } else {
                            let x = node_x(e, n);
                            let tol = 1e-10 * (1.0 + x.norm());
                            (0..local.len())
                                .find(|&j| (coord_of(ids[j * ncomp]) - x).norm() <= tol)
                                .ok_or_else(|| Error::InvalidMesh(alloc::format!("nonconforming nodes in cell {e}")))?
                        };
                        for c in 0..ncomp {
                            data[base + fe.dof(c, n)] = ids[slot * ncomp + c];
                        }
                    }
                }
            }
            ptrs.push(data.len());
        }
        Ok(Self {
            cell_dofs: JaggedTable::from_parts(data, ptrs)?,
            free_nodes,
            dir_nodes,
            dir_tag,
        })
    }
}
