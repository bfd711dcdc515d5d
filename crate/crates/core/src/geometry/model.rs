use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::arrays::{CellArray, CompressedArray, JaggedTable};
use crate::error::{Error, Result};
use crate::fields::ValueKind;
use crate::reffe::{make_reference_fe, CellTopology, ReferenceFE};
use crate::tensors::{Point, TensorValue};

const NO_VERTEX: u32 = u32::MAX;

/// Sorted, padded vertex ids identifying a mesh entity.
pub(crate) type EntityKey = [u32; 4];

pub(crate) fn entity_key(vertices: impl Iterator<Item = usize>) -> EntityKey {
    let mut k = [NO_VERTEX; 4];
    for (slot, v) in k.iter_mut().zip(vertices) {
        *slot = v as u32;
    }
    k.sort_unstable();
    k
}

/// Numbering of the entities of one dimension.
#[derive(Clone, Debug)]
struct EntityLevel {
    /// Global entity ids per cell, in the local entity order of the cell
    /// topology.
    cell_entities: Arc<JaggedTable<usize>>,
    count: usize,
}

/// Nodes, cells, their sub-entities and named facet sets.
///
/// Geometry is first order: every node is a cell vertex. Entities of
/// intermediate dimension (edges, faces) are numbered by first appearance
/// when walking cells in order.
#[derive(Clone, Debug)]
pub struct DiscreteModel<const D: usize> {
    nodes: Arc<Vec<Point<D>>>,
    cells: Arc<JaggedTable<usize>>,
    cell_types: Arc<CompressedArray<CellTopology>>,
    levels: Vec<EntityLevel>,
    /// Adjacent `(cell, local facet)` pairs per facet.
    facet_cells: JaggedTable<(usize, u8)>,
    facet_keys: Vec<(EntityKey, usize)>,
    labels: Vec<(String, Vec<usize>)>,
    geometry_fes: Vec<Arc<ReferenceFE<D>>>,
}

fn number_entities<const D: usize>(
    cells: &JaggedTable<usize>,
    types: &CompressedArray<CellTopology>,
    d: usize,
) -> (EntityLevel, Vec<EntityKey>) {
    let locals: Vec<Vec<Vec<usize>>> = types.values().iter().map(|t| t.entities(d)).collect();
    let mut ptrs = Vec::with_capacity(cells.num_rows() + 1);
    ptrs.push(0);
    let mut keys: Vec<(EntityKey, u32)> = Vec::new();
    for (e, row) in cells.rows().enumerate() {
        let ti = types.index_map()[e] as usize;
        for verts in &locals[ti] {
            let pos = keys.len() as u32;
            keys.push((entity_key(verts.iter().map(|&v| row[v])), pos));
        }
        ptrs.push(keys.len());
    }
    keys.sort_unstable();
    // Group equal keys; order groups by first appearance.
    let mut groups: Vec<(u32, usize)> = Vec::new();
    let mut start = 0;
    while start < keys.len() {
        let mut end = start + 1;
        while end < keys.len() && keys[end].0 == keys[start].0 {
            end += 1;
        }
        groups.push((keys[start].1, start));
        start = end;
    }
    groups.sort_unstable();
    let mut ids = vec![0usize; keys.len()];
    let mut unique = Vec::with_capacity(groups.len());
    for (id, &(_, s)) in groups.iter().enumerate() {
        let key = keys[s].0;
        unique.push(key);
        let mut j = s;
        while j < keys.len() && keys[j].0 == key {
            ids[keys[j].1 as usize] = id;
            j += 1;
        }
    }
    let count = groups.len();
    let table = JaggedTable::from_parts(ids, ptrs).expect("offsets built in order");
    (
        EntityLevel {
            cell_entities: Arc::new(table),
            count,
        },
        unique,
    )
}

impl<const D: usize> DiscreteModel<D> {
    /// Builds a model from raw parts. `labels` maps tag names to facets given
    /// by their vertex ids (in any order).
    pub fn from_parts(
        nodes: Vec<Point<D>>,
        cells: JaggedTable<usize>,
        cell_types: CompressedArray<CellTopology>,
        labels: Vec<(String, Vec<Vec<usize>>)>,
    ) -> Result<Self> {
        if !(1..=3).contains(&D) {
            return Err(Error::Unsupported(format!("models of dimension {D}")));
        }
        if cells.num_rows() != cell_types.len() {
            return Err(Error::LengthMismatch {
                expected: cells.num_rows(),
                found: cell_types.len(),
            });
        }
        if let Some(t) = cell_types.values().iter().find(|t| t.dim() != D) {
            return Err(Error::InvalidMesh(format!("{t} cell in a {D}-dimensional model")));
        }
        for (e, row) in cells.rows().enumerate() {
            let t = *cell_types.getindex(&mut (), e);
            if row.len() != t.num_vertices() {
                return Err(Error::InvalidMesh(format!(
                    "cell {e} is {t} but lists {} nodes",
                    row.len()
                )));
            }
            if let Some(&v) = row.iter().find(|&&v| v >= nodes.len()) {
                return Err(Error::InvalidMesh(format!(
                    "cell {e} references node {v}, but there are {} nodes",
                    nodes.len()
                )));
            }
        }
        if nodes.len() >= NO_VERTEX as usize {
            return Err(Error::InvalidMesh("too many nodes".into()));
        }
        let cells = Arc::new(cells);
        let mut levels = vec![EntityLevel {
            cell_entities: cells.clone(),
            count: nodes.len(),
        }];
        let mut facet_unique = Vec::new();
        for d in 1..D {
            let (level, unique) = number_entities::<D>(&cells, &cell_types, d);
            levels.push(level);
            if d == D - 1 {
                facet_unique = unique;
            }
        }
        if D == 1 {
            facet_unique = (0..nodes.len()).map(|v| entity_key(core::iter::once(v))).collect();
        }
        let nfacets = levels[D - 1].count;
        let fe = &levels[D - 1].cell_entities;
        let mut counts = vec![0usize; nfacets + 1];
        for row in fe.rows() {
            for &f in row {
                counts[f + 1] += 1;
            }
        }
        for f in 0..nfacets {
            counts[f + 1] += counts[f];
        }
        let mut fill = counts.clone();
        let mut adj = vec![(0usize, 0u8); counts[nfacets]];
        for (e, row) in fe.rows().enumerate() {
            for (lf, &f) in row.iter().enumerate() {
                adj[fill[f]] = (e, lf as u8);
                fill[f] += 1;
            }
        }
        let facet_cells = JaggedTable::from_parts(adj, counts)?;
        if let Some(f) = (0..nfacets).find(|&f| facet_cells.row(f).len() > 2) {
            return Err(Error::InvalidMesh(format!(
                "facet {f} is shared by {} cells",
                facet_cells.row(f).len()
            )));
        }
        let mut facet_keys: Vec<(EntityKey, usize)> =
            facet_unique.into_iter().enumerate().map(|(i, k)| (k, i)).collect();
        facet_keys.sort_unstable();
        let geometry_fes = cell_types
            .values()
            .iter()
            .map(|&t| make_reference_fe::<D>(t, 1, ValueKind::Scalar).map(Arc::new))
            .collect::<Result<Vec<_>>>()?;
        let mut model = Self {
            nodes: Arc::new(nodes),
            cells,
            cell_types: Arc::new(cell_types),
            levels,
            facet_cells,
            facet_keys,
            labels: Vec::new(),
            geometry_fes,
        };
        for (tag, tuples) in labels {
            let mut facets = tuples
                .iter()
                .map(|t| {
                    model.find_facet(t).ok_or_else(|| {
                        Error::InvalidMesh(format!("label {tag:?}: vertices {t:?} are not a facet"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            facets.sort_unstable();
            facets.dedup();
            model.add_label(&tag, facets)?;
        }
        Ok(model)
    }

    /// Facet with exactly the given vertices.
    #[must_use]
    pub fn find_facet(&self, vertices: &[usize]) -> Option<usize> {
        if vertices.len() > 4 || vertices.iter().any(|&v| v >= self.nodes.len()) {
            return None;
        }
        let key = entity_key(vertices.iter().copied());
        self.facet_keys
            .binary_search_by(|(k, _)| k.cmp(&key))
            .ok()
            .map(|i| self.facet_keys[i].1)
    }

    /// Adds or replaces a tag covering the given facets.
    pub fn add_label(&mut self, tag: &str, mut facets: Vec<usize>) -> Result<()> {
        if let Some(&f) = facets.iter().find(|&&f| f >= self.num_facets()) {
            return Err(Error::IndexOutOfBounds {
                index: f,
                len: self.num_facets(),
            });
        }
        facets.sort_unstable();
        facets.dedup();
        match self.labels.iter_mut().find(|(t, _)| t == tag) {
            Some((_, fs)) => *fs = facets,
            None => self.labels.push((tag.to_string(), facets)),
        }
        Ok(())
    }

    #[must_use]
    pub fn nodes(&self) -> &Arc<Vec<Point<D>>> {
        &self.nodes
    }

    #[must_use]
    pub fn cells(&self) -> &Arc<JaggedTable<usize>> {
        &self.cells
    }

    #[must_use]
    pub fn cell_types(&self) -> &Arc<CompressedArray<CellTopology>> {
        &self.cell_types
    }

    #[must_use]
    pub fn num_cells(&self) -> usize {
        self.cells.num_rows()
    }

    #[must_use]
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    #[must_use]
    pub fn num_facets(&self) -> usize {
        self.levels[D - 1].count
    }

    /// Topology of cell `e`.
    #[inline]
    #[must_use]
    pub fn cell_type(&self, e: usize) -> CellTopology {
        self.cell_types.values()[self.cell_types.index_map()[e] as usize]
    }

    /// Index of the topology of cell `e` in `cell_types().values()`.
    #[inline]
    #[must_use]
    pub fn cell_type_index(&self, e: usize) -> usize {
        self.cell_types.index_map()[e] as usize
    }

    /// Number of entities of dimension `d`.
    #[must_use]
    pub fn num_entities(&self, d: usize) -> usize {
        if d == D {
            self.num_cells()
        } else {
            self.levels[d].count
        }
    }

    /// Global ids of the dimension-`d` entities of each cell (`d < D`).
    #[must_use]
    pub fn cell_entities(&self, d: usize) -> &Arc<JaggedTable<usize>> {
        &self.levels[d].cell_entities
    }

    /// Cells adjacent to facet `f` with the local facet index in each.
    #[must_use]
    pub fn facet_cells(&self, f: usize) -> &[(usize, u8)] {
        self.facet_cells.row(f)
    }

    /// Facets adjacent to exactly one cell.
    #[must_use]
    pub fn boundary_facets(&self) -> Vec<usize> {
        (0..self.num_facets())
            .filter(|&f| self.facet_cells.row(f).len() == 1)
            .collect()
    }

    #[must_use]
    pub fn labels(&self) -> &[(String, Vec<usize>)] {
        &self.labels
    }

    /// Facets carrying `tag`.
    pub fn tag_facets(&self, tag: &str) -> Result<&[usize]> {
        self.labels
            .iter()
            .find(|(t, _)| t == tag)
            .map(|(_, f)| f.as_slice())
            .ok_or_else(|| Error::UnknownTag(tag.to_string()))
    }

    /// Vertex ids of facet `f`, in the local order of an adjacent cell.
    #[must_use]
    pub fn facet_vertices(&self, f: usize) -> Vec<usize> {
        let (e, lf) = self.facet_cells.row(f)[0];
        let t = self.cell_type(e);
        let row = self.cells.row(e);
        t.facets()[lf as usize].iter().map(|&v| row[v]).collect()
    }

    /// First-order reference element describing the geometry of cells of
    /// type index `ti`.
    #[must_use]
    pub fn geometry_fe(&self, ti: usize) -> &Arc<ReferenceFE<D>> {
        &self.geometry_fes[ti]
    }

    /// Coordinates of the nodes of cell `e`.
    #[must_use]
    pub fn cell_coords(&self, e: usize) -> Vec<Point<D>> {
        self.cells.row(e).iter().map(|&n| self.nodes[n]).collect()
    }

    /// Physical images of reference points in cell `e`.
    #[must_use]
    pub fn map_points(&self, e: usize, xi: &[Point<D>]) -> Vec<Point<D>> {
        let fe = self.geometry_fe(self.cell_type_index(e));
        let coords = self.cell_coords(e);
        xi.iter()
            .map(|p| {
                let mut x = Point::zero();
                for (s, c) in fe.shapes().iter().zip(&coords) {
                    x = x + *c * s.evaluate(p).scalar();
                }
                x
            })
            .collect()
    }

    /// Rejects cells whose geometric map degenerates or folds: the Jacobian
    /// determinant must keep one sign, bounded away from zero, at every
    /// vertex.
    pub fn check_geometry(&self) -> Result<()> {
        let grads: Vec<Vec<Vec<Point<D>>>> = self
            .geometry_fes
            .iter()
            .map(|fe| {
                fe.nodes()
                    .iter()
                    .map(|x| fe.shapes().iter().map(|s| s.gradient().map(|g| g.evaluate(x).vector())).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        for e in 0..self.num_cells() {
            let row = self.cells.row(e);
            let g = &grads[self.cell_type_index(e)];
            let mut size = 0.0f64;
            for &n in row {
                size = size.max((self.nodes[n] - self.nodes[row[0]]).norm());
            }
            let tol = 1e-12 * libm::pow(size, D as f64);
            let mut sign = 0.0;
            for gv in g {
                let mut jt = TensorValue::<D, D>::zero();
                for (a, &n) in row.iter().enumerate() {
                    jt = jt + gv[a].outer(&self.nodes[n]);
                }
                let det = jt.det();
                if det.abs() <= tol || det * sign < 0.0 {
                    return Err(Error::InvalidMesh(format!(
                        "cell {e} has a degenerate or inverted geometry (det J = {det:e})"
                    )));
                }
                sign = det;
            }
        }
        Ok(())
    }
}
