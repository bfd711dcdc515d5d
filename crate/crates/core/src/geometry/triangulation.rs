use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use super::DiscreteModel;
use crate::error::{Error, Result};

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

/// Which part of a model a triangulation covers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TriangulationKind {
    Bulk,
    Boundary { tags: Vec<String> },
}

/// An integration domain: every cell of a model, or the facets carrying a
/// set of tags.
///
/// Entry `i` of a boundary triangulation is a facet; it is evaluated
/// through the adjacent cell `parent_cell(i)`, whose reference coordinates
/// contain the facet as local facet `local_facet(i)`.
#[derive(Debug)]
pub struct Triangulation<const D: usize> {
    id: u64,
    model: Arc<DiscreteModel<D>>,
    kind: TriangulationKind,
    facets: Vec<usize>,
    parents: Vec<usize>,
    local_facets: Vec<u8>,
}

impl<const D: usize> Triangulation<D> {
    /// All cells of `model`. Cheap: no per-cell storage.
    #[must_use]
    pub fn bulk(model: &Arc<DiscreteModel<D>>) -> Arc<Self> {
        Arc::new(Self {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            model: model.clone(),
            kind: TriangulationKind::Bulk,
            facets: Vec::new(),
            parents: Vec::new(),
            local_facets: Vec::new(),
        })
    }

    /// Facets carrying any of `tags`, each seen from its first adjacent cell.
    pub fn boundary(model: &Arc<DiscreteModel<D>>, tags: &[&str]) -> Result<Arc<Self>> {
        let mut facets = Vec::new();
        for t in tags {
            facets.extend_from_slice(model.tag_facets(t)?);
        }
        facets.sort_unstable();
        facets.dedup();
        let mut parents = Vec::with_capacity(facets.len());
        let mut local_facets = Vec::with_capacity(facets.len());
        for &f in &facets {
            let adj = model.facet_cells(f);
            if adj.len() != 1 {
                return Err(Error::InvalidMesh(alloc::format!(
                    "tagged facet {f} is interior (shared by {} cells)",
                    adj.len()
                )));
            }
            parents.push(adj[0].0);
            local_facets.push(adj[0].1);
        }
        Ok(Arc::new(Self {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            model: model.clone(),
            kind: TriangulationKind::Boundary {
                tags: tags.iter().map(|t| t.to_string()).collect(),
            },
            facets,
            parents,
            local_facets,
        }))
    }

    /// Identity used to key integration contributions.
    #[must_use]
    pub fn id(&self) -> u64 {
        self.id
    }

    #[must_use]
    pub fn model(&self) -> &Arc<DiscreteModel<D>> {
        &self.model
    }

    #[must_use]
    pub fn kind(&self) -> &TriangulationKind {
        &self.kind
    }

    #[must_use]
    pub fn is_boundary(&self) -> bool {
        matches!(self.kind, TriangulationKind::Boundary { .. })
    }

    /// Number of entries: cells, or facets for a boundary.
    #[must_use]
    pub fn num_cells(&self) -> usize {
        match self.kind {
            TriangulationKind::Bulk => self.model.num_cells(),
            TriangulationKind::Boundary { .. } => self.facets.len(),
        }
    }

    /// Model cell carrying entry `i`.
    #[inline]
    #[must_use]
    pub fn parent_cell(&self, i: usize) -> usize {
        match self.kind {
            TriangulationKind::Bulk => i,
            TriangulationKind::Boundary { .. } => self.parents[i],
        }
    }

    /// Local facet index of entry `i` in its parent cell, `None` for bulk.
    #[inline]
    #[must_use]
    pub fn local_facet(&self, i: usize) -> Option<usize> {
        match self.kind {
            TriangulationKind::Bulk => None,
            TriangulationKind::Boundary { .. } => Some(self.local_facets[i] as usize),
        }
    }

    /// Model facet ids of a boundary triangulation.
    #[must_use]
    pub fn facets(&self) -> &[usize] {
        &self.facets
    }

    /// Parent cells of a boundary triangulation.
    #[must_use]
    pub fn parent_cells(&self) -> &[usize] {
        &self.parents
    }

    /// Whether `other` is this triangulation or lies in it: any
    /// triangulation of the same model when this one is a bulk
    /// triangulation.
    #[must_use]
    pub fn contains(&self, other: &Self) -> bool {
        self.id == other.id || (self.kind == TriangulationKind::Bulk && Arc::ptr_eq(&self.model, &other.model))
    }

    /// Number of reference point sets needed by this triangulation: one per
    /// cell type, times the number of local facets for boundaries.
    #[must_use]
    pub fn num_point_sets(&self) -> usize {
        self.model.cell_types().values().len() * self.facet_stride()
    }

    fn facet_stride(&self) -> usize {
        if self.is_boundary() {
            self.model
                .cell_types()
                .values()
                .iter()
                .map(|t| t.num_facets())
                .max()
                .unwrap_or(1)
        } else {
            1
        }
    }

    /// Point-set key of entry `i`: `(cell type index, local facet)`
    /// flattened.
    #[inline]
    #[must_use]
    pub fn point_set(&self, i: usize) -> usize {
        let ti = self.model.cell_type_index(self.parent_cell(i));
        match self.kind {
            TriangulationKind::Bulk => ti,
            TriangulationKind::Boundary { .. } => ti * self.facet_stride() + self.local_facets[i] as usize,
        }
    }

    /// Inverse of [`Triangulation::point_set`].
    #[must_use]
    pub fn point_set_parts(&self, key: usize) -> (usize, Option<usize>) {
        match self.kind {
            TriangulationKind::Bulk => (key, None),
            TriangulationKind::Boundary { .. } => {
                let s = self.facet_stride();
                (key / s, Some(key % s))
            }
        }
    }
}

/// The common triangulation on which two cell quantities can be combined:
/// the same one, bulk triangulations of the same model, or the boundary
/// when the other is a bulk triangulation of its model.
pub fn common_triangulation<const D: usize>(
    a: &Arc<Triangulation<D>>,
    b: &Arc<Triangulation<D>>,
) -> Result<Arc<Triangulation<D>>> {
    if a.id == b.id || a.contains(b) {
        Ok(b.clone())
    } else if b.contains(a) {
        Ok(a.clone())
    } else {
        Err(Error::IncompatibleTriangulations)
    }
}
