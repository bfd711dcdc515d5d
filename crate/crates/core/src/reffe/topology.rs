use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Reference cell shapes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CellTopology {
    Seg,
    Tri,
    Quad,
    Tet,
    Hex,
}

use CellTopology::{Hex, Quad, Seg, Tet, Tri};

const SEG_V: [[f64; 3]; 2] = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]];
const TRI_V: [[f64; 3]; 3] = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
const QUAD_V: [[f64; 3]; 4] = [
    [0.0, 0.0, 0.0],
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [1.0, 1.0, 0.0],
];
const TET_V: [[f64; 3]; 4] = [
    [0.0, 0.0, 0.0],
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
];
const HEX_V: [[f64; 3]; 8] = [
    [0.0, 0.0, 0.0],
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [1.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
    [1.0, 0.0, 1.0],
    [0.0, 1.0, 1.0],
    [1.0, 1.0, 1.0],
];

const TRI_EDGES: &[&[usize]] = &[&[0, 1], &[0, 2], &[1, 2]];
const QUAD_EDGES: &[&[usize]] = &[&[0, 1], &[2, 3], &[0, 2], &[1, 3]];
const TET_EDGES: &[&[usize]] = &[&[0, 1], &[0, 2], &[0, 3], &[1, 2], &[1, 3], &[2, 3]];
const TET_FACES: &[&[usize]] = &[&[0, 1, 2], &[0, 1, 3], &[0, 2, 3], &[1, 2, 3]];
const HEX_EDGES: &[&[usize]] = &[
    &[0, 1],
    &[2, 3],
    &[4, 5],
    &[6, 7],
    &[0, 2],
    &[1, 3],
    &[4, 6],
    &[5, 7],
    &[0, 4],
    &[1, 5],
    &[2, 6],
    &[3, 7],
];
const HEX_FACES: &[&[usize]] = &[
    &[0, 1, 2, 3],
    &[4, 5, 6, 7],
    &[0, 1, 4, 5],
    &[2, 3, 6, 7],
    &[0, 2, 4, 6],
    &[1, 3, 5, 7],
];

impl CellTopology {
    pub const ALL: [CellTopology; 5] = [Seg, Tri, Quad, Tet, Hex];

    #[must_use]
    pub const fn dim(self) -> usize {
        match self {
            Seg => 1,
            Tri | Quad => 2,
            Tet | Hex => 3,
        }
    }

    #[must_use]
    pub const fn is_simplex(self) -> bool {
        matches!(self, Seg | Tri | Tet)
    }

    #[must_use]
    pub const fn num_vertices(self) -> usize {
        match self {
            Seg => 2,
            Tri => 3,
            Quad | Tet => 4,
            Hex => 8,
        }
    }

    /// Coordinates of the reference vertices, padded to three components.
    #[must_use]
    pub fn vertex_coords(self) -> &'static [[f64; 3]] {
        match self {
            Seg => &SEG_V,
            Tri => &TRI_V,
            Quad => &QUAD_V,
            Tet => &TET_V,
            Hex => &HEX_V,
        }
    }

    /// Local vertex tuples of the sub-entities of dimension `d`.
    ///
    /// `d = 0` lists single vertices and `d = dim` the cell itself. The vertex
    /// order of each entity matches the vertex order of its own topology.
    #[must_use]
    pub fn entities(self, d: usize) -> Vec<Vec<usize>> {
        let to_vec = |s: &[&[usize]]| s.iter().map(|e| e.to_vec()).collect();
        if d == 0 {
            return (0..self.num_vertices()).map(|v| vec![v]).collect();
        }
        if d == self.dim() {
            return vec![(0..self.num_vertices()).collect()];
        }
        match (self, d) {
            (Tri, 1) => to_vec(TRI_EDGES),
            (Quad, 1) => to_vec(QUAD_EDGES),
            (Tet, 1) => to_vec(TET_EDGES),
            (Tet, 2) => to_vec(TET_FACES),
            (Hex, 1) => to_vec(HEX_EDGES),
            (Hex, 2) => to_vec(HEX_FACES),
            _ => Vec::new(),
        }
    }

    /// Number of sub-entities of dimension `d`.
    #[must_use]
    pub fn num_entities(self, d: usize) -> usize {
        match (self, d) {
            (_, 0) => self.num_vertices(),
            (t, d) if d == t.dim() => 1,
            (Tri, 1) => 3,
            (Quad, 1) => 4,
            (Tet, 1) => 6,
            (Tet, 2) => 4,
            (Hex, 1) => 12,
            (Hex, 2) => 6,
            _ => 0,
        }
    }

    /// Local vertex tuples of the facets.
    #[must_use]
    pub fn facets(self) -> Vec<Vec<usize>> {
        self.entities(self.dim() - 1)
    }

    #[must_use]
    pub fn num_facets(self) -> usize {
        self.num_entities(self.dim() - 1)
    }

    /// Topology of an entity of dimension `d`, `None` for vertices.
    #[must_use]
    pub fn entity_topology(self, d: usize) -> Option<CellTopology> {
        match d {
            0 => None,
            1 => Some(Seg),
            2 => Some(if self.is_simplex() { Tri } else { Quad }),
            _ => Some(self),
        }
    }

    #[must_use]
    pub fn facet_topology(self) -> Option<CellTopology> {
        self.entity_topology(self.dim() - 1)
    }

    /// Measure of the reference cell.
    #[must_use]
    pub fn measure(self) -> f64 {
        match self {
            Seg | Quad | Hex => 1.0,
            Tri => 0.5,
            Tet => 1.0 / 6.0,
        }
    }

    #[must_use]
    pub fn name(self) -> &'static str {
        match self {
            Seg => "SEG",
            Tri => "TRI",
            Quad => "QUAD",
            Tet => "TET",
            Hex => "HEX",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Unsupported(alloc::format!("cell type {name:?}")))
    }

    /// Edge vectors spanning an entity from its first vertex: `v_{k+1} − v_0`
    /// for simplices and `v_{2^k} − v_0` for n-cubes.
    #[must_use]
    pub(crate) fn spanning_vertices(self, entity: &[usize]) -> Vec<(usize, usize)> {
        let d = match entity.len() {
            1 => 0,
            2 => 1,
            n if self.is_simplex() => n - 1,
            4 => 2,
            _ => 3,
        };
        (0..d)
            .map(|k| {
                let j = if self.is_simplex() { k + 1 } else { 1 << k };
                (entity[0], entity[j])
            })
            .collect()
    }
}

impl fmt::Display for CellTopology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
