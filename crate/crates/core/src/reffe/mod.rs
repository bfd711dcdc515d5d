//! Reference cells, Lagrangian reference elements and quadrature.

mod lagrangian;
mod monomials;
mod quadrature;
mod topology;

use alloc::format;
use alloc::vec::Vec;

pub use lagrangian::{change_of_basis, LagrangianDofBasis};
pub use monomials::{monomial_basis, MonomialBasis, PolyFilter};
pub use quadrature::{
    facet_frame, facet_quadrature, gauss_legendre, make_quadrature, reference_normal, QuadratureRule,
    MAX_CUBE_DEGREE, MAX_SIMPLEX_DEGREE,
};
pub use topology::CellTopology;

use crate::error::{Error, Result};
use crate::fields::{FieldRef, Value, ValueKind};
use crate::tensors::Point;

/// Highest supported Lagrangian order.
pub const MAX_ORDER: usize = 4;

/// A Lagrangian reference element.
///
/// Nodes are ordered vertices first, then edge, face and cell interiors.
/// For vector elements, local DOF `c * num_nodes + n` is component `c` at
/// node `n`.
#[derive(Clone)]
pub struct ReferenceFE<const D: usize> {
    topology: CellTopology,
    order: usize,
    ncomp: usize,
    shapes: Vec<FieldRef<D>>,
    expansion: Expansion<D>,
    dofs: LagrangianDofBasis<D>,
    /// `entity_nodes[d][e]`: local nodes interior to entity `e` of dimension `d`.
    entity_nodes: Vec<Vec<Vec<usize>>>,
}

/// Shape functions as sparse columns over a monomial basis, so that
/// tabulation evaluates each monomial once per point.
#[derive(Clone)]
struct Expansion<const D: usize> {
    monomials: Vec<FieldRef<D>>,
    gradients: Vec<FieldRef<D>>,
    /// Nonzero `(monomial, coefficient)` pairs of each shape function.
    columns: Vec<Vec<(usize, f64)>>,
}

impl<const D: usize> Expansion<D> {
    fn new(monomials: Vec<FieldRef<D>>, inv: &[f64]) -> Result<Self> {
        let n = monomials.len();
        let gradients = monomials.iter().map(|m| m.gradient()).collect::<Result<Vec<_>>>()?;
        let columns = (0..n)
            .map(|j| (0..n).map(|i| (i, inv[i * n + j])).filter(|&(_, c)| c != 0.0).collect())
            .collect();
        Ok(Self { monomials, gradients, columns })
    }
}

impl<const D: usize> core::fmt::Debug for ReferenceFE<D> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ReferenceFE")
            .field("topology", &self.topology)
            .field("order", &self.order)
            .field("ncomp", &self.ncomp)
            .finish_non_exhaustive()
    }
}

/// Equispaced lattice nodes interior to an entity, given its vertices.
fn interior_lattice(topology: CellTopology, verts: &[usize], order: usize) -> Vec<[f64; 3]> {
    let vc = topology.vertex_coords();
    let span = topology.spanning_vertices(verts);
    let d = span.len();
    let k = order;
    let mut out = Vec::new();
    if d == 0 {
        out.push(vc[verts[0]]);
        return out;
    }
    let mut idx = alloc::vec![1usize; d];
    if k < 2 {
        return out;
    }
    loop {
        let inside = if topology.is_simplex() {
            idx.iter().sum::<usize>() < k
        } else {
            true
        };
        if inside {
            let mut x = vc[verts[0]];
            for (t, &(a, b)) in span.iter().enumerate() {
                for c in 0..3 {
                    x[c] += (vc[b][c] - vc[a][c]) * idx[t] as f64 / k as f64;
                }
            }
            out.push(x);
        }
        let mut t = 0;
        loop {
            if t == d {
                return out;
            }
            idx[t] += 1;
            if idx[t] < k {
                break;
            }
            idx[t] = 1;
            t += 1;
        }
    }
}

/// The polynomial filter matching a topology.
#[must_use]
pub fn filter_for(topology: CellTopology) -> PolyFilter {
    if topology.is_simplex() {
        PolyFilter::P
    } else {
        PolyFilter::Q
    }
}

/// Lagrangian reference element of the given order on equispaced nodes.
///
/// `kind` is [`ValueKind::Scalar`] or [`ValueKind::Vector`]; vector elements
/// replicate the scalar nodes for each of the `D` components.
pub fn make_reference_fe<const D: usize>(
    topology: CellTopology,
    order: usize,
    kind: ValueKind,
) -> Result<ReferenceFE<D>> {
    if topology.dim() != D {
        return Err(Error::Shape(format!("{topology} element in dimension {D}")));
    }
    if !(1..=MAX_ORDER).contains(&order) {
        return Err(Error::Unsupported(format!("Lagrangian order {order}")));
    }
    let ncomp = match kind {
        ValueKind::Scalar => 1,
        ValueKind::Vector => D,
        ValueKind::Tensor => return Err(Error::Unsupported("tensor-valued elements".into())),
    };
    let mut nodes = Vec::new();
    let mut entity_nodes = Vec::with_capacity(D + 1);
    for d in 0..=D {
        let mut per_entity = Vec::new();
        for verts in topology.entities(d) {
            let pts = interior_lattice(topology, &verts, order);
            per_entity.push((nodes.len()..nodes.len() + pts.len()).collect());
            nodes.extend(pts.into_iter().map(|p| Point::<D>::new(core::array::from_fn(|c| p[c]))));
        }
        entity_nodes.push(per_entity);
    }
    let dofs = LagrangianDofBasis::new(nodes, ncomp);
    let mut mono = monomial_basis::<D>(order, filter_for(topology))?.shifted([0.5; D], 2.0);
    if ncomp > 1 {
        mono = mono.vectorized();
    }
    let (monomials, inv) = lagrangian::dual_coefficients(&dofs, &mono)?;
    let shapes = crate::fields::linear_combination_columns(&inv, dofs.len(), &monomials)?;
    Ok(ReferenceFE {
        topology,
        order,
        ncomp,
        shapes,
        expansion: Expansion::new(monomials, &inv)?,
        dofs,
        entity_nodes,
    })
}

impl<const D: usize> ReferenceFE<D> {
    #[must_use]
    pub fn topology(&self) -> CellTopology {
        self.topology
    }

    #[must_use]
    pub fn order(&self) -> usize {
        self.order
    }

    #[must_use]
    pub fn num_components(&self) -> usize {
        self.ncomp
    }

    #[must_use]
    pub fn value_kind(&self) -> ValueKind {
        if self.ncomp == 1 {
            ValueKind::Scalar
        } else {
            ValueKind::Vector
        }
    }

    #[must_use]
    pub fn num_dofs(&self) -> usize {
        self.shapes.len()
    }

    #[must_use]
    pub fn num_nodes(&self) -> usize {
        self.dofs.nodes().len()
    }

    #[must_use]
    pub fn nodes(&self) -> &[Point<D>] {
        self.dofs.nodes()
    }

    #[must_use]
    pub fn shapes(&self) -> &[FieldRef<D>] {
        &self.shapes
    }

    #[must_use]
    pub fn dof_basis(&self) -> &LagrangianDofBasis<D> {
        &self.dofs
    }

    /// Local nodes interior to entity `e` of dimension `d`.
    #[must_use]
    pub fn entity_nodes(&self, d: usize, e: usize) -> &[usize] {
        &self.entity_nodes[d][e]
    }

    /// Local nodes on the closure of facet `f`: its vertices, edges and
    /// interior.
    #[must_use]
    pub fn facet_closure_nodes(&self, f: usize) -> Vec<usize> {
        let t = self.topology;
        let fverts = &t.facets()[f];
        let mut out = Vec::new();
        for d in 0..D {
            for (e, verts) in t.entities(d).iter().enumerate() {
                if verts.iter().all(|v| fverts.contains(v)) {
                    out.extend_from_slice(&self.entity_nodes[d][e]);
                }
            }
        }
        out
    }

    /// Local DOF index of component `c` at node `n`.
    #[inline]
    #[must_use]
    pub fn dof(&self, c: usize, n: usize) -> usize {
        c * self.num_nodes() + n
    }

    /// Shape function values and gradients at `points`, row-major
    /// `points x dofs`.
    #[must_use]
    pub fn tabulate(&self, points: &[Point<D>]) -> (Vec<Value<D>>, Vec<Value<D>>) {
        let ex = &self.expansion;
        let (vkind, gkind) = (self.shapes[0].kind(), ex.gradients[0].kind());
        let mut v = Vec::with_capacity(points.len() * self.num_dofs());
        let mut g = Vec::with_capacity(points.len() * self.num_dofs());
        for x in points {
            let mv: Vec<Value<D>> = ex.monomials.iter().map(|m| m.evaluate(x)).collect();
            let mg: Vec<Value<D>> = ex.gradients.iter().map(|m| m.evaluate(x)).collect();
            for col in &ex.columns {
                let (mut a, mut b) = (Value::zero(vkind), Value::zero(gkind));
                for &(i, c) in col {
                    a.axpy(c, &mv[i]);
                    b.axpy(c, &mg[i]);
                }
                v.push(a);
                g.push(b);
            }
        }
        (v, g)
    }
}
