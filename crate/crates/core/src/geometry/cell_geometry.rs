use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{DiscreteModel, Triangulation};
use crate::arrays::{lazy_map, lazy_map2, BoxedArray, NdArray};
use crate::error::Result;
use crate::fields::{constant, linear_combination, FieldRef, Value};
use crate::maps::{Broadcasting, Map2, Reindex};
use crate::reffe::{facet_frame, reference_normal, CellTopology, ReferenceFE};
use crate::tensors::{Point, TensorValue};

/// Node coordinates of the (parent) cell of every triangulation entry,
/// gathered lazily through the connectivity.
#[must_use]
pub fn cell_coordinates<const D: usize>(trian: &Triangulation<D>) -> BoxedArray<NdArray<Point<D>>> {
    let model = trian.model();
    let gather = Broadcasting(Reindex::new(model.nodes().clone()));
    if trian.is_boundary() {
        let parents = Arc::new(trian.parent_cells().to_vec());
        let conn = lazy_map(Reindex::new(model.cells().clone()), parents);
        BoxedArray::new(lazy_map(gather, conn))
    } else {
        BoxedArray::new(lazy_map(gather, model.cells().clone()))
    }
}

/// Cell topologies of the (parent) cells of every triangulation entry.
#[must_use]
pub fn cell_topologies<const D: usize>(trian: &Triangulation<D>) -> BoxedArray<CellTopology> {
    let types = trian.model().cell_types().clone();
    if trian.is_boundary() {
        let parents = Arc::new(trian.parent_cells().to_vec());
        BoxedArray::new(lazy_map(Reindex::new(types), parents))
    } else {
        BoxedArray::new(types)
    }
}

/// Builds the isoparametric map `φ = Σ_a X_a ŝ_a` of a cell.
#[derive(Clone)]
pub struct GeometricMap<const D: usize> {
    shapes: Vec<(CellTopology, Arc<ReferenceFE<D>>)>,
}

impl<const D: usize> GeometricMap<D> {
    fn new(model: &DiscreteModel<D>) -> Self {
        let shapes = model
            .cell_types()
            .values()
            .iter()
            .enumerate()
            .map(|(i, &t)| (t, model.geometry_fe(i).clone()))
            .collect();
        Self { shapes }
    }

    fn fe(&self, t: CellTopology) -> &ReferenceFE<D> {
        &self.shapes.iter().find(|(u, _)| *u == t).expect("cell type of this model").1
    }
}

impl<const D: usize> Map2<CellTopology, NdArray<Point<D>>> for GeometricMap<D> {
    type Out = FieldRef<D>;
    type Cache = Option<FieldRef<D>>;

    fn return_cache(&self) -> Self::Cache {
        None
    }

    fn evaluate<'c>(&'c self, cache: &'c mut Self::Cache, t: &CellTopology, x: &NdArray<Point<D>>) -> &'c FieldRef<D> {
        let coeffs: Vec<Value<D>> = x.data().iter().map(|p| Value::Vector(*p)).collect();
        let phi = linear_combination(&coeffs, self.fe(*t).shapes()).expect("vector coefficients on scalar shapes");
        cache.insert(phi)
    }

    fn name(&self) -> String {
        "GeometricMap".into()
    }
}

/// Transposed Jacobian `Jᵗ = ∇φ`, a constant field on simplices.
#[derive(Clone, Copy, Debug, Default)]
pub struct JacobianMap;

impl<const D: usize> Map2<CellTopology, FieldRef<D>> for JacobianMap {
    type Out = FieldRef<D>;
    type Cache = Option<FieldRef<D>>;

    fn return_cache(&self) -> Self::Cache {
        None
    }

    fn evaluate<'c>(&'c self, cache: &'c mut Self::Cache, t: &CellTopology, phi: &FieldRef<D>) -> &'c FieldRef<D> {
        let g = phi.gradient().expect("geometric maps are differentiable");
        if t.is_simplex() {
            return cache.insert(constant(g.evaluate(&Point::zero())));
        }
        cache.insert(g)
    }

    fn name(&self) -> String {
        "∇".into()
    }
}

/// Lazy per-entry geometric maps and transposed Jacobians.
#[must_use]
pub fn cell_geometry<const D: usize>(
    trian: &Triangulation<D>,
) -> (BoxedArray<FieldRef<D>>, BoxedArray<FieldRef<D>>) {
    let types = cell_topologies(trian);
    let maps = lazy_map2(GeometricMap::new(trian.model()), types.clone(), cell_coordinates(trian))
        .expect("equal lengths");
    let maps = BoxedArray::new(maps);
    let jacs = lazy_map2(JacobianMap, types, maps.clone()).expect("equal lengths");
    (maps, BoxedArray::new(jacs))
}

/// Geometry shape functions tabulated on one reference point set.
#[derive(Clone, Debug)]
struct SetTables<const D: usize> {
    npoints: usize,
    nverts: usize,
    values: Vec<f64>,
    grads: Vec<Point<D>>,
    affine: bool,
    tangents: Vec<Point<D>>,
    ref_normal: Option<Point<D>>,
}

/// Per-point geometric quantities of one entry.
#[derive(Clone, Debug, Default)]
pub struct GeomValues<const D: usize> {
    /// Physical points.
    pub x: Vec<Point<D>>,
    /// Transposed Jacobians.
    pub jt: Vec<TensorValue<D, D>>,
    /// Inverse transposed Jacobians.
    pub jinvt: Vec<TensorValue<D, D>>,
    /// Measure factor: `|det J|` in cells, the surface element on facets.
    pub dv: Vec<f64>,
    /// Unit outward normals (boundary entries only).
    pub normals: Vec<Point<D>>,
}

/// Tabulated geometry for a triangulation and a family of reference point
/// sets indexed like [`Triangulation::point_set`].
#[derive(Clone, Debug)]
pub struct GeometryTables<const D: usize> {
    sets: Vec<Option<SetTables<D>>>,
}

impl<const D: usize> GeometryTables<D> {
    /// `points[k]` is the reference point set with key `k`; `None` marks
    /// keys that do not occur.
    pub fn new(trian: &Triangulation<D>, points: &[Option<Vec<Point<D>>>]) -> Result<Self> {
        let model = trian.model();
        let mut sets = Vec::with_capacity(points.len());
        for (key, pts) in points.iter().enumerate() {
            let Some(pts) = pts else {
                sets.push(None);
                continue;
            };
            let (ti, facet) = trian.point_set_parts(key);
            let fe = model.geometry_fe(ti);
            let t = fe.topology();
            let (vals, grads) = fe.tabulate(pts);
            let (tangents, ref_normal) = match facet {
                Some(f) => (facet_frame::<D>(t, f)?.1, Some(reference_normal::<D>(t, f)?)),
                None => (Vec::new(), None),
            };
            sets.push(Some(SetTables {
                npoints: pts.len(),
                nverts: fe.num_dofs(),
                values: vals.iter().map(Value::scalar).collect(),
                grads: grads.iter().map(Value::vector).collect(),
                affine: t.is_simplex(),
                tangents,
                ref_normal,
            }));
        }
        Ok(Self { sets })
    }

    /// Fills `out` for an entry with point-set key `key` whose cell nodes
    /// are `coords`.
    pub fn compute(&self, key: usize, coords: &[Point<D>], out: &mut GeomValues<D>) {
        let s = self.sets[key].as_ref().expect("point set tabulated");
        let (nq, nv) = (s.npoints, s.nverts);
        out.x.clear();
        out.jt.clear();
        out.jinvt.clear();
        out.dv.clear();
        out.normals.clear();
        for q in 0..nq {
            let mut x = Point::zero();
            for a in 0..nv {
                x += coords[a] * s.values[q * nv + a];
            }
            out.x.push(x);
            if s.affine && q > 0 {
                let (jt, ji, dv) = (out.jt[0], out.jinvt[0], out.dv[0]);
                out.jt.push(jt);
                out.jinvt.push(ji);
                out.dv.push(dv);
                if s.ref_normal.is_some() {
                    let n = out.normals[0];
                    out.normals.push(n);
                }
                continue;
            }
            let mut jt = TensorValue::<D, D>::zero();
            for a in 0..nv {
                jt += s.grads[q * nv + a].outer(&coords[a]);
            }
            let ji = jt.inv_unchecked();
            out.jt.push(jt);
            out.jinvt.push(ji);
            match s.ref_normal {
                None => out.dv.push(jt.det().abs()),
                Some(nref) => {
                    out.dv.push(surface_element(&s.tangents, &jt));
                    let n = ji.matvec(&nref);
                    out.normals.push(n / n.norm());
                }
            }
        }
    }
}

/// `sqrt(det(TᵗT))` for the physical images `t · Jᵗ` of reference tangents.
fn surface_element<const D: usize>(tangents: &[Point<D>], jt: &TensorValue<D, D>) -> f64 {
    let t: Vec<Point<D>> = tangents.iter().map(|r| r.dot_tensor(jt)).collect();
    match t.len() {
        0 => 1.0,
        1 => t[0].norm(),
        _ => {
            let (a, b, c) = (t[0].dot(&t[0]), t[0].dot(&t[1]), t[1].dot(&t[1]));
            libm::sqrt((a * c - b * b).max(0.0))
        }
    }
}
