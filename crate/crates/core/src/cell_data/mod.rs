//! Cell-wise points, fields and FE bases, measures and integration.
//!
//! A [`CellField`] is an expression over per-cell quantities. Leaves are
//! physical fields, arrays of per-cell fields, FE bases and FE functions;
//! inner nodes are pointwise operations. Gradients are resolved
//! symbolically when the field is built, so evaluation and integration
//! only ever see values, reference gradients pushed forward with `J⁻ᵗ`,
//! and products of them.

mod evaluate;
mod integrate;
mod program;

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::arrays::{lazy_map, BoxedArray, CellArray, JaggedTable};
use crate::error::{Error, Result};
use crate::fields::{constant, BinaryOp, FieldRef, UnaryOp, Value, ValueKind};
use crate::geometry::{common_triangulation, Triangulation};
use crate::maps::Operation;
use crate::reffe::ReferenceFE;
use crate::tensors::Point;

pub use evaluate::{evaluate_cell, CellValues, PointValues};
pub use integrate::{integrate, measure, DomainContribution, Measure};

/// Coordinates in which the points or fields of a cell quantity are
/// expressed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DomainStyle {
    Reference,
    Physical,
}

/// Role of an FE basis in a bilinear form: test functions index rows,
/// trial functions index columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisRole {
    Test,
    Trial,
}

/// `(test field, trial field)` of a block of basis-dependent values.
pub type BlockKey = (Option<u8>, Option<u8>);

/// Reference element of every cell type of a model, by type index.
pub type CellFes<const D: usize> = Arc<Vec<Arc<ReferenceFE<D>>>>;

/// Reference points per point-set key of a triangulation.
#[derive(Clone, Debug)]
pub struct CellPoint<const D: usize> {
    trian: Arc<Triangulation<D>>,
    sets: Arc<Vec<Option<Vec<Point<D>>>>>,
}

impl<const D: usize> CellPoint<D> {
    /// `sets[k]` holds the reference points of entries with point-set key
    /// `k` (see [`Triangulation::point_set`]).
    pub fn new(trian: &Arc<Triangulation<D>>, sets: Vec<Option<Vec<Point<D>>>>) -> Result<Self> {
        if sets.len() != trian.num_point_sets() {
            return Err(Error::LengthMismatch {
                expected: trian.num_point_sets(),
                found: sets.len(),
            });
        }
        for i in 0..trian.num_cells() {
            if sets[trian.point_set(i)].is_none() {
                return Err(Error::InvalidArgument(alloc::format!("no points for entry {i}")));
            }
        }
        Ok(Self {
            trian: trian.clone(),
            sets: Arc::new(sets),
        })
    }

    /// The same reference points on every entry.
    pub fn uniform(trian: &Arc<Triangulation<D>>, points: Vec<Point<D>>) -> Result<Self> {
        Self::new(trian, alloc::vec![Some(points); trian.num_point_sets()])
    }

    /// Centroid of every cell, or of every facet on a boundary.
    pub fn centers(trian: &Arc<Triangulation<D>>) -> Result<Self> {
        let model = trian.model();
        let sets = (0..trian.num_point_sets())
            .map(|key| {
                let (ti, facet) = trian.point_set_parts(key);
                let t = model.geometry_fe(ti).topology();
                let verts: Vec<usize> = match facet {
                    Some(f) if f >= t.num_facets() => return None,
                    Some(f) => t.facets()[f].clone(),
                    None => (0..t.num_vertices()).collect(),
                };
                let mut c = Point::zero();
                for &v in &verts {
                    let x = t.vertex_coords()[v];
                    c += Point::new(core::array::from_fn(|k| x[k]));
                }
                Some(alloc::vec![c / verts.len() as f64])
            })
            .collect();
        Self::new(trian, sets)
    }

    #[must_use]
    pub fn triangulation(&self) -> &Arc<Triangulation<D>> {
        &self.trian
    }

    #[must_use]
    pub fn style(&self) -> DomainStyle {
        DomainStyle::Reference
    }

    pub(crate) fn sets(&self) -> &Arc<Vec<Option<Vec<Point<D>>>>> {
        &self.sets
    }
}

impl<const D: usize> CellArray for CellPoint<D> {
    type Item = [Point<D>];
    type Cache = ();

    fn len(&self) -> usize {
        self.trian.num_cells()
    }

    fn array_cache(&self) {}

    fn getindex<'a>(&'a self, _: &'a mut (), i: usize) -> &'a [Point<D>] {
        self.sets[self.trian.point_set(i)].as_deref().expect("checked at construction")
    }
}

/// An FE basis on the cells of a model.
pub(crate) struct BasisData<const D: usize> {
    pub fes: CellFes<D>,
    pub role: BasisRole,
    pub field: u8,
    pub nfields: u8,
}

/// Global DOF values of an FE function with their cell gather table.
///
/// `cell_dofs` holds signed ids: `k ≥ 0` reads `free[k]`, `-(k + 1)` reads
/// `dirichlet[k]`.
pub(crate) struct FeValuesData<const D: usize> {
    pub fes: CellFes<D>,
    pub cell_dofs: Arc<JaggedTable<i64>>,
    pub free: Arc<Vec<f64>>,
    pub dirichlet: Arc<Vec<f64>>,
}

pub(crate) enum Expr<const D: usize> {
    Field(FieldRef<D>),
    CellFields {
        fields: BoxedArray<FieldRef<D>>,
        style: DomainStyle,
        pushforward: bool,
        on_boundary: bool,
    },
    Basis {
        data: Arc<BasisData<D>>,
        grad: bool,
    },
    FeValues {
        data: Arc<FeValuesData<D>>,
        grad: bool,
    },
    Normal,
    Unary(UnaryOp, Arc<Expr<D>>),
    Binary(BinaryOp, Arc<Expr<D>>, Arc<Expr<D>>),
}

/// A piecewise field or field basis on the cells of a triangulation.
///
/// Test bases evaluate to column blocks and trial bases to row blocks;
/// products of the two give per-cell matrices.
#[derive(Clone)]
pub struct CellField<const D: usize> {
    trian: Arc<Triangulation<D>>,
    expr: Arc<Expr<D>>,
    kind: ValueKind,
    keys: Vec<BlockKey>,
    style: DomainStyle,
}

impl<const D: usize> core::fmt::Debug for CellField<D> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("CellField")
            .field("kind", &self.kind)
            .field("style", &self.style)
            .field("keys", &self.keys)
            .finish()
    }
}

fn merge_keys(a: &[BlockKey], b: &[BlockKey]) -> Vec<BlockKey> {
    let mut k: Vec<BlockKey> = a.iter().chain(b).copied().collect();
    k.sort_unstable();
    k.dedup();
    k
}

pub(crate) fn product_key(a: BlockKey, b: BlockKey) -> Result<BlockKey> {
    let join = |x: Option<u8>, y: Option<u8>, what: &str| match (x, y) {
        (Some(_), Some(_)) => Err(Error::Unsupported(alloc::format!("product of two {what} bases"))),
        (x, y) => Ok(x.or(y)),
    };
    Ok((join(a.0, b.0, "test")?, join(a.1, b.1, "trial")?))
}

fn product_keys(a: &[BlockKey], b: &[BlockKey]) -> Result<Vec<BlockKey>> {
    let mut out = Vec::new();
    for &ka in a {
        for &kb in b {
            out.push(product_key(ka, kb)?);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

impl<const D: usize> CellField<D> {
    fn from_expr(trian: Arc<Triangulation<D>>, expr: Expr<D>, kind: ValueKind, keys: Vec<BlockKey>, style: DomainStyle) -> Self {
        Self {
            trian,
            expr: Arc::new(expr),
            kind,
            keys,
            style,
        }
    }

    /// A field of physical coordinates, the same on every cell.
    #[must_use]
    pub fn from_field(trian: &Arc<Triangulation<D>>, f: FieldRef<D>) -> Self {
        let kind = f.kind();
        Self::from_expr(trian.clone(), Expr::Field(f), kind, alloc::vec![(None, None)], DomainStyle::Physical)
    }

    #[must_use]
    pub fn constant(trian: &Arc<Triangulation<D>>, v: impl Into<Value<D>>) -> Self {
        Self::from_field(trian, constant(v))
    }

    /// One field per entry of `trian`, in reference or physical coordinates.
    pub fn from_cell_fields(trian: &Arc<Triangulation<D>>, fields: BoxedArray<FieldRef<D>>, style: DomainStyle) -> Result<Self> {
        if fields.len() != trian.num_cells() {
            return Err(Error::LengthMismatch {
                expected: trian.num_cells(),
                found: fields.len(),
            });
        }
        if fields.is_empty() {
            return Err(Error::InvalidArgument("empty triangulation".into()));
        }
        let mut c = fields.array_cache();
        let kind = fields.getindex(&mut c, 0).kind();
        Ok(Self::from_expr(
            trian.clone(),
            Expr::CellFields {
                fields,
                style,
                pushforward: false,
                on_boundary: trian.is_boundary(),
            },
            kind,
            alloc::vec![(None, None)],
            style,
        ))
    }

    /// Unit outward normal of a boundary triangulation.
    pub fn normal(trian: &Arc<Triangulation<D>>) -> Result<Self> {
        if !trian.is_boundary() {
            return Err(Error::InvalidArgument("normals exist on boundary triangulations only".into()));
        }
        Ok(Self::from_expr(trian.clone(), Expr::Normal, ValueKind::Vector, alloc::vec![(None, None)], DomainStyle::Physical))
    }

    /// Shape functions of `fes` (one element per cell type of the model).
    /// Field `field` of `nfields` selects the block in multi-field forms.
    pub fn basis(trian: &Arc<Triangulation<D>>, fes: CellFes<D>, role: BasisRole, field: usize, nfields: usize) -> Result<Self> {
        check_fes(trian, &fes)?;
        if field >= nfields || nfields > u8::MAX as usize {
            return Err(Error::InvalidArgument(alloc::format!("field {field} of {nfields}")));
        }
        let kind = fes[0].value_kind();
        let f = Some(field as u8);
        let key = match role {
            BasisRole::Test => (f, None),
            BasisRole::Trial => (None, f),
        };
        let data = Arc::new(BasisData {
            fes,
            role,
            field: field as u8,
            nfields: nfields as u8,
        });
        Ok(Self::from_expr(
            trian.clone(),
            Expr::Basis { data, grad: false },
            kind,
            alloc::vec![key],
            DomainStyle::Reference,
        ))
    }

    /// Shape functions of a single reference element on every cell.
    pub fn reference_basis(trian: &Arc<Triangulation<D>>, fe: Arc<ReferenceFE<D>>, role: BasisRole) -> Result<Self> {
        let ntypes = trian.model().cell_types().values().len();
        Self::basis(trian, Arc::new(alloc::vec![fe; ntypes]), role, 0, 1)
    }

    /// `Σ_k u_k ŝ_k` per cell with `u_k` gathered through `cell_dofs`.
    pub fn fe_values(
        trian: &Arc<Triangulation<D>>,
        fes: CellFes<D>,
        cell_dofs: Arc<JaggedTable<i64>>,
        free: Arc<Vec<f64>>,
        dirichlet: Arc<Vec<f64>>,
    ) -> Result<Self> {
        check_fes(trian, &fes)?;
        let model = trian.model();
        if cell_dofs.num_rows() != model.num_cells() {
            return Err(Error::LengthMismatch {
                expected: model.num_cells(),
                found: cell_dofs.num_rows(),
            });
        }
        let kind = fes[0].value_kind();
        let data = Arc::new(FeValuesData {
            fes,
            cell_dofs,
            free,
            dirichlet,
        });
        Ok(Self::from_expr(
            trian.clone(),
            Expr::FeValues { data, grad: false },
            kind,
            alloc::vec![(None, None)],
            DomainStyle::Reference,
        ))
    }

    #[must_use]
    pub fn triangulation(&self) -> &Arc<Triangulation<D>> {
        &self.trian
    }

    #[must_use]
    pub fn kind(&self) -> ValueKind {
        self.kind
    }

    #[must_use]
    pub fn style(&self) -> DomainStyle {
        self.style
    }

    /// Block keys of the values: `(None, None)` for plain fields.
    #[must_use]
    pub fn block_keys(&self) -> &[BlockKey] {
        &self.keys
    }

    /// Role of a bare basis, `None` for anything else.
    #[must_use]
    pub fn role(&self) -> Option<BasisRole> {
        match &*self.expr {
            Expr::Basis { data, .. } => Some(data.role),
            _ => None,
        }
    }

    pub(crate) fn expr(&self) -> &Arc<Expr<D>> {
        &self.expr
    }

    /// Physical gradient.
    pub fn gradient(&self) -> Result<Self> {
        let kind = self.kind.gradient()?;
        let expr = grad_expr(&self.expr, &self.trian)?;
        Ok(Self {
            trian: self.trian.clone(),
            expr: Arc::new(expr),
            kind,
            keys: self.keys.clone(),
            style: self.style,
        })
    }

    /// Divergence of a vector-valued field.
    pub fn divergence(&self) -> Result<Self> {
        if self.kind != ValueKind::Vector {
            return Err(Error::Shape(alloc::format!("divergence of a {:?} field", self.kind)));
        }
        self.gradient()?.unary(UnaryOp::Trace)
    }

    pub fn unary(&self, op: UnaryOp) -> Result<Self> {
        let kind = op.result_kind(self.kind)?;
        Ok(Self::from_expr(
            self.trian.clone(),
            Expr::Unary(op, self.expr.clone()),
            kind,
            self.keys.clone(),
            self.style,
        ))
    }

    /// `self op other` on their common triangulation.
    pub fn binary(&self, op: BinaryOp, other: &Self) -> Result<Self> {
        let trian = common_triangulation(&self.trian, &other.trian)?;
        let kind = op.result_kind(self.kind, other.kind)?;
        let keys = match op {
            BinaryOp::Add | BinaryOp::Sub => merge_keys(&self.keys, &other.keys),
            _ => product_keys(&self.keys, &other.keys)?,
        };
        let style = if self.style == other.style { self.style } else { DomainStyle::Physical };
        Ok(Self::from_expr(
            trian,
            Expr::Binary(op, self.expr.clone(), other.expr.clone()),
            kind,
            keys,
            style,
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.binary(BinaryOp::Add, other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.binary(BinaryOp::Sub, other)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.binary(BinaryOp::Mul, other)
    }

    pub fn dot(&self, other: &Self) -> Result<Self> {
        self.binary(BinaryOp::Dot, other)
    }

    pub fn inner(&self, other: &Self) -> Result<Self> {
        self.binary(BinaryOp::Inner, other)
    }

    pub fn neg(&self) -> Result<Self> {
        self.unary(UnaryOp::Neg)
    }

    /// `s * self`.
    pub fn scale(&self, s: f64) -> Result<Self> {
        Self::constant(&self.trian, s).mul(self)
    }

    /// Rendering of the expression tree, one node per line.
    #[must_use]
    pub fn tree(&self) -> String {
        let mut s = String::new();
        write_expr(&self.expr, &mut s, 0);
        s
    }
}

fn check_fes<const D: usize>(trian: &Triangulation<D>, fes: &[Arc<ReferenceFE<D>>]) -> Result<()> {
    let types = trian.model().cell_types().values();
    if fes.len() != types.len() {
        return Err(Error::LengthMismatch {
            expected: types.len(),
            found: fes.len(),
        });
    }
    for (fe, t) in fes.iter().zip(types) {
        if fe.topology() != *t {
            return Err(Error::InvalidArgument(alloc::format!(
                "{} element on {t} cells",
                fe.topology()
            )));
        }
    }
    if fes.iter().any(|fe| fe.value_kind() != fes[0].value_kind()) {
        return Err(Error::InvalidArgument("mixed value kinds across cell types".into()));
    }
    Ok(())
}

/// Symbolic gradient. Leaves differentiate directly; sums and the product
/// rules for scalar factors and dot products recurse.
fn grad_expr<const D: usize>(e: &Arc<Expr<D>>, trian: &Triangulation<D>) -> Result<Expr<D>> {
    let unsupported = |what: &str| Err(Error::Unsupported(alloc::format!("gradient of {what}")));
    Ok(match &**e {
        Expr::Field(f) => Expr::Field(f.gradient()?),
        Expr::CellFields {
            fields,
            style,
            pushforward,
            on_boundary,
        } => {
            if *pushforward {
                return unsupported("a pushed-forward gradient");
            }
            let n = fields.len();
            if n > 0 {
                let mut c = fields.array_cache();
                fields.getindex(&mut c, 0).gradient()?;
            }
            let grads = lazy_map(
                Operation::new("∇", |f: &FieldRef<D>| f.gradient().expect("checked on the first cell")),
                fields.clone(),
            );
            Expr::CellFields {
                fields: BoxedArray::new(grads),
                style: *style,
                pushforward: *style == DomainStyle::Reference,
                on_boundary: *on_boundary,
            }
        }
        Expr::Basis { data, grad: false } => Expr::Basis {
            data: data.clone(),
            grad: true,
        },
        Expr::FeValues { data, grad: false } => Expr::FeValues {
            data: data.clone(),
            grad: true,
        },
        Expr::Basis { .. } | Expr::FeValues { .. } => return unsupported("a shape function gradient"),
        Expr::Normal => return unsupported("the normal"),
        Expr::Unary(UnaryOp::Neg, a) => Expr::Unary(UnaryOp::Neg, Arc::new(grad_expr(a, trian)?)),
        Expr::Unary(op, _) => return unsupported(op.symbol()),
        Expr::Binary(op @ (BinaryOp::Add | BinaryOp::Sub), a, b) => {
            Expr::Binary(*op, Arc::new(grad_expr(a, trian)?), Arc::new(grad_expr(b, trian)?))
        }
        Expr::Binary(op, a, b) => {
            let (ka, kb) = (expr_kind(a), expr_kind(b));
            let ga = Arc::new(grad_expr(a, trian)?);
            let gb = Arc::new(grad_expr(b, trian)?);
            let bin = |op, x: &Arc<Expr<D>>, y: &Arc<Expr<D>>| Arc::new(Expr::Binary(op, x.clone(), y.clone()));
            use ValueKind::{Scalar as S, Vector as V};
            let (l, r) = match (op, ka, kb) {
                (BinaryOp::Mul, S, S) => (bin(BinaryOp::Mul, &ga, b), bin(BinaryOp::Mul, a, &gb)),
                (BinaryOp::Mul, S, V) => (bin(BinaryOp::Outer, &ga, b), bin(BinaryOp::Mul, a, &gb)),
                (BinaryOp::Mul, V, S) => (bin(BinaryOp::Outer, &gb, a), bin(BinaryOp::Mul, b, &ga)),
                (BinaryOp::Dot, V, V) => (bin(BinaryOp::Dot, &ga, b), bin(BinaryOp::Dot, &gb, a)),
                _ => return unsupported(op.symbol()),
            };
            Expr::Binary(BinaryOp::Add, l, r)
        }
    })
}

pub(crate) fn expr_kind<const D: usize>(e: &Expr<D>) -> ValueKind {
    match e {
        Expr::Field(f) => f.kind(),
        Expr::CellFields { fields, .. } => {
            let mut c = fields.array_cache();
            fields.getindex(&mut c, 0).kind()
        }
        Expr::Basis { data, grad } => fe_kind(&data.fes, *grad),
        Expr::FeValues { data, grad } => fe_kind(&data.fes, *grad),
        Expr::Normal => ValueKind::Vector,
        Expr::Unary(op, a) => op.result_kind(expr_kind(a)).expect("checked at construction"),
        Expr::Binary(op, a, b) => op
            .result_kind(expr_kind(a), expr_kind(b))
            .expect("checked at construction"),
    }
}

fn fe_kind<const D: usize>(fes: &[Arc<ReferenceFE<D>>], grad: bool) -> ValueKind {
    let k = fes[0].value_kind();
    if grad {
        k.gradient().expect("scalar or vector elements")
    } else {
        k
    }
}

fn write_expr<const D: usize>(e: &Expr<D>, out: &mut String, depth: usize) {
    let pad = "  ".repeat(depth);
    let g = |grad: bool| if grad { "∇" } else { "" };
    match e {
        Expr::Field(f) => {
            let _ = writeln!(out, "{pad}Field({})", f.label());
        }
        Expr::CellFields { style, pushforward, .. } => {
            let _ = writeln!(out, "{pad}{}CellFields({style:?})", g(*pushforward));
        }
        Expr::Basis { data, grad } => {
            let _ = writeln!(out, "{pad}{}Basis({:?}, field {})", g(*grad), data.role, data.field);
        }
        Expr::FeValues { grad, .. } => {
            let _ = writeln!(out, "{pad}{}FEFunction", g(*grad));
        }
        Expr::Normal => {
            let _ = writeln!(out, "{pad}Normal");
        }
        Expr::Unary(op, a) => {
            let _ = writeln!(out, "{pad}{}", op.symbol());
            write_expr(a, out, depth + 1);
        }
        Expr::Binary(op, a, b) => {
            let _ = writeln!(out, "{pad}{}", op.symbol());
            write_expr(a, out, depth + 1);
            write_expr(b, out, depth + 1);
        }
    }
}

/// Physical gradient of a cell field.
pub fn gradient_cell<const D: usize>(f: &CellField<D>) -> Result<CellField<D>> {
    f.gradient()
}

/// Pointwise binary operation on cell fields.
pub fn operate_cell<const D: usize>(op: BinaryOp, a: &CellField<D>, b: &CellField<D>) -> Result<CellField<D>> {
    a.binary(op, b)
}
