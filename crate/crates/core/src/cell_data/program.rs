//! Flattened evaluation of a cell-field expression on one entry at a time.
//!
//! Every node holds one value buffer per block key, sized from the DOF
//! counts of the current cell. Shape functions are tabulated once per
//! point set; geometry is recomputed per entry.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::any::Any;

use super::{product_key, BlockKey, CellFes, DomainStyle, Expr, FeValuesData};
use crate::arrays::{BoxedArray, CellArray, NdArray, Shape};
use crate::blocks::ArrayBlock;
use crate::error::{Error, Result};
use crate::fields::{BinaryOp, FieldRef, UnaryOp, Value, ValueKind};
use crate::geometry::{cell_coordinates, GeomValues, GeometryTables, Triangulation};
use crate::tensors::{Point, TensorValue};

struct PlanEntry {
    a: Option<u8>,
    b: Option<u8>,
    out: u8,
    acc: bool,
}

enum NodeOp<const D: usize> {
    Const(Value<D>),
    Field(FieldRef<D>),
    CellFields(usize),
    Table { slot: usize, grad: bool },
    FeValues { slot: usize, grad: bool },
    Normal,
    Unary(UnaryOp, usize),
    Binary(BinaryOp, usize, usize, Vec<PlanEntry>),
}

struct Node<const D: usize> {
    op: NodeOp<D>,
    kind: ValueKind,
    keys: Vec<BlockKey>,
    fused: bool,
}

struct TableSet<const D: usize> {
    n: usize,
    vals: Vec<Value<D>>,
    grads: Vec<Value<D>>,
}

struct Table<const D: usize> {
    fes: CellFes<D>,
    sets: Vec<Option<TableSet<D>>>,
}

struct CfSlot<const D: usize> {
    fields: BoxedArray<FieldRef<D>>,
    style: DomainStyle,
    pushforward: bool,
    on_boundary: bool,
}

struct FeSlot<const D: usize> {
    table: usize,
    data: Arc<FeValuesData<D>>,
}

/// Layout of integration results.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Arity {
    Scalar,
    Vector(usize),
    Matrix(usize),
}

impl Arity {
    pub fn of(keys: &[BlockKey], nfields: usize) -> Result<Self> {
        let a = |k: &BlockKey| match k {
            (None, None) => Ok(0),
            (Some(_), None) => Ok(1),
            (Some(_), Some(_)) => Ok(2),
            (None, Some(_)) => Err(Error::Unsupported("trial basis without a test basis".into())),
        };
        let first = a(&keys[0])?;
        for k in keys {
            if a(k)? != first {
                return Err(Error::Unsupported("integrand mixes forms of different arity".into()));
            }
        }
        Ok(match first {
            0 => Arity::Scalar,
            1 => Arity::Vector(nfields.max(1)),
            _ => Arity::Matrix(nfields.max(1)),
        })
    }

    pub fn grid(self) -> Vec<usize> {
        match self {
            Arity::Scalar => vec![],
            Arity::Vector(n) => vec![n],
            Arity::Matrix(n) => vec![n, n],
        }
    }

    #[inline]
    pub fn position(self, k: BlockKey) -> usize {
        match self {
            Arity::Scalar => 0,
            Arity::Vector(_) => k.0.unwrap_or(0) as usize,
            Arity::Matrix(n) => k.0.unwrap_or(0) as usize * n + k.1.unwrap_or(0) as usize,
        }
    }
}

pub(crate) struct Program<const D: usize> {
    trian: Arc<Triangulation<D>>,
    sets: Arc<Vec<Option<Vec<Point<D>>>>>,
    geometry: GeometryTables<D>,
    coords: BoxedArray<NdArray<Point<D>>>,
    nodes: Vec<Node<D>>,
    tables: Vec<Table<D>>,
    cfs: Vec<CfSlot<D>>,
    fe_slots: Vec<FeSlot<D>>,
    field_fes: [Vec<Option<CellFes<D>>>; 2],
    nfields: usize,
}

pub(crate) struct ProgramCache<const D: usize> {
    coords: Box<dyn Any>,
    pub geom: GeomValues<D>,
    pub key: usize,
    ndofs: [Vec<usize>; 2],
    bufs: Vec<Vec<Vec<Value<D>>>>,
    fe_local: Vec<Vec<f64>>,
    cf: Vec<(Box<dyn Any>, Option<FieldRef<D>>)>,
}

#[inline]
fn push<const D: usize>(jinvt: &TensorValue<D, D>, v: Value<D>) -> Value<D> {
    match v {
        Value::Vector(g) => Value::Vector(jinvt.matvec(&g)),
        Value::Tensor(g) => Value::Tensor(jinvt.dot(&g)),
        Value::Scalar(_) => v,
    }
}

impl<const D: usize> Program<D> {
    /// Compiles `expr` for evaluation on `trian` at the reference points
    /// `sets`. With `fuse`, the additive spine of the root is left to
    /// [`Program::accumulate`].
    pub fn compile(
        expr: &Expr<D>,
        trian: &Arc<Triangulation<D>>,
        sets: &Arc<Vec<Option<Vec<Point<D>>>>>,
        fuse: bool,
    ) -> Result<Self> {
        let geometry = GeometryTables::new(trian, sets)?;
        let mut p = Self {
            trian: trian.clone(),
            sets: sets.clone(),
            geometry,
            coords: cell_coordinates(trian),
            nodes: Vec::new(),
            tables: Vec::new(),
            cfs: Vec::new(),
            fe_slots: Vec::new(),
            field_fes: [Vec::new(), Vec::new()],
            nfields: 0,
        };
        let root = p.emit(expr)?;
        if fuse {
            p.mark(root);
        }
        Ok(p)
    }

    pub fn root(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn root_keys(&self) -> &[BlockKey] {
        &self.nodes[self.root()].keys
    }

    pub fn nfields(&self) -> usize {
        self.nfields
    }

    pub fn triangulation(&self) -> &Arc<Triangulation<D>> {
        &self.trian
    }

    fn table(&mut self, fes: &CellFes<D>) -> usize {
        if let Some(i) = self.tables.iter().position(|t| Arc::ptr_eq(&t.fes, fes)) {
            return i;
        }
        let model = self.trian.model();
        let sets = self
            .sets
            .iter()
            .enumerate()
            .map(|(key, pts)| {
                let pts = pts.as_ref()?;
                let (ti, _) = self.trian.point_set_parts(key);
                let fe = &fes[ti];
                debug_assert_eq!(fe.topology(), model.cell_types().values()[ti]);
                let (vals, grads) = fe.tabulate(pts);
                Some(TableSet {
                    n: fe.num_dofs(),
                    vals,
                    grads,
                })
            })
            .collect();
        self.tables.push(Table { fes: fes.clone(), sets });
        self.tables.len() - 1
    }

    fn push_node(&mut self, op: NodeOp<D>, kind: ValueKind, keys: Vec<BlockKey>) -> usize {
        self.nodes.push(Node {
            op,
            kind,
            keys,
            fused: false,
        });
        self.nodes.len() - 1
    }

    fn emit(&mut self, e: &Expr<D>) -> Result<usize> {
        let plain = || vec![(None, None)];
        Ok(match e {
            Expr::Field(f) => {
                let op = match f.constant_value() {
                    Some(v) => NodeOp::Const(v),
                    None => NodeOp::Field(f.clone()),
                };
                self.push_node(op, f.kind(), plain())
            }
            Expr::CellFields {
                fields,
                style,
                pushforward,
                on_boundary,
            } => {
                let mut c = fields.array_cache();
                let kind = fields.getindex(&mut c, 0).kind();
                self.cfs.push(CfSlot {
                    fields: fields.clone(),
                    style: *style,
                    pushforward: *pushforward,
                    on_boundary: *on_boundary,
                });
                let slot = self.cfs.len() - 1;
                self.push_node(NodeOp::CellFields(slot), kind, plain())
            }
            Expr::Basis { data, grad } => {
                let slot = self.table(&data.fes);
                let f = data.field as usize;
                let side = &mut self.field_fes[data.role as usize];
                if side.len() <= f {
                    side.resize(f + 1, None);
                }
                match &side[f] {
                    Some(fes) if fes.iter().zip(data.fes.iter()).any(|(a, b)| a.num_dofs() != b.num_dofs()) => {
                        return Err(Error::InvalidArgument(alloc::format!(
                            "field {f} is used with bases of different sizes"
                        )))
                    }
                    Some(_) => {}
                    None => side[f] = Some(data.fes.clone()),
                }
                self.nfields = self.nfields.max(data.nfields as usize);
                let key = match data.role {
                    super::BasisRole::Test => (Some(data.field), None),
                    super::BasisRole::Trial => (None, Some(data.field)),
                };
                let kind = super::expr_kind(e);
                self.push_node(NodeOp::Table { slot, grad: *grad }, kind, vec![key])
            }
            Expr::FeValues { data, grad } => {
                let table = self.table(&data.fes);
                self.fe_slots.push(FeSlot {
                    table,
                    data: data.clone(),
                });
                let slot = self.fe_slots.len() - 1;
                let kind = super::expr_kind(e);
                self.push_node(NodeOp::FeValues { slot, grad: *grad }, kind, plain())
            }
            Expr::Normal => {
                if !self.trian.is_boundary() {
                    return Err(Error::InvalidArgument("normal evaluated off the boundary".into()));
                }
                self.push_node(NodeOp::Normal, ValueKind::Vector, plain())
            }
            Expr::Unary(op, a) => {
                let ia = self.emit(a)?;
                let kind = op.result_kind(self.nodes[ia].kind)?;
                let keys = self.nodes[ia].keys.clone();
                self.push_node(NodeOp::Unary(*op, ia), kind, keys)
            }
            Expr::Binary(op, a, b) => {
                let ia = self.emit(a)?;
                let ib = self.emit(b)?;
                let kind = op.result_kind(self.nodes[ia].kind, self.nodes[ib].kind)?;
                let (ka, kb) = (&self.nodes[ia].keys, &self.nodes[ib].keys);
                let mut plan = Vec::new();
                let keys = match op {
                    BinaryOp::Add | BinaryOp::Sub => {
                        let keys = super::merge_keys(ka, kb);
                        for (o, k) in keys.iter().enumerate() {
                            plan.push(PlanEntry {
                                a: ka.iter().position(|x| x == k).map(|i| i as u8),
                                b: kb.iter().position(|x| x == k).map(|i| i as u8),
                                out: o as u8,
                                acc: false,
                            });
                        }
                        keys
                    }
                    _ => {
                        let mut pairs = Vec::new();
                        for (i, &x) in ka.iter().enumerate() {
                            for (j, &y) in kb.iter().enumerate() {
                                pairs.push((i, j, product_key(x, y)?));
                            }
                        }
                        let mut keys: Vec<BlockKey> = pairs.iter().map(|p| p.2).collect();
                        keys.sort_unstable();
                        keys.dedup();
                        let mut seen = vec![false; keys.len()];
                        for (i, j, k) in pairs {
                            let o = keys.iter().position(|x| *x == k).expect("listed");
                            plan.push(PlanEntry {
                                a: Some(i as u8),
                                b: Some(j as u8),
                                out: o as u8,
                                acc: seen[o],
                            });
                            seen[o] = true;
                        }
                        keys
                    }
                };
                self.push_node(NodeOp::Binary(*op, ia, ib, plan), kind, keys)
            }
        })
    }

    fn mark(&mut self, n: usize) {
        let children = match &self.nodes[n].op {
            NodeOp::Binary(BinaryOp::Add | BinaryOp::Sub, a, b, _) => vec![*a, *b],
            NodeOp::Unary(UnaryOp::Neg, a) => vec![*a],
            NodeOp::Binary(..) => vec![],
            _ => return,
        };
        self.nodes[n].fused = true;
        for c in children {
            self.mark(c);
        }
    }

    pub fn cache(&self) -> ProgramCache<D> {
        ProgramCache {
            coords: self.coords.array_cache(),
            geom: GeomValues::default(),
            key: 0,
            ndofs: [vec![1; self.field_fes[0].len()], vec![1; self.field_fes[1].len()]],
            bufs: self.nodes.iter().map(|n| vec![Vec::new(); n.keys.len()]).collect(),
            fe_local: vec![Vec::new(); self.fe_slots.len()],
            cf: self.cfs.iter().map(|s| (s.fields.array_cache(), None)).collect(),
        }
    }

    #[inline]
    fn shape(c: &ProgramCache<D>, k: BlockKey) -> (usize, usize) {
        key_shape(&c.ndofs, k)
    }

    /// Output block shape of key `k` on the current entry.
    pub fn block_shape(c: &ProgramCache<D>, k: BlockKey, arity: Arity) -> Shape {
        let (r, cc) = Self::shape(c, k);
        match arity {
            Arity::Scalar => Shape::scalar(),
            Arity::Vector(_) => Shape::vector(r),
            Arity::Matrix(_) => Shape::matrix(r, cc),
        }
    }

    /// Number of reference points of the current entry.
    pub fn num_points(&self, c: &ProgramCache<D>) -> usize {
        self.sets[c.key].as_ref().map_or(0, Vec::len)
    }

    /// Loads geometry, DOF values and per-cell fields of entry `i`.
    pub fn setup(&self, c: &mut ProgramCache<D>, i: usize) {
        let key = self.trian.point_set(i);
        c.key = key;
        let parent = self.trian.parent_cell(i);
        let ti = self.trian.model().cell_type_index(parent);
        let coords = self.coords.getindex(&mut c.coords, i);
        self.geometry.compute(key, coords.data(), &mut c.geom);
        for (side, nd) in self.field_fes.iter().zip(&mut c.ndofs) {
            for (f, fes) in side.iter().enumerate() {
                nd[f] = fes.as_ref().map_or(1, |fes| fes[ti].num_dofs());
            }
        }
        for (s, slot) in self.fe_slots.iter().enumerate() {
            let d = &slot.data;
            let local = &mut c.fe_local[s];
            local.clear();
            local.extend(d.cell_dofs.row(parent).iter().map(|&g| {
                if g >= 0 {
                    d.free[g as usize]
                } else {
                    d.dirichlet[(-g - 1) as usize]
                }
            }));
        }
        for (s, slot) in self.cfs.iter().enumerate() {
            let idx = if slot.on_boundary { i } else { parent };
            let (cache, cur) = &mut c.cf[s];
            *cur = Some(slot.fields.getindex(cache, idx).clone());
        }
        for (n, node) in self.nodes.iter().enumerate() {
            if node.fused {
                continue;
            }
            for (b, &k) in node.keys.iter().enumerate() {
                let (r, cc) = Self::shape(c, k);
                c.bufs[n][b].resize(r * cc, Value::Scalar(0.0));
            }
        }
    }

    /// Evaluates every non-fused node at point `q` of the current entry.
    pub fn eval_point(&self, c: &mut ProgramCache<D>, q: usize) {
        let key = c.key;
        for n in 0..self.nodes.len() {
            let node = &self.nodes[n];
            if node.fused {
                continue;
            }
            let (done, rest) = c.bufs.split_at_mut(n);
            let out = &mut rest[0];
            match &node.op {
                NodeOp::Const(v) => out[0][0] = *v,
                NodeOp::Field(f) => out[0][0] = f.evaluate(&c.geom.x[q]),
                NodeOp::CellFields(s) => {
                    let slot = &self.cfs[*s];
                    let f = c.cf[*s].1.as_ref().expect("entry loaded");
                    let v = match slot.style {
                        DomainStyle::Physical => f.evaluate(&c.geom.x[q]),
                        DomainStyle::Reference => f.evaluate(&self.sets[key].as_ref().expect("points")[q]),
                    };
                    out[0][0] = if slot.pushforward { push(&c.geom.jinvt[q], v) } else { v };
                }
                NodeOp::Table { slot, grad } => {
                    let t = self.tables[*slot].sets[key].as_ref().expect("tabulated");
                    let m = t.n;
                    if *grad {
                        let ji = &c.geom.jinvt[q];
                        for (o, g) in out[0].iter_mut().zip(&t.grads[q * m..(q + 1) * m]) {
                            *o = push(ji, *g);
                        }
                    } else {
                        out[0].copy_from_slice(&t.vals[q * m..(q + 1) * m]);
                    }
                }
                NodeOp::FeValues { slot, grad } => {
                    let fs = &self.fe_slots[*slot];
                    let t = self.tables[fs.table].sets[key].as_ref().expect("tabulated");
                    let m = t.n;
                    let row = if *grad { &t.grads[q * m..(q + 1) * m] } else { &t.vals[q * m..(q + 1) * m] };
                    let mut acc = Value::zero(node.kind);
                    for (u, s) in c.fe_local[*slot].iter().zip(row) {
                        acc.axpy(*u, s);
                    }
                    out[0][0] = if *grad { push(&c.geom.jinvt[q], acc) } else { acc };
                }
                NodeOp::Normal => out[0][0] = Value::Vector(c.geom.normals[q]),
                NodeOp::Unary(op, a) => {
                    for (ob, ab) in out.iter_mut().zip(&done[*a]) {
                        for (o, x) in ob.iter_mut().zip(ab) {
                            *o = op.apply(x);
                        }
                    }
                }
                NodeOp::Binary(op, a, b, plan) => {
                    let (na, nb) = (&self.nodes[*a], &self.nodes[*b]);
                    for e in plan {
                        let ob = &mut out[e.out as usize];
                        match (e.a, e.b) {
                            (Some(ia), Some(ib)) => {
                                let sa = key_shape(&c.ndofs, na.keys[ia as usize]);
                                let sb = key_shape(&c.ndofs, nb.keys[ib as usize]);
                                let (r, cc) = key_shape(&c.ndofs, node.keys[e.out as usize]);
                                let (xa, xb) = (&done[*a][ia as usize], &done[*b][ib as usize]);
                                for i in 0..r {
                                    for j in 0..cc {
                                        let va = &xa[bidx(sa, i, j)];
                                        let vb = &xb[bidx(sb, i, j)];
                                        let v = op.apply(va, vb);
                                        let o = &mut ob[i * cc + j];
                                        *o = if e.acc { BinaryOp::Add.apply(o, &v) } else { v };
                                    }
                                }
                            }
                            (Some(ia), None) => ob.copy_from_slice(&done[*a][ia as usize]),
                            (None, Some(ib)) => {
                                let src = &done[*b][ib as usize];
                                if *op == BinaryOp::Sub {
                                    for (o, x) in ob.iter_mut().zip(src) {
                                        *o = x.scale(-1.0);
                                    }
                                } else {
                                    ob.copy_from_slice(src);
                                }
                            }
                            (None, None) => unreachable!("plan entries reference an operand"),
                        }
                    }
                }
            }
        }
    }

    /// Adds `s` times the scalar value of node `n` at the current point into
    /// the blocks of `out`.
    pub fn accumulate(&self, c: &ProgramCache<D>, n: usize, s: f64, out: &mut ArrayBlock<NdArray<f64>>, arity: Arity) {
        let node = &self.nodes[n];
        if node.fused {
            match &node.op {
                NodeOp::Binary(op @ (BinaryOp::Add | BinaryOp::Sub), a, b, _) => {
                    self.accumulate(c, *a, s, out, arity);
                    let sb = if *op == BinaryOp::Sub { -s } else { s };
                    self.accumulate(c, *b, sb, out, arity);
                }
                NodeOp::Unary(_, a) => self.accumulate(c, *a, -s, out, arity),
                NodeOp::Binary(op, a, b, plan) => {
                    let (na, nb) = (&self.nodes[*a], &self.nodes[*b]);
                    for e in plan {
                        let (ia, ib) = (e.a.expect("product operand") as usize, e.b.expect("product operand") as usize);
                        let sa = Self::shape(c, na.keys[ia]);
                        let sb = Self::shape(c, nb.keys[ib]);
                        let k = node.keys[e.out as usize];
                        let (r, cc) = Self::shape(c, k);
                        let (xa, xb) = (&c.bufs[*a][ia], &c.bufs[*b][ib]);
                        let blk = out.touch_linear(arity.position(k)).data_mut();
                        for i in 0..r {
                            for j in 0..cc {
                                let v = op.apply(&xa[bidx(sa, i, j)], &xb[bidx(sb, i, j)]);
                                blk[i * cc + j] += s * v.scalar();
                            }
                        }
                    }
                }
                _ => unreachable!("only sums, negations and products are fused"),
            }
            return;
        }
        for (b, &k) in node.keys.iter().enumerate() {
            let blk = out.touch_linear(arity.position(k)).data_mut();
            for (o, v) in blk.iter_mut().zip(&c.bufs[n][b]) {
                *o += s * v.scalar();
            }
        }
    }

    /// Values of the root at the current point, block `b`.
    pub fn root_values<'c>(&self, c: &'c ProgramCache<D>, b: usize) -> &'c [Value<D>] {
        &c.bufs[self.root()][b]
    }

    pub fn root_shape(&self, c: &ProgramCache<D>, b: usize) -> (usize, usize) {
        Self::shape(c, self.nodes[self.root()].keys[b])
    }
}

#[inline]
fn key_shape(ndofs: &[Vec<usize>; 2], k: BlockKey) -> (usize, usize) {
    (
        k.0.map_or(1, |f| ndofs[0][f as usize]),
        k.1.map_or(1, |f| ndofs[1][f as usize]),
    )
}

#[inline]
fn bidx(s: (usize, usize), i: usize, j: usize) -> usize {
    let i = if s.0 == 1 { 0 } else { i };
    let j = if s.1 == 1 { 0 } else { j };
    i * s.1 + j
}
