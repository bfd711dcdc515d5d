use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::{BinaryOp, Field, FieldRef, IntoField, UnaryOp, Value, ValueKind};
use crate::error::{Error, Result};
use crate::tensors::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Op {
    Unary(UnaryOp),
    Binary(BinaryOp),
}

/// Pointwise combination of fields: `(f ⋄ g)(x) = f(x) ⋄ g(x)`.
#[derive(Clone)]
pub struct OperationField<const D: usize> {
    op: Op,
    args: Vec<FieldRef<D>>,
    kind: ValueKind,
}

/// `a ⋄ b` as a field. Numbers and values are promoted to constant fields.
/// Incompatible value shapes are rejected here rather than at evaluation.
pub fn operate<const D: usize>(
    op: BinaryOp,
    a: impl IntoField<D>,
    b: impl IntoField<D>,
) -> Result<FieldRef<D>> {
    let (a, b) = (a.into_field(), b.into_field());
    let kind = op.result_kind(a.kind(), b.kind())?;
    Ok(Arc::new(OperationField {
        op: Op::Binary(op),
        args: vec![a, b],
        kind,
    }))
}

/// `⋄ a` as a field.
pub fn operate_unary<const D: usize>(op: UnaryOp, a: impl IntoField<D>) -> Result<FieldRef<D>> {
    let a = a.into_field();
    let kind = op.result_kind(a.kind())?;
    Ok(Arc::new(OperationField {
        op: Op::Unary(op),
        args: vec![a],
        kind,
    }))
}

/// Divergence of a vector field, the trace of its gradient.
pub fn divergence<const D: usize>(u: &FieldRef<D>) -> Result<FieldRef<D>> {
    if u.kind() != ValueKind::Vector {
        return Err(Error::Shape(format!("divergence of a {:?} field", u.kind())));
    }
    operate_unary(UnaryOp::Trace, u.gradient()?)
}

impl<const D: usize> Field<D> for OperationField<D> {
    fn kind(&self) -> ValueKind {
        self.kind
    }

    #[inline]
    fn evaluate(&self, x: &Point<D>) -> Value<D> {
        match self.op {
            Op::Unary(op) => op.apply(&self.args[0].evaluate(x)),
            Op::Binary(op) => op.apply(&self.args[0].evaluate(x), &self.args[1].evaluate(x)),
        }
    }

    fn gradient(&self) -> Result<FieldRef<D>> {
        use BinaryOp as B;
        use ValueKind::{Scalar as S, Vector as V};
        let unsupported = || {
            Err(Error::Unsupported(format!(
                "gradient of {}",
                self.label()
            )))
        };
        match self.op {
            Op::Unary(UnaryOp::Neg) => operate_unary(UnaryOp::Neg, self.args[0].gradient()?),
            Op::Unary(_) => unsupported(),
            Op::Binary(op) => {
                let (a, b) = (&self.args[0], &self.args[1]);
                let (ka, kb) = (a.kind(), b.kind());
                match (op, ka, kb) {
                    (B::Add | B::Sub, _, _) => operate(op, a.gradient()?, b.gradient()?),
                    (B::Mul | B::Dot | B::Outer | B::Inner, S, S) => operate(
                        B::Add,
                        operate(B::Mul, a.gradient()?, b)?,
                        operate(B::Mul, a, b.gradient()?)?,
                    ),
                    (B::Mul | B::Dot | B::Outer, S, V) => operate(
                        B::Add,
                        operate(B::Outer, a.gradient()?, b)?,
                        operate(B::Mul, a, b.gradient()?)?,
                    ),
                    (B::Mul | B::Dot | B::Outer, V, S) => operate(
                        B::Add,
                        operate(B::Outer, b.gradient()?, a)?,
                        operate(B::Mul, b, a.gradient()?)?,
                    ),
                    (B::Dot | B::Inner, V, V) => operate(
                        B::Add,
                        operate(B::Dot, a.gradient()?, b)?,
                        operate(B::Dot, b.gradient()?, a)?,
                    ),
                    (B::Div, _, S) => {
                        // ∇(a/b) = ∇a/b − ∇b ⊗ a / b²
                        let b2 = operate(B::Mul, b, b)?;
                        operate(
                            B::Sub,
                            operate(B::Div, a.gradient()?, b)?,
                            operate(B::Div, operate(B::Outer, b.gradient()?, a)?, b2)?,
                        )
                    }
                    _ => unsupported(),
                }
            }
        }
    }

    fn label(&self) -> String {
        let sym = match self.op {
            Op::Unary(op) => op.symbol(),
            Op::Binary(op) => op.symbol(),
        };
        let args: Vec<String> = self.args.iter().map(|a| a.label()).collect();
        format!("{sym}({})", args.join(", "))
    }
}

/// The composition `x ↦ f(h(x))` of `f` with a vector field `h`.
#[derive(Clone)]
pub struct Composition<const D: usize> {
    f: FieldRef<D>,
    h: FieldRef<D>,
}

/// `f ∘ h`. The gradient follows the chain rule `∇(f∘h) = ∇h · (∇f ∘ h)`.
pub fn compose<const D: usize>(f: &FieldRef<D>, h: &FieldRef<D>) -> Result<FieldRef<D>> {
    if h.kind() != ValueKind::Vector {
        return Err(Error::Shape(format!(
            "inner field of a composition must be vector valued, got {:?}",
            h.kind()
        )));
    }
    if let Some(v) = f.constant_value() {
        return Ok(super::constant(v));
    }
    Ok(Arc::new(Composition {
        f: f.clone(),
        h: h.clone(),
    }))
}

impl<const D: usize> Field<D> for Composition<D> {
    fn kind(&self) -> ValueKind {
        self.f.kind()
    }

    #[inline]
    fn evaluate(&self, x: &Point<D>) -> Value<D> {
        self.f.evaluate(&self.h.evaluate(x).vector())
    }

    fn gradient(&self) -> Result<FieldRef<D>> {
        let gf = compose(&self.f.gradient()?, &self.h)?;
        operate(BinaryOp::Dot, self.h.gradient()?, gf)
    }

    fn label(&self) -> String {
        format!("{} ∘ {}", self.f.label(), self.h.label())
    }
}

/// `x ↦ Σ_i c_i f_i(x)` with constant coefficients.
///
/// A scalar coefficient scales its field. A vector coefficient `c` times a
/// scalar field gives `f c`; times a vector field `g` it gives `g ⊗ c`, which
/// makes the gradient of a vector-coefficient combination consistent with the
/// transpose-of-derivative convention.
#[derive(Clone)]
pub struct LinearCombinationField<const D: usize> {
    coeffs: Vec<Value<D>>,
    fields: Vec<FieldRef<D>>,
    kind: ValueKind,
}

fn combine_kind(c: ValueKind, f: ValueKind) -> Result<ValueKind> {
    use ValueKind::{Scalar as S, Tensor as T, Vector as V};
    match (c, f) {
        (S, k) => Ok(k),
        (V, S) => Ok(V),
        (V, V) | (T, S) => Ok(T),
        _ => Err(Error::Shape(format!("cannot combine a {f:?} field with a {c:?} coefficient"))),
    }
}

#[inline]
fn combine<const D: usize>(c: &Value<D>, f: &Value<D>) -> Value<D> {
    match (c, f) {
        (Value::Scalar(a), v) => v.scale(*a),
        (v, Value::Scalar(s)) => v.scale(*s),
        (Value::Vector(c), Value::Vector(g)) => Value::Tensor(g.outer(c)),
        _ => unreachable!("checked by combine_kind"),
    }
}

/// `Σ_i coeffs[i] fields[i]` as a single field.
pub fn linear_combination<const D: usize>(
    coeffs: &[Value<D>],
    fields: &[FieldRef<D>],
) -> Result<FieldRef<D>> {
    if coeffs.len() != fields.len() {
        return Err(Error::LengthMismatch {
            expected: fields.len(),
            found: coeffs.len(),
        });
    }
    if fields.is_empty() {
        return Err(Error::InvalidArgument("empty linear combination".into()));
    }
    let kind = combine_kind(coeffs[0].kind(), fields[0].kind())?;
    for (c, f) in coeffs.iter().zip(fields) {
        if combine_kind(c.kind(), f.kind())? != kind {
            return Err(Error::Shape("mixed kinds in a linear combination".into()));
        }
    }
    Ok(Arc::new(LinearCombinationField {
        coeffs: coeffs.to_vec(),
        fields: fields.to_vec(),
        kind,
    }))
}

/// One combined field per column of the row-major `fields.len() x ncols`
/// matrix `coeffs`: column `j` gives `Σ_i coeffs[i][j] fields[i]`.
pub fn linear_combination_columns<const D: usize>(
    coeffs: &[f64],
    ncols: usize,
    fields: &[FieldRef<D>],
) -> Result<Vec<FieldRef<D>>> {
    if coeffs.len() != fields.len() * ncols {
        return Err(Error::LengthMismatch {
            expected: fields.len() * ncols,
            found: coeffs.len(),
        });
    }
    (0..ncols)
        .map(|j| {
            let col: Vec<Value<D>> = (0..fields.len())
                .map(|i| Value::Scalar(coeffs[i * ncols + j]))
                .collect();
            linear_combination(&col, fields)
        })
        .collect()
}

impl<const D: usize> Field<D> for LinearCombinationField<D> {
    fn kind(&self) -> ValueKind {
        self.kind
    }

    fn evaluate(&self, x: &Point<D>) -> Value<D> {
        let mut acc = Value::zero(self.kind);
        for (c, f) in self.coeffs.iter().zip(&self.fields) {
            acc.axpy(1.0, &combine(c, &f.evaluate(x)));
        }
        acc
    }

    fn gradient(&self) -> Result<FieldRef<D>> {
        let grads = self
            .fields
            .iter()
            .map(|f| f.gradient())
            .collect::<Result<Vec<_>>>()?;
        linear_combination(&self.coeffs, &grads)
    }

    fn label(&self) -> String {
        format!("LinearCombination({} terms)", self.fields.len())
    }
}
