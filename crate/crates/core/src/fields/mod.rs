//! Fields: functions of a point returning scalars, vectors or tensors.
//!
//! Gradients follow the transpose-of-derivative convention:
//! for a vector field `u`, `(∇u)_ij = ∂u_j/∂x_i`.

mod dual;
mod ops;
mod value;

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

pub use dual::Dual;
pub use ops::{
    compose, divergence, linear_combination, linear_combination_columns, operate,
    operate_unary, Composition, LinearCombinationField, OperationField,
};
pub use value::{BinaryOp, UnaryOp, Value, ValueKind};

use crate::error::{Error, Result};
use crate::maps::Map1;
use crate::tensors::{Point, TensorValue, VectorValue};

/// A function of a `D`-dimensional point.
pub trait Field<const D: usize>: Send + Sync {
    /// Shape of the values returned by [`Field::evaluate`].
    fn kind(&self) -> ValueKind;

    fn evaluate(&self, x: &Point<D>) -> Value<D>;

    /// The gradient field.
    fn gradient(&self) -> Result<FieldRef<D>>;

    /// Evaluates at every point of `xs`, overwriting `out`.
    fn evaluate_points(&self, xs: &[Point<D>], out: &mut Vec<Value<D>>) {
        out.clear();
        out.extend(xs.iter().map(|x| self.evaluate(x)));
    }

    /// Short description used in diagnostics.
    fn label(&self) -> String {
        "Field".into()
    }

    /// The value of a field known to be constant.
    fn constant_value(&self) -> Option<Value<D>> {
        None
    }
}

/// Shared handle to a field.
pub type FieldRef<const D: usize> = Arc<dyn Field<D>>;

/// Gradient of `f`.
pub fn gradient<const D: usize>(f: &FieldRef<D>) -> Result<FieldRef<D>> {
    f.gradient()
}

/// A field seen as a mapping over points, for use in lazy arrays.
#[derive(Clone)]
pub struct FieldMap<const D: usize>(pub FieldRef<D>);

impl<const D: usize> Map1<Point<D>> for FieldMap<D> {
    type Out = Value<D>;
    type Cache = Value<D>;

    fn return_cache(&self) -> Value<D> {
        Value::zero(self.0.kind())
    }

    #[inline]
    fn evaluate<'c>(&'c self, cache: &'c mut Value<D>, x: &Point<D>) -> &'c Value<D> {
        *cache = self.0.evaluate(x);
        cache
    }

    fn name(&self) -> String {
        self.0.label()
    }
}

impl<const D: usize> Map1<[Point<D>]> for FieldMap<D> {
    type Out = Vec<Value<D>>;
    type Cache = Vec<Value<D>>;

    fn return_cache(&self) -> Vec<Value<D>> {
        Vec::new()
    }

    fn evaluate<'c>(&'c self, cache: &'c mut Vec<Value<D>>, xs: &[Point<D>]) -> &'c Vec<Value<D>> {
        if cache.capacity() < xs.len() {
            cache.reserve_exact(xs.len() - cache.len());
        }
        self.0.evaluate_points(xs, cache);
        cache
    }

    fn name(&self) -> String {
        self.0.label()
    }
}

/// Conversion of numbers, values and fields into a [`FieldRef`].
pub trait IntoField<const D: usize> {
    fn into_field(self) -> FieldRef<D>;
}

impl<const D: usize> IntoField<D> for FieldRef<D> {
    fn into_field(self) -> FieldRef<D> {
        self
    }
}

impl<const D: usize> IntoField<D> for &FieldRef<D> {
    fn into_field(self) -> FieldRef<D> {
        self.clone()
    }
}

impl<const D: usize> IntoField<D> for f64 {
    fn into_field(self) -> FieldRef<D> {
        constant(Value::Scalar(self))
    }
}

impl<const D: usize> IntoField<D> for Value<D> {
    fn into_field(self) -> FieldRef<D> {
        constant(self)
    }
}

impl<const D: usize> IntoField<D> for VectorValue<D> {
    fn into_field(self) -> FieldRef<D> {
        constant(Value::Vector(self))
    }
}

impl<const D: usize> IntoField<D> for TensorValue<D, D> {
    fn into_field(self) -> FieldRef<D> {
        constant(Value::Tensor(self))
    }
}

/// A field with the same value everywhere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantField<const D: usize> {
    pub value: Value<D>,
}

/// Shorthand for an `Arc`ed [`ConstantField`].
pub fn constant<const D: usize>(value: impl Into<Value<D>>) -> FieldRef<D> {
    Arc::new(ConstantField { value: value.into() })
}

impl<const D: usize> Field<D> for ConstantField<D> {
    fn kind(&self) -> ValueKind {
        self.value.kind()
    }

    #[inline]
    fn evaluate(&self, _: &Point<D>) -> Value<D> {
        self.value
    }

    fn gradient(&self) -> Result<FieldRef<D>> {
        Ok(constant(Value::zero(self.kind().gradient()?)))
    }

    fn evaluate_points(&self, xs: &[Point<D>], out: &mut Vec<Value<D>>) {
        out.clear();
        out.resize(xs.len(), self.value);
    }

    fn label(&self) -> String {
        alloc::format!("ConstantField({:?})", self.value)
    }

    fn constant_value(&self) -> Option<Value<D>> {
        Some(self.value)
    }
}

/// The field `x ↦ x`.
#[derive(Clone, Copy, Debug, Default)]
pub struct IdentityField;

/// Shorthand for an `Arc`ed [`IdentityField`].
pub fn identity<const D: usize>() -> FieldRef<D> {
    Arc::new(IdentityField)
}

impl<const D: usize> Field<D> for IdentityField {
    fn kind(&self) -> ValueKind {
        ValueKind::Vector
    }

    #[inline]
    fn evaluate(&self, x: &Point<D>) -> Value<D> {
        Value::Vector(*x)
    }

    fn gradient(&self) -> Result<FieldRef<D>> {
        Ok(constant(Value::Tensor(TensorValue::<D, D>::identity())))
    }

    fn label(&self) -> String {
        "identity".into()
    }
}

/// Result of a user function evaluated on dual numbers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DualValue<const D: usize> {
    Scalar(Dual<D>),
    Vector([Dual<D>; D]),
}

type DualFn<const D: usize> = Arc<dyn Fn(&[Dual<D>; D]) -> DualValue<D> + Send + Sync>;
type PlainFn<const D: usize> = Arc<dyn Fn(&Point<D>) -> Value<D> + Send + Sync>;

#[derive(Clone)]
enum GenericKind<const D: usize> {
    Dual(DualFn<D>),
    Plain(PlainFn<D>),
}

/// A field wrapping a user function.
///
/// Functions written over [`Dual`] numbers are differentiated automatically in
/// one forward pass with `D` simultaneous seeds. A user-supplied analytic
/// gradient takes precedence over automatic differentiation.
#[derive(Clone)]
pub struct GenericField<const D: usize> {
    f: GenericKind<D>,
    kind: ValueKind,
    grad: Option<FieldRef<D>>,
    label: String,
}

impl<const D: usize> GenericField<D> {
    /// Scalar field from a function over dual numbers.
    pub fn scalar<F>(f: F) -> Self
    where
        F: Fn(&[Dual<D>; D]) -> Dual<D> + Send + Sync + 'static,
    {
        Self {
            f: GenericKind::Dual(Arc::new(move |x| DualValue::Scalar(f(x)))),
            kind: ValueKind::Scalar,
            grad: None,
            label: "GenericField".into(),
        }
    }

    /// Vector field from a function over dual numbers.
    pub fn vector<F>(f: F) -> Self
    where
        F: Fn(&[Dual<D>; D]) -> [Dual<D>; D] + Send + Sync + 'static,
    {
        Self {
            f: GenericKind::Dual(Arc::new(move |x| DualValue::Vector(f(x)))),
            kind: ValueKind::Vector,
            grad: None,
            label: "GenericField".into(),
        }
    }

    /// Field from a plain function of a point. It has no gradient unless one
    /// is supplied with [`GenericField::with_gradient`].
    pub fn from_fn<F>(kind: ValueKind, f: F) -> Self
    where
        F: Fn(&Point<D>) -> Value<D> + Send + Sync + 'static,
    {
        Self {
            f: GenericKind::Plain(Arc::new(f)),
            kind,
            grad: None,
            label: "GenericField".into(),
        }
    }

    /// Attaches an analytic gradient, bypassing automatic differentiation.
    pub fn with_gradient(mut self, grad: FieldRef<D>) -> Result<Self> {
        let want = self.kind.gradient()?;
        if grad.kind() != want {
            return Err(Error::Shape(alloc::format!(
                "gradient of a {:?} field must be {want:?}, got {:?}",
                self.kind,
                grad.kind()
            )));
        }
        self.grad = Some(grad);
        Ok(self)
    }

    #[must_use]
    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.into();
        self
    }

    #[must_use]
    pub fn into_ref(self) -> FieldRef<D> {
        Arc::new(self)
    }
}

impl<const D: usize> Field<D> for GenericField<D> {
    fn kind(&self) -> ValueKind {
        self.kind
    }

    fn evaluate(&self, x: &Point<D>) -> Value<D> {
        match &self.f {
            GenericKind::Plain(f) => f(x),
            GenericKind::Dual(f) => {
                let xd = core::array::from_fn(|k| Dual::constant(x.0[k]));
                match f(&xd) {
                    DualValue::Scalar(s) => Value::Scalar(s.v),
                    DualValue::Vector(v) => Value::Vector(VectorValue(core::array::from_fn(|k| v[k].v))),
                }
            }
        }
    }

    fn gradient(&self) -> Result<FieldRef<D>> {
        if let Some(g) = &self.grad {
            return Ok(g.clone());
        }
        match &self.f {
            GenericKind::Dual(f) => Ok(Arc::new(DualGradientField {
                f: f.clone(),
                kind: self.kind.gradient()?,
            })),
            GenericKind::Plain(_) => Err(Error::Unsupported(alloc::format!(
                "gradient of {} without an analytic gradient",
                self.label
            ))),
        }
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

/// Gradient of a dual-number [`GenericField`], computed in one seeded pass.
struct DualGradientField<const D: usize> {
    f: DualFn<D>,
    kind: ValueKind,
}

impl<const D: usize> Field<D> for DualGradientField<D> {
    fn kind(&self) -> ValueKind {
        self.kind
    }

    fn evaluate(&self, x: &Point<D>) -> Value<D> {
        let xd = core::array::from_fn(|k| Dual::variable(x.0[k], k));
        match (self.f)(&xd) {
            DualValue::Scalar(s) => Value::Vector(VectorValue(s.d)),
            DualValue::Vector(v) => {
                let mut t = [[0.0; D]; D];
                for (i, row) in t.iter_mut().enumerate() {
                    for (j, e) in row.iter_mut().enumerate() {
                        *e = v[j].d[i];
                    }
                }
                Value::Tensor(TensorValue(t))
            }
        }
    }

    fn gradient(&self) -> Result<FieldRef<D>> {
        Err(Error::Unsupported(
            "second derivatives of automatically differentiated fields".into(),
        ))
    }

    fn label(&self) -> String {
        "∇(GenericField)".into()
    }
}

/// The monomial `Π_k ξ_k^{e_k}` in the shifted coordinates
/// `ξ_k = scale (x_k − center_k)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Monomial<const D: usize> {
    pub exponents: [u8; D],
    pub center: [f64; D],
    pub scale: f64,
}

impl<const D: usize> Monomial<D> {
    /// Monomial in the unshifted coordinates.
    #[must_use]
    pub fn new(exponents: [u8; D]) -> Self {
        Self {
            exponents,
            center: [0.0; D],
            scale: 1.0,
        }
    }

    #[must_use]
    pub fn degree(&self) -> usize {
        self.exponents.iter().map(|&e| e as usize).sum()
    }

    #[inline]
    #[must_use]
    pub fn value_at(&self, x: &Point<D>) -> f64 {
        let mut p = 1.0;
        for k in 0..D {
            let xi = self.scale * (x.0[k] - self.center[k]);
            for _ in 0..self.exponents[k] {
                p *= xi;
            }
        }
        p
    }
}

impl<const D: usize> Field<D> for Monomial<D> {
    fn kind(&self) -> ValueKind {
        ValueKind::Scalar
    }

    #[inline]
    fn evaluate(&self, x: &Point<D>) -> Value<D> {
        Value::Scalar(self.value_at(x))
    }

    fn gradient(&self) -> Result<FieldRef<D>> {
        let mut coeffs = Vec::new();
        let mut fields: Vec<FieldRef<D>> = Vec::new();
        for k in 0..D {
            let e = self.exponents[k];
            if e == 0 {
                continue;
            }
            let mut m = *self;
            m.exponents[k] -= 1;
            coeffs.push(Value::Vector(VectorValue::unit(k) * (self.scale * f64::from(e))));
            fields.push(Arc::new(m));
        }
        if fields.is_empty() {
            return Ok(constant(Value::Vector(VectorValue::zero())));
        }
        linear_combination(&coeffs, &fields)
    }

    fn label(&self) -> String {
        alloc::format!("Monomial{:?}", self.exponents)
    }
}
