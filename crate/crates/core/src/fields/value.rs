use alloc::format;

use crate::error::{Error, Result};
use crate::tensors::{TensorValue, VectorValue};

/// Shape of a field value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ValueKind {
    Scalar,
    Vector,
    Tensor,
}

impl ValueKind {
    /// Kind of the gradient of a field of this kind.
    pub fn gradient(self) -> Result<ValueKind> {
        match self {
            ValueKind::Scalar => Ok(ValueKind::Vector),
            ValueKind::Vector => Ok(ValueKind::Tensor),
            ValueKind::Tensor => Err(Error::Unsupported("gradient of a tensor-valued field".into())),
        }
    }

    /// Number of scalar components in dimension `d`.
    #[must_use]
    pub fn num_components(self, d: usize) -> usize {
        match self {
            ValueKind::Scalar => 1,
            ValueKind::Vector => d,
            ValueKind::Tensor => d * d,
        }
    }
}

/// A scalar, vector or second order tensor value in dimension `D`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Value<const D: usize> {
    Scalar(f64),
    Vector(VectorValue<D>),
    Tensor(TensorValue<D, D>),
}

impl<const D: usize> Default for Value<D> {
    fn default() -> Self {
        Value::Scalar(0.0)
    }
}

impl<const D: usize> From<f64> for Value<D> {
    fn from(s: f64) -> Self {
        Value::Scalar(s)
    }
}

impl<const D: usize> From<VectorValue<D>> for Value<D> {
    fn from(v: VectorValue<D>) -> Self {
        Value::Vector(v)
    }
}

impl<const D: usize> From<TensorValue<D, D>> for Value<D> {
    fn from(t: TensorValue<D, D>) -> Self {
        Value::Tensor(t)
    }
}

impl<const D: usize> Value<D> {
    #[inline]
    #[must_use]
    pub fn kind(&self) -> ValueKind {
        match self {
            Value::Scalar(_) => ValueKind::Scalar,
            Value::Vector(_) => ValueKind::Vector,
            Value::Tensor(_) => ValueKind::Tensor,
        }
    }

    #[inline]
    #[must_use]
    pub fn zero(kind: ValueKind) -> Self {
        match kind {
            ValueKind::Scalar => Value::Scalar(0.0),
            ValueKind::Vector => Value::Vector(VectorValue::zero()),
            ValueKind::Tensor => Value::Tensor(TensorValue::zero()),
        }
    }

    /// # Panics
    /// Panics if the value is not a scalar.
    #[inline]
    #[must_use]
    pub fn scalar(&self) -> f64 {
        match self {
            Value::Scalar(s) => *s,
            _ => panic!("expected a scalar value, found {:?}", self.kind()),
        }
    }

    /// # Panics
    /// Panics if the value is not a vector.
    #[inline]
    #[must_use]
    pub fn vector(&self) -> VectorValue<D> {
        match self {
            Value::Vector(v) => *v,
            _ => panic!("expected a vector value, found {:?}", self.kind()),
        }
    }

    /// # Panics
    /// Panics if the value is not a tensor.
    #[inline]
    #[must_use]
    pub fn tensor(&self) -> TensorValue<D, D> {
        match self {
            Value::Tensor(t) => *t,
            _ => panic!("expected a tensor value, found {:?}", self.kind()),
        }
    }

    /// Component `k` in row-major order.
    #[inline]
    #[must_use]
    pub fn component(&self, k: usize) -> f64 {
        match self {
            Value::Scalar(s) => {
                assert_eq!(k, 0);
                *s
            }
            Value::Vector(v) => v.0[k],
            Value::Tensor(t) => t.0[k / D][k % D],
        }
    }

    #[inline]
    #[must_use]
    pub fn scale(&self, s: f64) -> Self {
        match self {
            Value::Scalar(a) => Value::Scalar(a * s),
            Value::Vector(v) => Value::Vector(*v * s),
            Value::Tensor(t) => Value::Tensor(*t * s),
        }
    }

    /// Largest absolute component.
    #[must_use]
    pub fn max_abs(&self) -> f64 {
        match self {
            Value::Scalar(a) => a.abs(),
            Value::Vector(v) => v.0.iter().fold(0.0f64, |m, x| m.max(x.abs())),
            Value::Tensor(t) => t.max_abs(),
        }
    }

    /// Largest absolute component difference; infinite for different kinds.
    #[must_use]
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.kind() != other.kind() {
            return f64::INFINITY;
        }
        BinaryOp::Sub.apply(self, other).max_abs()
    }

    /// `self += s * other`; both must have the same kind.
    #[inline]
    pub fn axpy(&mut self, s: f64, other: &Self) {
        match (self, other) {
            (Value::Scalar(a), Value::Scalar(b)) => *a += s * b,
            (Value::Vector(a), Value::Vector(b)) => *a += *b * s,
            (Value::Tensor(a), Value::Tensor(b)) => *a += *b * s,
            (a, b) => panic!("axpy on {:?} and {:?}", a.kind(), b.kind()),
        }
    }
}

/// Pointwise binary operations on values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    /// Scaling, and matrix products for tensor operands.
    Mul,
    /// Division by a scalar.
    Div,
    /// Single contraction.
    Dot,
    /// Full contraction.
    Inner,
    /// Tensor product.
    Outer,
}

impl BinaryOp {
    #[must_use]
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Dot => "dot",
            BinaryOp::Inner => "inner",
            BinaryOp::Outer => "outer",
        }
    }

    /// Result kind, or a shape error for incompatible operands.
    pub fn result_kind(self, a: ValueKind, b: ValueKind) -> Result<ValueKind> {
        use ValueKind::{Scalar as S, Tensor as T, Vector as V};
        let r = match (self, a, b) {
            (BinaryOp::Add | BinaryOp::Sub, x, y) if x == y => Some(x),
            (BinaryOp::Mul | BinaryOp::Dot | BinaryOp::Outer, S, x) => Some(x),
            (BinaryOp::Mul | BinaryOp::Dot | BinaryOp::Outer, x, S) => Some(x),
            (BinaryOp::Mul | BinaryOp::Dot, T, V) | (BinaryOp::Mul | BinaryOp::Dot, V, T) => Some(V),
            (BinaryOp::Mul | BinaryOp::Dot, T, T) => Some(T),
            (BinaryOp::Dot, V, V) => Some(S),
            (BinaryOp::Div, x, S) => Some(x),
            (BinaryOp::Inner, x, y) if x == y => Some(S),
            (BinaryOp::Outer, V, V) => Some(T),
            _ => None,
        };
        r.ok_or_else(|| Error::Shape(format!("cannot apply {} to {a:?} and {b:?}", self.symbol())))
    }

    /// Applies the operation.
    ///
    /// # Panics
    /// Panics on operands rejected by [`BinaryOp::result_kind`].
    #[inline]
    #[must_use]
    pub fn apply<const D: usize>(self, a: &Value<D>, b: &Value<D>) -> Value<D> {
        use Value::{Scalar as S, Tensor as T, Vector as V};
        match (self, a, b) {
            (BinaryOp::Add, S(x), S(y)) => S(x + y),
            (BinaryOp::Add, V(x), V(y)) => V(*x + *y),
            (BinaryOp::Add, T(x), T(y)) => T(*x + *y),
            (BinaryOp::Sub, S(x), S(y)) => S(x - y),
            (BinaryOp::Sub, V(x), V(y)) => V(*x - *y),
            (BinaryOp::Sub, T(x), T(y)) => T(*x - *y),
            (BinaryOp::Mul | BinaryOp::Dot | BinaryOp::Outer, S(x), y) => y.scale(*x),
            (BinaryOp::Mul | BinaryOp::Dot | BinaryOp::Outer, x, S(y)) => x.scale(*y),
            (BinaryOp::Mul | BinaryOp::Dot, T(x), V(y)) => V(x.matvec(y)),
            (BinaryOp::Mul | BinaryOp::Dot, V(x), T(y)) => V(x.dot_tensor(y)),
            (BinaryOp::Mul | BinaryOp::Dot, T(x), T(y)) => T(x.dot(y)),
            (BinaryOp::Dot | BinaryOp::Inner, V(x), V(y)) => S(x.dot(y)),
            (BinaryOp::Inner, S(x), S(y)) => S(x * y),
            (BinaryOp::Inner, T(x), T(y)) => S(x.inner(y)),
            (BinaryOp::Div, x, S(y)) => x.scale(1.0 / y),
            (BinaryOp::Outer, V(x), V(y)) => T(x.outer(y)),
            _ => panic!(
                "cannot apply {} to {:?} and {:?}",
                self.symbol(),
                a.kind(),
                b.kind()
            ),
        }
    }
}

/// Pointwise unary operations on values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Transpose,
    Trace,
    /// Euclidean (Frobenius) norm.
    Norm,
}

impl UnaryOp {
    #[must_use]
    pub fn symbol(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Transpose => "transpose",
            UnaryOp::Trace => "tr",
            UnaryOp::Norm => "norm",
        }
    }

    pub fn result_kind(self, a: ValueKind) -> Result<ValueKind> {
        match (self, a) {
            (UnaryOp::Neg, x) => Ok(x),
            (UnaryOp::Transpose, ValueKind::Tensor) => Ok(ValueKind::Tensor),
            (UnaryOp::Trace, ValueKind::Tensor) => Ok(ValueKind::Scalar),
            (UnaryOp::Norm, _) => Ok(ValueKind::Scalar),
            _ => Err(Error::Shape(format!("cannot apply {} to {a:?}", self.symbol()))),
        }
    }

    /// # Panics
    /// Panics on operands rejected by [`UnaryOp::result_kind`].
    #[inline]
    #[must_use]
    pub fn apply<const D: usize>(self, a: &Value<D>) -> Value<D> {
        match (self, a) {
            (UnaryOp::Neg, x) => x.scale(-1.0),
            (UnaryOp::Transpose, Value::Tensor(t)) => Value::Tensor(t.transpose()),
            (UnaryOp::Trace, Value::Tensor(t)) => Value::Scalar(t.trace()),
            (UnaryOp::Norm, Value::Scalar(s)) => Value::Scalar(s.abs()),
            (UnaryOp::Norm, Value::Vector(v)) => Value::Scalar(v.norm()),
            (UnaryOp::Norm, Value::Tensor(t)) => Value::Scalar(libm::sqrt(t.inner(t))),
            _ => panic!("cannot apply {} to {:?}", self.symbol(), a.kind()),
        }
    }
}
