//! Manufactured solutions and their hand-derived loads.
//!
//! Exact solutions are built over dual numbers so that error norms use
//! automatically differentiated gradients. Loads (`-Δu`, `n·∇u`, the Stokes
//! forcing) are written out by hand.

use std::f64::consts::PI;

use lazyfe_core::fields::{Dual, FieldRef, GenericField, Value, ValueKind};
use lazyfe_core::tensors::{Point, VectorValue};
use serde::{Deserialize, Serialize};

/// Choice of exact solution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Solution {
    /// `u = (x₁ + … + x_D)^k` for Poisson, the quadratic/linear pair for Stokes.
    #[default]
    Polynomial,
    /// `u = Π sin(π x_i)` (Poisson only).
    Sine,
    /// Zero solution with zero data.
    Zero,
}

/// Exact Poisson solution of order `k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoissonSolution {
    pub kind: Solution,
    pub k: usize,
}

impl PoissonSolution {
    pub fn new(kind: Solution, k: usize) -> Self {
        Self { kind, k }
    }

    pub fn value<const D: usize>(&self, x: &[f64; D]) -> f64 {
        match self.kind {
            Solution::Polynomial => x.iter().sum::<f64>().powi(self.k as i32),
            Solution::Sine => x.iter().map(|xi| (PI * xi).sin()).product(),
            Solution::Zero => 0.0,
        }
    }

    pub fn gradient<const D: usize>(&self, x: &[f64; D]) -> [f64; D] {
        match self.kind {
            Solution::Polynomial => {
                let k = self.k as f64;
                let s: f64 = x.iter().sum();
                [k * s.powi(self.k as i32 - 1); D]
            }
            Solution::Sine => std::array::from_fn(|i| {
                (0..D)
                    .map(|j| if i == j { PI * (PI * x[j]).cos() } else { (PI * x[j]).sin() })
                    .product()
            }),
            Solution::Zero => [0.0; D],
        }
    }

    pub fn laplacian<const D: usize>(&self, x: &[f64; D]) -> f64 {
        match self.kind {
            Solution::Polynomial if self.k >= 2 => {
                let k = self.k as f64;
                let s: f64 = x.iter().sum();
                D as f64 * k * (k - 1.0) * s.powi(self.k as i32 - 2)
            }
            Solution::Polynomial | Solution::Zero => 0.0,
            Solution::Sine => -(D as f64) * PI * PI * self.value(x),
        }
    }

    /// `u` as a field with an automatic gradient.
    pub fn field<const D: usize>(&self) -> FieldRef<D> {
        let (kind, k) = (self.kind, self.k as i32);
        GenericField::scalar(move |x: &[Dual<D>; D]| match kind {
            Solution::Polynomial => x.iter().fold(Dual::from(0.0), |s, &xi| s + xi).powi(k),
            Solution::Sine => x.iter().fold(Dual::from(1.0), |p, &xi| p * (xi * PI).sin()),
            Solution::Zero => Dual::from(0.0),
        })
        .with_label("u")
        .into_ref()
    }

    /// The source `f = -Δu`.
    pub fn source<const D: usize>(&self) -> FieldRef<D> {
        let s = *self;
        GenericField::from_fn(ValueKind::Scalar, move |x: &Point<D>| Value::Scalar(-s.laplacian(&x.0)))
            .with_label("f")
            .into_ref()
    }

    /// `∇u`, contracted with the outer normal to give Neumann data.
    pub fn flux<const D: usize>(&self) -> FieldRef<D> {
        let s = *self;
        GenericField::from_fn(ValueKind::Vector, move |x: &Point<D>| Value::Vector(VectorValue(s.gradient(&x.0))))
            .with_label("grad u")
            .into_ref()
    }
}

/// Stokes pair `u = (x₁² + 2x₂², -x₂², 0)`, `p = x₁ + 3x₂`, truncated to
/// the first `D` velocity components, or the zero pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StokesSolution {
    pub zero: bool,
}

impl StokesSolution {
    fn s(&self) -> f64 {
        if self.zero {
            0.0
        } else {
            1.0
        }
    }

    pub fn velocity<const D: usize>(&self, x: &[f64; D]) -> [f64; D] {
        let mut u = [0.0; D];
        u[0] = x[0] * x[0] + 2.0 * x[1] * x[1];
        u[1] = -x[1] * x[1];
        u.map(|v| self.s() * v)
    }

    pub fn velocity_laplacian<const D: usize>(&self) -> [f64; D] {
        let mut l = [0.0; D];
        l[0] = 6.0 * self.s();
        l[1] = -2.0 * self.s();
        l
    }

    pub fn pressure<const D: usize>(&self, x: &[f64; D]) -> f64 {
        self.s() * (x[0] + 3.0 * x[1])
    }

    pub fn pressure_gradient<const D: usize>(&self) -> [f64; D] {
        let mut g = [0.0; D];
        g[0] = self.s();
        g[1] = 3.0 * self.s();
        g
    }

    /// `f = -Δu + ∇p`.
    pub fn forcing<const D: usize>(&self) -> [f64; D] {
        let (l, g) = (self.velocity_laplacian::<D>(), self.pressure_gradient::<D>());
        std::array::from_fn(|i| g[i] - l[i])
    }

    /// `∇·u`.
    pub fn divergence<const D: usize>(&self, x: &[f64; D]) -> f64 {
        self.s() * (2.0 * x[0] - 2.0 * x[1])
    }

    pub fn velocity_field<const D: usize>(&self) -> FieldRef<D> {
        let s = self.s();
        GenericField::vector(move |x: &[Dual<D>; D]| {
            let mut u = [Dual::from(0.0); D];
            u[0] = (x[0] * x[0] + 2.0 * x[1] * x[1]) * s;
            u[1] = -(x[1] * x[1]) * s;
            u
        })
        .with_label("u")
        .into_ref()
    }

    pub fn pressure_field<const D: usize>(&self) -> FieldRef<D> {
        let s = self.s();
        GenericField::scalar(move |x: &[Dual<D>; D]| (x[0] + 3.0 * x[1]) * s)
            .with_label("p")
            .into_ref()
    }

    pub fn forcing_field<const D: usize>(&self) -> FieldRef<D> {
        let f = Value::Vector(VectorValue(self.forcing::<D>()));
        GenericField::from_fn(ValueKind::Vector, move |_: &Point<D>| f.clone())
            .with_label("f")
            .into_ref()
    }

    pub fn divergence_field<const D: usize>(&self) -> FieldRef<D> {
        let s = *self;
        GenericField::from_fn(ValueKind::Scalar, move |x: &Point<D>| Value::Scalar(s.divergence(&x.0)))
            .with_label("g")
            .into_ref()
    }
}

/// Inflow profile `(0, 0, (1-(4x₁-1)²)(1-(2x₂-1)²))` of the channel
/// benchmark, with the profile in the last component.
pub fn inflow_profile<const D: usize>() -> FieldRef<D> {
    GenericField::from_fn(ValueKind::Vector, |x: &Point<D>| {
        let a = 1.0 - (4.0 * x[0] - 1.0).powi(2);
        let b = 1.0 - (2.0 * x[1] - 1.0).powi(2);
        let mut u = [0.0; D];
        u[D - 1] = a * b;
        Value::Vector(VectorValue(u))
    })
    .with_label("inflow")
    .into_ref()
}

/// The zero vector field.
pub fn zero_vector<const D: usize>() -> FieldRef<D> {
    GenericField::from_fn(ValueKind::Vector, |_: &Point<D>| Value::Vector(VectorValue([0.0; D])))
        .with_label("0")
        .into_ref()
}
