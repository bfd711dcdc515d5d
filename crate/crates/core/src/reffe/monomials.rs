use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::error::{Error, Result};
use crate::fields::{linear_combination, FieldRef, Monomial, Value};
use crate::tensors::VectorValue;

/// Selection of exponent tuples from the tensor-product space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyFilter {
    /// Total degree at most `order`.
    P,
    /// Every partial degree at most `order`.
    Q,
}

/// A set of monomials, optionally replicated per vector component.
#[derive(Clone, Debug, PartialEq)]
pub struct MonomialBasis<const D: usize> {
    exponents: Vec<[u8; D]>,
    ncomp: usize,
    center: [f64; D],
    scale: f64,
}

/// Scalar monomials of the given order, sorted by total degree and then
/// lexicographically with higher leading exponents first.
pub fn monomial_basis<const D: usize>(order: usize, filter: PolyFilter) -> Result<MonomialBasis<D>> {
    if !(1..=3).contains(&D) {
        return Err(Error::Unsupported(alloc::format!("monomials in dimension {D}")));
    }
    let k = u8::try_from(order).map_err(|_| Error::Unsupported(alloc::format!("order {order}")))?;
    let mut exponents = Vec::new();
    let mut e = [0u8; D];
    loop {
        let keep = match filter {
            PolyFilter::P => e.iter().map(|&x| usize::from(x)).sum::<usize>() <= order,
            PolyFilter::Q => true,
        };
        if keep {
            exponents.push(e);
        }
        let mut i = 0;
        loop {
            if i == D {
                exponents.sort_by_key(|e| (e.iter().map(|&x| u32::from(x)).sum::<u32>(), Reverse(*e)));
                return Ok(MonomialBasis {
                    exponents,
                    ncomp: 1,
                    center: [0.0; D],
                    scale: 1.0,
                });
            }
            if e[i] < k {
                e[i] += 1;
                break;
            }
            e[i] = 0;
            i += 1;
        }
    }
}

impl<const D: usize> MonomialBasis<D> {
    #[must_use]
    pub fn exponents(&self) -> &[[u8; D]] {
        &self.exponents
    }

    /// Number of members, counting component replicas.
    #[must_use]
    pub fn len(&self) -> usize {
        self.exponents.len() * self.ncomp
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    #[must_use]
    pub fn num_components(&self) -> usize {
        self.ncomp
    }

    /// Replicates the basis over the `D` vector components. Member
    /// `c * n + j` is monomial `j` times the unit vector `e_c`.
    #[must_use]
    pub fn vectorized(mut self) -> Self {
        self.ncomp = D;
        self
    }

    /// Rewrites the monomials in the coordinates `scale (x − center)`. The
    /// spanned space is unchanged; only the conditioning of nodal matrices
    /// improves.
    #[must_use]
    pub fn shifted(mut self, center: [f64; D], scale: f64) -> Self {
        self.center = center;
        self.scale = scale;
        self
    }

    #[must_use]
    pub fn monomial(&self, j: usize) -> Monomial<D> {
        Monomial {
            exponents: self.exponents[j],
            center: self.center,
            scale: self.scale,
        }
    }

    /// The members as fields.
    pub fn fields(&self) -> Result<Vec<FieldRef<D>>> {
        let scalars: Vec<FieldRef<D>> = (0..self.exponents.len())
            .map(|j| Arc::new(self.monomial(j)) as FieldRef<D>)
            .collect();
        if self.ncomp == 1 {
            return Ok(scalars);
        }
        let mut out = Vec::with_capacity(self.len());
        for c in 0..self.ncomp {
            for m in &scalars {
                out.push(linear_combination(
                    &[Value::Vector(VectorValue::unit(c))],
                    core::slice::from_ref(m),
                )?);
            }
        }
        Ok(out)
    }
}
