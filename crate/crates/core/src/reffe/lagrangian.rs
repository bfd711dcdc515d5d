use alloc::format;
use alloc::vec::Vec;

use super::MonomialBasis;
use crate::dense::Lu;
use crate::error::{Error, Result};
use crate::fields::{linear_combination_columns, FieldRef, Value};
use crate::tensors::Point;

/// Point evaluations, optionally of one vector component.
///
/// DOF `c * nnodes + n` evaluates component `c` at node `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct LagrangianDofBasis<const D: usize> {
    nodes: Vec<Point<D>>,
    ncomp: usize,
}

impl<const D: usize> LagrangianDofBasis<D> {
    #[must_use]
    pub fn new(nodes: Vec<Point<D>>, ncomp: usize) -> Self {
        Self { nodes, ncomp }
    }

    #[must_use]
    pub fn nodes(&self) -> &[Point<D>] {
        &self.nodes
    }

    #[must_use]
    pub fn num_components(&self) -> usize {
        self.ncomp
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.nodes.len() * self.ncomp
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `(component, node)` of DOF `i`.
    #[must_use]
    pub fn selector(&self, i: usize) -> (usize, usize) {
        (i / self.nodes.len(), i % self.nodes.len())
    }

    /// Applies DOF `i` to a field.
    #[must_use]
    pub fn apply(&self, i: usize, f: &FieldRef<D>) -> f64 {
        let (c, n) = self.selector(i);
        f.evaluate(&self.nodes[n]).component(c)
    }

    /// Applies DOF `i` to a function of a point.
    pub fn apply_fn(&self, i: usize, f: impl Fn(&Point<D>) -> Value<D>) -> f64 {
        let (c, n) = self.selector(i);
        f(&self.nodes[n]).component(c)
    }

    /// The row-major matrix `A_ij = dof_i(f_j)`.
    #[must_use]
    pub fn matrix(&self, fields: &[FieldRef<D>]) -> Vec<f64> {
        let m = fields.len();
        let mut a = alloc::vec![0.0; self.len() * m];
        let vals: Vec<Vec<Value<D>>> = fields
            .iter()
            .map(|f| self.nodes.iter().map(|x| f.evaluate(x)).collect())
            .collect();
        for i in 0..self.len() {
            let (c, n) = self.selector(i);
            for j in 0..m {
                a[i * m + j] = vals[j][n].component(c);
            }
        }
        a
    }
}

/// Shape functions dual to `dofs` in the span of `monomials`:
/// `s_i = Σ_j (A⁻¹)_ji m_j` with `A_ij = dof_i(m_j)`.
pub fn change_of_basis<const D: usize>(
    dofs: &LagrangianDofBasis<D>,
    monomials: &MonomialBasis<D>,
) -> Result<Vec<FieldRef<D>>> {
    let n = dofs.len();
    if monomials.len() != n {
        return Err(Error::IllPosedElement(format!(
            "{n} dofs for {} monomials",
            monomials.len()
        )));
    }
    let (m, inv) = dual_coefficients(dofs, monomials)?;
    linear_combination_columns(&inv, n, &m)
}

/// The monomial fields and the row-major inverse nodal matrix `A⁻¹`, whose
/// column `i` expands shape function `i` in the monomials.
pub(crate) fn dual_coefficients<const D: usize>(
    dofs: &LagrangianDofBasis<D>,
    monomials: &MonomialBasis<D>,
) -> Result<(Vec<FieldRef<D>>, Vec<f64>)> {
    let m = monomials.fields()?;
    let a = dofs.matrix(&m);
    let lu = Lu::new(&a, dofs.len()).map_err(|e| Error::IllPosedElement(format!("nodal matrix: {e}")))?;
    Ok((m, lu.inverse()))
}
