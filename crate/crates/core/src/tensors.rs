//! Fixed-size first and second order tensors.
//!
//! `TensorValue<D1, D2>` is stored row-major: `t.0[i][j]` is the entry in row
//! `i`, column `j`. All operations are allocation free and the dimension is a
//! compile-time constant, so loops over components are fully unrolled.

use core::ops::{Add, AddAssign, Div, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};

/// A vector with `D` components.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VectorValue<const D: usize>(pub [f64; D]);

/// A point in `D`-dimensional space.
pub type Point<const D: usize> = VectorValue<D>;

/// A `D1 x D2` second order tensor, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TensorValue<const D1: usize, const D2: usize>(pub [[f64; D2]; D1]);

impl<const D: usize> Default for VectorValue<D> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<const D1: usize, const D2: usize> Default for TensorValue<D1, D2> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<const D: usize> VectorValue<D> {
    #[inline]
    #[must_use]
    pub const fn new(c: [f64; D]) -> Self {
        Self(c)
    }

    #[inline]
    #[must_use]
    pub const fn zero() -> Self {
        Self([0.0; D])
    }

    /// The `k`-th Cartesian unit vector.
    #[inline]
    #[must_use]
    pub fn unit(k: usize) -> Self {
        let mut c = [0.0; D];
        c[k] = 1.0;
        Self(c)
    }

    #[inline]
    #[must_use]
    pub fn dot(&self, other: &Self) -> f64 {
        let mut s = 0.0;
        for k in 0..D {
            s += self.0[k] * other.0[k];
        }
        s
    }

    #[inline]
    #[must_use]
    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    #[inline]
    #[must_use]
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_squared())
    }

    /// Outer product `u ⊗ v` with entries `u_i v_j`.
    #[inline]
    #[must_use]
    pub fn outer<const D2: usize>(&self, other: &VectorValue<D2>) -> TensorValue<D, D2> {
        let mut t = [[0.0; D2]; D];
        for i in 0..D {
            for j in 0..D2 {
                t[i][j] = self.0[i] * other.0[j];
            }
        }
        TensorValue(t)
    }

    /// Vector-tensor contraction `(v·A)_j = Σ_i v_i A_ij`.
    #[inline]
    #[must_use]
    pub fn dot_tensor<const D2: usize>(&self, a: &TensorValue<D, D2>) -> VectorValue<D2> {
        let mut r = [0.0; D2];
        for i in 0..D {
            for j in 0..D2 {
                r[j] += self.0[i] * a.0[i][j];
            }
        }
        VectorValue(r)
    }

    #[inline]
    #[must_use]
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut m: f64 = 0.0;
        for k in 0..D {
            m = m.max((self.0[k] - other.0[k]).abs());
        }
        m
    }
}

impl<const D: usize> Index<usize> for VectorValue<D> {
    type Output = f64;
    #[inline]
    fn index(&self, k: usize) -> &f64 {
        &self.0[k]
    }
}

impl<const D: usize> IndexMut<usize> for VectorValue<D> {
    #[inline]
    fn index_mut(&mut self, k: usize) -> &mut f64 {
        &mut self.0[k]
    }
}

impl<const D: usize> Add for VectorValue<D> {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl<const D: usize> AddAssign for VectorValue<D> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        for k in 0..D {
            self.0[k] += rhs.0[k];
        }
    }
}

impl<const D: usize> Sub for VectorValue<D> {
    type Output = Self;
    #[inline]
    fn sub(mut self, rhs: Self) -> Self {
        self -= rhs;
        self
    }
}

impl<const D: usize> SubAssign for VectorValue<D> {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        for k in 0..D {
            self.0[k] -= rhs.0[k];
        }
    }
}

impl<const D: usize> Neg for VectorValue<D> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl<const D: usize> Mul<f64> for VectorValue<D> {
    type Output = Self;
    #[inline]
    fn mul(mut self, s: f64) -> Self {
        for k in 0..D {
            self.0[k] *= s;
        }
        self
    }
}

impl<const D: usize> Mul<VectorValue<D>> for f64 {
    type Output = VectorValue<D>;
    #[inline]
    fn mul(self, v: VectorValue<D>) -> VectorValue<D> {
        v * self
    }
}

impl<const D: usize> Div<f64> for VectorValue<D> {
    type Output = Self;
    #[inline]
    fn div(self, s: f64) -> Self {
        self * (1.0 / s)
    }
}

impl<const D1: usize, const D2: usize> TensorValue<D1, D2> {
    #[inline]
    #[must_use]
    pub const fn new(rows: [[f64; D2]; D1]) -> Self {
        Self(rows)
    }

    #[inline]
    #[must_use]
    pub const fn zero() -> Self {
        Self([[0.0; D2]; D1])
    }

    #[inline]
    #[must_use]
    pub fn transpose(&self) -> TensorValue<D2, D1> {
        let mut t = [[0.0; D1]; D2];
        for i in 0..D1 {
            for j in 0..D2 {
                t[j][i] = self.0[i][j];
            }
        }
        TensorValue(t)
    }

    /// Matrix-vector product `(A·v)_i = Σ_j A_ij v_j`.
    #[inline]
    #[must_use]
    pub fn matvec(&self, v: &VectorValue<D2>) -> VectorValue<D1> {
        let mut r = [0.0; D1];
        for i in 0..D1 {
            for j in 0..D2 {
                r[i] += self.0[i][j] * v.0[j];
            }
        }
        VectorValue(r)
    }

    /// Single contraction `(A·B)_ik = Σ_j A_ij B_jk`.
    #[inline]
    #[must_use]
    pub fn dot<const D3: usize>(&self, b: &TensorValue<D2, D3>) -> TensorValue<D1, D3> {
        let mut r = [[0.0; D3]; D1];
        for i in 0..D1 {
            for j in 0..D2 {
                let a = self.0[i][j];
                for k in 0..D3 {
                    r[i][k] += a * b.0[j][k];
                }
            }
        }
        TensorValue(r)
    }

    /// Double contraction `Σ_ij A_ij B_ij`.
    #[inline]
    #[must_use]
    pub fn inner(&self, b: &Self) -> f64 {
        let mut s = 0.0;
        for i in 0..D1 {
            for j in 0..D2 {
                s += self.0[i][j] * b.0[i][j];
            }
        }
        s
    }

    /// Largest absolute entry.
    #[inline]
    #[must_use]
    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for row in &self.0 {
            for a in row {
                m = m.max(a.abs());
            }
        }
        m
    }

    #[inline]
    #[must_use]
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (*self - *other).max_abs()
    }

    #[inline]
    #[must_use]
    pub fn row(&self, i: usize) -> VectorValue<D2> {
        VectorValue(self.0[i])
    }
}

impl<const D: usize> TensorValue<D, D> {
    #[inline]
    #[must_use]
    pub fn identity() -> Self {
        let mut t = [[0.0; D]; D];
        for (i, row) in t.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Self(t)
    }

    #[inline]
    #[must_use]
    pub fn trace(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..D {
            s += self.0[i][i];
        }
        s
    }

    /// Determinant by closed-form cofactor expansion (`D <= 3`).
    #[inline]
    #[must_use]
    pub fn det(&self) -> f64 {
        let a = &self.0;
        match D {
            0 => 1.0,
            1 => a[0][0],
            2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
            3 => {
                a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                    - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                    + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
            }
            _ => panic!("det is only implemented for D <= 3"),
        }
    }

    /// Inverse without a singularity check.
    #[inline]
    #[must_use]
    pub fn inv_unchecked(&self) -> Self {
        let a = &self.0;
        let d = self.det();
        let mut r = [[0.0; D]; D];
        match D {
            1 => r[0][0] = 1.0 / d,
            2 => {
                let s = 1.0 / d;
                r[0][0] = a[1][1] * s;
                r[0][1] = -a[0][1] * s;
                r[1][0] = -a[1][0] * s;
                r[1][1] = a[0][0] * s;
            }
            3 => {
                let s = 1.0 / d;
                r[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) * s;
                r[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) * s;
                r[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) * s;
                r[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) * s;
                r[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) * s;
                r[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) * s;
                r[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) * s;
                r[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) * s;
                r[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) * s;
            }
            _ => panic!("inv is only implemented for 1 <= D <= 3"),
        }
        Self(r)
    }

    /// Inverse; fails when `|det| <= 1e-14 * max|a_ij|`.
    pub fn inv(&self) -> Result<Self> {
        let d = self.det();
        if d.abs() <= SINGULAR_TOL * self.max_abs() {
            return Err(Error::SingularMatrix { det: d });
        }
        Ok(self.inv_unchecked())
    }
}

/// Relative singularity threshold used by [`TensorValue::inv`].
pub const SINGULAR_TOL: f64 = 1e-14;

impl<const D1: usize, const D2: usize> Add for TensorValue<D1, D2> {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl<const D1: usize, const D2: usize> AddAssign for TensorValue<D1, D2> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        for i in 0..D1 {
            for j in 0..D2 {
                self.0[i][j] += rhs.0[i][j];
            }
        }
    }
}

impl<const D1: usize, const D2: usize> Sub for TensorValue<D1, D2> {
    type Output = Self;
    #[inline]
    fn sub(mut self, rhs: Self) -> Self {
        for i in 0..D1 {
            for j in 0..D2 {
                self.0[i][j] -= rhs.0[i][j];
            }
        }
        self
    }
}

impl<const D1: usize, const D2: usize> Neg for TensorValue<D1, D2> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl<const D1: usize, const D2: usize> Mul<f64> for TensorValue<D1, D2> {
    type Output = Self;
    #[inline]
    fn mul(mut self, s: f64) -> Self {
        for i in 0..D1 {
            for j in 0..D2 {
                self.0[i][j] *= s;
            }
        }
        self
    }
}

impl<const D1: usize, const D2: usize> Mul<TensorValue<D1, D2>> for f64 {
    type Output = TensorValue<D1, D2>;
    #[inline]
    fn mul(self, t: TensorValue<D1, D2>) -> TensorValue<D1, D2> {
        t * self
    }
}

impl<const D1: usize, const D2: usize> Index<(usize, usize)> for TensorValue<D1, D2> {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl<const D1: usize, const D2: usize> IndexMut<(usize, usize)> for TensorValue<D1, D2> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.0[i][j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_examples() {
        let u = VectorValue([1.0, 2.0, 3.0]);
        let v = VectorValue([4.0, 5.0, 6.0]);
        assert_eq!(u.dot(&v), 32.0);
        assert_eq!(VectorValue([3.5, -2.0]).dot(&VectorValue::zero()), 0.0);
    }

    #[test]
    fn outer_basis() {
        let t = VectorValue([1.0, 0.0]).outer(&VectorValue([0.0, 1.0]));
        assert_eq!(t, TensorValue([[0.0, 1.0], [0.0, 0.0]]));
    }

    #[test]
    fn identity_matvec() {
        let v = VectorValue([1.5, -2.0, 0.25]);
        assert_eq!(TensorValue::<3, 3>::identity().matvec(&v), v);
    }

    #[test]
    fn det_and_inv_closed_form() {
        assert_eq!(TensorValue::<3, 3>::identity().det(), 1.0);
        let a = TensorValue([[2.0, 0.0], [0.0, 3.0]]);
        assert_eq!(a.det(), 6.0);
        assert_eq!(a.inv().unwrap(), TensorValue([[0.5, 0.0], [0.0, 1.0 / 3.0]]));
        assert_eq!(TensorValue([[4.0]]).inv().unwrap(), TensorValue([[0.25]]));
    }

    #[test]
    fn singular_is_reported() {
        let a = TensorValue([[1.0, 2.0], [2.0, 4.0]]);
        assert!(matches!(a.inv(), Err(Error::SingularMatrix { .. })));
        assert!(TensorValue::<3, 3>::zero().inv().is_err());
    }

    #[test]
    fn vector_tensor_contraction() {
        let a = TensorValue([[1.0, 2.0], [3.0, 4.0]]);
        let v = VectorValue([1.0, 1.0]);
        assert_eq!(v.dot_tensor(&a), VectorValue([4.0, 6.0]));
        assert_eq!(a.matvec(&v), VectorValue([3.0, 7.0]));
        assert_eq!(a.transpose().transpose(), a);
        assert_eq!(a.trace(), 5.0);
    }
}
