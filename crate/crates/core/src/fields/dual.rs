use core::ops::{Add, Div, Mul, Neg, Sub};

/// Forward-mode dual number carrying `D` directional derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<const D: usize> {
    pub v: f64,
    pub d: [f64; D],
}

impl<const D: usize> Dual<D> {
    #[inline]
    #[must_use]
    pub const fn constant(v: f64) -> Self {
        Self { v, d: [0.0; D] }
    }

    /// Independent variable `k` with value `v`.
    #[inline]
    #[must_use]
    pub fn variable(v: f64, k: usize) -> Self {
        let mut d = [0.0; D];
        d[k] = 1.0;
        Self { v, d }
    }

    /// Applies a scalar function with value `f` and derivative `df` at `self.v`.
    #[inline]
    #[must_use]
    pub fn chain(self, f: f64, df: f64) -> Self {
        let mut d = self.d;
        for x in &mut d {
            *x *= df;
        }
        Self { v: f, d }
    }

    #[inline]
    #[must_use]
    pub fn sin(self) -> Self {
        self.chain(libm::sin(self.v), libm::cos(self.v))
    }

    #[inline]
    #[must_use]
    pub fn cos(self) -> Self {
        self.chain(libm::cos(self.v), -libm::sin(self.v))
    }

    #[inline]
    #[must_use]
    pub fn exp(self) -> Self {
        let e = libm::exp(self.v);
        self.chain(e, e)
    }

    #[inline]
    #[must_use]
    pub fn ln(self) -> Self {
        self.chain(libm::log(self.v), 1.0 / self.v)
    }

    #[inline]
    #[must_use]
    pub fn sqrt(self) -> Self {
        let s = libm::sqrt(self.v);
        self.chain(s, 0.5 / s)
    }

    #[inline]
    #[must_use]
    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::constant(1.0);
        }
        let p = libm::pow(self.v, f64::from(n - 1));
        self.chain(p * self.v, f64::from(n) * p)
    }

    #[inline]
    #[must_use]
    pub fn powf(self, a: f64) -> Self {
        let p = libm::pow(self.v, a - 1.0);
        self.chain(p * self.v, a * p)
    }
}

impl<const D: usize> From<f64> for Dual<D> {
    fn from(v: f64) -> Self {
        Self::constant(v)
    }
}

impl<const D: usize> Add for Dual<D> {
    type Output = Self;
    #[inline]
    fn add(mut self, o: Self) -> Self {
        self.v += o.v;
        for k in 0..D {
            self.d[k] += o.d[k];
        }
        self
    }
}

impl<const D: usize> Sub for Dual<D> {
    type Output = Self;
    #[inline]
    fn sub(mut self, o: Self) -> Self {
        self.v -= o.v;
        for k in 0..D {
            self.d[k] -= o.d[k];
        }
        self
    }
}

impl<const D: usize> Mul for Dual<D> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        let mut d = [0.0; D];
        for k in 0..D {
            d[k] = self.d[k] * o.v + self.v * o.d[k];
        }
        Self { v: self.v * o.v, d }
    }
}

impl<const D: usize> Div for Dual<D> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let inv = 1.0 / o.v;
        let mut d = [0.0; D];
        for k in 0..D {
            d[k] = (self.d[k] * o.v - self.v * o.d[k]) * inv * inv;
        }
        Self { v: self.v * inv, d }
    }
}

impl<const D: usize> Neg for Dual<D> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self.chain(-self.v, -1.0)
    }
}

macro_rules! scalar_ops {
    ($($tr:ident $f:ident),+) => {$(
        impl<const D: usize> $tr<f64> for Dual<D> {
            type Output = Self;
            #[inline]
            fn $f(self, o: f64) -> Self {
                $tr::$f(self, Dual::constant(o))
            }
        }
        impl<const D: usize> $tr<Dual<D>> for f64 {
            type Output = Dual<D>;
            #[inline]
            fn $f(self, o: Dual<D>) -> Dual<D> {
                $tr::$f(Dual::constant(self), o)
            }
        }
    )+};
}

scalar_ops!(Add add, Sub sub, Mul mul, Div div);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_quotient_rules() {
        let x = Dual::<2>::variable(3.0, 0);
        let y = Dual::<2>::variable(1.0, 1);
        let f = x * x + y;
        assert_eq!(f.v, 10.0);
        assert_eq!(f.d, [6.0, 1.0]);
        let g = x / y;
        assert_eq!(g.d, [1.0, -3.0]);
        let h = (2.0 * x - 1.0).powi(3);
        assert_eq!(h.v, 125.0);
        assert_eq!(h.d[0], 150.0);
    }

    #[test]
    fn affine_exact() {
        let x = Dual::<3>::variable(0.3, 2);
        let f = 4.0 * x + 7.0;
        assert_eq!(f.d, [0.0, 0.0, 4.0]);
    }
}
