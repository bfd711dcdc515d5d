//! Elemental operations applied entry by entry inside lazy arrays.
//!
//! A mapping prepares a cache once with `return_cache` and then evaluates
//! into it, returning a reference to the result. Reusing a cache across calls
//! with same-shaped arguments performs no new allocation.

use alloc::string::String;

use crate::arrays::{short_type_name, CellArray, NdArray, Shape};

macro_rules! map_trait {
    ($(#[$doc:meta])* $name:ident, $($arg:ident : $A:ident),+) => {
        $(#[$doc])*
        pub trait $name<$($A: ?Sized),+>: Send + Sync {
            type Out: ?Sized;
            type Cache;

            fn return_cache(&self) -> Self::Cache;

            fn evaluate<'c>(&'c self, cache: &'c mut Self::Cache, $($arg: &$A),+) -> &'c Self::Out;

            /// Label used by [`print_op_tree`](crate::arrays::print_op_tree).
            fn name(&self) -> String {
                short_type_name::<Self>()
            }
        }
    };
}

map_trait!(
    /// A mapping of one argument.
    Map1, a: A
);
map_trait!(
    /// A mapping of two arguments.
    Map2, a: A, b: B
);
map_trait!(
    /// A mapping of three arguments.
    Map3, a: A, b: B, c: C
);
map_trait!(
    /// A mapping of four arguments.
    Map4, a: A, b: B, c: C, d: D
);

/// A named closure used as a mapping. The result is stored in the cache.
#[derive(Clone)]
pub struct Operation<F> {
    name: String,
    f: F,
}

impl<F> Operation<F> {
    pub fn new(name: &str, f: F) -> Self {
        Self { name: name.into(), f }
    }
}

impl<F, A: ?Sized, O> Map1<A> for Operation<F>
where
    F: Fn(&A) -> O + Send + Sync,
{
    type Out = O;
    type Cache = Option<O>;

    fn return_cache(&self) -> Option<O> {
        None
    }

    #[inline]
    fn evaluate<'c>(&'c self, cache: &'c mut Option<O>, a: &A) -> &'c O {
        cache.insert((self.f)(a))
    }

    fn name(&self) -> String {
        self.name.clone()
    }
}

impl<F, A: ?Sized, B: ?Sized, O> Map2<A, B> for Operation<F>
where
    F: Fn(&A, &B) -> O + Send + Sync,
{
    type Out = O;
    type Cache = Option<O>;

    fn return_cache(&self) -> Option<O> {
        None
    }

    #[inline]
    fn evaluate<'c>(&'c self, cache: &'c mut Option<O>, a: &A, b: &B) -> &'c O {
        cache.insert((self.f)(a, b))
    }

    fn name(&self) -> String {
        self.name.clone()
    }
}

impl<F, A: ?Sized, B: ?Sized, C: ?Sized, O> Map3<A, B, C> for Operation<F>
where
    F: Fn(&A, &B, &C) -> O + Send + Sync,
{
    type Out = O;
    type Cache = Option<O>;

    fn return_cache(&self) -> Option<O> {
        None
    }

    #[inline]
    fn evaluate<'c>(&'c self, cache: &'c mut Option<O>, a: &A, b: &B, c: &C) -> &'c O {
        cache.insert((self.f)(a, b, c))
    }

    fn name(&self) -> String {
        self.name.clone()
    }
}

impl<F, A: ?Sized, B: ?Sized, C: ?Sized, D: ?Sized, O> Map4<A, B, C, D> for Operation<F>
where
    F: Fn(&A, &B, &C, &D) -> O + Send + Sync,
{
    type Out = O;
    type Cache = Option<O>;

    fn return_cache(&self) -> Option<O> {
        None
    }

    #[inline]
    fn evaluate<'c>(&'c self, cache: &'c mut Option<O>, a: &A, b: &B, c: &C, d: &D) -> &'c O {
        cache.insert((self.f)(a, b, c, d))
    }

    fn name(&self) -> String {
        self.name.clone()
    }
}

/// Turns an array into a mapping from index to entry.
#[derive(Clone, Debug)]
pub struct Reindex<S> {
    source: S,
}

impl<S> Reindex<S> {
    pub fn new(source: S) -> Self {
        Self { source }
    }
}

macro_rules! reindex_impl {
    ($($idx:ty),+) => {$(
        impl<S: CellArray> Map1<$idx> for Reindex<S> {
            type Out = S::Item;
            type Cache = S::Cache;

            fn return_cache(&self) -> S::Cache {
                self.source.array_cache()
            }

            #[inline]
            fn evaluate<'c>(&'c self, cache: &'c mut S::Cache, i: &$idx) -> &'c S::Item {
                self.source.getindex(cache, *i as usize)
            }

            fn name(&self) -> String {
                "Reindex".into()
            }
        }
    )+};
}

reindex_impl!(usize, u32);

/// Applies an elemental mapping entry-wise over arrays, with implicit
/// expansion of singleton axes. The output buffer lives in the cache.
#[derive(Clone, Debug)]
pub struct Broadcasting<M>(pub M);

impl<M, A> Map1<[A]> for Broadcasting<M>
where
    M: Map1<A>,
    M::Out: Clone + Sized,
{
    type Out = NdArray<M::Out>;
    type Cache = (M::Cache, NdArray<M::Out>);

    fn return_cache(&self) -> Self::Cache {
        (self.0.return_cache(), NdArray::default())
    }

    fn evaluate<'c>(&'c self, cache: &'c mut Self::Cache, a: &[A]) -> &'c Self::Out {
        let (mc, out) = cache;
        out.refill(Shape::vector(a.len()), a.iter().map(|x| self.0.evaluate(mc, x).clone()));
        out
    }

    fn name(&self) -> String {
        alloc::format!("Broadcasting({})", self.0.name())
    }
}

impl<M, A> Map1<NdArray<A>> for Broadcasting<M>
where
    M: Map1<A>,
    M::Out: Clone + Sized,
{
    type Out = NdArray<M::Out>;
    type Cache = (M::Cache, NdArray<M::Out>);

    fn return_cache(&self) -> Self::Cache {
        (self.0.return_cache(), NdArray::default())
    }

    fn evaluate<'c>(&'c self, cache: &'c mut Self::Cache, a: &NdArray<A>) -> &'c Self::Out {
        let (mc, out) = cache;
        out.refill(a.shape(), a.data().iter().map(|x| self.0.evaluate(mc, x).clone()));
        out
    }

    fn name(&self) -> String {
        alloc::format!("Broadcasting({})", self.0.name())
    }
}

/// Flat offsets of `shape` entries into an array of shape `src` broadcast to it.
#[inline]
fn broadcast_index(shape: &Shape, src: &Shape, flat: usize) -> usize {
    let dims = shape.dims();
    let sdims = src.dims();
    let mut rem = flat;
    let mut idx = [0usize; 3];
    for k in (0..dims.len()).rev() {
        idx[k] = rem % dims[k];
        rem /= dims[k];
    }
    let mut off = 0;
    for k in 0..dims.len() {
        let i = if sdims[k] == 1 { 0 } else { idx[k] };
        off = off * sdims[k] + i;
    }
    off
}

impl<M, A, B> Map2<NdArray<A>, NdArray<B>> for Broadcasting<M>
where
    M: Map2<A, B>,
    M::Out: Clone + Sized,
{
    type Out = NdArray<M::Out>;
    type Cache = (M::Cache, NdArray<M::Out>);

    fn return_cache(&self) -> Self::Cache {
        (self.0.return_cache(), NdArray::default())
    }

    /// # Panics
    /// Panics if the shapes cannot be broadcast; see [`Broadcasting::try_shape`].
    fn evaluate<'c>(&'c self, cache: &'c mut Self::Cache, a: &NdArray<A>, b: &NdArray<B>) -> &'c Self::Out {
        let (mc, out) = cache;
        let shape = a.shape().broadcast(&b.shape()).expect("incompatible broadcast shapes");
        let (sa, sb) = (a.shape(), b.shape());
        out.refill(
            shape,
            (0..shape.size()).map(|k| {
                let x = &a.data()[broadcast_index(&shape, &sa, k)];
                let y = &b.data()[broadcast_index(&shape, &sb, k)];
                self.0.evaluate(mc, x, y).clone()
            }),
        );
        out
    }

    fn name(&self) -> String {
        alloc::format!("Broadcasting({})", self.0.name())
    }
}

impl<M, A, B> Map2<[A], [B]> for Broadcasting<M>
where
    M: Map2<A, B>,
    M::Out: Clone + Sized,
{
    type Out = NdArray<M::Out>;
    type Cache = (M::Cache, NdArray<M::Out>);

    fn return_cache(&self) -> Self::Cache {
        (self.0.return_cache(), NdArray::default())
    }

    /// # Panics
    /// Panics if the lengths differ and neither is 1.
    fn evaluate<'c>(&'c self, cache: &'c mut Self::Cache, a: &[A], b: &[B]) -> &'c Self::Out {
        let (mc, out) = cache;
        let shape = Shape::vector(a.len())
            .broadcast(&Shape::vector(b.len()))
            .expect("incompatible broadcast shapes");
        let n = shape.size();
        out.refill(
            shape,
            (0..n).map(|k| {
                let x = &a[if a.len() == 1 { 0 } else { k }];
                let y = &b[if b.len() == 1 { 0 } else { k }];
                self.0.evaluate(mc, x, y).clone()
            }),
        );
        out
    }

    fn name(&self) -> String {
        alloc::format!("Broadcasting({})", self.0.name())
    }
}

impl<M> Broadcasting<M> {
    /// Result shape of broadcasting `a` against `b`, or a shape error.
    pub fn try_shape(a: &Shape, b: &Shape) -> crate::error::Result<Shape> {
        a.broadcast(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    #[test]
    fn operation_reuses_cache() {
        let op = Operation::new("+", |a: &i32, b: &i32| a + b);
        let mut c = Map2::<i32, i32>::return_cache(&op);
        assert_eq!(*op.evaluate(&mut c, &2, &3), 5);
        assert_eq!(*op.evaluate(&mut c, &10, &3), 13);
        assert_eq!(Map2::<i32, i32>::name(&op), "+");
    }

    #[test]
    fn reindex_reads_source() {
        let r = Reindex::new(vec![10.0, 20.0, 30.0]);
        let mut c = Map1::<u32>::return_cache(&r);
        assert_eq!(*r.evaluate(&mut c, &2u32), 30.0);
    }

    #[test]
    fn broadcast_vectors() {
        let b = Broadcasting(Operation::new("+", |x: &i32, y: &i32| x + y));
        let mut c = Map2::<[i32], [i32]>::return_cache(&b);
        let r = b.evaluate(&mut c, &[1, 2][..], &[10, 20][..]);
        assert_eq!(r.data(), &[11, 22]);
        let r = b.evaluate(&mut c, &[1][..], &[10, 20][..]);
        assert_eq!(r.data(), &[11, 21]);
    }

    #[test]
    fn column_times_row_is_matrix() {
        let b = Broadcasting(Operation::new("*", |x: &i32, y: &i32| x * y));
        let col = NdArray::from_vec(Shape::matrix(3, 1), vec![1, 2, 3]).unwrap();
        let row = NdArray::from_vec(Shape::matrix(1, 2), vec![10, 100]).unwrap();
        let mut c = Map2::<NdArray<i32>, NdArray<i32>>::return_cache(&b);
        let r = b.evaluate(&mut c, &col, &row);
        assert_eq!(r.shape(), Shape::matrix(3, 2));
        assert_eq!(r.data(), &[10, 100, 20, 200, 30, 300]);
    }

    #[test]
    fn broadcast_output_buffer_is_reused() {
        let b = Broadcasting(Operation::new("neg", |x: &f64| -x));
        let mut c = Map1::<[f64]>::return_cache(&b);
        let xs: Vec<f64> = (0..50).map(f64::from).collect();
        let p0 = b.evaluate(&mut c, &xs[..]).data().as_ptr();
        for _ in 0..100 {
            let p = b.evaluate(&mut c, &xs[..]).data().as_ptr();
            assert_eq!(p, p0);
        }
    }
}
