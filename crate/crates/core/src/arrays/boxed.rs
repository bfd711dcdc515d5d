use alloc::boxed::Box;
use alloc::string::String;
use alloc::sync::Arc;
use core::any::Any;

use super::CellArray;

trait DynArray<T: ?Sized>: Send + Sync {
    fn dyn_len(&self) -> usize;
    fn dyn_cache(&self) -> Box<dyn Any>;
    fn dyn_get<'a>(&'a self, cache: &'a mut dyn Any, i: usize) -> &'a T;
    fn dyn_tree(&self, out: &mut String, depth: usize);
}

impl<A> DynArray<A::Item> for A
where
    A: CellArray,
    A::Cache: 'static,
{
    fn dyn_len(&self) -> usize {
        self.len()
    }

    fn dyn_cache(&self) -> Box<dyn Any> {
        Box::new(self.array_cache())
    }

    #[inline]
    fn dyn_get<'a>(&'a self, cache: &'a mut dyn Any, i: usize) -> &'a A::Item {
        let c = cache
            .downcast_mut::<A::Cache>()
            .expect("cache was created by a different array");
        self.getindex(c, i)
    }

    fn dyn_tree(&self, out: &mut String, depth: usize) {
        self.write_tree(out, depth);
    }
}

/// A type-erased, shareable cell array.
///
/// Expression trees whose structure is only known at run time (such as
/// integrands built from cell fields) are stored behind this handle. The
/// cache is erased as well and checked on every access.
pub struct BoxedArray<T: ?Sized + 'static> {
    inner: Arc<dyn DynArray<T>>,
}

impl<T: ?Sized + 'static> Clone for BoxedArray<T> {
    fn clone(&self) -> Self {
        Self {
            inner: self.inner.clone(),
        }
    }
}

impl<T: ?Sized + 'static> BoxedArray<T> {
    pub fn new<A>(a: A) -> Self
    where
        A: CellArray<Item = T> + 'static,
        A::Cache: 'static,
    {
        Self { inner: Arc::new(a) }
    }
}

impl<T: ?Sized + 'static> CellArray for BoxedArray<T> {
    type Item = T;
    type Cache = Box<dyn Any>;

    #[inline]
    fn len(&self) -> usize {
        self.inner.dyn_len()
    }

    fn array_cache(&self) -> Box<dyn Any> {
        self.inner.dyn_cache()
    }

    #[inline]
    fn getindex<'a>(&'a self, cache: &'a mut Box<dyn Any>, i: usize) -> &'a T {
        self.inner.dyn_get(&mut **cache, i)
    }

    fn write_tree(&self, out: &mut String, depth: usize) {
        self.inner.dyn_tree(out, depth);
    }
}

impl<T: ?Sized + 'static> core::fmt::Debug for BoxedArray<T> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "BoxedArray(len={})", self.len())
    }
}
