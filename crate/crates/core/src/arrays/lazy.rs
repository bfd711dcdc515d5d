use alloc::string::String;

use super::{tree_line, CellArray};
use crate::error::{Error, Result};
use crate::maps::{Map1, Map2, Map3, Map4};

macro_rules! lazy_map_type {
    ($(#[$doc:meta])* $name:ident, $trait:ident, $($a:ident : $A:ident : $c:ident),+) => {
        $(#[$doc])*
        #[derive(Clone)]
        pub struct $name<M, $($A),+> {
            op: M,
            $($a: $A,)+
            len: usize,
        }

        impl<M, $($A),+> $name<M, $($A),+> {
            /// The elemental operation.
            pub fn op(&self) -> &M {
                &self.op
            }
        }

        impl<M, $($A),+> CellArray for $name<M, $($A),+>
        where
            $($A: CellArray,)+
            M: $trait<$($A::Item),+>,
        {
            type Item = M::Out;
            type Cache = ($($A::Cache,)+ M::Cache);

            #[inline]
            fn len(&self) -> usize {
                self.len
            }

            fn array_cache(&self) -> Self::Cache {
                ($(self.$a.array_cache(),)+ self.op.return_cache())
            }

            #[inline]
            fn getindex<'a>(&'a self, cache: &'a mut Self::Cache, i: usize) -> &'a M::Out {
                let ($($c,)+ cm) = cache;
                self.op.evaluate(cm, $(self.$a.getindex($c, i)),+)
            }

            fn write_tree(&self, out: &mut String, depth: usize) {
                tree_line(out, depth, &self.op.name());
                $(self.$a.write_tree(out, depth + 1);)+
            }
        }
    };
}

lazy_map_type!(
    /// Deferred application of a one-argument mapping.
    LazyMap1, Map1, a: A: ca
);
lazy_map_type!(
    /// Deferred application of a two-argument mapping.
    LazyMap2, Map2, a: A: ca, b: B: cb
);
lazy_map_type!(
    /// Deferred application of a three-argument mapping.
    LazyMap3, Map3, a: A: ca, b: B: cb, c: C: cc
);
lazy_map_type!(
    /// Deferred application of a four-argument mapping.
    LazyMap4, Map4, a: A: ca, b: B: cb, c: C: cc, d: D: cd
);

fn common_len(lens: &[usize]) -> Result<usize> {
    let n = lens[0];
    match lens.iter().find(|&&l| l != n) {
        Some(&l) => Err(Error::LengthMismatch { expected: n, found: l }),
        None => Ok(n),
    }
}

/// Lazily maps `op` over `a`. Entry `i` is computed when read.
pub fn lazy_map<M, A: CellArray>(op: M, a: A) -> LazyMap1<M, A> {
    let len = a.len();
    LazyMap1 { op, a, len }
}

/// Lazily maps `op` over two arrays of equal length.
pub fn lazy_map2<M, A: CellArray, B: CellArray>(op: M, a: A, b: B) -> Result<LazyMap2<M, A, B>> {
    let len = common_len(&[a.len(), b.len()])?;
    Ok(LazyMap2 { op, a, b, len })
}

/// Lazily maps `op` over three arrays of equal length.
pub fn lazy_map3<M, A: CellArray, B: CellArray, C: CellArray>(
    op: M,
    a: A,
    b: B,
    c: C,
) -> Result<LazyMap3<M, A, B, C>> {
    let len = common_len(&[a.len(), b.len(), c.len()])?;
    Ok(LazyMap3 { op, a, b, c, len })
}

/// Lazily maps `op` over four arrays of equal length.
pub fn lazy_map4<M, A: CellArray, B: CellArray, C: CellArray, D: CellArray>(
    op: M,
    a: A,
    b: B,
    c: C,
    d: D,
) -> Result<LazyMap4<M, A, B, C, D>> {
    let len = common_len(&[a.len(), b.len(), c.len(), d.len()])?;
    Ok(LazyMap4 { op, a, b, c, d, len })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrays::{collect, print_op_tree};
    use crate::maps::Operation;
    use alloc::sync::Arc;
    use alloc::vec;
    use alloc::vec::Vec;

    fn add() -> Operation<impl Fn(&f64, &f64) -> f64 + Clone> {
        Operation::new("+", |x: &f64, y: &f64| x + y)
    }

    #[test]
    fn nested_lazy_maps() {
        let a = Arc::new(vec![1.0, 2.0, 3.0]);
        let b = Arc::new(vec![10.0, 20.0, 30.0]);
        let c = lazy_map2(add(), a.clone(), b.clone()).unwrap();
        let d = lazy_map2(Operation::new("*", |x: &f64, y: &f64| x * y), c, a.clone()).unwrap();
        let got = collect(&d);
        let want: Vec<f64> = (0..3).map(|i| (a[i] + b[i]) * a[i]).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn identity_map() {
        let a = vec![4u32, 5, 6];
        let m = lazy_map(Operation::new("identity", |x: &u32| *x), &a);
        assert_eq!(collect(&m), a);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let r = lazy_map2(add(), vec![1.0], vec![1.0, 2.0]);
        assert!(matches!(r, Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn op_trees() {
        let a = vec![1.0f64, 2.0];
        let b = vec![3.0f64, 4.0];
        let c = lazy_map2(add(), &a, &b).unwrap();
        assert_eq!(print_op_tree(&c), "+\n  Vec<f64>\n  Vec<f64>\n");
        let d = lazy_map2(Operation::new("*", |x: &f64, y: &f64| x * y), c, &a).unwrap();
        assert_eq!(print_op_tree(&d), "*\n  +\n    Vec<f64>\n    Vec<f64>\n  Vec<f64>\n");
    }

    #[test]
    fn two_caches_interleaved() {
        let a = vec![1.0, 2.0, 3.0, 4.0];
        let m = lazy_map(Operation::new("sq", |x: &f64| x * x), &a);
        let mut c1 = m.array_cache();
        let mut c2 = m.array_cache();
        for i in 0..4 {
            let j = 3 - i;
            let x = *m.getindex(&mut c1, i);
            let y = *m.getindex(&mut c2, j);
            assert_eq!(x, a[i] * a[i]);
            assert_eq!(y, a[j] * a[j]);
        }
    }
}
