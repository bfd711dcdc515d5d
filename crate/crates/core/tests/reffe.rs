use lazyfe_core::fields::{FieldRef, ValueKind};
use lazyfe_core::reffe::{
    facet_quadrature, make_quadrature, make_reference_fe, monomial_basis, CellTopology, PolyFilter,
    ReferenceFE, MAX_ORDER,
};
use lazyfe_core::tensors::Point;
use proptest::prelude::*;

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Closed-form integral of `Π x_k^{a_k}` over the reference cell.
fn moment(t: CellTopology, a: &[u32]) -> f64 {
    if t.is_simplex() {
        let s: u32 = a.iter().sum();
        a.iter().map(|&k| factorial(k)).product::<f64>() / factorial(s + a.len() as u32)
    } else {
        a.iter().map(|&k| 1.0 / f64::from(k + 1)).product()
    }
}

fn check_exactness<const D: usize>(t: CellTopology, degree: usize) {
    let q = make_quadrature::<D>(t, degree).unwrap();
    let total: f64 = q.weights.iter().sum();
    assert!((total - t.measure()).abs() < 1e-12, "{t} {degree}: {total}");
    assert!(q.weights.iter().all(|&w| w > 0.0));
    for e in monomial_basis::<D>(degree, PolyFilter::P).unwrap().exponents() {
        let a: Vec<u32> = e.iter().map(|&x| u32::from(x)).collect();
        let got: f64 = q
            .points
            .iter()
            .zip(&q.weights)
            .map(|(x, w)| w * (0..D).map(|k| x[k].powi(a[k] as i32)).product::<f64>())
            .sum();
        let want = moment(t, &a);
        assert!((got - want).abs() < 1e-12, "{t} degree {degree} exponents {a:?}: {got} vs {want}");
    }
}

#[test]
fn quadrature_exactness_all_degrees() {
    for degree in 0..=10 {
        check_exactness::<1>(CellTopology::Seg, degree);
        check_exactness::<2>(CellTopology::Tri, degree);
        check_exactness::<2>(CellTopology::Quad, degree);
        check_exactness::<3>(CellTopology::Tet, degree);
        check_exactness::<3>(CellTopology::Hex, degree);
    }
}

#[test]
fn triangle_degree_two_moments() {
    let q = make_quadrature::<2>(CellTopology::Tri, 2).unwrap();
    for a in 0..=2u32 {
        for b in 0..=(2 - a) {
            let got: f64 = q
                .points
                .iter()
                .zip(&q.weights)
                .map(|(x, w)| w * x[0].powi(a as i32) * x[1].powi(b as i32))
                .sum();
            let want = factorial(a) * factorial(b) / factorial(a + b + 2);
            assert!((got - want).abs() < 1e-12);
        }
    }
}

#[test]
fn facet_rules_lie_on_facets() {
    let t = CellTopology::Tet;
    for f in 0..4 {
        let q = facet_quadrature::<3>(t, f, 2).unwrap();
        let w: f64 = q.weights.iter().sum();
        assert!((w - 0.5).abs() < 1e-14);
        for x in &q.points {
            let on = match f {
                0 => x[2].abs() < 1e-14,
                1 => x[1].abs() < 1e-14,
                2 => x[0].abs() < 1e-14,
                _ => (x[0] + x[1] + x[2] - 1.0).abs() < 1e-14,
            };
            assert!(on, "facet {f}: {x:?}");
        }
    }
}

fn duality<const D: usize>(fe: &ReferenceFE<D>) -> f64 {
    let a = fe.dof_basis().matrix(fe.shapes());
    let n = fe.num_dofs();
    let mut err: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            err = err.max((a[i * n + j] - delta).abs());
        }
    }
    err
}

fn all_elements<const D: usize>(kind: ValueKind) -> Vec<ReferenceFE<D>> {
    let mut out = Vec::new();
    for t in CellTopology::ALL.into_iter().filter(|t| t.dim() == D) {
        for k in 1..=MAX_ORDER {
            out.push(make_reference_fe::<D>(t, k, kind).unwrap());
        }
    }
    out
}

#[test]
fn ciarlet_duality_for_every_element() {
    fn run<const D: usize>() {
        for kind in [ValueKind::Scalar, ValueKind::Vector] {
            for fe in all_elements::<D>(kind) {
                let e = duality(&fe);
                assert!(e < 1e-12, "{:?} order {}: {e:e}", fe.topology(), fe.order());
            }
        }
    }
    run::<1>();
    run::<2>();
    run::<3>();
}

#[test]
fn node_counts() {
    let binom = |n: usize, k: usize| -> usize { (0..k).fold(1, |a, i| a * (n - i) / (i + 1)) };
    for k in 1..=MAX_ORDER {
        assert_eq!(make_reference_fe::<2>(CellTopology::Tri, k, ValueKind::Scalar).unwrap().num_dofs(), binom(k + 2, 2));
        assert_eq!(make_reference_fe::<3>(CellTopology::Tet, k, ValueKind::Scalar).unwrap().num_dofs(), binom(k + 3, 3));
        assert_eq!(make_reference_fe::<3>(CellTopology::Hex, k, ValueKind::Scalar).unwrap().num_dofs(), (k + 1).pow(3));
    }
    let tet2 = make_reference_fe::<3>(CellTopology::Tet, 2, ValueKind::Vector).unwrap();
    assert_eq!(tet2.num_dofs(), 30);
    assert!(make_reference_fe::<2>(CellTopology::Tri, 0, ValueKind::Scalar).is_err());
    assert!(make_reference_fe::<2>(CellTopology::Tri, 5, ValueKind::Scalar).is_err());
    assert!(make_reference_fe::<2>(CellTopology::Tet, 1, ValueKind::Scalar).is_err());
}

#[test]
fn p1_triangle_closed_form() {
    let fe = make_reference_fe::<2>(CellTopology::Tri, 1, ValueKind::Scalar).unwrap();
    let x = Point::new([0.25, 0.25]);
    let v: Vec<f64> = fe.shapes().iter().map(|s| s.evaluate(&x).scalar()).collect();
    for (a, b) in v.iter().zip([0.5, 0.25, 0.25]) {
        assert!((a - b).abs() < 1e-14);
    }
    for (i, node) in fe.nodes().iter().enumerate() {
        for (j, s) in fe.shapes().iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((s.evaluate(node).scalar() - want).abs() < 1e-14);
        }
    }
}

fn fd_gradient<const D: usize>(f: &FieldRef<D>, x: &Point<D>, c: usize) -> [f64; D] {
    let h = 1e-6;
    core::array::from_fn(|k| {
        let mut xp = *x;
        let mut xm = *x;
        xp.0[k] += h;
        xm.0[k] -= h;
        (f.evaluate(&xp).component(c) - f.evaluate(&xm).component(c)) / (2.0 * h)
    })
}

fn unit_point<const D: usize>() -> impl Strategy<Value = Point<D>> {
    proptest::array::uniform::<_, D>(0.0..1.0f64).prop_map(Point::new)
}

proptest! {
    #[test]
    fn partition_of_unity_2d(x in unit_point::<2>(), k in 1..=MAX_ORDER, quad in any::<bool>()) {
        let t = if quad { CellTopology::Quad } else { CellTopology::Tri };
        let fe = make_reference_fe::<2>(t, k, ValueKind::Scalar).unwrap();
        let s: f64 = fe.shapes().iter().map(|f| f.evaluate(&x).scalar()).sum();
        prop_assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partition_of_unity_3d(x in unit_point::<3>(), k in 1..=3usize, hex in any::<bool>()) {
        let t = if hex { CellTopology::Hex } else { CellTopology::Tet };
        let fe = make_reference_fe::<3>(t, k, ValueKind::Scalar).unwrap();
        let s: f64 = fe.shapes().iter().map(|f| f.evaluate(&x).scalar()).sum();
        prop_assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gradients_match_finite_differences(x in unit_point::<3>(), k in 1..=3usize, hex in any::<bool>()) {
        let t = if hex { CellTopology::Hex } else { CellTopology::Tet };
        let fe = make_reference_fe::<3>(t, k, ValueKind::Vector).unwrap();
        let nn = fe.num_nodes();
        for (i, s) in fe.shapes().iter().enumerate() {
            let c = i / nn;
            let g = s.gradient().unwrap().evaluate(&x).tensor();
            let fd = fd_gradient(s, &x, c);
            for kk in 0..3 {
                prop_assert!((g[(kk, c)] - fd[kk]).abs() < 1e-6);
            }
        }
    }
}
