use std::sync::Arc;

use lazyfe_core::arrays::CellArray;
use lazyfe_core::cell_data::{evaluate_cell, integrate, measure, BasisRole, CellPoint};
use lazyfe_core::error::Error;
use lazyfe_core::fe_spaces::{
    fe_basis, fe_function, interpolate, make_fespace, mf_basis, mf_function, multi_field, trial_space, DirichletTag,
    FESpace,
};
use lazyfe_core::fields::{constant, FieldRef, GenericField, Value, ValueKind};
use lazyfe_core::geometry::{cartesian_model, DiscreteModel, Triangulation};
use lazyfe_core::tensors::Point;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn square(n: usize, l: f64, simplex: bool) -> Arc<DiscreteModel<2>> {
    Arc::new(cartesian_model([0.0; 2], [l; 2], [n; 2], simplex).unwrap())
}

fn cube(n: usize, simplex: bool) -> Arc<DiscreteModel<3>> {
    Arc::new(cartesian_model([0.0; 3], [1.0; 3], [n; 3], simplex).unwrap())
}

fn value_at<const D: usize>(space: &FESpace<D>, vals: &[f64], e: usize, xi: &Point<D>) -> Value<D> {
    let fe = &space.elements()[space.model().cell_type_index(e)];
    let mut v = Value::zero(fe.value_kind());
    for (s, &a) in fe.shapes().iter().zip(vals) {
        v.axpy(a, &s.evaluate(xi));
    }
    v
}

fn ref_vertex<const D: usize>(space: &FESpace<D>, e: usize, local: usize) -> Point<D> {
    let c = space.model().cell_type(e).vertex_coords()[local];
    Point::new(std::array::from_fn(|i| c[i]))
}

/// Largest jump of `uh` across interior facets at random facet points.
fn max_jump<const D: usize>(space: &Arc<FESpace<D>>, g: &FieldRef<D>, seed: u64) -> f64 {
    let uh = interpolate(g, space).unwrap();
    let m = space.model();
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for f in 0..m.num_facets() {
        let cells = m.facet_cells(f);
        if cells.len() != 2 {
            continue;
        }
        let verts = m.facet_vertices(f);
        let mut lam: Vec<f64> = verts.iter().map(|_| rng.gen::<f64>()).collect();
        let s: f64 = lam.iter().sum();
        lam.iter_mut().for_each(|l| *l /= s);
        let mut vals = Vec::new();
        let mut xs = Vec::new();
        for &(e, _) in cells {
            let row = m.cells().row(e);
            let mut xi = Point::zero();
            for (v, l) in verts.iter().zip(&lam) {
                let local = row.iter().position(|w| w == v).unwrap();
                xi += ref_vertex(space, e, local) * *l;
            }
            xs.push(m.map_points(e, &[xi])[0]);
            vals.push(value_at(space, &uh.cell_values(e), e, &xi));
        }
        assert!((xs[0] - xs[1]).norm() < 1e-12);
        let d = match (vals[0], vals[1]) {
            (Value::Scalar(a), Value::Scalar(b)) => (a - b).abs(),
            (Value::Vector(a), Value::Vector(b)) => a.max_abs_diff(&b),
            _ => unreachable!(),
        };
        worst = worst.max(d);
    }
    worst
}

#[test]
fn p1_counts() {
    let m = square(2, 2.0, false);
    let v = make_fespace(&m, 1, ValueKind::Scalar, &[]).unwrap();
    assert_eq!(v.num_free_dofs(), 9);
    assert_eq!(v.num_dirichlet_dofs(), 0);
    let v0 = make_fespace(&m, 1, ValueKind::Scalar, &[DirichletTag::all("boundary")]).unwrap();
    assert_eq!(v0.num_free_dofs(), 1);
    assert_eq!(v0.num_dirichlet_dofs(), 8);
    assert_eq!(v0.free_dof_node(0).0, Point::new([1.0, 1.0]));
    assert!(matches!(
        make_fespace(&m, 1, ValueKind::Scalar, &[DirichletTag::all("nope")]),
        Err(Error::UnknownTag(_))
    ));
}

#[test]
fn component_mask_constrains_one_component() {
    let m = cube(2, true);
    let all = make_fespace(&m, 2, ValueKind::Vector, &[]).unwrap();
    let v = make_fespace(&m, 2, ValueKind::Vector, &[DirichletTag::masked("xmin", &[true, false, false])]).unwrap();
    assert_eq!(v.num_free_dofs() + v.num_dirichlet_dofs(), all.num_free_dofs());
    // P2 nodes on the face x = 0 of a 2x2 tet-split cube: a 5x5 lattice.
    assert_eq!(v.num_dirichlet_dofs(), 25);
    for k in 0..v.num_dirichlet_dofs() {
        let (x, c) = v.dirichlet_dof_node(k);
        assert_eq!(c, 0);
        assert!(x[0].abs() < 1e-14);
    }
    assert!(make_fespace(&m, 2, ValueKind::Vector, &[DirichletTag::masked("xmin", &[true])]).is_err());
}

#[test]
fn trial_values_are_nodal() {
    let m = square(3, 1.0, true);
    let v = make_fespace(&m, 1, ValueKind::Scalar, &[DirichletTag::all("boundary")]).unwrap();
    let zero = trial_space(&v, &[constant(0.0)]).unwrap();
    assert!(zero.dirichlet_values().iter().all(|&x| x == 0.0));
    let u = trial_space(&v, &[GenericField::scalar(|x| x[0]).into_ref()]).unwrap();
    for k in 0..u.num_dirichlet_dofs() {
        assert_eq!(u.dirichlet_values()[k], u.dirichlet_dof_node(k).0[0]);
    }
    assert!(matches!(
        trial_space(&v, &[constant(0.0), constant(1.0)]),
        Err(Error::LengthMismatch { .. })
    ));
}

#[test]
fn per_tag_dirichlet_functions() {
    let m = square(2, 1.0, false);
    let tags = [DirichletTag::all("xmin"), DirichletTag::all("xmax")];
    let v = make_fespace(&m, 1, ValueKind::Scalar, &tags).unwrap();
    let u = trial_space(&v, &[constant(-1.0), constant(1.0)]).unwrap();
    for k in 0..u.num_dirichlet_dofs() {
        let x = u.dirichlet_dof_node(k).0;
        assert_eq!(u.dirichlet_values()[k], if x[0] < 0.5 { -1.0 } else { 1.0 });
    }
}

#[test]
fn p2_reproduces_quadratic_on_boundary() {
    let m = cube(2, true);
    let g = GenericField::scalar(|x| (x[0] + x[1] + x[2]).powi(2)).into_ref();
    let v = make_fespace(&m, 2, ValueKind::Scalar, &[DirichletTag::all("boundary")]).unwrap();
    let u = Arc::new(trial_space(&v, &[g.clone()]).unwrap());
    let gamma = Triangulation::boundary(&m, &["boundary"]).unwrap();
    let uh = interpolate(&g, &u).unwrap();
    let diff = uh.cell_field().sub(&lazyfe_core::cell_data::CellField::from_field(&gamma, g)).unwrap();
    let err = integrate(&diff.mul(&diff).unwrap(), &measure(&gamma, 6).unwrap()).unwrap().sum();
    assert!(err.sqrt() < 1e-12);
    for (k, &d) in u.dirichlet_values().iter().enumerate() {
        assert!((d - uh.dirichlet_values()[k]).abs() < 1e-12);
    }
}

#[test]
fn basis_at_nodes_is_identity() {
    let m = square(2, 1.0, true);
    let v = make_fespace(&m, 3, ValueKind::Scalar, &[]).unwrap();
    let fe = v.elements()[0].clone();
    let omega = v.triangulation();
    let x = CellPoint::uniform(omega, fe.nodes().to_vec()).unwrap();
    let vals = evaluate_cell(&fe_basis(&v, BasisRole::Test), &x).unwrap();
    let mut c = vals.array_cache();
    for e in 0..m.num_cells() {
        let pv = vals.getindex(&mut c, e);
        assert_eq!(pv.rows, fe.num_dofs());
        for q in 0..pv.npoints {
            for i in 0..pv.rows {
                let want = if i == q { 1.0 } else { 0.0 };
                assert!((pv.get(q, i, 0).scalar() - want).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn interpolation_reproduces_polynomials() {
    for k in 1..=4 {
        let m = square(3, 1.0, k % 2 == 0);
        let v = Arc::new(make_fespace(&m, k, ValueKind::Scalar, &[DirichletTag::all("ymin")]).unwrap());
        let g = GenericField::scalar(move |x| (x[0] - 2.0 * x[1] + 0.5).powi(k as i32)).into_ref();
        let uh = interpolate(&g, &v).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(k as u64);
        for e in 0..m.num_cells() {
            let vals = uh.cell_values(e);
            for _ in 0..4 {
                let (a, b): (f64, f64) = (rng.gen(), rng.gen());
                let xi = if k % 2 == 0 { Point::new([a * (1.0 - b), b]) } else { Point::new([a, b]) };
                let x = m.map_points(e, &[xi])[0];
                let got = value_at(&v, &vals, e, &xi).scalar();
                let want = g.evaluate(&x).scalar();
                assert!((got - want).abs() < 1e-10 * want.abs().max(1.0), "k={k}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn linear_interpolant_evaluates_pointwise() {
    let m = square(4, 2.0, true);
    let v = Arc::new(make_fespace(&m, 1, ValueKind::Scalar, &[]).unwrap());
    let uh = interpolate(&GenericField::scalar(|x| x[0]).into_ref(), &v).unwrap();
    let omega = v.triangulation();
    let pts = vec![Point::new([0.2, 0.3]), Point::new([0.6, 0.1])];
    let x = CellPoint::uniform(omega, pts.clone()).unwrap();
    let vals = evaluate_cell(uh.cell_field(), &x).unwrap();
    let mut c = vals.array_cache();
    for e in 0..m.num_cells() {
        let phys = m.map_points(e, &pts);
        let pv = vals.getindex(&mut c, e);
        for (q, p) in phys.iter().enumerate() {
            assert!((pv.get(q, 0, 0).scalar() - p[0]).abs() < 1e-14);
        }
    }
}

#[test]
fn fe_function_length_checked() {
    let m = square(2, 1.0, false);
    let v = Arc::new(make_fespace(&m, 1, ValueKind::Scalar, &[]).unwrap());
    assert!(matches!(fe_function(&v, vec![0.0; 3]), Err(Error::LengthMismatch { .. })));
    let uh = fe_function(&v, vec![1.0; 9]).unwrap();
    let omega = v.triangulation();
    let area = integrate(uh.cell_field(), &measure(omega, 2).unwrap()).unwrap().sum();
    assert!((area - 1.0).abs() < 1e-14);
}

#[test]
fn multi_field_offsets_and_blocks() {
    let m = square(2, 1.0, true);
    let u = Arc::new(make_fespace(&m, 2, ValueKind::Vector, &[DirichletTag::all("boundary")]).unwrap());
    let p = Arc::new(make_fespace(&m, 1, ValueKind::Scalar, &[]).unwrap());
    let mf = multi_field(vec![u.clone(), p.clone()]).unwrap();
    let (n1, n2) = (u.num_free_dofs(), p.num_free_dofs());
    assert_eq!(mf.offsets(), &[0, n1, n1 + n2]);
    let x: Vec<f64> = (0..n1 + n2).map(|i| i as f64).collect();
    let parts = mf_function(&mf, &x).unwrap();
    assert_eq!(parts[1].free_values()[0], n1 as f64);

    let [du, dp]: [_; 2] = mf_basis(&mf, BasisRole::Trial).unwrap().try_into().unwrap();
    let [v, q]: [_; 2] = mf_basis(&mf, BasisRole::Test).unwrap().try_into().unwrap();
    let a = v
        .gradient()
        .unwrap()
        .inner(&du.gradient().unwrap())
        .unwrap()
        .sub(&v.divergence().unwrap().mul(&dp).unwrap())
        .unwrap()
        .sub(&q.mul(&du.divergence().unwrap()).unwrap())
        .unwrap();
    let omega = mf.triangulation();
    let dc = integrate(&a, &measure(omega, 4).unwrap()).unwrap();
    let (_, cells) = dc.iter().next().unwrap();
    let mut c = cells.array_cache();
    let blk = cells.getindex(&mut c, 0);
    assert!(blk.is_touched(&[0, 0]) && blk.is_touched(&[0, 1]) && blk.is_touched(&[1, 0]));
    assert!(!blk.is_touched(&[1, 1]));

    let other = square(2, 1.0, true);
    let p2 = Arc::new(make_fespace(&other, 1, ValueKind::Scalar, &[]).unwrap());
    assert!(multi_field(vec![u, p2]).is_err());
}

#[test]
fn single_field_product_matches_space() {
    let m = square(3, 1.0, false);
    let v = Arc::new(make_fespace(&m, 2, ValueKind::Scalar, &[DirichletTag::all("boundary")]).unwrap());
    let mf = multi_field(vec![v.clone()]).unwrap();
    let dm = measure(v.triangulation(), 4).unwrap();
    let form = |u: &lazyfe_core::cell_data::CellField<2>, w: &lazyfe_core::cell_data::CellField<2>| {
        integrate(&w.gradient().unwrap().dot(&u.gradient().unwrap()).unwrap(), &dm).unwrap()
    };
    let a = form(&fe_basis(&v, BasisRole::Trial), &fe_basis(&v, BasisRole::Test));
    let b = form(
        &mf_basis(&mf, BasisRole::Trial).unwrap()[0],
        &mf_basis(&mf, BasisRole::Test).unwrap()[0],
    );
    let (ca, cb) = (a.iter().next().unwrap().1, b.iter().next().unwrap().1);
    let (mut xa, mut xb) = (ca.array_cache(), cb.array_cache());
    for e in 0..m.num_cells() {
        let ba = ca.getindex(&mut xa, e).get(&[0, 0]).unwrap().clone();
        let bb = cb.getindex(&mut xb, e).get(&[0, 0]).unwrap().clone();
        assert_eq!(ba, bb);
    }
}

#[test]
fn conformity_on_tets_and_hexes() {
    let g3 = GenericField::scalar(|x| (3.0 * x[0]).sin() * (2.0 * x[1]).cos() * x[2].exp()).into_ref();
    for k in 1..=4 {
        for simplex in [true, false] {
            let m = cube(2, simplex);
            let v = Arc::new(make_fespace(&m, k, ValueKind::Scalar, &[]).unwrap());
            assert!(max_jump(&v, &g3, k as u64) < 1e-12, "k={k} simplex={simplex}");
        }
    }
    let gv = GenericField::vector(|x| [x[1].sin(), x[0] * x[2], (x[0] + x[1]).exp()]).into_ref();
    let m = cube(2, true);
    let v = Arc::new(make_fespace(&m, 3, ValueKind::Vector, &[]).unwrap());
    assert!(max_jump(&v, &gv, 7) < 1e-12);
}

fn check_split<const D: usize>(v: &FESpace<D>) {
    let mut free = vec![0usize; v.num_free_dofs()];
    let mut dir = vec![0usize; v.num_dirichlet_dofs()];
    for row in v.cell_dofs().rows() {
        for &g in row {
            if g >= 0 {
                free[g as usize] += 1;
            } else {
                dir[(-g - 1) as usize] += 1;
            }
        }
    }
    assert!(free.iter().all(|&n| n > 0));
    assert!(dir.iter().all(|&n| n > 0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dirichlet_split_is_sound(n in 1usize..4, k in 1usize..4, simplex in any::<bool>(), tag in 0usize..3, vector in any::<bool>()) {
        let m = square(n, 1.0, simplex);
        let tags = [vec![], vec![DirichletTag::all("boundary")], vec![DirichletTag::all("xmin"), DirichletTag::all("ymax")]];
        let kind = if vector { ValueKind::Vector } else { ValueKind::Scalar };
        let v = make_fespace(&m, k, kind, &tags[tag]).unwrap();
        check_split(&v);
        let total = make_fespace(&m, k, kind, &[]).unwrap().num_free_dofs();
        prop_assert_eq!(v.num_free_dofs() + v.num_dirichlet_dofs(), total);
    }

    #[test]
    fn interpolated_one_is_one(n in 1usize..4, k in 1usize..5, simplex in any::<bool>(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let m = square(n, 1.5, simplex);
        let v = Arc::new(make_fespace(&m, k, ValueKind::Scalar, &[DirichletTag::all("boundary")]).unwrap());
        let uh = interpolate(&constant(1.0), &v).unwrap();
        prop_assert!(uh.free_values().iter().chain(uh.dirichlet_values()).all(|&x| x == 1.0));
        let xi = if simplex { Point::new([a * (1.0 - b), b]) } else { Point::new([a, b]) };
        for e in 0..m.num_cells() {
            let u = value_at(&v, &uh.cell_values(e), e, &xi).scalar();
            prop_assert!((u - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn conformity_random_seed(seed in any::<u64>(), k in 1usize..4) {
        let m = square(3, 1.0, true);
        let v = Arc::new(make_fespace(&m, k, ValueKind::Scalar, &[]).unwrap());
        let g = GenericField::scalar(|x| (5.0 * x[0] * x[1]).cos()).into_ref();
        prop_assert!(max_jump(&v, &g, seed) < 1e-12);
    }
}
