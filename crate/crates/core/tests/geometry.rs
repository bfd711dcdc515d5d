use std::sync::Arc;

use lazyfe_core::arrays::{print_op_tree, CellArray};
use lazyfe_core::error::Error;
use lazyfe_core::fields::Value;
use lazyfe_core::geometry::{
    cartesian_model, cell_coordinates, cell_geometry, common_triangulation, DiscreteModel, Triangulation,
};
use lazyfe_core::tensors::Point;
use proptest::prelude::*;

#[test]
fn two_by_two_square() {
    let m = cartesian_model([0.0; 2], [2.0; 2], [2, 2], false).unwrap();
    assert_eq!(m.num_nodes(), 9);
    assert_eq!(m.num_cells(), 4);
    assert_eq!(m.cells().row(0), &[0, 1, 3, 4]);
    assert_eq!(m.nodes()[4], Point::new([1.0, 1.0]));
    assert_eq!(m.num_facets(), 12);
    assert_eq!(m.boundary_facets().len(), 8);
    assert_eq!(m.tag_facets("xmin").unwrap().len(), 2);
    assert!(matches!(m.tag_facets("nope"), Err(Error::UnknownTag(_))));
    m.check_geometry().unwrap();
}

#[test]
fn simplexified_cube_counts() {
    for n in 1..4 {
        let m = cartesian_model([0.0; 3], [1.0; 3], [n; 3], true).unwrap();
        assert_eq!(m.num_cells(), 6 * n * n * n);
        assert_eq!(m.boundary_facets().len(), 12 * n * n);
        m.check_geometry().unwrap();
        let h = cartesian_model([0.0; 3], [1.0; 3], [n; 3], false).unwrap();
        assert_eq!(h.boundary_facets().len(), 6 * n * n);
    }
    assert!(matches!(
        cartesian_model([0.0; 2], [1.0; 2], [0, 2], false),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn unit_cells_have_identity_jacobian() {
    let m = Arc::new(cartesian_model([0.0; 2], [3.0; 2], [3, 3], false).unwrap());
    let omega = Triangulation::bulk(&m);
    let (maps, jacs) = cell_geometry(&omega);
    let (mut cm, mut cj) = (maps.array_cache(), jacs.array_cache());
    for e in 0..m.num_cells() {
        let x = Point::new([0.3, 0.8]);
        let phi = maps.getindex(&mut cm, e).evaluate(&x);
        let want = m.map_points(e, &[x])[0];
        assert!((phi.vector() - want).norm() < 1e-14);
        let j = jacs.getindex(&mut cj, e).evaluate(&x);
        if let Value::Tensor(t) = j {
            for a in 0..2 {
                for b in 0..2 {
                    let id = if a == b { 1.0 } else { 0.0 };
                    assert!((t[(a, b)] - id).abs() < 1e-14);
                }
            }
        } else {
            panic!("tensor expected");
        }
    }
}

#[test]
fn coordinates_are_lazy_and_boundary_aware() {
    let m = Arc::new(cartesian_model([0.0; 2], [1.0; 2], [4, 4], true).unwrap());
    let omega = Triangulation::bulk(&m);
    let gamma = Triangulation::boundary(&m, &["ymax"]).unwrap();
    let x = cell_coordinates(&omega);
    assert_eq!(x.len(), 32);
    assert!(print_op_tree(&x).contains("Reindex"));
    let xb = cell_coordinates(&gamma);
    assert_eq!(xb.len(), 4);
    let mut c = xb.array_cache();
    for i in 0..4 {
        let p = gamma.parent_cell(i);
        assert_eq!(xb.getindex(&mut c, i).data(), &m.cell_coords(p)[..]);
    }
    assert_eq!(common_triangulation(&omega, &gamma).unwrap().id(), gamma.id());
    let other = Triangulation::bulk(&m);
    assert!(common_triangulation(&omega, &other).is_ok());
    let left = Triangulation::boundary(&m, &["xmin"]).unwrap();
    assert!(common_triangulation(&gamma, &left).is_err());
}

#[test]
fn invalid_meshes_are_rejected() {
    use lazyfe_core::arrays::{CompressedArray, JaggedTable};
    use lazyfe_core::reffe::CellTopology;
    let nodes = vec![Point::new([0.0, 0.0]), Point::new([1.0, 0.0]), Point::new([0.0, 1.0])];
    let types = || CompressedArray::new(vec![CellTopology::Tri], vec![0]).unwrap();
    let bad = JaggedTable::from_rows(&[[0usize, 1, 7]]);
    assert!(DiscreteModel::from_parts(nodes.clone(), bad, types(), vec![]).is_err());
    let ok = JaggedTable::from_rows(&[[0usize, 1, 2]]);
    let label = vec![("edge".to_string(), vec![vec![0, 2]])];
    let m = DiscreteModel::from_parts(nodes.clone(), ok.clone(), types(), label).unwrap();
    assert_eq!(m.tag_facets("edge").unwrap().len(), 1);
    let label = vec![("x".to_string(), vec![vec![0, 7]])];
    assert!(DiscreteModel::from_parts(nodes, ok, types(), label).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn volumes_sum_to_box(lx in 0.2f64..3.0, ly in 0.2f64..3.0, lz in 0.2f64..3.0, n in 1usize..4, simplex in any::<bool>()) {
        use lazyfe_core::cell_data::{integrate, measure, CellField};
        let m = Arc::new(cartesian_model([0.1, -0.4, 2.0], [lx, ly, lz], [n, n + 1, 2], simplex).unwrap());
        let omega = Triangulation::bulk(&m);
        let v = integrate(&CellField::constant(&omega, 1.0), &measure(&omega, 1).unwrap()).unwrap().sum();
        prop_assert!((v - lx * ly * lz).abs() < 1e-12 * lx * ly * lz);
        let gamma = Triangulation::boundary(&m, &["boundary"]).unwrap();
        let a = integrate(&CellField::constant(&omega, 1.0), &measure(&gamma, 1).unwrap()).unwrap().sum();
        let want = 2.0 * (lx * ly + ly * lz + lx * lz);
        prop_assert!((a - want).abs() < 1e-12 * want);
    }

    #[test]
    fn normals_point_outward(n in 1usize..4, simplex in any::<bool>()) {
        use lazyfe_core::cell_data::{evaluate_cell, CellField, CellPoint};
        let m = Arc::new(cartesian_model([0.0; 3], [1.0; 3], [n; 3], simplex).unwrap());
        let gamma = Triangulation::boundary(&m, &["boundary"]).unwrap();
        let x = CellPoint::centers(&gamma).unwrap();
        let nv = evaluate_cell(&CellField::normal(&gamma).unwrap(), &x).unwrap();
        let mut c = nv.array_cache();
        for i in 0..gamma.num_cells() {
            let facet = gamma.facets()[i];
            let verts = m.facet_vertices(facet);
            let mut mid = Point::zero();
            for &v in &verts {
                mid += m.nodes()[v];
            }
            mid = mid / verts.len() as f64;
            let out = (mid - Point::new([0.5; 3])).dot(&nv.getindex(&mut c, i).get(0, 0, 0).vector());
            prop_assert!(out > 0.0);
            let nn = nv.getindex(&mut c, i).get(0, 0, 0).vector();
            prop_assert!((nn.norm() - 1.0).abs() < 1e-14);
        }
    }
}
