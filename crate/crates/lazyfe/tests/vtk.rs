use std::path::PathBuf;
use std::sync::Arc;

use lazyfe::core::cell_data::CellField;
use lazyfe::core::fe_spaces::{interpolate, make_fespace};
use lazyfe::core::fields::{GenericField, ValueKind};
use lazyfe::core::geometry::{cartesian_model, Triangulation};
use lazyfe::vtk::write_vtk;

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lazyfe-vtk-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

/// The parts of a legacy unstructured grid file the tests look at.
#[derive(Default)]
struct Grid {
    points: Vec<[f64; 3]>,
    cells: Vec<Vec<usize>>,
    types: Vec<u32>,
    data: Vec<(String, usize, Vec<f64>)>,
}

fn read_grid(path: &PathBuf) -> Grid {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let mut g = Grid::default();
    let nums = |l: &str| l.split_whitespace().map(|t| t.parse::<f64>().unwrap()).collect::<Vec<_>>();
    while let Some(line) = lines.next() {
        let w: Vec<&str> = line.split_whitespace().collect();
        match w.first().copied() {
            Some("POINTS") => {
                for _ in 0..w[1].parse().unwrap() {
                    let v = nums(lines.next().unwrap());
                    g.points.push([v[0], v[1], v[2]]);
                }
            }
            Some("CELLS") => {
                for _ in 0..w[1].parse().unwrap() {
                    let v = nums(lines.next().unwrap());
                    assert_eq!(v[0] as usize, v.len() - 1);
                    g.cells.push(v[1..].iter().map(|&i| i as usize).collect());
                }
            }
            Some("CELL_TYPES") => {
                for _ in 0..w[1].parse().unwrap() {
                    g.types.push(lines.next().unwrap().trim().parse().unwrap());
                }
            }
            Some(kw @ ("SCALARS" | "VECTORS" | "TENSORS")) => {
                let width = match kw {
                    "SCALARS" => {
                        assert_eq!(lines.next().unwrap(), "LOOKUP_TABLE default");
                        1
                    }
                    "VECTORS" => 3,
                    _ => 9,
                };
                let mut vals = Vec::new();
                while vals.len() < width * g.points.len() {
                    vals.extend(nums(lines.next().unwrap()));
                }
                g.data.push((w[1].to_string(), width, vals));
            }
            _ => {}
        }
    }
    g
}

fn tet_volume(p: [[f64; 3]; 4]) -> f64 {
    let d = |a: [f64; 3], b: [f64; 3]| [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let (a, b, c) = (d(p[0], p[1]), d(p[0], p[2]), d(p[0], p[3]));
    (a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])) / 6.0
}

#[test]
fn scalar_samples_match_point_coordinates() {
    let model = Arc::new(cartesian_model([0.0; 2], [2.0, 1.0], [3, 2], false).unwrap());
    let trian = Triangulation::bulk(&model);
    let x1 = CellField::from_field(&trian, GenericField::scalar(|x: &[_; 2]| x[0]).into_ref());
    for refine in [1, 2] {
        let path = tmp(&format!("x1-{refine}.vtk"));
        write_vtk(&trian, &[("x1", &x1)], refine, &path).unwrap();
        let g = read_grid(&path);
        let per_cell = (refine + 1) * (refine + 1);
        assert_eq!(g.points.len(), 6 * per_cell);
        assert_eq!(g.cells.len(), 6 * refine * refine);
        assert!(g.types.iter().all(|&t| t == 9));
        let (name, width, vals) = &g.data[0];
        assert_eq!((name.as_str(), *width), ("x1", 1));
        for (p, v) in g.points.iter().zip(vals) {
            assert!((p[0] - v).abs() < 1e-12);
            assert_eq!(p[2], 0.0);
        }
    }
}

#[test]
fn refined_tetrahedra_tile_each_cell() {
    let model = Arc::new(cartesian_model([0.0; 3], [1.0, 2.0, 0.5], [2, 1, 1], true).unwrap());
    let trian = Triangulation::bulk(&model);
    let path = tmp("tets.vtk");
    write_vtk::<3>(&trian, &[], 2, &path).unwrap();
    let g = read_grid(&path);
    assert_eq!(g.cells.len(), 8 * model.num_cells());
    assert!(g.types.iter().all(|&t| t == 10));
    let vols: Vec<f64> = g
        .cells
        .iter()
        .map(|c| tet_volume([g.points[c[0]], g.points[c[1]], g.points[c[2]], g.points[c[3]]]).abs())
        .collect();
    assert!((vols.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(vols.iter().all(|&v| v > 1e-3));
}

#[test]
fn quadratic_function_written_without_loss() {
    // A P2 interpolant is exact for quadratics, so every lattice sample must
    // reproduce the analytic value up to printing precision.
    let model = Arc::new(cartesian_model([0.0; 3], [1.0; 3], [2; 3], true).unwrap());
    let exact = |x: [f64; 3]| [x[0] * x[1], 1.0 - x[2] * x[2], x[0] + x[1] + x[2]];
    let space = Arc::new(make_fespace(&model, 2, ValueKind::Vector, &[]).unwrap());
    let g = GenericField::vector(move |x: &[_; 3]| {
        let [a, b, c] = [x[0], x[1], x[2]];
        [a * b, -(c * c) + 1.0, a + b + c]
    })
    .into_ref();
    let uh = interpolate(&g, &space).unwrap();
    let grad = uh.cell_field().gradient().unwrap();
    let path = tmp("quadratic.vtk");
    write_vtk(space.triangulation(), &[("u", uh.cell_field()), ("grad u", &grad)], 2, &path).unwrap();
    let grid = read_grid(&path);
    assert_eq!(grid.data.len(), 2);
    let (name, width, vals) = &grid.data[0];
    assert_eq!((name.as_str(), *width), ("u", 3));
    for (p, v) in grid.points.iter().zip(vals.chunks(3)) {
        let e = exact(*p);
        for k in 0..3 {
            assert!((e[k] - v[k]).abs() < 1e-6, "{p:?}: {v:?} vs {e:?}");
        }
    }
    let (name, width, vals) = &grid.data[1];
    assert_eq!((name.as_str(), *width), ("grad_u", 9));
    for (p, t) in grid.points.iter().zip(vals.chunks(9)) {
        // Row i holds the derivatives along x_i.
        let want = [p[1], 0.0, 1.0, p[0], 0.0, 1.0, 0.0, -2.0 * p[2], 1.0];
        for k in 0..9 {
            assert!((t[k] - want[k]).abs() < 1e-6);
        }
    }
}

#[test]
fn planar_vectors_are_padded() {
    let model = Arc::new(cartesian_model([0.0; 2], [1.0; 2], [1, 1], true).unwrap());
    let trian = Triangulation::bulk(&model);
    let v = CellField::from_field(&trian, GenericField::vector(|x: &[_; 2]| [x[1], x[0]]).into_ref());
    let path = tmp("planar.vtk");
    write_vtk(&trian, &[("v", &v)], 1, &path).unwrap();
    let g = read_grid(&path);
    assert!(g.types.iter().all(|&t| t == 5));
    for (p, w) in g.points.iter().zip(g.data[0].2.chunks(3)) {
        assert_eq!(w, [p[1], p[0], 0.0]);
    }
}

#[test]
fn unsupported_requests_fail() {
    let model = Arc::new(cartesian_model([0.0; 2], [1.0; 2], [1, 1], false).unwrap());
    let trian = Triangulation::bulk(&model);
    let boundary = Triangulation::boundary(&model, &["boundary"]).unwrap();
    assert_eq!(write_vtk::<2>(&trian, &[], 3, &tmp("r3.vtk")).unwrap_err().kind(), "config");
    assert_eq!(write_vtk::<2>(&boundary, &[], 1, &tmp("b.vtk")).unwrap_err().kind(), "config");
    let nowhere = PathBuf::from("/nonexistent-dir/out.vtk");
    assert_eq!(write_vtk::<2>(&trian, &[], 1, &nowhere).unwrap_err().kind(), "io");
}
