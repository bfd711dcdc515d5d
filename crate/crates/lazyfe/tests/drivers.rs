use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use lazyfe::core::assembly::{assemble_system, reassemble_in_place, AssemblyPlan};
use lazyfe::core::cell_data::{integrate, measure, BasisRole, CellField};
use lazyfe::core::fe_spaces::{make_fespace, trial_space, DirichletTag};
use lazyfe::core::fields::{GenericField, ValueKind};
use lazyfe::core::geometry::cartesian_model;
use lazyfe::core::solvers::{cg_solve, Precond, SolverOptions};
use lazyfe::drivers::{
    poisson_bilinear_form, run_benchmark, run_poisson, run_stokes, Geometry, Problem, RunConfig, RunReport,
};
use lazyfe::manufactured::Solution;
use lazyfe::mesh_io::MeshFile;

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lazyfe-drivers-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn small(n: usize, order: usize) -> RunConfig {
    RunConfig {
        partitions: vec![n],
        order,
        repeats: 1,
        ..RunConfig::default()
    }
}

#[test]
fn linear_solution_exact_on_one_cell() {
    for simplexify in [false, true] {
        for dim in [2, 3] {
            let r = run_poisson(&RunConfig { dim, simplexify, ..small(1, 1) }).unwrap();
            let (h1, l2) = (r.errors.h1.unwrap(), r.errors.l2.unwrap());
            assert!(h1 < 1e-12 && l2 < 1e-12, "dim {dim} simplex {simplexify}: {h1:e} {l2:e}");
        }
    }
}

#[test]
fn polynomial_solutions_reproduced() {
    for order in 1..=4 {
        let r = run_poisson(&RunConfig { dim: 2, ..small(2, order) }).unwrap();
        assert!(r.converged);
        assert!(r.errors.h1.unwrap() < 1e-8, "order {order}: {:e}", r.errors.h1.unwrap());
        assert!(r.reassembly_max_diff <= 1e-14);
    }
}

#[test]
fn neumann_faces_use_flux_data() {
    let cfg = RunConfig {
        dirichlet: vec!["xmin".into(), "ymin".into()],
        neumann: vec!["xmax".into(), "ymax".into(), "zmin".into(), "zmax".into()],
        ..small(2, 2)
    };
    let r = run_poisson(&cfg).unwrap();
    assert!(r.errors.h1.unwrap() < 1e-8, "{:e}", r.errors.h1.unwrap());
}

#[test]
fn zero_stokes_data_gives_zero_solution() {
    let cfg = RunConfig {
        problem: Problem::Stokes,
        solution: Solution::Zero,
        simplexify: true,
        ..small(2, 2)
    };
    let r = run_stokes(&cfg).unwrap();
    assert!(r.converged);
    assert_eq!(r.field_errors["u"].h1, Some(0.0));
    assert_eq!(r.field_errors["p"].l2, Some(0.0));
}

#[test]
fn stokes_on_quadrilaterals() {
    let cfg = RunConfig {
        problem: Problem::Stokes,
        dim: 2,
        ..small(3, 2)
    };
    let r = run_stokes(&cfg).unwrap();
    assert!(r.field_errors["u"].h1.unwrap() < 1e-7);
    assert!(r.field_errors["p"].l2.unwrap() < 1e-7);
    assert!(r.pressure_mean.unwrap().abs() < 1e-10);
    assert_eq!(r.dofs, r.field_dofs.values().sum::<usize>());
}

#[test]
fn report_schema() {
    let out = tmp("report.json");
    let r = run_poisson(&RunConfig { out: Some(out.clone()), ..small(2, 1) }).unwrap();
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    for k in ["problem", "dofs", "errors", "timings", "iterations", "residual", "converged", "config"] {
        assert!(keys.contains(&k), "missing {k}");
    }
    for k in ["from_scratch_s", "in_place_s", "solve_s", "mesh_io_s"] {
        assert!(v["timings"][k].as_f64().unwrap() >= 0.0);
    }
    assert_eq!(v["problem"], "poisson");
    assert_eq!(v["config"]["geometry"], "cube");
    let back: RunReport = serde_json::from_value(v).unwrap();
    assert_eq!(back, r);
}

#[test]
fn config_from_json_uses_defaults() {
    let cfg: RunConfig = serde_json::from_str(r#"{"problem": "stokes", "geometry": "file:m.json"}"#).unwrap();
    assert_eq!(cfg.geometry, Geometry::File("m.json".into()));
    assert_eq!((cfg.order, cfg.repeats, cfg.tol), (2, 4, 1e-10));
    assert!(serde_json::from_str::<RunConfig>(r#"{"geometry": "sphere"}"#).is_err());
}

#[test]
fn invalid_configurations_rejected() {
    let base = small(2, 2);
    let stokes = RunConfig { problem: Problem::Stokes, ..base.clone() };
    let bad = [
        RunConfig { order: 0, ..base.clone() },
        RunConfig { order: 5, ..base.clone() },
        RunConfig { dim: 4, ..base.clone() },
        RunConfig { partitions: vec![2, 2], ..base.clone() },
        RunConfig { partitions: vec![0], ..base.clone() },
        RunConfig { tol: 0.0, ..base.clone() },
        RunConfig { repeats: 0, ..base.clone() },
        RunConfig { threads: 0, ..base.clone() },
        RunConfig { neumann: vec!["boundary".into()], ..base.clone() },
        RunConfig { order: 1, ..stokes.clone() },
        RunConfig { solution: Solution::Sine, ..stokes.clone() },
        RunConfig { neumann: vec!["xmin".into()], ..stokes.clone() },
    ];
    for cfg in &bad {
        assert_eq!(cfg.validate().unwrap_err().kind(), "config", "{cfg:?}");
        let run = if cfg.problem == Problem::Stokes { run_stokes } else { run_poisson };
        assert!(run(cfg).is_err());
    }
    let unknown = RunConfig { dirichlet: vec!["nowhere".into()], ..base.clone() };
    assert_eq!(run_poisson(&unknown).unwrap_err().kind(), "core");
    let missing = RunConfig { geometry: Geometry::File(tmp("absent.json")), ..base };
    assert_eq!(run_poisson(&missing).unwrap_err().kind(), "io");
}

/// A channel of size 0.5 × 1 × 1.5 with inflow at z = 0, outflow at
/// z = 1.5, no-slip walls at y = 0, 1 and free-slip walls at x = 0, 0.5.
fn channel_mesh() -> PathBuf {
    let model = cartesian_model([0.0; 3], [0.5, 1.0, 1.5], [2, 2, 3], true).unwrap();
    let mut f = MeshFile::from_model(&model);
    let take = |f: &MeshFile, tags: &[&str]| tags.iter().flat_map(|t| f.labels[*t].clone()).collect::<Vec<_>>();
    let labels = BTreeMap::from([
        ("inlet".to_string(), take(&f, &["zmin"])),
        ("outlet".to_string(), take(&f, &["zmax"])),
        ("noslip".to_string(), take(&f, &["ymin", "ymax"])),
        ("ux0".to_string(), take(&f, &["xmin", "xmax"])),
    ]);
    f.labels = labels;
    let path = tmp("channel.json");
    f.write(&path).unwrap();
    path
}

#[test]
fn channel_flow_from_mesh_file() {
    let vtk = tmp("channel.vtk");
    let cfg = RunConfig {
        problem: Problem::Stokes,
        geometry: Geometry::File(channel_mesh()),
        vtk: Some(vtk.clone()),
        repeats: 1,
        ..RunConfig::default()
    };
    let r = run_stokes(&cfg).unwrap();
    assert!(r.converged, "residual {:e}", r.residual);
    assert_eq!(r.errors.h1, None);
    assert!(r.pressure_mean.is_none());
    assert!(r.timings.mesh_io_s > 0.0);
    let text = std::fs::read_to_string(&vtk).unwrap();
    assert!(text.contains("VECTORS uh double") && text.contains("SCALARS ph double 1"));

    let planar = RunConfig { geometry: Geometry::File(tmp("planar.json")), ..cfg };
    let model = cartesian_model([0.0; 2], [1.0; 2], [1, 1], true).unwrap();
    let mut f = MeshFile::from_model(&model);
    f.labels.insert("inlet".into(), f.labels["ymin"].clone());
    f.labels.insert("noslip".into(), f.labels["xmin"].clone());
    f.write(&tmp("planar.json")).unwrap();
    assert_eq!(run_stokes(&planar).unwrap_err().kind(), "config");
}

#[test]
fn reassembled_system_solves_identically() {
    let model = Arc::new(cartesian_model([0.0; 2], [1.0; 2], [6, 5], true).unwrap());
    let v = make_fespace(&model, 2, ValueKind::Scalar, &[DirichletTag::all("boundary")]).unwrap();
    let g = GenericField::scalar(|x: &[_; 2]| (x[0] * 3.0).sin() + x[1]).into_ref();
    let u = trial_space(&v, &[g.clone()]).unwrap();
    let a = poisson_bilinear_form(&v, &u, 4).unwrap();
    let f = CellField::from_field(v.triangulation(), g);
    let l = integrate(&f.mul(&v.basis(BasisRole::Test)).unwrap(), &measure(v.triangulation(), 6).unwrap()).unwrap();
    let plan = AssemblyPlan::for_spaces(&v, &u).unwrap();
    let (k, b) = assemble_system(&plan, &a, &l).unwrap();
    let (mut k2, mut b2) = (k.clone(), vec![f64::NAN; b.len()]);
    k2.values_mut().iter_mut().for_each(|x| *x = 0.0);
    reassemble_in_place(&plan, &mut k2, &mut b2, &a, &l).unwrap();
    let opts = SolverOptions { tol: 1e-12, maxit: None };
    let x1 = cg_solve(&k, &b, &opts, Precond::Jacobi).unwrap().x;
    let x2 = cg_solve(&k2, &b2, &opts, Precond::Jacobi).unwrap().x;
    let diff = x1.iter().zip(&x2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(diff <= 1e-10, "{diff:e}");
}

#[test]
fn benchmark_reports_minimum_times() {
    for problem in [Problem::Poisson, Problem::Stokes] {
        let cfg = RunConfig {
            problem,
            dim: 2,
            repeats: 3,
            threads: 2,
            ..small(4, 2)
        };
        let r = run_benchmark(&cfg).unwrap();
        assert_eq!(r.problem, problem);
        assert!(r.timings.from_scratch_s > 0.0 && r.timings.in_place_s > 0.0);
        assert!(r.reassembly_max_diff <= 1e-14);
        assert!(r.converged);
    }
}
