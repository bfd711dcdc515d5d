use std::sync::Arc;

use lazyfe_core::assembly::{assemble_system, AssemblyPlan, SparseMatrix};
use lazyfe_core::cell_data::{integrate, measure, BasisRole, CellField};
use lazyfe_core::dense::Lu;
use lazyfe_core::error::Error;
use lazyfe_core::fe_spaces::{make_fespace, trial_space, DirichletTag};
use lazyfe_core::fields::{GenericField, ValueKind};
use lazyfe_core::geometry::cartesian_model;
use lazyfe_core::solvers::{cg_solve, minres_solve, Precond, SolverOptions};
use proptest::prelude::*;

fn tridiag(n: usize, d: f64, o: f64) -> SparseMatrix {
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, d));
        if i + 1 < n {
            t.push((i, i + 1, o));
            t.push((i + 1, i, o));
        }
    }
    SparseMatrix::from_triplets(n, n, &t).unwrap()
}

fn dense_solve(a: &SparseMatrix, b: &[f64]) -> Vec<f64> {
    let mut x = b.to_vec();
    Lu::new(&a.to_dense(), a.nrows()).unwrap().solve_in_place(&mut x);
    x
}

fn true_residual(a: &SparseMatrix, b: &[f64], x: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let r: f64 = ax.iter().zip(b).map(|(p, q)| (q - p) * (q - p)).sum();
    r.sqrt() / b.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn spd(n: usize, seed: &[f64]) -> SparseMatrix {
    // B^T B + n I from a dense pseudo-random B.
    let b: Vec<f64> = (0..n * n).map(|k| seed[k % seed.len()] * (((k * 7919) % 13) as f64 - 6.0)).collect();
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = (0..n).map(|k| b[k * n + i] * b[k * n + j]).sum::<f64>() + if i == j { n as f64 } else { 0.0 };
        }
    }
    SparseMatrix::from_dense(&a, n, n).unwrap()
}

#[test]
fn identity_in_one_iteration() {
    let a = SparseMatrix::from_triplets(4, 4, &[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0), (3, 3, 1.0)]).unwrap();
    let b = [1.0, -2.0, 3.0, 0.5];
    let r = cg_solve(&a, &b, &SolverOptions::default(), Precond::None).unwrap();
    assert_eq!(r.iterations, 1);
    assert!(r.converged);
    assert_eq!(r.x, b);
}

#[test]
fn tridiagonal_matches_dense() {
    let a = tridiag(10, 2.0, -1.0);
    let b = [1.0; 10];
    let want = dense_solve(&a, &b);
    for pc in [Precond::None, Precond::Jacobi] {
        let r = cg_solve(&a, &b, &SolverOptions::default(), pc).unwrap();
        assert!(r.converged);
        assert!(max_diff(&r.x, &want) < 1e-8);
        assert_eq!(r.history.len(), r.iterations);
    }
    let m = minres_solve(&a, &b, &SolverOptions::default(), None).unwrap();
    assert!(max_diff(&m.x, &want) < 1e-8);
}

#[test]
fn assembled_poisson_converges() {
    let m = Arc::new(cartesian_model([0.0; 2], [1.0; 2], [12, 12], true).unwrap());
    let v = make_fespace(&m, 2, ValueKind::Scalar, &[DirichletTag::all("boundary")]).unwrap();
    let u = trial_space(&v, &[GenericField::scalar(|x| x[0] * x[1]).into_ref()]).unwrap();
    let (dv, du) = (v.basis(BasisRole::Test), u.basis(BasisRole::Trial));
    let dm = measure(v.triangulation(), 4).unwrap();
    let a = integrate(&dv.gradient().unwrap().dot(&du.gradient().unwrap()).unwrap(), &dm).unwrap();
    let f = CellField::from_field(v.triangulation(), GenericField::scalar(|x| (x[0] * 4.0).sin()).into_ref());
    let l = integrate(&f.mul(&dv).unwrap(), &dm).unwrap();
    let plan = AssemblyPlan::for_spaces(&v, &u).unwrap();
    let (k, b) = assemble_system(&plan, &a, &l).unwrap();
    let r = cg_solve(&k, &b, &SolverOptions::default(), Precond::Jacobi).unwrap();
    assert!(r.converged);
    assert!(r.residual < 1e-10);
    assert!((true_residual(&k, &b, &r.x) - r.residual).abs() < 1e-12);
}

#[test]
fn indefinite_diagonal() {
    let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, -1.0)]).unwrap();
    let r = minres_solve(&a, &[1.0, 1.0], &SolverOptions::default(), None).unwrap();
    assert!(max_diff(&r.x, &[1.0, -1.0]) < 1e-14);
    assert!(matches!(
        cg_solve(&a, &[1.0, 1.0], &SolverOptions::default(), Precond::None),
        Err(Error::Breakdown(_))
    ));
    assert!(cg_solve(&a, &[1.0, 1.0], &SolverOptions::default(), Precond::Jacobi).is_err());
}

#[test]
fn singular_neumann_chain_with_nullspace() {
    // 1D pure Neumann Laplacian: constants span the kernel.
    let n = 20;
    let mut t = Vec::new();
    for e in 0..n - 1 {
        for (i, j, v) in [(e, e, 1.0), (e + 1, e + 1, 1.0), (e, e + 1, -1.0), (e + 1, e, -1.0)] {
            t.push((i, j, v));
        }
    }
    let a = SparseMatrix::from_triplets(n, n, &t).unwrap();
    let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin() + 0.3).collect();
    let ones = vec![1.0; n];
    let r = minres_solve(&a, &b, &SolverOptions::default(), Some(&ones)).unwrap();
    assert!(r.converged);
    assert!(r.x.iter().sum::<f64>().abs() < 1e-10);
    let mean = b.iter().sum::<f64>() / n as f64;
    let bp: Vec<f64> = b.iter().map(|x| x - mean).collect();
    assert!((true_residual(&a, &bp, &r.x) - r.residual).abs() < 1e-12);
    assert!(r.residual < 1e-10);
    assert!(minres_solve(&a, &b, &SolverOptions::default(), Some(&[1.0])).is_err());
}

#[test]
fn iteration_limit_is_reported() {
    let a = tridiag(50, 2.0, -1.0);
    let b = [1.0; 50];
    let opts = SolverOptions { tol: 1e-12, maxit: Some(3) };
    let r = cg_solve(&a, &b, &opts, Precond::None).unwrap();
    assert!(!r.converged);
    assert_eq!(r.iterations, 3);
    let m = minres_solve(&a, &b, &opts, None).unwrap();
    assert!(!m.converged);
    assert_eq!(m.history.len(), 3);
}

#[test]
fn zero_rhs_and_bad_shapes() {
    let a = tridiag(5, 2.0, -1.0);
    let r = cg_solve(&a, &[0.0; 5], &SolverOptions::default(), Precond::None).unwrap();
    assert_eq!((r.iterations, r.x), (0, vec![0.0; 5]));
    assert!(matches!(
        cg_solve(&a, &[0.0; 4], &SolverOptions::default(), Precond::None),
        Err(Error::LengthMismatch { .. })
    ));
    let rect = SparseMatrix::from_triplets(2, 3, &[(0, 0, 1.0)]).unwrap();
    assert!(minres_solve(&rect, &[1.0, 1.0], &SolverOptions::default(), None).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn residual_report_is_exact(n in 2usize..40, seed in prop::collection::vec(-1.0f64..1.0, 1..8), b in prop::collection::vec(-5.0f64..5.0, 40)) {
        let a = spd(n, &seed);
        let b = &b[..n];
        prop_assume!(b.iter().any(|x| x.abs() > 1e-3));
        for r in [
            cg_solve(&a, b, &SolverOptions::default(), Precond::None).unwrap(),
            cg_solve(&a, b, &SolverOptions::default(), Precond::Jacobi).unwrap(),
            minres_solve(&a, b, &SolverOptions::default(), None).unwrap(),
        ] {
            prop_assert!(r.converged);
            prop_assert!((true_residual(&a, b, &r.x) - r.residual).abs() < 1e-12);
        }
        let cg = cg_solve(&a, b, &SolverOptions::default(), Precond::None).unwrap();
        let mr = minres_solve(&a, b, &SolverOptions::default(), None).unwrap();
        let scale = cg.x.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        prop_assert!(max_diff(&cg.x, &mr.x) < 1e-8 * scale);
    }

    #[test]
    fn cg_energy_error_decreases(n in 2usize..30, seed in prop::collection::vec(-1.0f64..1.0, 1..8)) {
        let a = spd(n, &seed);
        let b: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 0.1).collect();
        let exact = dense_solve(&a, &b);
        let energy = |x: &[f64]| {
            let e: Vec<f64> = x.iter().zip(&exact).map(|(p, q)| p - q).collect();
            let ae = a.mul_vec(&e);
            e.iter().zip(&ae).map(|(p, q)| p * q).sum::<f64>()
        };
        let mut last = energy(&vec![0.0; n]);
        for k in 1..=n {
            let r = cg_solve(&a, &b, &SolverOptions { tol: 1e-14, maxit: Some(k) }, Precond::None).unwrap();
            let e = energy(&r.x);
            prop_assert!(e <= last * (1.0 + 1e-10) + 1e-20, "k={} {} > {}", k, e, last);
            last = e;
        }
    }
}
