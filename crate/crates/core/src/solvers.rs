//! Conjugate gradients and MINRES on [`SparseMatrix`].

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::assembly::SparseMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Relative residual target `‖b − Ax‖ ≤ tol ‖b‖`.
    pub tol: f64,
    /// Iteration limit, `10 n` when `None`.
    pub maxit: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            maxit: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Precond {
    #[default]
    None,
    Jacobi,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Recomputed `‖b − Ax‖ / ‖b‖` of the returned `x`.
    pub residual: f64,
    pub converged: bool,
    /// Relative residual estimate after each iteration.
    pub history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

fn axpy(y: &mut [f64], s: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += s * x);
}

fn residual(a: &SparseMatrix, b: &[f64], x: &[f64], r: &mut [f64]) {
    a.matvec(x, r);
    r.iter_mut().zip(b).for_each(|(r, b)| *r = b - *r);
}

fn check(a: &SparseMatrix, b: &[f64]) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::Shape(format!("{}x{} matrix is not square", a.nrows(), a.ncols())));
    }
    if b.len() != a.nrows() {
        return Err(Error::LengthMismatch {
            expected: a.nrows(),
            found: b.len(),
        });
    }
    Ok(())
}

/// Drives `step` until the recomputed residual meets the tolerance. A
/// converged recurrence whose true residual is still too large is restarted
/// from the current iterate.
fn solve_with_restarts(
    a: &SparseMatrix,
    b: &[f64],
    opts: &SolverOptions,
    mut x: Vec<f64>,
    mut step: impl FnMut(&[f64], &mut Vec<f64>, usize, f64, &mut Vec<f64>) -> Result<usize>,
) -> Result<SolveReport> {
    let n = b.len();
    let maxit = opts.maxit.unwrap_or(10 * n.max(1));
    let bnorm = norm(b);
    let mut history = Vec::new();
    if bnorm == 0.0 {
        return Ok(SolveReport {
            x: vec![0.0; n],
            iterations: 0,
            residual: 0.0,
            converged: true,
            history,
        });
    }
    let mut r = vec![0.0; n];
    let mut it = 0;
    loop {
        residual(a, b, &x, &mut r);
        let res = norm(&r) / bnorm;
        if res <= opts.tol || it >= maxit {
            return Ok(SolveReport {
                x,
                iterations: it,
                residual: res,
                converged: res <= opts.tol,
                history,
            });
        }
        let (before, start) = (it, history.len());
        it += step(&r, &mut x, maxit - it, opts.tol * bnorm, &mut history)?;
        history[start..].iter_mut().for_each(|h| *h /= bnorm);
        if it == before {
            // No progress possible from this iterate.
            residual(a, b, &x, &mut r);
            let res = norm(&r) / bnorm;
            return Ok(SolveReport {
                x,
                iterations: it,
                residual: res,
                converged: res <= opts.tol,
                history,
            });
        }
    }
}

/// Conjugate gradients for symmetric positive definite `a`, optionally
/// preconditioned with the diagonal.
pub fn cg_solve(a: &SparseMatrix, b: &[f64], opts: &SolverOptions, precond: Precond) -> Result<SolveReport> {
    check(a, b)?;
    let n = b.len();
    let dinv = match precond {
        Precond::None => None,
        Precond::Jacobi => Some(
            a.diagonal()
                .iter()
                .enumerate()
                .map(|(i, &d)| {
                    if d > 0.0 {
                        Ok(1.0 / d)
                    } else {
                        Err(Error::InvalidArgument(format!("Jacobi preconditioner with diagonal {d} at row {i}")))
                    }
                })
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    let apply = |r: &[f64], z: &mut [f64]| match &dinv {
        None => z.copy_from_slice(r),
        Some(d) => z.iter_mut().zip(r).zip(d).for_each(|((z, r), d)| *z = r * d),
    };
    let (mut z, mut p, mut q) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut rk = vec![0.0; n];
    solve_with_restarts(a, b, opts, vec![0.0; n], |r0, x, budget, atol, history| {
        rk.copy_from_slice(r0);
        apply(&rk, &mut z);
        p.copy_from_slice(&z);
        let mut rz = dot(&rk, &z);
        let mut k = 0;
        while k < budget {
            a.matvec(&p, &mut q);
            let pq = dot(&p, &q);
            if !(pq > 0.0) {
                return Err(Error::Breakdown(format!("non-positive curvature {pq:e} at iteration {k}")));
            }
            let alpha = rz / pq;
            axpy(x, alpha, &p);
            axpy(&mut rk, -alpha, &q);
            k += 1;
            let rn = norm(&rk);
            history.push(rn);
            if rn <= atol {
                break;
            }
            apply(&rk, &mut z);
            let rz_new = dot(&rk, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            p.iter_mut().zip(&z).for_each(|(p, z)| *p = z + beta * *p);
        }
        Ok(k)
    })
}

/// MINRES for symmetric, possibly indefinite `a`.
///
/// With a `nullspace` vector `v` of `a`, the right-hand side and every
/// Lanczos vector are projected onto the complement of `v`, so the returned
/// `x` is orthogonal to `v` and `residual` refers to the projected `b`.
pub fn minres_solve(
    a: &SparseMatrix,
    b: &[f64],
    opts: &SolverOptions,
    nullspace: Option<&[f64]>,
) -> Result<SolveReport> {
    check(a, b)?;
    let n = b.len();
    let proj: Option<(Vec<f64>, f64)> = match nullspace {
        None => None,
        Some(v) if v.len() != n => {
            return Err(Error::LengthMismatch {
                expected: n,
                found: v.len(),
            })
        }
        Some(v) => {
            let vv = dot(v, v);
            if vv == 0.0 {
                return Err(Error::InvalidArgument("zero nullspace vector".into()));
            }
            Some((v.to_vec(), vv))
        }
    };
    let project = |y: &mut [f64]| {
        if let Some((v, vv)) = &proj {
            let s = dot(v, y) / vv;
            axpy(y, -s, v);
        }
    };
    let mut bp = b.to_vec();
    project(&mut bp);

    let (mut v, mut w, mut w1, mut w2) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let (mut r1, mut r2, mut y) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut report = solve_with_restarts(a, &bp, opts, vec![0.0; n], |r0, x, budget, atol, history| {
        r1.copy_from_slice(r0);
        project(&mut r1);
        r2.copy_from_slice(&r1);
        y.copy_from_slice(&r1);
        let mut beta = norm(&r1);
        let (mut oldb, mut dbar, mut epsln, mut phibar) = (0.0, 0.0, 0.0, beta);
        let (mut cs, mut sn) = (-1.0, 0.0);
        w.fill(0.0);
        w2.fill(0.0);
        let mut k = 0;
        while k < budget && beta > 0.0 {
            let s = 1.0 / beta;
            v.iter_mut().zip(&y).for_each(|(v, y)| *v = s * y);
            a.matvec(&v, &mut y);
            if k >= 1 {
                axpy(&mut y, -beta / oldb, &r1);
            }
            let alfa = dot(&v, &y);
            axpy(&mut y, -alfa / beta, &r2);
            project(&mut y);
            core::mem::swap(&mut r1, &mut r2);
            r2.copy_from_slice(&y);
            oldb = beta;
            beta = norm(&r2);
            if !beta.is_finite() || !alfa.is_finite() {
                return Err(Error::Breakdown(format!("non-finite Lanczos coefficient at iteration {k}")));
            }
            let oldeps = epsln;
            let delta = cs * dbar + sn * alfa;
            let gbar = sn * dbar - cs * alfa;
            epsln = sn * beta;
            dbar = -cs * beta;
            let gamma = libm::hypot(gbar, beta);
            if gamma == 0.0 {
                return Err(Error::Breakdown(format!("singular tridiagonal system at iteration {k}")));
            }
            cs = gbar / gamma;
            sn = beta / gamma;
            let phi = cs * phibar;
            phibar *= sn;
            core::mem::swap(&mut w1, &mut w2);
            core::mem::swap(&mut w2, &mut w);
            for i in 0..n {
                w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
            }
            axpy(x, phi, &w);
            k += 1;
            history.push(phibar);
            if phibar <= atol {
                break;
            }
        }
        Ok(k)
    })?;
    if let Some((v, vv)) = &proj {
        let s = dot(v, &report.x) / vv;
        axpy(&mut report.x, -s, v);
        let bn = norm(&bp);
        if bn > 0.0 {
            let mut r = vec![0.0; n];
            residual(a, &bp, &report.x, &mut r);
            report.residual = norm(&r) / bn;
        }
    }
    Ok(report)
}
