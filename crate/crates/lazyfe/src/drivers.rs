//! Poisson and Stokes drivers and the assembly benchmark.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use lazyfe_core::assembly::{assemble_system, block_mask, reassemble_in_place, AssemblyPlan, SparseMatrix};
use lazyfe_core::cell_data::{integrate, measure, BasisRole, CellField, DomainContribution};
use lazyfe_core::fe_spaces::{
    make_fespace, mf_basis, mf_function, multi_field, trial_space, DirichletTag, FEFunction, FESpace,
    MultiFieldFESpace,
};
use lazyfe_core::fields::{FieldRef, ValueKind};
use lazyfe_core::geometry::{cartesian_model, DiscreteModel, Triangulation};
use lazyfe_core::reffe::MAX_ORDER;
use lazyfe_core::solvers::{cg_solve, minres_solve, Precond, SolveReport, SolverOptions};
use serde::{Deserialize, Serialize};

use crate::manufactured::{inflow_profile, zero_vector, PoissonSolution, Solution, StokesSolution};
use crate::{mesh_io, vtk, Error};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    #[default]
    Poisson,
    Stokes,
}

/// `cube` (the unit square or cube) or `file:PATH` (a JSON mesh file).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(try_from = "String", into = "String")]
pub enum Geometry {
    #[default]
    Cube,
    File(PathBuf),
}

impl FromStr for Geometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "cube" => Ok(Geometry::Cube),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(Geometry::File(p.into())),
                _ => Err(Error::Config(format!("geometry \"{s}\" (expected cube or file:PATH)"))),
            },
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Geometry::Cube => f.write_str("cube"),
            Geometry::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl TryFrom<String> for Geometry {
    type Error = Error;
    fn try_from(s: String) -> Result<Self, Error> {
        s.parse()
    }
}

impl From<Geometry> for String {
    fn from(g: Geometry) -> String {
        g.to_string()
    }
}

/// Parameters of one run. Defaults: Poisson on an 8×8×8 hexahedral cube,
/// order 2, polynomial solution, Dirichlet data on `boundary`, solver
/// tolerance 1e-10, 4 timed repeats, one assembly thread.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub problem: Problem,
    pub geometry: Geometry,
    /// Dimension of the generated cube; mesh files carry their own.
    pub dim: usize,
    /// Cells per axis. A single entry applies to every axis.
    pub partitions: Vec<usize>,
    pub order: usize,
    /// Split cube cells into simplices.
    pub simplexify: bool,
    pub solution: Solution,
    pub dirichlet: Vec<String>,
    /// Poisson only: tags receiving `n·∇u` data.
    pub neumann: Vec<String>,
    pub tol: f64,
    pub repeats: usize,
    pub threads: usize,
    pub vtk: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: Problem::Poisson,
            geometry: Geometry::Cube,
            dim: 3,
            partitions: vec![8, 8, 8],
            order: 2,
            simplexify: false,
            solution: Solution::Polynomial,
            dirichlet: vec!["boundary".into()],
            neumann: Vec::new(),
            tol: 1e-10,
            repeats: 4,
            threads: 1,
            vtk: None,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), Error> {
        let bad = |m: String| Err(Error::Config(m));
        if !(1..=MAX_ORDER).contains(&self.order) {
            return bad(format!("order {} outside 1..={MAX_ORDER}", self.order));
        }
        if self.geometry == Geometry::Cube {
            if !(2..=3).contains(&self.dim) {
                return bad(format!("cube dimension {} (2 or 3 supported)", self.dim));
            }
            if self.partitions.len() != 1 && self.partitions.len() != self.dim {
                return bad(format!("{} partition counts for a {}-d cube", self.partitions.len(), self.dim));
            }
            if self.partitions.iter().any(|&n| n == 0) {
                return bad("partition counts must be positive".into());
            }
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return bad(format!("solver tolerance {} outside (0, 1)", self.tol));
        }
        if self.repeats == 0 {
            return bad("repeats must be at least 1".into());
        }
        if self.threads == 0 {
            return bad("threads must be at least 1".into());
        }
        if let Some(t) = self.neumann.iter().find(|t| self.dirichlet.contains(t)) {
            return bad(format!("tag \"{t}\" is both Dirichlet and Neumann"));
        }
        if self.problem == Problem::Stokes {
            if self.order < 2 {
                return bad("Taylor-Hood elements need velocity order at least 2".into());
            }
            if self.solution == Solution::Sine {
                return bad("the sine solution is only defined for Poisson".into());
            }
            if !self.neumann.is_empty() {
                return bad("Neumann tags are only used by Poisson".into());
            }
        }
        Ok(())
    }

    fn partitions_for<const D: usize>(&self) -> [usize; D] {
        std::array::from_fn(|i| if self.partitions.len() == 1 { self.partitions[0] } else { self.partitions[i] })
    }

    /// Dimension of the domain this configuration runs on.
    pub fn domain_dim(&self) -> Result<usize, Error> {
        match &self.geometry {
            Geometry::Cube => Ok(self.dim),
            Geometry::File(p) => mesh_io::mesh_dim(p),
        }
    }
}

/// `null` where no exact solution is known.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct ErrorNorms {
    pub h1: Option<f64>,
    pub l2: Option<f64>,
}

/// Wall-clock seconds, minima over the timed repeats.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct Timings {
    /// Mesh, spaces, sparsity pattern and assembly.
    pub from_scratch_s: f64,
    /// Reassembly into the existing matrix and vector.
    pub in_place_s: f64,
    pub solve_s: f64,
    /// Mesh generation or file reading, also part of `from_scratch_s`.
    pub mesh_io_s: f64,
}

/// Machine-readable result of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub problem: Problem,
    pub dofs: usize,
    pub field_dofs: BTreeMap<String, usize>,
    /// Norms of the first field (`u`).
    pub errors: ErrorNorms,
    pub field_errors: BTreeMap<String, ErrorNorms>,
    pub timings: Timings,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    /// Mean of the computed pressure when it is fixed up to a constant.
    pub pressure_mean: Option<f64>,
    /// Largest entry difference between reassembled and fresh systems.
    pub reassembly_max_diff: f64,
    pub config: RunConfig,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn build_model<const D: usize>(cfg: &RunConfig) -> Result<Arc<DiscreteModel<D>>, Error> {
    match &cfg.geometry {
        Geometry::Cube => Ok(Arc::new(cartesian_model([0.0; D], [1.0; D], cfg.partitions_for::<D>(), cfg.simplexify)?)),
        Geometry::File(p) => mesh_io::read_model::<D>(p),
    }
}

/// The Poisson bilinear form `∫ ∇v·∇u`.
pub fn poisson_bilinear_form<const D: usize>(
    test: &FESpace<D>,
    trial: &FESpace<D>,
    degree: usize,
) -> Result<DomainContribution<D>, Error> {
    let dv = test.basis(BasisRole::Test).gradient()?;
    let du = trial.basis(BasisRole::Trial).gradient()?;
    Ok(integrate(&dv.dot(&du)?, &measure(test.triangulation(), degree)?)?)
}

/// The Stokes form `∫ ∇v:∇u - (∇·v) p - q (∇·u)`, symmetric in the
/// velocity/pressure pair.
pub fn stokes_bilinear_form<const D: usize>(
    test: &MultiFieldFESpace<D>,
    trial: &MultiFieldFESpace<D>,
    degree: usize,
) -> Result<DomainContribution<D>, Error> {
    let [v, q]: [CellField<D>; 2] = two(mf_basis(test, BasisRole::Test)?)?;
    let [u, p]: [CellField<D>; 2] = two(mf_basis(trial, BasisRole::Trial)?)?;
    let form = v
        .gradient()?
        .inner(&u.gradient()?)?
        .sub(&v.divergence()?.mul(&p)?)?
        .sub(&q.mul(&u.divergence()?)?)?;
    Ok(integrate(&form, &measure(test.triangulation(), degree)?)?)
}

fn two<T>(v: Vec<T>) -> Result<[T; 2], Error> {
    v.try_into()
        .map_err(|v: Vec<T>| Error::Config(format!("expected two fields, found {}", v.len())))
}

/// Assembled problem ready for timing: a plan and the two forms.
trait Stage<const D: usize> {
    fn plan(&self) -> &AssemblyPlan;
    fn forms(&self) -> (&DomainContribution<D>, &DomainContribution<D>);
}

struct Assembled<S> {
    stage: S,
    matrix: SparseMatrix,
    rhs: Vec<f64>,
    timings: Timings,
    reassembly_max_diff: f64,
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Runs the from-scratch and in-place phases `cfg.repeats` times (after one
/// untimed warm-up when `warmup` is set) and keeps the minima.
fn timed_assembly<const D: usize, S: Stage<D>>(
    cfg: &RunConfig,
    warmup: bool,
    build: impl Fn(&Arc<DiscreteModel<D>>) -> Result<S, Error>,
) -> Result<Assembled<S>, Error> {
    let skip = usize::from(warmup);
    let mut t = Timings {
        from_scratch_s: f64::INFINITY,
        in_place_s: f64::INFINITY,
        solve_s: 0.0,
        mesh_io_s: f64::INFINITY,
    };
    let mut worst = 0.0f64;
    let mut last = None;
    for run in 0..cfg.repeats + skip {
        let t0 = Instant::now();
        let model = build_model::<D>(cfg)?;
        let mesh = t0.elapsed().as_secs_f64();
        let stage = build(&model)?;
        let (a, l) = stage.forms();
        let (fresh, fresh_rhs) = assemble_system(stage.plan(), a, l)?;
        let scratch = t0.elapsed().as_secs_f64();

        let (mut m, mut b) = (fresh.clone(), fresh_rhs.clone());
        let t1 = Instant::now();
        reassemble_in_place(stage.plan(), &mut m, &mut b, a, l)?;
        let in_place = t1.elapsed().as_secs_f64();

        worst = worst.max(max_diff(m.values(), fresh.values())).max(max_diff(&b, &fresh_rhs));
        if run >= skip {
            t.from_scratch_s = t.from_scratch_s.min(scratch);
            t.in_place_s = t.in_place_s.min(in_place);
            t.mesh_io_s = t.mesh_io_s.min(mesh);
        }
        last = Some((stage, m, b));
    }
    let (stage, matrix, rhs) = last.expect("at least one repeat");
    Ok(Assembled {
        stage,
        matrix,
        rhs,
        timings: t,
        reassembly_max_diff: worst,
    })
}

fn squared<const D: usize>(f: &CellField<D>) -> Result<CellField<D>, Error> {
    Ok(match f.kind() {
        ValueKind::Scalar => f.mul(f)?,
        ValueKind::Vector => f.dot(f)?,
        ValueKind::Tensor => f.inner(f)?,
    })
}

/// `L2` and `H1` norms of `exact - uh`.
pub fn error_norms<const D: usize>(exact: &FieldRef<D>, uh: &CellField<D>, degree: usize) -> Result<ErrorNorms, Error> {
    let trian = uh.triangulation();
    let dm = measure(trian, degree)?;
    let e = CellField::from_field(trian, exact.clone()).sub(uh)?;
    let l2 = integrate(&squared(&e)?, &dm)?.sum().max(0.0);
    let h1 = l2 + integrate(&squared(&e.gradient()?)?, &dm)?.sum().max(0.0);
    Ok(ErrorNorms {
        h1: Some(h1.sqrt()),
        l2: Some(l2.sqrt()),
    })
}

fn solver_options(cfg: &RunConfig) -> SolverOptions {
    SolverOptions {
        tol: cfg.tol,
        maxit: None,
    }
}

fn vtk_refinement(order: usize) -> usize {
    if order >= 2 {
        2
    } else {
        1
    }
}

struct PoissonStage<const D: usize> {
    test: Arc<FESpace<D>>,
    trial: Arc<FESpace<D>>,
    plan: AssemblyPlan,
    a: DomainContribution<D>,
    l: DomainContribution<D>,
}

impl<const D: usize> Stage<D> for PoissonStage<D> {
    fn plan(&self) -> &AssemblyPlan {
        &self.plan
    }
    fn forms(&self) -> (&DomainContribution<D>, &DomainContribution<D>) {
        (&self.a, &self.l)
    }
}

fn poisson_stage<const D: usize>(
    cfg: &RunConfig,
    model: &Arc<DiscreteModel<D>>,
    sol: &PoissonSolution,
) -> Result<PoissonStage<D>, Error> {
    let tags: Vec<DirichletTag> = cfg.dirichlet.iter().map(|t| DirichletTag::all(t)).collect();
    let test = Arc::new(make_fespace(model, cfg.order, ValueKind::Scalar, &tags)?);
    let trial = Arc::new(trial_space(&test, &[sol.field::<D>()])?);
    let degree = 2 * cfg.order;
    let a = poisson_bilinear_form(&test, &trial, degree)?;
    let trian = test.triangulation();
    let v = test.basis(BasisRole::Test);
    let f = CellField::from_field(trian, sol.source::<D>());
    let mut l = integrate(&f.mul(&v)?, &measure(trian, degree)?)?;
    if !cfg.neumann.is_empty() {
        let names: Vec<&str> = cfg.neumann.iter().map(String::as_str).collect();
        let gamma = Triangulation::boundary(model, &names)?;
        let n = CellField::normal(&gamma)?;
        let g = CellField::from_field(&gamma, sol.flux::<D>()).dot(&n)?;
        l = l.add(&integrate(&g.mul(&v)?, &measure(&gamma, degree)?)?)?;
    }
    let plan = AssemblyPlan::for_spaces(&test, &trial)?.with_threads(cfg.threads);
    Ok(PoissonStage { test, trial, plan, a, l })
}

/// Solves the Poisson problem with the manufactured solution of `cfg`.
pub fn run_poisson(cfg: &RunConfig) -> Result<RunReport, Error> {
    let mut cfg = cfg.clone();
    cfg.problem = Problem::Poisson;
    execute(&cfg, false)
}

/// Solves the Stokes problem: the manufactured pair on any mesh, or the
/// channel flow when the mesh carries `inlet` and `noslip` tags.
pub fn run_stokes(cfg: &RunConfig) -> Result<RunReport, Error> {
    let mut cfg = cfg.clone();
    cfg.problem = Problem::Stokes;
    execute(&cfg, false)
}

/// Times assembly from scratch and in place for `cfg.problem` after one
/// warm-up run, then solves once.
pub fn run_benchmark(cfg: &RunConfig) -> Result<RunReport, Error> {
    execute(cfg, true)
}

fn execute(cfg: &RunConfig, warmup: bool) -> Result<RunReport, Error> {
    cfg.validate()?;
    let report = match (cfg.domain_dim()?, cfg.problem) {
        (2, Problem::Poisson) => poisson::<2>(cfg, warmup)?,
        (3, Problem::Poisson) => poisson::<3>(cfg, warmup)?,
        (2, Problem::Stokes) => stokes::<2>(cfg, warmup)?,
        (3, Problem::Stokes) => stokes::<3>(cfg, warmup)?,
        (d, _) => return Err(Error::Config(format!("{d}-d domains are not supported (2 or 3)"))),
    };
    if let Some(out) = &cfg.out {
        std::fs::write(out, report.to_json()).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
    }
    Ok(report)
}

fn poisson<const D: usize>(cfg: &RunConfig, warmup: bool) -> Result<RunReport, Error> {
    let sol = PoissonSolution::new(cfg.solution, cfg.order);
    let mut asm = timed_assembly::<D, _>(cfg, warmup, |m| poisson_stage(cfg, m, &sol))?;
    let t = Instant::now();
    let rep = cg_solve(&asm.matrix, &asm.rhs, &solver_options(cfg), Precond::Jacobi)?;
    asm.timings.solve_s = t.elapsed().as_secs_f64();
    let st = &asm.stage;
    let uh = lazyfe_core::fe_spaces::fe_function(&st.trial, rep.x.clone())?;
    let exact = sol.field::<D>();
    let errors = error_norms(&exact, uh.cell_field(), 2 * cfg.order + 2)?;
    if let Some(path) = &cfg.vtk {
        let e = CellField::from_field(st.test.triangulation(), exact).sub(uh.cell_field())?;
        vtk::write_vtk(
            st.test.triangulation(),
            &[("uh", uh.cell_field()), ("eh", &e)],
            vtk_refinement(cfg.order),
            path,
        )?;
    }
    let dofs = st.test.num_free_dofs();
    Ok(report(cfg, &rep, asm.timings, asm.reassembly_max_diff, vec![("u", dofs, errors)], None))
}

fn report(
    cfg: &RunConfig,
    rep: &SolveReport,
    timings: Timings,
    reassembly_max_diff: f64,
    fields: Vec<(&str, usize, ErrorNorms)>,
    pressure_mean: Option<f64>,
) -> RunReport {
    RunReport {
        problem: cfg.problem,
        dofs: fields.iter().map(|f| f.1).sum(),
        field_dofs: fields.iter().map(|f| (f.0.to_string(), f.1)).collect(),
        errors: fields[0].2,
        field_errors: fields.iter().map(|f| (f.0.to_string(), f.2)).collect(),
        timings,
        iterations: rep.iterations,
        residual: rep.residual,
        converged: rep.converged,
        pressure_mean,
        reassembly_max_diff,
        config: cfg.clone(),
    }
}

struct StokesStage<const D: usize> {
    trial: MultiFieldFESpace<D>,
    plan: AssemblyPlan,
    a: DomainContribution<D>,
    l: DomainContribution<D>,
    /// Whether the pressure is only determined up to a constant.
    floating_pressure: bool,
}

impl<const D: usize> Stage<D> for StokesStage<D> {
    fn plan(&self) -> &AssemblyPlan {
        &self.plan
    }
    fn forms(&self) -> (&DomainContribution<D>, &DomainContribution<D>) {
        (&self.a, &self.l)
    }
}

/// Tags of the channel benchmark, present when the mesh defines them.
fn is_channel<const D: usize>(model: &DiscreteModel<D>) -> bool {
    ["inlet", "noslip"].iter().all(|t| model.tag_facets(t).is_ok())
}

fn covers_boundary<const D: usize>(model: &DiscreteModel<D>, tags: &[String]) -> Result<bool, Error> {
    let mut set = BTreeSet::new();
    for t in tags {
        set.extend(model.tag_facets(t)?.iter().copied());
    }
    Ok(model.boundary_facets().iter().all(|f| set.contains(f)))
}

fn stokes_stage<const D: usize>(
    cfg: &RunConfig,
    model: &Arc<DiscreteModel<D>>,
    sol: &StokesSolution,
) -> Result<StokesStage<D>, Error> {
    let channel = is_channel(model);
    let (tags, data): (Vec<DirichletTag>, Vec<FieldRef<D>>) = if channel {
        let mut tags = vec![DirichletTag::all("inlet"), DirichletTag::all("noslip")];
        if D != 3 {
            return Err(Error::Config("the channel configuration needs a 3-d mesh".into()));
        }
        let mut data = vec![inflow_profile::<D>(), zero_vector::<D>()];
        if model.tag_facets("ux0").is_ok() {
            let mut mask = vec![false; D];
            mask[0] = true;
            tags.push(DirichletTag::masked("ux0", &mask));
            data.push(zero_vector::<D>());
        }
        (tags, data)
    } else {
        let tags: Vec<DirichletTag> = cfg.dirichlet.iter().map(|t| DirichletTag::all(t)).collect();
        (tags, vec![sol.velocity_field::<D>()])
    };
    let v = Arc::new(make_fespace(model, cfg.order, ValueKind::Vector, &tags)?);
    let u = Arc::new(trial_space(&v, &data)?);
    let p = Arc::new(make_fespace(model, cfg.order - 1, ValueKind::Scalar, &[])?);
    let test = multi_field(vec![v.clone(), p.clone()])?;
    let trial = multi_field(vec![u, p])?;
    let degree = 2 * cfg.order;
    let a = stokes_bilinear_form(&test, &trial, degree)?;
    let trian = test.triangulation();
    let [vb, qb]: [CellField<D>; 2] = two(mf_basis(&test, BasisRole::Test)?)?;
    let l = if channel {
        DomainContribution::new()
    } else {
        let f = CellField::from_field(trian, sol.forcing_field::<D>());
        let g = CellField::from_field(trian, sol.divergence_field::<D>());
        integrate(&f.dot(&vb)?.sub(&qb.mul(&g)?)?, &measure(trian, degree)?)?
    };
    let mask = block_mask(&a);
    let plan = AssemblyPlan::for_multi(&test, &trial, mask.as_deref())?.with_threads(cfg.threads);
    let floating_pressure = !channel && covers_boundary(model, &cfg.dirichlet)?;
    Ok(StokesStage {
        trial,
        plan,
        a,
        l,
        floating_pressure,
    })
}

fn mean<const D: usize>(f: &CellField<D>, degree: usize) -> Result<f64, Error> {
    let dm = measure(f.triangulation(), degree)?;
    let vol = integrate(&CellField::constant(f.triangulation(), 1.0), &dm)?.sum();
    Ok(integrate(f, &dm)?.sum() / vol)
}

fn stokes<const D: usize>(cfg: &RunConfig, warmup: bool) -> Result<RunReport, Error> {
    let sol = StokesSolution {
        zero: cfg.solution == Solution::Zero,
    };
    let mut asm = timed_assembly::<D, _>(cfg, warmup, |m| stokes_stage(cfg, m, &sol))?;
    let st = &asm.stage;
    let offsets = st.trial.offsets().to_vec();
    let nullspace: Option<Vec<f64>> = st
        .floating_pressure
        .then(|| (0..offsets[2]).map(|i| if i < offsets[1] { 0.0 } else { 1.0 }).collect());
    let t = Instant::now();
    let rep = minres_solve(&asm.matrix, &asm.rhs, &solver_options(cfg), nullspace.as_deref())?;
    asm.timings.solve_s = t.elapsed().as_secs_f64();

    let degree = 2 * cfg.order + 2;
    let mut x = rep.x.clone();
    let [_, ph]: [FEFunction<D>; 2] = two(mf_function(&st.trial, &x)?)?;
    let mut pressure_mean = None;
    if st.floating_pressure {
        let shift = mean(ph.cell_field(), degree)?;
        x[offsets[1]..].iter_mut().for_each(|v| *v -= shift);
    }
    let [uh, ph]: [FEFunction<D>; 2] = two(mf_function(&st.trial, &x)?)?;
    let (eu, ep) = if is_channel(st.trial.spaces()[0].model()) {
        (ErrorNorms::default(), ErrorNorms::default())
    } else {
        let exact_p = sol.pressure_field::<D>();
        let mut pe = CellField::from_field(ph.space().triangulation(), exact_p.clone());
        if st.floating_pressure {
            pressure_mean = Some(mean(ph.cell_field(), degree)?);
            let c = mean(&pe, degree)?;
            pe = pe.sub(&CellField::constant(ph.space().triangulation(), c))?;
        }
        let dm = measure(ph.space().triangulation(), degree)?;
        let e = pe.sub(ph.cell_field())?;
        let l2 = integrate(&e.mul(&e)?, &dm)?.sum().max(0.0).sqrt();
        let h1 = (l2 * l2 + integrate(&squared(&e.gradient()?)?, &dm)?.sum().max(0.0)).sqrt();
        (
            error_norms(&sol.velocity_field::<D>(), uh.cell_field(), degree)?,
            ErrorNorms {
                h1: Some(h1),
                l2: Some(l2),
            },
        )
    };
    if let Some(path) = &cfg.vtk {
        vtk::write_vtk(
            uh.space().triangulation(),
            &[("uh", uh.cell_field()), ("ph", ph.cell_field())],
            vtk_refinement(cfg.order),
            path,
        )?;
    }
    let fields = vec![("u", offsets[1], eu), ("p", offsets[2] - offsets[1], ep)];
    Ok(report(cfg, &rep, asm.timings, asm.reassembly_max_diff, fields, pressure_mean))
}
