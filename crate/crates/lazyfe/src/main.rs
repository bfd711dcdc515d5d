use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lazyfe::drivers::{run_benchmark, run_poisson, run_stokes, Geometry, Problem, RunConfig};
use lazyfe::manufactured::Solution;
use lazyfe::Error;

#[derive(Parser)]
#[command(name = "lazyfe", version, about = "Poisson and Stokes finite element drivers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a Poisson problem with a manufactured solution.
    Poisson(Common),
    /// Solve a Stokes problem with Taylor-Hood elements.
    Stokes(Common),
    /// Time assembly from scratch and in place.
    Bench {
        #[arg(long, value_enum, default_value_t = Problem::Poisson)]
        problem: Problem,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// `cube` or `file:PATH` (JSON mesh).
    #[arg(long, default_value = "cube", value_parser = parse_geometry)]
    geo: Geometry,
    /// Dimension of the generated cube.
    #[arg(long, default_value_t = 3)]
    dim: usize,
    /// Cells per axis: `N` or `NX,NY[,NZ]`.
    #[arg(long, value_delimiter = ',', default_value = "8")]
    n: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    order: usize,
    /// Split cube cells into simplices.
    #[arg(long)]
    simplexify: bool,
    #[arg(long, value_enum, default_value_t = Solution::Polynomial)]
    solution: Solution,
    /// Dirichlet tags.
    #[arg(long, value_delimiter = ',', default_value = "boundary")]
    dirichlet: Vec<String>,
    /// Neumann tags (Poisson).
    #[arg(long, value_delimiter = ',')]
    neumann: Vec<String>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 4)]
    repeats: usize,
    /// Assembly threads.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Write the JSON report here as well as to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the solution as legacy VTK.
    #[arg(long)]
    vtk: Option<PathBuf>,
}

fn parse_geometry(s: &str) -> Result<Geometry, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl Common {
    fn config(self, problem: Problem) -> RunConfig {
        RunConfig {
            problem,
            geometry: self.geo,
            dim: self.dim,
            partitions: self.n,
            order: self.order,
            simplexify: self.simplexify,
            solution: self.solution,
            dirichlet: self.dirichlet,
            neumann: self.neumann,
            tol: self.tol,
            repeats: self.repeats,
            threads: self.threads,
            vtk: self.vtk,
            out: self.out,
        }
    }
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Poisson(c) => run_poisson(&c.config(Problem::Poisson)),
        Command::Stokes(c) => run_stokes(&c.config(Problem::Stokes)),
        Command::Bench { problem, common } => run_benchmark(&common.config(problem)),
    };
    match result {
        Ok(report) => {
            println!("{}", report.to_json());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let body = serde_json::json!({ "error": e });
            eprintln!("{body}");
            ExitCode::FAILURE
        }
    }
}
