//! Config-driven front end for `ltn_core`: the run-config schema, one pipeline per
//! subcommand, and bit-stable report emission.

pub mod config;
pub mod emit;

use std::path::{Path, PathBuf};
use std::time::Instant;

use ltn_core::diagnostics::{
    check_maximum_principle, compare_solutions, compute_energy, compute_ghost_force, patch_test_solution,
    run_convergence_study, DEFAULT_SEED,
};
use ltn_core::operators::arlequin::assemble_arlequin_saddle;
use ltn_core::solvers::{arlequin_params, assemble_problem, solve, sweep_robin_coefficient, Solution};
use ltn_core::{CouplingConfig, Error, Method, Problem};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub use config::{Diagnostic, OutputSpec, ProblemData, RunConfig};
pub use emit::{stable_json, Report, SolveReport};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

/// Config fields responsible for a core error, when they can be named.
fn fields(e: &Error) -> Option<String> {
    Some(match e {
        Error::NonIntegerRatio { .. } | Error::HorizonNotResolved { .. } => "decomposition.delta, h".into(),
        Error::OverlapTooSmall { .. } => "decomposition.overlap, decomposition.delta".into(),
        Error::InconsistentIntervals(_) => "decomposition".into(),
        Error::ModeMismatch { .. } => "method.method, decomposition.mode".into(),
        Error::IllPosedCoupling => "solver.kappa1".into(),
        Error::InvalidRobin(_) => "solver.r1, solver.r2".into(),
        Error::MissingParameter(p) => p.clone(),
        _ => return None,
    })
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_solver_failure() {
            CliError::Solver(e.to_string())
        } else if let Some(f) = fields(&e) {
            CliError::Validation(format!("[{f}] {e}"))
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Run,
    PatchTest,
    GhostForce,
    Converge,
    SweepRobin,
    Compare,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Run => "run",
            Command::PatchTest => "patch-test",
            Command::GhostForce => "ghost-force",
            Command::Converge => "converge",
            Command::SweepRobin => "sweep-robin",
            Command::Compare => "compare",
        }
    }

    /// The diagnostic a subcommand executes for the given config.
    pub fn diagnostic(&self, cfg: &RunConfig, degree: Option<usize>) -> Result<Diagnostic, CliError> {
        let d = &cfg.diagnostic;
        let missing = |what: &str| CliError::Validation(format!("[diagnostic] {} needs {what}", self.name()));
        Ok(match (self, d) {
            (Command::Run, _) => d.clone(),
            (Command::PatchTest, Diagnostic::PatchTest { degree: k }) => {
                Diagnostic::PatchTest { degree: degree.unwrap_or(*k) }
            }
            (Command::PatchTest, _) => Diagnostic::PatchTest { degree: degree.unwrap_or(1) },
            (Command::GhostForce, _) => Diagnostic::GhostForce,
            (Command::Converge, Diagnostic::Convergence { .. }) => d.clone(),
            (Command::Converge, _) => return Err(missing("kind = convergence with deltas")),
            (Command::SweepRobin, Diagnostic::SweepRobin { .. }) => d.clone(),
            (Command::SweepRobin, _) => return Err(missing("kind = sweep_robin with r_grid")),
            (Command::Compare, Diagnostic::Compare { .. }) => d.clone(),
            (Command::Compare, _) => return Err(missing("kind = compare with a method")),
        })
    }
}

#[derive(Debug, Clone)]
pub struct Options {
    pub out: Option<PathBuf>,
    pub csv: bool,
    pub seed: Option<u64>,
    pub threads: usize,
    pub degree: Option<usize>,
}

/// Everything a pipeline produces, as file name and contents.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub report: Report,
    pub files: Vec<(String, String)>,
}

fn solution_files(problem: &Problem, sol: &Solution) -> Result<Vec<(String, String)>, CliError> {
    let mut files = vec![(
        "solution.csv".to_string(),
        emit::solution_csv(&sol.field.x, &sol.field.u, &problem.regions)?,
    )];
    if let Some(t) = &sol.trace {
        files.push(("trace.csv".to_string(), emit::trace_csv(t)?));
    }
    Ok(files)
}

fn matrix_triplets(cfg: &RunConfig, problem: &Problem) -> Result<Vec<(usize, usize, f64)>, CliError> {
    let (f, g) = (&cfg.problem.f, &cfg.problem.g);
    match problem.method() {
        m if m.is_operator_method() => Ok(assemble_problem(problem, |x| f.value(x), |x| g.value(x))?.triplets()),
        Method::Arlequin => {
            let saddle = assemble_arlequin_saddle(
                &problem.grid,
                &problem.decomposition,
                &problem.kernel,
                &arlequin_params(problem),
                |x| f.value(x),
                |x| g.value(x),
            )?;
            let k = &saddle.kkt;
            Ok((0..k.nrows())
                .flat_map(|i| (0..k.ncols()).map(move |j| (i, j, k[(i, j)])))
                .filter(|t| t.2 != 0.0)
                .collect())
        }
        m => Err(CliError::Validation(format!("[output.export_matrix] no single matrix for method {m}"))),
    }
}

/// Executes one diagnostic on a validated config.
pub fn run_pipeline(cfg: &RunConfig, diagnostic: &Diagnostic, seed: u64, threads: usize) -> Result<Artifacts, CliError> {
    let problem = cfg.coupling.prepare()?;
    let (f, g) = (&cfg.problem.f, &cfg.problem.g);
    let mut files = Vec::new();
    let report = match diagnostic {
        Diagnostic::Solve => {
            let sol = solve(&problem, |x| f.value(x), |x| g.value(x))?;
            files.extend(solution_files(&problem, &sol)?);
            let sup_error = cfg.problem.exact.as_ref().map(|e| {
                sol.field.x.iter().zip(&sol.field.u).fold(0.0f64, |a, (x, u)| a.max((u - e.value(*x)).abs()))
            });
            Report::Solve(SolveReport {
                method: problem.method().to_string(),
                n_nodes: problem.grid.n_nodes,
                residual: sol.residual,
                objective: sol.objective,
                iterations: sol.trace.as_ref().map(|t| t.iterations),
                converged: sol.trace.as_ref().map(|t| t.converged),
                sup_error,
            })
        }
        Diagnostic::PatchTest { degree } => {
            let (r, sol) = patch_test_solution(&problem, *degree)?;
            files.extend(solution_files(&problem, &sol)?);
            Report::PatchTest(r)
        }
        Diagnostic::GhostForce => Report::GhostForce(compute_ghost_force(&problem)?),
        Diagnostic::Convergence { deltas, exact } => {
            Report::Convergence(run_convergence_study(&cfg.coupling, deltas, exact, threads)?)
        }
        Diagnostic::SweepRobin { r_grid } => {
            let (fv, gv) = (|x: f64| f.value(x), |x: f64| g.value(x));
            Report::SweepRobin(sweep_robin_coefficient(&problem, &fv, &gv, r_grid, threads)?)
        }
        Diagnostic::Compare { method, decomposition } => {
            let other = CouplingConfig {
                method: method.clone(),
                decomposition: decomposition.clone().unwrap_or_else(|| cfg.coupling.decomposition.clone()),
                ..cfg.coupling.clone()
            };
            let other = other.prepare()?;
            Report::Compare(compare_solutions(&problem, &other, |x| f.value(x), |x| g.value(x))?)
        }
        Diagnostic::Energy { window } => {
            let sol = solve(&problem, |x| f.value(x), |x| g.value(x))?;
            files.extend(solution_files(&problem, &sol)?);
            Report::Energy(compute_energy(&problem, &sol.field.u, *window)?)
        }
        Diagnostic::MaxPrinciple { samples } => Report::MaxPrinciple(check_maximum_principle(&problem, *samples, seed)?),
    };
    if cfg.output.export_matrix {
        files.push(("matrix.csv".to_string(), emit::triplets_csv(&matrix_triplets(cfg, &problem)?)?));
    }
    Ok(Artifacts { report, files })
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub config_sha256: String,
    pub library_version: String,
    pub seed: u64,
    pub wall_time_seconds: f64,
    pub files: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Loads the config, runs the subcommand and writes report, solution and manifest into the output directory.
pub fn run_config(command: Command, path: &Path, opts: &Options) -> Result<PathBuf, CliError> {
    let start = Instant::now();
    let (cfg, bytes) = RunConfig::load(path)?;
    let diagnostic = command.diagnostic(&cfg, opts.degree)?;
    let seed = opts.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let artifacts = run_pipeline(&cfg, &diagnostic, seed, opts.threads)?;

    let dir = opts
        .out
        .clone()
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("ltn-out"));
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let (name, text) = if opts.csv {
        ("report.csv", artifacts.report.to_csv()?)
    } else {
        ("report.json", artifacts.report.to_json()?)
    };
    let mut written = vec![name.to_string()];
    emit::write(&dir.join(name), &text)?;
    for (file, text) in &artifacts.files {
        emit::write(&dir.join(file), text)?;
        written.push(file.clone());
    }
    let manifest = Manifest {
        command: command.name().to_string(),
        config_sha256: sha256_hex(&bytes),
        library_version: ltn_core::VERSION.to_string(),
        seed,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        files: written,
    };
    emit::write(&dir.join("manifest.json"), &stable_json(&manifest)?)?;
    Ok(dir)
}
