//! One-dimensional local-to-nonlocal coupling laboratory.
//!
//! Grids and decompositions live in [`grid`], kernels and horizon functions in [`kernels`],
//! discrete operators in [`operators`], linear/saddle/optimisation/partitioned solvers in
//! [`solvers`], and the verification battery (patch tests, ghost forces, convergence,
//! energies, maximum principle) in [`diagnostics`].

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod functions;
pub mod grid;
pub mod kernels;
pub mod operators;
pub mod parallel;
pub mod presets;
pub mod solvers;

pub use config::{CouplingConfig, KernelSpec, PartitionMode, Problem, Robin, SolverParams};
pub use error::{Error, Result};
pub use functions::AnalyticFunction;
pub use grid::{
    build_decomposition, eval_blending, BlendingFunction, BlendingShape, Decomposition,
    DecompositionMode, DecompositionSpec, Grid1D, Interval, Region,
};
pub use kernels::{
    discrete_moments, eval_horizon, eval_kernel, HorizonFunction, HorizonKind, Kernel,
    KernelFamily, Model, Stencil,
};
pub use operators::arlequin::{assemble_arlequin_saddle, ArlequinParams, SaddleSystem};
pub use operators::{
    apply_dirichlet_constraints, assemble_coupled_operator, assemble_local_operator,
    assemble_nonlocal_operator, ConstraintRegion, HorizonSpec, LinearSystem, Method, MethodSpec,
};
pub use solvers::{IterationTrace, Solution, SolutionField};

pub use nalgebra;

/// Float rendered with 17 significant digits, the format used by every report.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
