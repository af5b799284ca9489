//! Verification battery: patch tests, ghost forces, convergence studies, energies and the
//! discrete maximum principle.

mod convergence;
mod energy;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::Problem;
use crate::error::{Error, Result};
use crate::functions::AnalyticFunction;
use crate::operators::{assemble_coupled_operator, Method};
use crate::solvers::{assemble_problem, solve, Solution};

pub use convergence::{fit_slope, run_convergence_study, ConvergenceReport, ConvergenceRow};
pub use energy::{compute_energy, default_window, EnergyReport};

/// Fixed seed of the maximum-principle sampler unless overridden.
pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchTestReport {
    pub method: String,
    pub degree: usize,
    pub sup_error: f64,
    pub sup_residual: f64,
    pub pass: bool,
    pub tolerance: f64,
}

/// Solution-error tolerance of the patch test of degree `p` for `method`.
pub fn patch_tolerance(method: Method, degree: usize) -> f64 {
    use Method::*;
    match (method, degree) {
        (LocalOnly | NonlocalOnly, _) => 1e-9,
        (Splice | OptimizationBased | PartitionedRobin, 1 | 2) => 1e-10,
        (Splice | OptimizationBased | PartitionedRobin, _) => 1e-9,
        (Blended | PartialStress, 1 | 2) => 1e-10,
        (Blended | PartialStress, _) => 1e-3,
        (Qnl, 1) => 1e-10,
        (Qnl, _) => 1e-8,
        (Arlequin, 1) => 1e-6,
        (Arlequin, _) => 1e-3,
        (Morphing | ShrinkingHorizon, _) => 1e-2,
    }
}

fn check_degree(degree: usize) -> Result<()> {
    if (1..=3).contains(&degree) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("patch degree {degree} not in 1..=3")))
    }
}

/// `s u'' - A u` on the free rows of an operator method (zero elsewhere).
/// Rows annihilate constants, so `A u` is evaluated on the increments `u_k - u_i`.
pub fn interior_residual(problem: &Problem, u: &AnalyticFunction) -> Result<Vec<f64>> {
    if !problem.method().is_operator_method() {
        return Err(Error::UnsupportedMethod(problem.method().to_string()));
    }
    let s = problem.stiffness();
    let sys = assemble_coupled_operator(&problem.grid, &problem.decomposition, &problem.config.method, &problem.kernel)?;
    let x = problem.grid.nodes();
    let h = problem.h();
    Ok((0..x.len())
        .map(|i| {
            if !sys.is_free(i) {
                return 0.0;
            }
            let au: f64 = sys
                .matrix
                .row(i)
                .iter()
                .enumerate()
                .filter(|(_, a)| **a != 0.0)
                .map(|(k, a)| a * increment(u, x[i], (k as f64 - i as f64) * h))
                .sum();
            s * u.second_derivative(x[i]) - au
        })
        .collect())
}

/// `u(x + xi) - u(x)`; exact Taylor sum for polynomials.
fn increment(u: &AnalyticFunction, x: f64, xi: f64) -> f64 {
    match u {
        AnalyticFunction::Polynomial { coefficients } => {
            let mut term = 1.0;
            let mut sum = 0.0;
            for n in 1..coefficients.len() {
                term *= xi / n as f64;
                sum += u.nth_derivative(x, n) * term;
            }
            sum
        }
        _ => u.value(x + xi) - u.value(x),
    }
}

/// Interior operator residual of the degree-`p` patch polynomial.
pub fn patch_residual_field(problem: &Problem, degree: usize) -> Result<Vec<f64>> {
    check_degree(degree)?;
    interior_residual(problem, &AnalyticFunction::patch_polynomial(degree))
}

pub fn run_patch_test(problem: &Problem, degree: usize) -> Result<PatchTestReport> {
    Ok(patch_test_solution(problem, degree)?.0)
}

/// Patch test together with the solution it was measured on.
pub fn patch_test_solution(problem: &Problem, degree: usize) -> Result<(PatchTestReport, Solution)> {
    check_degree(degree)?;
    let p = AnalyticFunction::patch_polynomial(degree);
    let s = problem.stiffness();
    let f = |x: f64| -s * p.second_derivative(x);
    let g = |x: f64| p.value(x);
    let sol = solve(problem, f, g)?;
    let sup_error = sol
        .field
        .x
        .iter()
        .zip(&sol.field.u)
        .fold(0.0f64, |a, (x, u)| a.max((u - g(*x)).abs()));
    let sup_residual = if problem.method().is_operator_method() {
        patch_residual_field(problem, degree)?
            .iter()
            .fold(0.0f64, |a, r| a.max(r.abs()))
    } else {
        sol.residual
    };
    let tolerance = patch_tolerance(problem.method(), degree);
    let report = PatchTestReport {
        method: problem.method().to_string(),
        degree,
        sup_error,
        sup_residual,
        pass: sup_error <= tolerance,
        tolerance,
    };
    Ok((report, sol))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GhostForceReport {
    pub method: String,
    pub x: Vec<f64>,
    pub force: Vec<f64>,
    pub sup: f64,
    pub argmax_x: f64,
}

/// `(A x)_i` on free rows under zero forcing.
pub fn compute_ghost_force(problem: &Problem) -> Result<GhostForceReport> {
    let linear = AnalyticFunction::Polynomial { coefficients: vec![0.0, 1.0] };
    let force: Vec<f64> = interior_residual(problem, &linear)?.into_iter().map(|r| -r).collect();
    let x = problem.grid.nodes();
    let (mut sup, mut argmax_x) = (0.0, x[0]);
    for (xi, fi) in x.iter().zip(&force) {
        if fi.abs() > sup {
            sup = fi.abs();
            argmax_x = *xi;
        }
    }
    Ok(GhostForceReport { method: problem.method().to_string(), x, force, sup, argmax_x })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxPrincipleReport {
    pub method: String,
    pub samples: usize,
    pub seed: u64,
    /// Largest `u_i - max g` or `min g - u_i` over interior nodes and samples.
    pub worst_violation: f64,
    pub pass: bool,
}

/// Solves with `f = 0` and random constraint data in `[-1, 1]`; checks interior bounds.
pub fn check_maximum_principle(problem: &Problem, samples: usize, seed: u64) -> Result<MaxPrincipleReport> {
    if !problem.method().is_operator_method() {
        return Err(Error::UnsupportedMethod(problem.method().to_string()));
    }
    let sys = assemble_problem(problem, |_| 0.0, |_| 0.0)?;
    let nodes: Vec<usize> = sys.constrained.keys().copied().collect();
    let lu = sys.matrix.clone().lu();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let mut b = DVector::zeros(sys.len());
        for &i in &nodes {
            b[i] = rng.gen_range(-1.0..=1.0);
        }
        let u = lu.solve(&b).ok_or(Error::SingularSystem)?;
        let gmax = nodes.iter().map(|&i| b[i]).fold(f64::NEG_INFINITY, f64::max);
        let gmin = nodes.iter().map(|&i| b[i]).fold(f64::INFINITY, f64::min);
        for i in (0..sys.len()).filter(|i| sys.is_free(*i)) {
            worst = worst.max(u[i] - gmax).max(gmin - u[i]);
        }
    }
    Ok(MaxPrincipleReport {
        method: problem.method().to_string(),
        samples,
        seed,
        worst_violation: worst,
        pass: worst <= 1e-10,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub method_a: String,
    pub method_b: String,
    pub sup_difference: f64,
    /// Same, excluding nodes inside either overlap region.
    pub sup_difference_outside_overlap: f64,
}

pub fn compare_solutions(
    a: &Problem,
    b: &Problem,
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
) -> Result<ComparisonReport> {
    if a.grid != b.grid {
        return Err(Error::InvalidParameter("compared problems use different grids".into()));
    }
    let ua = solve(a, &f, &g)?.field;
    let ub = solve(b, &f, &g)?.field;
    let tol = a.grid.tol();
    let in_overlap = |x: f64| {
        [a.decomposition.omega_o, b.decomposition.omega_o]
            .iter()
            .flatten()
            .any(|o| x >= o.lo - tol && x <= o.hi + tol)
    };
    let mut all = 0.0f64;
    let mut outside = 0.0f64;
    for i in 0..ua.u.len() {
        let d = (ua.u[i] - ub.u[i]).abs();
        all = all.max(d);
        if !in_overlap(ua.x[i]) {
            outside = outside.max(d);
        }
    }
    Ok(ComparisonReport {
        method_a: a.method().to_string(),
        method_b: b.method().to_string(),
        sup_difference: all,
        sup_difference_outside_overlap: outside,
    })
}
