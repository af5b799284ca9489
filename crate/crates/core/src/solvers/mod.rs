//! Direct solves, the Arlequin KKT solve, optimisation-based coupling and the
//! partitioned Robin iteration.

pub mod obm;
pub mod robin;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::config::Problem;
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::operators::arlequin::{assemble_arlequin_saddle, ArlequinParams, SaddleSystem};
use crate::operators::{assemble_coupled_operator, LinearSystem, Method};
use crate::grid::BlendingShape;

pub use obm::{solve_optimization_based, ObmResult};
pub use robin::{solve_partitioned_robin, sweep_robin_coefficient, RobinSweepReport, RobinSweepRow};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArlequinBlocks {
    pub local_nodes: Vec<usize>,
    pub nonlocal_nodes: Vec<usize>,
    pub multiplier_nodes: Vec<usize>,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub phi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionField {
    pub method: Method,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub regions: Vec<crate::grid::Region>,
    pub constrained: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arlequin: Option<ArlequinBlocks>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub residuals: Vec<f64>,
    pub mismatches: Vec<f64>,
    /// `mismatch_k / mismatch_{k-1}`; undefined for the first sweep.
    pub reduction_factors: Vec<Option<f64>>,
    pub iterations: usize,
    pub converged: bool,
}

impl IterationTrace {
    pub fn push(&mut self, residual: f64, mismatch: f64) {
        let rf = self.mismatches.last().map(|prev| mismatch / prev);
        self.residuals.push(residual);
        self.mismatches.push(mismatch);
        self.reduction_factors.push(rf);
        self.iterations += 1;
    }

    /// Geometric mean of the recorded reduction factors.
    pub fn mean_reduction_factor(&self) -> Option<f64> {
        let v: Vec<f64> = self.reduction_factors.iter().flatten().copied().collect();
        if v.is_empty() || v.iter().any(|r| !(*r > 0.0)) {
            return None;
        }
        Some((v.iter().map(|r| r.ln()).sum::<f64>() / v.len() as f64).exp())
    }
}

/// Result of a coupled solve with method-specific extras.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub field: SolutionField,
    /// Sup-norm residual of the solved discrete equations.
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<IterationTrace>,
}

fn sup(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |a, b| a.max(b.abs()))
}

pub(crate) fn inf_norm(a: &DMatrix<f64>) -> f64 {
    a.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Dense LU with partial pivoting, followed by a residual check.
pub fn solve_dense(a: &DMatrix<f64>, b: &DVector<f64>, rel_tol: f64) -> Result<DVector<f64>> {
    let u = a.clone().lu().solve(b).ok_or(Error::SingularSystem)?;
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem);
    }
    let r = sup((a * &u - b).iter().copied());
    let scale = inf_norm(a) * sup(u.iter().copied()) + sup(b.iter().copied());
    if r > rel_tol * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::SingularSystem);
    }
    Ok(u)
}

pub fn solve_linear_system(system: &LinearSystem) -> Result<Vec<f64>> {
    Ok(solve_dense(&system.matrix, &system.rhs, 1e-10)?.iter().copied().collect())
}

/// Coupled operator with `-f` on free rows and `g` on every constrained node.
pub fn assemble_problem(
    problem: &Problem,
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
) -> Result<LinearSystem> {
    let mut sys = assemble_coupled_operator(
        &problem.grid,
        &problem.decomposition,
        &problem.config.method,
        &problem.kernel,
    )?;
    for i in 0..sys.len() {
        if sys.is_free(i) {
            sys.rhs[i] = -f(problem.grid.x(i));
        }
    }
    for i in std::mem::take(&mut sys.boundary) {
        sys.constrain(i, g(problem.grid.x(i)));
    }
    Ok(sys)
}

fn field(problem: &Problem, u: Vec<f64>, constrained: Vec<usize>) -> SolutionField {
    SolutionField {
        method: problem.method(),
        x: problem.grid.nodes(),
        u,
        regions: problem.regions.clone(),
        constrained,
        arlequin: None,
    }
}

pub fn arlequin_params(problem: &Problem) -> ArlequinParams {
    ArlequinParams {
        shape: problem.config.method.blending.unwrap_or(BlendingShape::PiecewiseLinear),
        kappa0: problem.config.solver.kappa0,
        kappa1: problem.config.solver.kappa1,
    }
}

/// Solves the KKT system and reconstructs `u = alpha1 u1 + beta u2` on the grid.
pub fn solve_saddle_system(saddle: &SaddleSystem, grid: &Grid1D) -> Result<(Vec<f64>, ArlequinBlocks, f64)> {
    let x = solve_dense(&saddle.kkt, &saddle.rhs, 1e-9).map_err(|e| match e {
        Error::SingularSystem => Error::RankDeficientCoupling,
        e => e,
    })?;
    let (n1, n2) = (saddle.n1(), saddle.n2());
    let u1: Vec<f64> = x.rows(0, n1).iter().copied().collect();
    let u2: Vec<f64> = x.rows(n1, n2).iter().copied().collect();
    let phi: Vec<f64> = x.rows(n1 + n2, x.len() - n1 - n2).iter().copied().collect();
    let residual = sup((&saddle.kkt * &x - &saddle.rhs).iter().copied());
    let ia = saddle.local_nodes[0];
    let u = (0..grid.n_nodes)
        .map(|i| {
            let v2 = (i < n2).then(|| u2[i]);
            let v1 = (i >= ia).then(|| u1[i - ia]);
            match (v1, v2) {
                (Some(a), Some(b)) => saddle.alpha1[i] * a + saddle.beta[i] * b,
                (Some(a), None) => a,
                (None, Some(b)) => b,
                (None, None) => unreachable!("every node belongs to a subdomain"),
            }
        })
        .collect();
    let blocks = ArlequinBlocks {
        local_nodes: saddle.local_nodes.clone(),
        nonlocal_nodes: saddle.nonlocal_nodes.clone(),
        multiplier_nodes: saddle.multiplier_nodes.clone(),
        u1,
        u2,
        phi,
    };
    Ok((u, blocks, residual))
}

/// Solves any configured method with load `f` and Dirichlet / volume data `g`.
pub fn solve(problem: &Problem, f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64) -> Result<Solution> {
    match problem.method() {
        Method::Arlequin => {
            let saddle = assemble_arlequin_saddle(
                &problem.grid,
                &problem.decomposition,
                &problem.kernel,
                &arlequin_params(problem),
                &f,
                &g,
            )?;
            let (u, blocks, residual) = solve_saddle_system(&saddle, &problem.grid)?;
            let n = problem.grid.n_nodes;
            let mut fld = field(problem, u, (0..problem.m()).chain([n - 1]).collect());
            fld.arlequin = Some(blocks);
            Ok(Solution { field: fld, residual, objective: None, trace: None })
        }
        Method::OptimizationBased => {
            let r = solve_optimization_based(problem, &f, &g)?;
            Ok(Solution { field: r.field, residual: r.residual, objective: Some(r.objective), trace: None })
        }
        Method::PartitionedRobin => {
            let (fld, trace, residual) = solve_partitioned_robin(problem, &f, &g, &problem.config.solver)?;
            Ok(Solution { field: fld, residual, objective: None, trace: Some(trace) })
        }
        _ => {
            let sys = assemble_problem(problem, &f, &g)?;
            let u = solve_linear_system(&sys)?;
            let residual = sup(sys.apply(&u).iter().zip(sys.rhs.iter()).map(|(a, b)| a - b));
            let constrained = sys.constrained.keys().copied().collect();
            Ok(Solution { field: field(problem, u, constrained), residual, objective: None, trace: None })
        }
    }
}

#[cfg(test)]
mod tests;
