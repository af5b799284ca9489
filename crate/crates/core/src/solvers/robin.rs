//! Partitioned Robin-Schwarz iteration on an overlapping split.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::config::{PartitionMode, Problem, Robin, SolverParams};
use crate::error::{Error, Result};
use crate::parallel::map_ordered;

use super::obm::{base_rhs, local_matrix, nonlocal_matrix, OverlapLayout};
use super::{IterationTrace, SolutionField};

fn check(r: Robin) -> Result<()> {
    match r {
        Robin::Coefficient(v) if !(v >= 0.0) || !v.is_finite() => Err(Error::InvalidRobin(v)),
        _ => Ok(()),
    }
}

pub fn solve_partitioned_robin(
    problem: &Problem,
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
    params: &SolverParams,
) -> Result<(SolutionField, IterationTrace, f64)> {
    check(params.r1)?;
    check(params.r2)?;
    if params.r1 == Robin::Coefficient(0.0) && params.r2 == Robin::Coefficient(0.0) {
        return Err(Error::InvalidRobin(0.0));
    }
    let lay = OverlapLayout::new(problem)?;
    let h = problem.h();
    if matches!(params.r1, Robin::Coefficient(_)) && lay.ib < lay.ia + 1 {
        let o = problem.decomposition.omega_o.expect("overlap layout exists");
        return Err(Error::OverlapTooSmall { width: o.width(), required: problem.delta() + h });
    }

    let mut an = nonlocal_matrix(problem, &lay)?;
    if let Robin::Coefficient(r) = params.r1 {
        for i in lay.ib + 1..=lay.ic {
            an.row_mut(i).fill(0.0);
            an[(i, i)] = r + 1.5 / h;
            an[(i, i - 1)] = -2.0 / h;
            an[(i, i - 2)] = 0.5 / h;
        }
    }
    let mut al = local_matrix(problem, &lay);
    if let Robin::Coefficient(r) = params.r2 {
        al.row_mut(0).fill(0.0);
        al[(0, 0)] = r + 1.5 / h;
        al[(0, 1)] = -2.0 / h;
        al[(0, 2)] = 0.5 / h;
    }
    let lu_n = an.clone().lu();
    let lu_l = al.clone().lu();
    let (bn0, bl0) = base_rhs(problem, &lay, &f, &g);

    let mut ul = DVector::zeros(lay.n_local());
    let mut un = DVector::zeros(lay.n_nonlocal());
    let mut prev = vec![0.0; lay.m + 1];
    let mut trace = IterationTrace::default();
    let sweeps = match params.mode {
        PartitionMode::Implicit => params.max_iter,
        PartitionMode::Explicit => params.sweeps,
    };
    let mut residual = 0.0f64;
    for _ in 0..sweeps {
        let mut bn = bn0.clone();
        for i in lay.ib + 1..=lay.ic {
            let l = |k: usize| ul[k - lay.ia];
            bn[i] = match params.r1 {
                Robin::Dirichlet => l(i),
                Robin::Coefficient(r) => r * l(i) + (1.5 * l(i) - 2.0 * l(i - 1) + 0.5 * l(i - 2)) / h,
            };
        }
        un = lu_n.solve(&bn).ok_or(Error::SingularSystem)?;
        let mut bl = bl0.clone();
        bl[0] = match params.r2 {
            Robin::Dirichlet => un[lay.ia],
            Robin::Coefficient(r) => {
                let a = lay.ia;
                r * un[a] + (1.5 * un[a] - 2.0 * un[a + 1] + 0.5 * un[a + 2]) / h
            }
        };
        ul = lu_l.solve(&bl).ok_or(Error::SingularSystem)?;
        residual = residual
            .max((&an * &un - &bn).amax())
            .max((&al * &ul - &bl).amax());

        let vb: Vec<f64> = (lay.ib + 1..=lay.ic).map(|i| un[i]).chain([ul[0]]).collect();
        let change = vb.iter().zip(&prev).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        let mismatch = (lay.ia..=lay.ic).fold(0.0f64, |a, i| a.max((un[i] - ul[i - lay.ia]).abs()));
        trace.push(change, mismatch);
        prev = vb;
        if params.mode == PartitionMode::Implicit && change <= params.tol {
            trace.converged = true;
            break;
        }
    }
    if params.mode == PartitionMode::Explicit {
        trace.converged = trace.residuals.last().is_some_and(|r| *r <= params.tol);
    } else if !trace.converged {
        return Err(Error::NotConverged { max_iter: params.max_iter, trace: Box::new(trace) });
    }
    let u = (0..lay.n)
        .map(|i| if i <= lay.ib { un[i] } else { ul[i - lay.ia] })
        .collect();
    let field = SolutionField {
        method: problem.method(),
        x: problem.grid.nodes(),
        u,
        regions: problem.regions.clone(),
        constrained: (0..lay.m).chain([lay.n - 1]).collect(),
        arlequin: None,
    };
    Ok((field, trace, residual))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobinSweepRow {
    pub r: f64,
    pub iterations: usize,
    pub converged: bool,
    pub mean_reduction_factor: Option<f64>,
    pub trace: IterationTrace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobinSweepReport {
    pub method: String,
    pub rows: Vec<RobinSweepRow>,
    /// Coefficient with the fewest sweeps among converged rows.
    pub best_r: Option<f64>,
}

/// Implicit runs with `R1 = R2 = R` for each `R`; non-convergence is recorded, not fatal.
pub fn sweep_robin_coefficient(
    problem: &Problem,
    f: &(dyn Fn(f64) -> f64 + Sync),
    g: &(dyn Fn(f64) -> f64 + Sync),
    r_grid: &[f64],
    threads: usize,
) -> Result<RobinSweepReport> {
    if r_grid.is_empty() {
        return Err(Error::InvalidParameter("empty Robin coefficient grid".into()));
    }
    let rows = map_ordered(r_grid, threads, |&r| {
        let mut params = problem.config.solver;
        params.r1 = Robin::Coefficient(r);
        params.r2 = Robin::Coefficient(r);
        params.mode = PartitionMode::Implicit;
        match solve_partitioned_robin(problem, f, g, &params) {
            Ok((_, trace, _)) => Ok(row(r, trace)),
            Err(Error::NotConverged { trace, .. }) => Ok(row(r, *trace)),
            Err(e) => Err(e),
        }
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let best_r = rows
        .iter()
        .filter(|r| r.converged)
        .min_by_key(|r| r.iterations)
        .map(|r| r.r);
    Ok(RobinSweepReport { method: problem.method().to_string(), rows, best_r })
}

fn row(r: f64, trace: IterationTrace) -> RobinSweepRow {
    RobinSweepRow {
        r,
        iterations: trace.iterations,
        converged: trace.converged,
        mean_reduction_factor: trace.mean_reduction_factor(),
        trace,
    }
}
