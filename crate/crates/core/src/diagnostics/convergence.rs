use serde::{Deserialize, Serialize};

use crate::config::CouplingConfig;
use crate::error::{Error, Result};
use crate::functions::AnalyticFunction;
use crate::parallel::map_ordered;
use crate::solvers::solve;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub delta: f64,
    pub h: f64,
    pub l2_error: f64,
    pub h1_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub method: String,
    pub rows: Vec<ConvergenceRow>,
    pub l2_slope: f64,
    pub h1_slope: f64,
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidParameter("slope fit needs at least two points".into()));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParameter("slope fit needs positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    Ok(sxy / sxx)
}

fn errors(cfg: &CouplingConfig, exact: &AnalyticFunction) -> Result<ConvergenceRow> {
    let problem = cfg.prepare()?;
    let s = problem.stiffness();
    let sol = solve(&problem, |x| -s * exact.second_derivative(x), |x| exact.value(x))?;
    let (x, u) = (&sol.field.x, &sol.field.u);
    let h = problem.h();
    let m = problem.m();
    let n = x.len();
    let mut l2 = 0.0;
    for i in m..n {
        let e = u[i] - exact.value(x[i]);
        let w = if i == m || i + 1 == n { 0.5 } else { 1.0 };
        l2 += w * h * e * e;
    }
    let mut h1 = 0.0;
    for i in m..n - 1 {
        let e = (u[i + 1] - u[i]) / h - exact.derivative(x[i]);
        h1 += h * e * e;
    }
    Ok(ConvergenceRow { delta: problem.delta(), h, l2_error: l2.sqrt(), h1_error: h1.sqrt() })
}

/// Manufactured-solution study over `deltas` at fixed `delta / h`.
pub fn run_convergence_study(
    template: &CouplingConfig,
    deltas: &[f64],
    exact: &AnalyticFunction,
    threads: usize,
) -> Result<ConvergenceReport> {
    if deltas.len() < 3 {
        return Err(Error::InvalidParameter("convergence study needs at least three deltas".into()));
    }
    if deltas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParameter("deltas must be strictly decreasing".into()));
    }
    let configs = deltas
        .iter()
        .map(|d| template.with_delta(*d))
        .collect::<Result<Vec<_>>>()?;
    let rows = map_ordered(&configs, threads, |c| errors(c, exact))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let d: Vec<f64> = rows.iter().map(|r| r.delta).collect();
    let l2: Vec<f64> = rows.iter().map(|r| r.l2_error).collect();
    let h1: Vec<f64> = rows.iter().map(|r| r.h1_error).collect();
    Ok(ConvergenceReport {
        method: template.method.method.to_string(),
        l2_slope: fit_slope(&d, &l2)?,
        h1_slope: fit_slope(&d, &h1)?,
        rows,
    })
}
