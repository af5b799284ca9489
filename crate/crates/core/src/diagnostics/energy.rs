use serde::{Deserialize, Serialize};

use crate::config::Problem;
use crate::error::{Error, Result};
use crate::grid::Interval;
use crate::kernels::discrete_moments;
use crate::operators::{energy_terms, Method};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub method: String,
    pub window_lo: f64,
    pub window_hi: f64,
    pub nonlocal: f64,
    pub local: f64,
    /// Energy of the method's own discretisation, for energy-based methods.
    pub coupled: Option<f64>,
}

/// `[x_lo + delta, x_hi - delta]`.
pub fn default_window(problem: &Problem) -> Interval {
    let g = &problem.grid;
    Interval::new(g.x_lo + problem.delta(), g.x_hi - problem.delta())
}

/// Nonlocal, local and coupled energies of `u` restricted to `window`.
pub fn compute_energy(problem: &Problem, u: &[f64], window: Option<Interval>) -> Result<EnergyReport> {
    let grid = &problem.grid;
    if u.len() != grid.n_nodes {
        return Err(Error::InvalidParameter(format!(
            "field has {} values, grid has {} nodes",
            u.len(),
            grid.n_nodes
        )));
    }
    let w = window.unwrap_or_else(|| default_window(problem));
    if !(w.hi > w.lo) {
        return Err(Error::InvalidParameter("empty energy window".into()));
    }
    let tol = grid.tol();
    let h = grid.h;
    let theta = |x: f64| {
        if (x - w.lo).abs() <= tol || (x - w.hi).abs() <= tol {
            0.5
        } else if x > w.lo && x < w.hi {
            1.0
        } else {
            0.0
        }
    };
    let cell_in = |lo: f64, hi: f64| lo >= w.lo - tol && hi <= w.hi + tol;

    let st = discrete_moments(&problem.kernel, h)?;
    let n = grid.n_nodes;
    let mut nonlocal = 0.0;
    for i in 0..n {
        let t = theta(grid.x(i));
        if t == 0.0 {
            continue;
        }
        for (jj, a) in st.coef.iter().enumerate() {
            let j = jj + 1;
            for k in [i.checked_sub(j), Some(i + j).filter(|k| *k < n)].into_iter().flatten() {
                let d = u[k] - u[i];
                nonlocal += t * 0.25 * h * a * d * d;
            }
        }
    }
    let s = problem.stiffness();
    let mut local = 0.0;
    for c in 0..n - 1 {
        if cell_in(grid.x(c), grid.x(c + 1)) {
            let d = u[c + 1] - u[c];
            local += 0.5 * s * d * d / h;
        }
    }
    let coupled = match problem.method() {
        Method::Qnl | Method::Morphing | Method::ShrinkingHorizon => {
            let terms = energy_terms(grid, &problem.decomposition, &problem.config.method, &problem.kernel)?;
            Some(
                terms
                    .iter()
                    .map(|t| {
                        let wt = if t.cell {
                            if cell_in(t.origin - 0.5 * h, t.origin + 0.5 * h) { 1.0 } else { 0.0 }
                        } else {
                            theta(t.origin)
                        };
                        wt * t.value(u)
                    })
                    .sum(),
            )
        }
        _ => None,
    };
    Ok(EnergyReport {
        method: problem.method().to_string(),
        window_lo: w.lo,
        window_hi: w.hi,
        nonlocal,
        local,
        coupled,
    })
}
