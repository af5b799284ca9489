//! Optimisation-based coupling: minimise the overlap mismatch over virtual boundary controls.

use nalgebra::{DMatrix, DVector};

use crate::config::Problem;
use crate::error::{Error, Result};
use crate::kernels::discrete_moments;

use super::{solve_dense, SolutionField};

/// Node indices of an overlapping split: `a = gamma_v`, `b = c - delta`, `c` = overlap end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct OverlapLayout {
    pub ia: usize,
    pub ib: usize,
    pub ic: usize,
    pub m: usize,
    pub n: usize,
}

impl OverlapLayout {
    pub fn new(problem: &Problem) -> Result<Self> {
        let dec = &problem.decomposition;
        let o = dec.omega_o.ok_or_else(|| Error::MissingParameter("overlap".into()))?;
        let idx = |x: f64| {
            problem.grid.index_of(x).ok_or_else(|| {
                Error::InvalidParameter(format!("overlap end {x} is not a grid node"))
            })
        };
        let (ia, ic) = (idx(o.lo)?, idx(o.hi)?);
        let m = problem.m();
        if ic < ia + m {
            return Err(Error::OverlapTooSmall { width: o.width(), required: dec.delta });
        }
        Ok(Self { ia, ib: ic - m, ic, m, n: problem.grid.n_nodes })
    }

    /// Unknowns of the nonlocal subproblem: nodes `0..=ic`.
    pub fn n_nonlocal(&self) -> usize {
        self.ic + 1
    }

    /// Unknowns of the local subproblem: nodes `ia..n`.
    pub fn n_local(&self) -> usize {
        self.n - self.ia
    }

    /// Trapezoid weights on the overlap nodes `ia..=ic`.
    pub fn weights(&self, h: f64) -> Vec<f64> {
        let k = self.ic - self.ia + 1;
        (0..k).map(|i| if i == 0 || i + 1 == k { 0.5 * h } else { h }).collect()
    }
}

/// Nonlocal subproblem matrix with identity rows on the layer and on `omega_v`.
pub(crate) fn nonlocal_matrix(problem: &Problem, lay: &OverlapLayout) -> Result<DMatrix<f64>> {
    let st = discrete_moments(&problem.kernel, problem.h())?;
    let n = lay.n_nonlocal();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        if i < lay.m || i > lay.ib {
            a[(i, i)] = 1.0;
            continue;
        }
        for (jj, c) in st.coef.iter().enumerate() {
            let j = jj + 1;
            a[(i, i + j)] += c;
            a[(i, i - j)] += c;
            a[(i, i)] -= 2.0 * c;
        }
    }
    Ok(a)
}

/// Local subproblem matrix with identity rows at `gamma_v` and the right boundary.
pub(crate) fn local_matrix(problem: &Problem, lay: &OverlapLayout) -> DMatrix<f64> {
    let n = lay.n_local();
    let h = problem.h();
    let c = problem.stiffness() / (h * h);
    let mut a = DMatrix::zeros(n, n);
    a[(0, 0)] = 1.0;
    a[(n - 1, n - 1)] = 1.0;
    for r in 1..n - 1 {
        a[(r, r - 1)] = c;
        a[(r, r)] = -2.0 * c;
        a[(r, r + 1)] = c;
    }
    a
}

/// Right-hand sides with zero control values.
pub(crate) fn base_rhs(
    problem: &Problem,
    lay: &OverlapLayout,
    f: &dyn Fn(f64) -> f64,
    g: &dyn Fn(f64) -> f64,
) -> (DVector<f64>, DVector<f64>) {
    let x = |i: usize| problem.grid.x(i);
    let bn = DVector::from_iterator(
        lay.n_nonlocal(),
        (0..lay.n_nonlocal()).map(|i| {
            if i < lay.m {
                g(x(i))
            } else if i > lay.ib {
                0.0
            } else {
                -f(x(i))
            }
        }),
    );
    let nl = lay.n_local();
    let bl = DVector::from_iterator(
        nl,
        (0..nl).map(|r| {
            if r == 0 {
                0.0
            } else if r + 1 == nl {
                g(x(lay.n - 1))
            } else {
                -f(x(lay.ia + r))
            }
        }),
    );
    (bn, bl)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObmResult {
    pub field: SolutionField,
    pub objective: f64,
    /// `m` nonlocal controls on `omega_v` followed by the local control at `gamma_v`.
    pub controls: Vec<f64>,
    pub u_nonlocal: Vec<f64>,
    pub u_local: Vec<f64>,
    pub residual: f64,
}

/// `1/2 ||u_nl - u_l||^2` with trapezoid weights on the overlap nodes.
pub fn overlap_objective(problem: &Problem, u_nonlocal: &[f64], u_local: &[f64]) -> Result<f64> {
    let lay = OverlapLayout::new(problem)?;
    let w = lay.weights(problem.h());
    Ok(0.5
        * (lay.ia..=lay.ic)
            .zip(&w)
            .map(|(i, wi)| {
                let d = u_nonlocal[i] - u_local[i - lay.ia];
                wi * d * d
            })
            .sum::<f64>())
}

/// Solves both subproblems for the given controls.
pub fn solve_subproblems(
    problem: &Problem,
    f: &dyn Fn(f64) -> f64,
    g: &dyn Fn(f64) -> f64,
    controls: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let lay = OverlapLayout::new(problem)?;
    let (mut bn, mut bl) = base_rhs(problem, &lay, f, g);
    for k in 0..lay.m {
        bn[lay.ib + 1 + k] = controls[k];
    }
    bl[0] = controls[lay.m];
    let un = solve_dense(&nonlocal_matrix(problem, &lay)?, &bn, 1e-10)?;
    let ul = solve_dense(&local_matrix(problem, &lay), &bl, 1e-10)?;
    Ok((un.iter().copied().collect(), ul.iter().copied().collect()))
}

pub fn solve_optimization_based(
    problem: &Problem,
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
) -> Result<ObmResult> {
    let lay = OverlapLayout::new(problem)?;
    let an = nonlocal_matrix(problem, &lay)?;
    let al = local_matrix(problem, &lay);
    let lu_n = an.clone().lu();
    let lu_l = al.clone().lu();
    let (bn, bl) = base_rhs(problem, &lay, &f, &g);
    let un0 = lu_n.solve(&bn).ok_or(Error::SingularSystem)?;
    let ul0 = lu_l.solve(&bl).ok_or(Error::SingularSystem)?;

    // Unit-control responses; the maps control -> state are affine.
    let nc = lay.m + 1;
    let no = lay.ic - lay.ia + 1;
    let mut resp_n = Vec::with_capacity(lay.m);
    let mut b = DMatrix::zeros(no, nc);
    for k in 0..lay.m {
        let mut e = DVector::zeros(lay.n_nonlocal());
        e[lay.ib + 1 + k] = 1.0;
        let r = lu_n.solve(&e).ok_or(Error::SingularSystem)?;
        for (p, i) in (lay.ia..=lay.ic).enumerate() {
            b[(p, k)] = r[i];
        }
        resp_n.push(r);
    }
    let mut e = DVector::zeros(lay.n_local());
    e[0] = 1.0;
    let resp_l = lu_l.solve(&e).ok_or(Error::SingularSystem)?;
    for p in 0..no {
        b[(p, lay.m)] = -resp_l[p];
    }
    let d0 = DVector::from_iterator(no, (lay.ia..=lay.ic).map(|i| un0[i] - ul0[i - lay.ia]));
    let w = DMatrix::from_diagonal(&DVector::from_vec(lay.weights(problem.h())));
    let hess = b.transpose() * &w * &b;
    let grad = b.transpose() * &w * &d0;
    let chol = hess.cholesky().ok_or(Error::ReducedSystemSingular)?;
    let nu = chol.solve(&(-grad));

    let mut un = un0;
    for (k, r) in resp_n.iter().enumerate() {
        un += r * nu[k];
    }
    let ul = ul0 + resp_l * nu[lay.m];
    let d = &d0 + &b * &nu;
    let objective = 0.5 * d.dot(&(&w * &d));

    let bn_star = {
        let mut v = bn.clone();
        for k in 0..lay.m {
            v[lay.ib + 1 + k] = nu[k];
        }
        v
    };
    let mut bl_star = bl.clone();
    bl_star[0] = nu[lay.m];
    let residual = (&an * &un - bn_star)
        .iter()
        .chain((&al * &ul - bl_star).iter())
        .fold(0.0f64, |a, v| a.max(v.abs()));

    let u: Vec<f64> = (0..lay.n)
        .map(|i| if i <= lay.ib { un[i] } else { ul[i - lay.ia] })
        .collect();
    let constrained = (0..lay.m).chain([lay.n - 1]).collect();
    Ok(ObmResult {
        field: SolutionField {
            method: problem.method(),
            x: problem.grid.nodes(),
            u,
            regions: problem.regions.clone(),
            constrained,
            arlequin: None,
        },
        objective,
        controls: nu.iter().copied().collect(),
        u_nonlocal: un.iter().copied().collect(),
        u_local: ul.iter().copied().collect(),
        residual,
    })
}
