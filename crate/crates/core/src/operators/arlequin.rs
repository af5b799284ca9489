//! Arlequin saddle-point system on an overlapping decomposition.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{eval_blending, BlendingFunction, BlendingShape, Decomposition, Grid1D, Interval};
use crate::kernels::{discrete_moments, Kernel};

use super::{check_mode, Method};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArlequinParams {
    pub shape: BlendingShape,
    pub kappa0: f64,
    pub kappa1: f64,
}

/// KKT blocks `[A1 0 C1^T; 0 A2 -C2^T; C1 -C2 0]` with Dirichlet data eliminated symmetrically.
#[derive(Debug, Clone)]
pub struct SaddleSystem {
    pub a1: DMatrix<f64>,
    pub a2: DMatrix<f64>,
    pub c1: DMatrix<f64>,
    pub c2: DMatrix<f64>,
    pub l1: DVector<f64>,
    pub l2: DVector<f64>,
    pub kkt: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub local_nodes: Vec<usize>,
    pub nonlocal_nodes: Vec<usize>,
    pub multiplier_nodes: Vec<usize>,
    /// Nodal blending weight on the full grid.
    pub beta: Vec<f64>,
    /// Nodal local weight, `1 - beta`.
    pub alpha1: Vec<f64>,
    /// KKT index -> imposed value.
    pub constrained: BTreeMap<usize, f64>,
}

impl SaddleSystem {
    pub fn n1(&self) -> usize {
        self.local_nodes.len()
    }

    pub fn n2(&self) -> usize {
        self.nonlocal_nodes.len()
    }

    /// `C(psi, u1 - u2)` for every multiplier basis function.
    pub fn mismatch(&self, u1: &[f64], u2: &[f64]) -> Vec<f64> {
        let r = &self.c1 * DVector::from_column_slice(u1) - &self.c2 * DVector::from_column_slice(u2);
        r.iter().copied().collect()
    }
}

/// Blending function used by the Arlequin weights: flat for `delta/2` at each end of the overlap.
pub fn arlequin_blending(overlap: Interval, delta: f64, shape: BlendingShape) -> BlendingFunction {
    BlendingFunction::new(
        shape,
        Interval::new(overlap.lo + 0.5 * delta, overlap.hi - 0.5 * delta),
    )
}

pub fn assemble_arlequin_saddle(
    grid: &Grid1D,
    dec: &Decomposition,
    kernel: &Kernel,
    params: &ArlequinParams,
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
) -> Result<SaddleSystem> {
    check_mode(Method::Arlequin, dec)?;
    let ArlequinParams { shape, kappa0, kappa1 } = *params;
    if kappa0 < 0.0 || kappa1 < 0.0 {
        return Err(Error::InvalidParameter(format!("kappa0 = {kappa0}, kappa1 = {kappa1}")));
    }
    if kappa1 == 0.0 {
        return Err(Error::IllPosedCoupling);
    }
    let delta = dec.delta;
    let o = dec.omega_o.ok_or_else(|| Error::MissingParameter("overlap".into()))?;
    if o.width() < 2.0 * delta * (1.0 - 1e-9) {
        return Err(Error::OverlapTooSmall { width: o.width(), required: 2.0 * delta });
    }
    let on_grid = |x: f64| {
        grid.index_of(x)
            .ok_or_else(|| Error::InvalidParameter(format!("overlap end {x} is not a grid node")))
    };
    let (ia, ic) = (on_grid(o.lo)?, on_grid(o.hi)?);
    let n = grid.n_nodes;
    let h = grid.h;
    let s = kernel.stiffness();
    let st = discrete_moments(kernel, h)?;
    let m = st.m;
    let bf = arlequin_blending(o, delta, shape);
    let beta: Vec<f64> = (0..n).map(|i| eval_blending(&bf, grid.x(i))).collect();
    let alpha1: Vec<f64> = beta.iter().map(|b| 1.0 - b).collect();
    let bmid = |i: usize, k: usize| eval_blending(&bf, 0.5 * (grid.x(i) + grid.x(k)));

    let local_nodes: Vec<usize> = (ia..n).collect();
    let nonlocal_nodes: Vec<usize> = (0..=ic).collect();
    let mut multiplier_nodes: Vec<usize> = (ia..=ic).collect();
    if kappa0 == 0.0 {
        multiplier_nodes.pop();
    }
    let (n1, n2, np) = (local_nodes.len(), nonlocal_nodes.len(), multiplier_nodes.len());

    let mut a2 = DMatrix::zeros(n2, n2);
    for i in 0..n2 {
        for j in 1..=m {
            let k = i + j;
            if k >= n2 {
                break;
            }
            // both orientations of the bond, each 1/4 h a beta (du)^2
            let c = h * st.coef[j - 1] * bmid(i, k);
            a2[(i, i)] += c;
            a2[(k, k)] += c;
            a2[(i, k)] -= c;
            a2[(k, i)] -= c;
        }
    }

    let mut a1 = DMatrix::zeros(n1, n1);
    for c in ia..n - 1 {
        let mut q = 0.0;
        for j in 1..=m {
            let lo = (c + 1).saturating_sub(j);
            for i in lo..=c {
                if i + j <= ic {
                    q += st.coef[j - 1] * st.xi(j) * bmid(i, i + j);
                }
            }
        }
        let alpha = 1.0 - h * q / s;
        let w = alpha * s / h;
        let (p, r) = (c - ia, c + 1 - ia);
        a1[(p, p)] += w;
        a1[(r, r)] += w;
        a1[(p, r)] -= w;
        a1[(r, p)] -= w;
    }

    // kappa0 (psi, v) + kappa1 (psi', v') on the overlap, P1 elements
    let no = ic - ia + 1;
    let mut mo = DMatrix::zeros(no, no);
    for c in 0..no - 1 {
        let (mass_d, mass_o) = (kappa0 * h / 3.0, kappa0 * h / 6.0);
        let k = kappa1 / h;
        mo[(c, c)] += mass_d + k;
        mo[(c + 1, c + 1)] += mass_d + k;
        mo[(c, c + 1)] += mass_o - k;
        mo[(c + 1, c)] += mass_o - k;
    }
    let mut c1 = DMatrix::zeros(np, n1);
    let mut c2 = DMatrix::zeros(np, n2);
    for (p, &node_p) in multiplier_nodes.iter().enumerate() {
        for q in 0..no {
            let v = mo[(node_p - ia, q)];
            c1[(p, q)] = v;
            c2[(p, q + ia)] = v;
        }
    }

    let l1 = DVector::from_iterator(n1, local_nodes.iter().map(|&i| h * alpha1[i] * f(grid.x(i))));
    let l2 = DVector::from_iterator(n2, nonlocal_nodes.iter().map(|&i| h * beta[i] * f(grid.x(i))));

    let size = n1 + n2 + np;
    let mut kkt = DMatrix::zeros(size, size);
    kkt.view_mut((0, 0), (n1, n1)).copy_from(&a1);
    kkt.view_mut((n1, n1), (n2, n2)).copy_from(&a2);
    kkt.view_mut((0, n1 + n2), (n1, np)).copy_from(&c1.transpose());
    kkt.view_mut((n1, n1 + n2), (n2, np)).copy_from(&(-c2.transpose()));
    kkt.view_mut((n1 + n2, 0), (np, n1)).copy_from(&c1);
    kkt.view_mut((n1 + n2, n1), (np, n2)).copy_from(&(-&c2));
    let mut rhs = DVector::zeros(size);
    rhs.rows_mut(0, n1).copy_from(&l1);
    rhs.rows_mut(n1, n2).copy_from(&l2);

    let mut constrained = BTreeMap::new();
    constrained.insert(n1 - 1, g(grid.x(n - 1)));
    for i in 0..m {
        constrained.insert(n1 + i, g(grid.x(i)));
    }
    for (&d, &v) in &constrained {
        for r in 0..size {
            rhs[r] -= kkt[(r, d)] * v;
        }
        kkt.row_mut(d).fill(0.0);
        kkt.column_mut(d).fill(0.0);
        kkt[(d, d)] = 1.0;
        rhs[d] = v;
    }

    let sv = c1.clone().svd(false, false).singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    if np == 0 || !(smin > 1e-12 * smax) {
        return Err(Error::RankDeficientCoupling);
    }

    Ok(SaddleSystem {
        a1,
        a2,
        c1,
        c2,
        l1,
        l2,
        kkt,
        rhs,
        local_nodes,
        nonlocal_nodes,
        multiplier_nodes,
        beta,
        alpha1,
        constrained,
    })
}
