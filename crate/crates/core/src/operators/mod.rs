//! Assembly of local, nonlocal and coupled operators.
//!
//! Every assembled matrix `A` discretises `L`, so unconstrained rows read `A u = -f`.
//! Energy-based methods (QNL, morphing, shrinking horizon) build the Hessian `K` of a
//! discrete energy and use `A = -K / h`.

pub mod arlequin;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{
    eval_blending, BlendingFunction, BlendingShape, Decomposition, DecompositionMode, Grid1D,
    Interval, Region,
};
use crate::kernels::{
    discrete_moments, smooth_floor, variable_coefficients, HorizonFunction, HorizonKind, Kernel,
    Stencil,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    LocalOnly,
    NonlocalOnly,
    Splice,
    Blended,
    Qnl,
    Morphing,
    ShrinkingHorizon,
    PartialStress,
    Arlequin,
    OptimizationBased,
    PartitionedRobin,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::LocalOnly => "local_only",
            Method::NonlocalOnly => "nonlocal_only",
            Method::Splice => "splice",
            Method::Blended => "blended",
            Method::Qnl => "qnl",
            Method::Morphing => "morphing",
            Method::ShrinkingHorizon => "shrinking_horizon",
            Method::PartialStress => "partial_stress",
            Method::Arlequin => "arlequin",
            Method::OptimizationBased => "optimization_based",
            Method::PartitionedRobin => "partitioned_robin",
        }
    }

    /// Methods whose discrete system is a single assembled matrix.
    pub fn is_operator_method(&self) -> bool {
        !matches!(
            self,
            Method::Arlequin | Method::OptimizationBased | Method::PartitionedRobin
        )
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorizonSpec {
    pub kind: HorizonKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramp_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSpec {
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blending: Option<BlendingShape>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<HorizonSpec>,
}

impl MethodSpec {
    pub fn new(method: Method) -> Self {
        Self { method, blending: None, horizon: None }
    }

    pub fn with_blending(mut self, shape: BlendingShape) -> Self {
        self.blending = Some(shape);
        self
    }

    pub fn with_horizon(mut self, h: HorizonSpec) -> Self {
        self.horizon = Some(h);
        self
    }

    /// Blending function over the decomposition's blend interval.
    pub fn blending_function(&self, dec: &Decomposition) -> Result<BlendingFunction> {
        let shape = self
            .blending
            .ok_or_else(|| Error::MissingParameter("blending".into()))?;
        let support = dec
            .omega_b
            .ok_or_else(|| Error::MissingParameter("blend interval".into()))?;
        Ok(BlendingFunction::new(shape, support))
    }

    /// Horizon function anchored at the decomposition interface with `delta_max = delta`.
    pub fn horizon_function(&self, dec: &Decomposition, h: f64) -> Result<HorizonFunction> {
        let spec = self
            .horizon
            .ok_or_else(|| Error::MissingParameter("horizon".into()))?;
        let interface = dec
            .interface
            .ok_or_else(|| Error::MissingParameter("interface".into()))?;
        let ramp_width = match (spec.kind, spec.ramp_width, dec.omega_t) {
            (_, Some(w), _) => w,
            (_, None, Some(t)) => t.width(),
            (HorizonKind::SmoothC2, None, None) => {
                return Err(Error::MissingParameter("horizon.ramp_width".into()))
            }
            _ => dec.delta,
        };
        if !(ramp_width > 0.0) {
            return Err(Error::InvalidParameter(format!("ramp_width = {ramp_width}")));
        }
        let floor = match (self.method, spec.floor) {
            (_, Some(f)) => f,
            (Method::PartialStress, None) => 2.0 * h,
            _ => 0.0,
        };
        Ok(HorizonFunction { kind: spec.kind, delta_max: dec.delta, interface, ramp_width, floor })
    }
}

/// Square system with explicit identity rows for constrained nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    /// Constrained node -> imposed value.
    pub constrained: BTreeMap<usize, f64>,
    /// Nodes that still need a constraint value before solving.
    pub boundary: Vec<usize>,
    /// Grid node for each unknown.
    pub dofs: Vec<usize>,
}

impl LinearSystem {
    pub fn zeros(n: usize) -> Self {
        Self {
            matrix: DMatrix::zeros(n, n),
            rhs: DVector::zeros(n),
            constrained: BTreeMap::new(),
            boundary: Vec::new(),
            dofs: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhs.is_empty()
    }

    pub fn constrain(&mut self, i: usize, value: f64) {
        self.matrix.row_mut(i).fill(0.0);
        self.matrix[(i, i)] = 1.0;
        self.rhs[i] = value;
        self.constrained.insert(i, value);
    }

    pub fn is_free(&self, i: usize) -> bool {
        !self.constrained.contains_key(&i) && !self.boundary.contains(&i)
    }

    pub fn free_rows(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_free(i)).collect()
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let v = &self.matrix * DVector::from_column_slice(u);
        v.iter().copied().collect()
    }

    /// `(row, col, value)` for every nonzero entry, row-major.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.matrix.nrows() {
            for j in 0..self.matrix.ncols() {
                let v = self.matrix[(i, j)];
                if v != 0.0 {
                    out.push((i, j, v));
                }
            }
        }
        out
    }
}

/// Constraint target: a volume layer that must be at least `delta` wide, or explicit nodes.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintRegion {
    Layer { interval: Interval, delta: f64 },
    Nodes(Vec<usize>),
}

pub fn apply_dirichlet_constraints(
    mut system: LinearSystem,
    grid: &Grid1D,
    region: &ConstraintRegion,
    g: impl Fn(f64) -> f64,
) -> Result<LinearSystem> {
    let nodes: Vec<usize> = match region {
        ConstraintRegion::Layer { interval, delta } => {
            let width = interval.width();
            if width < delta * (1.0 - 1e-9) {
                return Err(Error::IncompleteVolumeConstraint { width, delta: *delta });
            }
            (0..grid.n_nodes)
                .filter(|&i| interval.contains(grid.x(i), grid.tol()))
                .collect()
        }
        ConstraintRegion::Nodes(v) => v.clone(),
    };
    for i in nodes {
        if i >= system.len() {
            return Err(Error::InvalidParameter(format!("constraint node {i} outside grid")));
        }
        system.constrain(i, g(grid.x(i)));
        system.boundary.retain(|&b| b != i);
    }
    Ok(system)
}

fn fd_row(a: &mut DMatrix<f64>, i: usize, s: f64, h: f64) {
    let c = s / (h * h);
    a[(i, i - 1)] += c;
    a[(i, i)] -= 2.0 * c;
    a[(i, i + 1)] += c;
}

fn nl_row(a: &mut DMatrix<f64>, i: usize, st: &Stencil) -> Result<()> {
    let n = a.ncols();
    if i < st.m || i + st.m >= n {
        return Err(Error::MissingBoundaryLayer { node: i });
    }
    for (jj, c) in st.coef.iter().enumerate() {
        let j = jj + 1;
        a[(i, i + j)] += c;
        a[(i, i - j)] += c;
        a[(i, i)] -= 2.0 * c;
    }
    Ok(())
}

/// Three-point `s u''` rows on the interior nodes of `rows`.
pub fn assemble_local_operator(
    grid: &Grid1D,
    rows: std::ops::Range<usize>,
    stiffness: f64,
) -> Result<LinearSystem> {
    if rows.len() < 3 {
        return Err(Error::RegionTooSmall { nodes: rows.len() });
    }
    let n = grid.n_nodes;
    let mut sys = LinearSystem::zeros(n);
    for i in rows.filter(|&i| i > 0 && i + 1 < n) {
        fd_row(&mut sys.matrix, i, stiffness, grid.h);
    }
    Ok(sys)
}

/// Nonlocal rows `sum_j a_j (u_{i+j} - u_i)` with the normalised constant-horizon stencil.
pub fn assemble_nonlocal_operator(
    grid: &Grid1D,
    rows: std::ops::Range<usize>,
    kernel: &Kernel,
) -> Result<LinearSystem> {
    let st = discrete_moments(kernel, grid.h)?;
    let mut sys = LinearSystem::zeros(grid.n_nodes);
    for i in rows {
        nl_row(&mut sys.matrix, i, &st)?;
    }
    Ok(sys)
}

pub fn check_mode(method: Method, dec: &Decomposition) -> Result<()> {
    use DecompositionMode::*;
    let (ok, expected) = match method {
        Method::LocalOnly | Method::NonlocalOnly => (true, "any"),
        Method::Splice => (dec.mode == SharpInterface, "SharpInterface"),
        Method::Blended | Method::Morphing => (
            dec.mode == BlendedTransition && dec.omega_b.is_some(),
            "BlendedTransition with a blend interval",
        ),
        Method::Qnl => (
            dec.mode == BlendedTransition && dec.omega_b.is_none() && dec.interface.is_some(),
            "BlendedTransition with interface and transition width delta",
        ),
        Method::ShrinkingHorizon | Method::PartialStress => {
            (dec.mode == VariableHorizon, "VariableHorizon")
        }
        Method::Arlequin | Method::OptimizationBased | Method::PartitionedRobin => {
            (dec.mode == Overlap, "Overlap")
        }
    };
    if ok {
        Ok(())
    } else {
        Err(Error::ModeMismatch {
            method: method.to_string(),
            expected: expected.to_string(),
            found: dec.mode.to_string(),
        })
    }
}

/// Nodes carrying Dirichlet / volume-constraint data for an operator method.
pub fn constrained_nodes(grid: &Grid1D, dec: &Decomposition, method: Method) -> Result<Vec<usize>> {
    let regions = dec.classify_grid(grid);
    let mut nodes: Vec<usize> = (0..grid.n_nodes).filter(|&i| regions[i].is_constrained()).collect();
    if method == Method::NonlocalOnly {
        let m = crate::grid::horizon_ratio(dec.delta, grid.h)?;
        let first = grid.n_nodes.saturating_sub(m + 1);
        nodes.extend(first..grid.n_nodes);
        nodes.sort_unstable();
        nodes.dedup();
    }
    Ok(nodes)
}

/// One quadratic energy contribution `c/2 (u_k - u_i)^2`, tagged with where it lives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyTerm {
    pub i: usize,
    pub k: usize,
    pub c: f64,
    /// Node coordinate of the bond origin, or the cell midpoint.
    pub origin: f64,
    pub cell: bool,
}

impl EnergyTerm {
    pub fn value(&self, u: &[f64]) -> f64 {
        let d = u[self.k] - u[self.i];
        0.5 * self.c * d * d
    }
}

/// Energy terms of the QNL, morphing and shrinking-horizon discretisations.
pub fn energy_terms(
    grid: &Grid1D,
    dec: &Decomposition,
    spec: &MethodSpec,
    kernel: &Kernel,
) -> Result<Vec<EnergyTerm>> {
    let n = grid.n_nodes as isize;
    let h = grid.h;
    let tol = grid.tol();
    let x = |i: isize| grid.x_lo + i as f64 * h;
    let mut terms = Vec::new();
    match spec.method {
        Method::Qnl => {
            let st = discrete_moments(kernel, h)?;
            let m = st.m as isize;
            let xs = dec
                .interface
                .ok_or_else(|| Error::MissingParameter("interface".into()))?;
            // Path bonds leaving the right edge are kept and clipped to existing cells.
            for i in 0..n + m {
                for jj in 1..=m {
                    for sgn in [-1isize, 1] {
                        let k = i + sgn * jj;
                        let a = st.coef[(jj - 1) as usize];
                        if x(i) <= xs + tol || x(k) <= xs + tol {
                            if i < n && (0..n).contains(&k) {
                                terms.push(EnergyTerm {
                                    i: i as usize,
                                    k: k as usize,
                                    c: 0.5 * h * a,
                                    origin: x(i),
                                    cell: false,
                                });
                            }
                        } else {
                            let (lo, hi) = (i.min(k), i.max(k));
                            for c in lo..hi.min(n - 1) {
                                terms.push(EnergyTerm {
                                    i: c as usize,
                                    k: (c + 1) as usize,
                                    c: 0.5 * a * (jj as f64 * h),
                                    origin: x(i),
                                    cell: false,
                                });
                            }
                        }
                    }
                }
            }
        }
        Method::Morphing => {
            let st = discrete_moments(kernel, h)?;
            let m = st.m as isize;
            let beta = spec.blending_function(dec)?;
            let s = kernel.stiffness();
            for i in 0..n {
                let bi = eval_blending(&beta, x(i));
                for jj in 1..=m {
                    for sgn in [-1isize, 1] {
                        let k = i + sgn * jj;
                        if !(0..n).contains(&k) {
                            continue;
                        }
                        let w = 0.5 * (bi + eval_blending(&beta, x(k)));
                        if w > 0.0 {
                            terms.push(EnergyTerm {
                                i: i as usize,
                                k: k as usize,
                                c: 0.5 * h * st.coef[(jj - 1) as usize] * w,
                                origin: x(i),
                                cell: false,
                            });
                        }
                    }
                }
            }
            for c in 0..n - 1 {
                let xc = x(c) + 0.5 * h;
                let bc = eval_blending(&beta, xc);
                let mut cx = (1.0 - bc) * s;
                for jj in 1..=m {
                    let xi = jj as f64 * h;
                    let a = st.coef[(jj - 1) as usize];
                    for sx in [-xi, xi] {
                        cx += a * (bc - eval_blending(&beta, xc + sx)) * xi * xi / 4.0;
                    }
                }
                if cx != 0.0 {
                    terms.push(EnergyTerm {
                        i: c as usize,
                        k: (c + 1) as usize,
                        c: cx / h,
                        origin: xc,
                        cell: true,
                    });
                }
            }
        }
        Method::ShrinkingHorizon => {
            let hf = spec.horizon_function(dec, h)?;
            let gamma = hf.interface;
            for i in 0..n {
                let d = if x(i) >= gamma - tol { 0.0 } else { hf.eval(x(i)) };
                let a = variable_coefficients(kernel, smooth_floor(d, h), h);
                for (jj, coef) in a.iter().enumerate() {
                    for sgn in [-1isize, 1] {
                        let k = i + sgn * (jj as isize + 1);
                        if (0..n).contains(&k) {
                            terms.push(EnergyTerm {
                                i: i as usize,
                                k: k as usize,
                                c: 0.5 * h * coef,
                                origin: x(i),
                                cell: false,
                            });
                        }
                    }
                }
            }
        }
        other => return Err(Error::UnsupportedMethod(other.to_string())),
    }
    Ok(terms)
}

/// Hessian of `sum c/2 (u_k - u_i)^2`; exactly symmetric by construction.
pub fn hessian(terms: &[EnergyTerm], n: usize) -> DMatrix<f64> {
    let mut k = DMatrix::zeros(n, n);
    for t in terms {
        k[(t.i, t.i)] += t.c;
        k[(t.k, t.k)] += t.c;
        k[(t.i, t.k)] -= t.c;
        k[(t.k, t.i)] -= t.c;
    }
    k
}

/// Stiffness matrix (Hessian of the discrete energy) for an energy-based method.
pub fn stiffness_matrix(
    grid: &Grid1D,
    dec: &Decomposition,
    spec: &MethodSpec,
    kernel: &Kernel,
) -> Result<DMatrix<f64>> {
    check_mode(spec.method, dec)?;
    let terms = energy_terms(grid, dec, spec, kernel)?;
    Ok(hessian(&terms, grid.n_nodes))
}

/// Partial-stress linear map: `nu_k(u) = 1/2 sum_j c_kj xi_j (u_{k+j} - u_k)`.
fn stress_row(kernel: &Kernel, hf: &HorizonFunction, grid: &Grid1D, k: usize) -> Result<Vec<(usize, f64)>> {
    let h = grid.h;
    let c = variable_coefficients(kernel, hf.eval(grid.x(k)), h);
    if k < c.len() || k + c.len() >= grid.n_nodes {
        return Err(Error::MissingBoundaryLayer { node: k });
    }
    let mut row = Vec::with_capacity(2 * c.len());
    for (jj, cj) in c.iter().enumerate() {
        let j = jj + 1;
        let v = 0.5 * cj * j as f64 * h;
        row.push((k + j, v));
        row.push((k - j, -v));
    }
    Ok(row)
}

/// Partial stress at node `k` for the nodal field `u`.
pub fn partial_stress(
    grid: &Grid1D,
    dec: &Decomposition,
    spec: &MethodSpec,
    kernel: &Kernel,
    u: &[f64],
    k: usize,
) -> Result<f64> {
    let hf = spec.horizon_function(dec, grid.h)?;
    Ok(stress_row(kernel, &hf, grid, k)?.iter().map(|(j, v)| v * u[*j]).sum())
}

pub fn assemble_coupled_operator(
    grid: &Grid1D,
    dec: &Decomposition,
    spec: &MethodSpec,
    kernel: &Kernel,
) -> Result<LinearSystem> {
    check_mode(spec.method, dec)?;
    let n = grid.n_nodes;
    let h = grid.h;
    let s = kernel.stiffness();
    let regions = dec.classify_grid(grid);
    let mut sys = LinearSystem::zeros(n);
    sys.boundary = constrained_nodes(grid, dec, spec.method)?;
    let free: Vec<usize> = (0..n).filter(|i| !sys.boundary.contains(i)).collect();
    let a = &mut sys.matrix;
    match spec.method {
        Method::LocalOnly => {
            for &i in &free {
                fd_row(a, i, s, h);
            }
        }
        Method::NonlocalOnly => {
            let st = discrete_moments(kernel, h)?;
            for &i in &free {
                nl_row(a, i, &st)?;
            }
        }
        Method::Splice => {
            let st = discrete_moments(kernel, h)?;
            for &i in &free {
                match regions[i] {
                    Region::Nonlocal => nl_row(a, i, &st)?,
                    _ => fd_row(a, i, s, h),
                }
            }
        }
        Method::Blended => {
            let st = discrete_moments(kernel, h)?;
            let beta = spec.blending_function(dec)?;
            for &i in &free {
                match regions[i] {
                    Region::Nonlocal => nl_row(a, i, &st)?,
                    Region::Transition => blended_row(a, grid, i, &st, &beta, s)?,
                    _ => fd_row(a, i, s, h),
                }
            }
        }
        Method::Qnl | Method::Morphing | Method::ShrinkingHorizon => {
            let k = stiffness_matrix(grid, dec, spec, kernel)?;
            for &i in &free {
                for j in 0..n {
                    a[(i, j)] = -k[(i, j)] / h;
                }
            }
        }
        Method::PartialStress => {
            let st = discrete_moments(kernel, h)?;
            let hf = spec.horizon_function(dec, h)?;
            for &i in &free {
                match regions[i] {
                    Region::Nonlocal => nl_row(a, i, &st)?,
                    Region::Transition => {
                        for (j, v) in stress_row(kernel, &hf, grid, i + 1)? {
                            a[(i, j)] += v / (2.0 * h);
                        }
                        for (j, v) in stress_row(kernel, &hf, grid, i - 1)? {
                            a[(i, j)] -= v / (2.0 * h);
                        }
                    }
                    _ => fd_row(a, i, s, h),
                }
            }
        }
        other => return Err(Error::UnsupportedMethod(other.to_string())),
    }
    Ok(sys)
}

fn blended_row(
    a: &mut DMatrix<f64>,
    grid: &Grid1D,
    i: usize,
    st: &Stencil,
    beta: &BlendingFunction,
    s: f64,
) -> Result<()> {
    let n = grid.n_nodes;
    if i < st.m || i + st.m >= n {
        return Err(Error::MissingBoundaryLayer { node: i });
    }
    let h = grid.h;
    let bi = eval_blending(beta, grid.x(i));
    let (mut d1, mut d2) = (0.0, 0.0);
    for (jj, c) in st.coef.iter().enumerate() {
        let j = jj + 1;
        let xj = j as f64 * h;
        for (k, xi) in [(i + j, xj), (i - j, -xj)] {
            let bk = eval_blending(beta, grid.x(k));
            let w = c * 0.5 * (bi + bk);
            a[(i, k)] += w;
            a[(i, i)] -= w;
            d1 += c * bk * xi;
            d2 += w * xi * xi;
        }
    }
    let c1 = -0.5 * d1 / (2.0 * h);
    let c2 = (s - 0.5 * d2) / (h * h);
    a[(i, i + 1)] += c1 + c2;
    a[(i, i - 1)] += -c1 + c2;
    a[(i, i)] -= 2.0 * c2;
    Ok(())
}

#[cfg(test)]
mod tests;
