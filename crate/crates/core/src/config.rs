//! Serializable problem description and its validated, ready-to-assemble form.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{build_decomposition, horizon_ratio, Decomposition, DecompositionSpec, Grid1D, Region};
use crate::kernels::{Kernel, KernelFamily, Model};
use crate::operators::{check_mode, MethodSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub model: Model,
    #[serde(default = "one")]
    pub youngs_modulus: f64,
}

fn one() -> f64 {
    1.0
}

impl KernelSpec {
    pub fn diffusion(family: KernelFamily) -> Self {
        Self { family, model: Model::Diffusion, youngs_modulus: 1.0 }
    }
}

/// Robin transmission coefficient; `Dirichlet` is the infinite-coefficient limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Robin {
    Coefficient(f64),
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionMode {
    Implicit,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    pub tol: f64,
    pub max_iter: usize,
    pub r1: Robin,
    pub r2: Robin,
    pub mode: PartitionMode,
    /// Sweep count in explicit mode.
    pub sweeps: usize,
    pub kappa0: f64,
    pub kappa1: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 500,
            r1: Robin::Coefficient(1.0),
            r2: Robin::Coefficient(1.0),
            mode: PartitionMode::Implicit,
            sweeps: 1,
            kappa0: 1.0,
            kappa1: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingConfig {
    pub decomposition: DecompositionSpec,
    pub h: f64,
    pub kernel: KernelSpec,
    pub method: MethodSpec,
    #[serde(default)]
    pub solver: SolverParams,
}

/// A validated configuration with its grid, decomposition and kernel built.
#[derive(Debug, Clone)]
pub struct Problem {
    pub config: CouplingConfig,
    pub grid: Grid1D,
    pub decomposition: Decomposition,
    pub kernel: Kernel,
    pub regions: Vec<Region>,
}

impl CouplingConfig {
    pub fn prepare(&self) -> Result<Problem> {
        let decomposition = build_decomposition(&self.decomposition)?;
        horizon_ratio(decomposition.delta, self.h)?;
        let grid = decomposition.grid(self.h)?;
        check_mode(self.method.method, &decomposition)?;
        let kernel = Kernel {
            family: self.kernel.family,
            delta: decomposition.delta,
            model: self.kernel.model,
            youngs_modulus: self.kernel.youngs_modulus,
        };
        let regions = decomposition.classify_grid(&grid);
        Ok(Problem { config: self.clone(), grid, decomposition, kernel, regions })
    }

    /// Same problem with horizon `delta` and the grid refined to keep `delta / h` fixed.
    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        let m = horizon_ratio(self.decomposition.delta, self.h)?;
        let mut c = self.clone();
        c.decomposition.delta = delta;
        c.h = delta / m as f64;
        Ok(c)
    }
}

impl Problem {
    pub fn h(&self) -> f64 {
        self.grid.h
    }

    pub fn delta(&self) -> f64 {
        self.decomposition.delta
    }

    pub fn m(&self) -> usize {
        (self.delta() / self.h()).round() as usize
    }

    pub fn stiffness(&self) -> f64 {
        self.kernel.stiffness()
    }

    pub fn method(&self) -> crate::operators::Method {
        self.config.method.method
    }
}
