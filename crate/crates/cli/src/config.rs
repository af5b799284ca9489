//! Run-config schema: a coupling configuration plus load data, the diagnostic to run and outputs.

use std::path::Path;

use ltn_core::{AnalyticFunction, CouplingConfig, DecompositionSpec, Interval, MethodSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Load `f` and Dirichlet / volume data `g`, with an optional exact solution for error reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemData {
    #[serde(default = "zero")]
    pub f: AnalyticFunction,
    #[serde(default = "zero")]
    pub g: AnalyticFunction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<AnalyticFunction>,
}

fn zero() -> AnalyticFunction {
    AnalyticFunction::Const { value: 0.0 }
}

impl Default for ProblemData {
    fn default() -> Self {
        Self { f: zero(), g: zero(), exact: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostic {
    Solve,
    PatchTest {
        #[serde(default = "one")]
        degree: usize,
    },
    GhostForce,
    Convergence {
        deltas: Vec<f64>,
        #[serde(default = "sine")]
        exact: AnalyticFunction,
    },
    SweepRobin {
        r_grid: Vec<f64>,
    },
    Compare {
        method: MethodSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        decomposition: Option<DecompositionSpec>,
    },
    Energy {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        window: Option<Interval>,
    },
    MaxPrinciple {
        #[serde(default = "hundred")]
        samples: usize,
    },
}

fn one() -> usize {
    1
}

fn hundred() -> usize {
    100
}

fn sine() -> AnalyticFunction {
    AnalyticFunction::Sin { amplitude: 1.0, wavenumber: 1.0 }
}

impl Default for Diagnostic {
    fn default() -> Self {
        Diagnostic::Solve
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    /// Also write the assembled matrix as `(row, col, value)` triplets.
    #[serde(default)]
    pub export_matrix: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub coupling: CouplingConfig,
    #[serde(default)]
    pub problem: ProblemData,
    #[serde(default)]
    pub diagnostic: Diagnostic,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<u8>), CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let text = std::str::from_utf8(&bytes)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        Ok((Self::from_json(text)?, bytes))
    }
}
