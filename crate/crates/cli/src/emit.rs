//! Bit-stable report emission: JSON with sorted keys and 17-significant-digit floats, and CSV.

use std::io::{self, Write};
use std::path::Path;

use ltn_core::diagnostics::{
    ComparisonReport, ConvergenceReport, EnergyReport, GhostForceReport, MaxPrincipleReport, PatchTestReport,
};
use ltn_core::solvers::RobinSweepReport;
use ltn_core::{fmt17, IterationTrace, Region};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::CliError;

/// Pretty JSON whose floats always carry 17 significant digits.
struct StableFormatter<'a>(PrettyFormatter<'a>);

impl Formatter for StableFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt17(value).as_bytes())
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// JSON text with keys sorted at every level; non-finite floats become `null`.
pub fn stable_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    // `Value` objects are BTreeMaps, which gives the key order.
    let v = serde_json::to_value(value).map_err(|e| CliError::Io(e.to_string()))?;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, StableFormatter(PrettyFormatter::new()));
    v.serialize(&mut ser).map_err(|e| CliError::Io(e.to_string()))?;
    out.push(b'\n');
    String::from_utf8(out).map_err(|e| CliError::Io(e.to_string()))
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt17).unwrap_or_default()
}

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::Io(e.to_string()))?;
    for r in rows {
        w.write_record(&r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

/// One-line summary of a plain solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub method: String,
    pub n_nodes: usize,
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    /// Sup-norm error against the configured exact solution.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sup_error: Option<f64>,
}

/// Every report the CLI can emit.
#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    Solve(SolveReport),
    PatchTest(PatchTestReport),
    GhostForce(GhostForceReport),
    Convergence(ConvergenceReport),
    SweepRobin(RobinSweepReport),
    Compare(ComparisonReport),
    Energy(EnergyReport),
    MaxPrinciple(MaxPrincipleReport),
}

impl Report {
    pub fn to_json(&self) -> Result<String, CliError> {
        match self {
            Report::Solve(r) => stable_json(r),
            Report::PatchTest(r) => stable_json(r),
            Report::GhostForce(r) => stable_json(r),
            Report::Convergence(r) => stable_json(r),
            Report::SweepRobin(r) => stable_json(r),
            Report::Compare(r) => stable_json(r),
            Report::Energy(r) => stable_json(r),
            Report::MaxPrinciple(r) => stable_json(r),
        }
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        match self {
            Report::Solve(r) => csv_text(
                &["method", "n_nodes", "residual", "objective", "iterations", "converged", "sup_error"],
                vec![vec![
                    r.method.clone(),
                    r.n_nodes.to_string(),
                    fmt17(r.residual),
                    opt(r.objective),
                    r.iterations.map(|v| v.to_string()).unwrap_or_default(),
                    r.converged.map(|v| v.to_string()).unwrap_or_default(),
                    opt(r.sup_error),
                ]],
            ),
            Report::PatchTest(r) => patch_test_csv(r),
            Report::GhostForce(r) => csv_text(
                &["x", "force"],
                r.x.iter().zip(&r.force).map(|(x, f)| vec![fmt17(*x), fmt17(*f)]).collect(),
            ),
            Report::Convergence(r) => convergence_csv(r),
            Report::SweepRobin(r) => csv_text(
                &["r", "iterations", "converged", "mean_reduction_factor"],
                r.rows
                    .iter()
                    .map(|row| {
                        vec![
                            fmt17(row.r),
                            row.iterations.to_string(),
                            row.converged.to_string(),
                            opt(row.mean_reduction_factor),
                        ]
                    })
                    .collect(),
            ),
            Report::Compare(r) => csv_text(
                &["method_a", "method_b", "sup_difference", "sup_difference_outside_overlap"],
                vec![vec![
                    r.method_a.clone(),
                    r.method_b.clone(),
                    fmt17(r.sup_difference),
                    fmt17(r.sup_difference_outside_overlap),
                ]],
            ),
            Report::Energy(r) => csv_text(
                &["method", "window_lo", "window_hi", "nonlocal", "local", "coupled"],
                vec![vec![
                    r.method.clone(),
                    fmt17(r.window_lo),
                    fmt17(r.window_hi),
                    fmt17(r.nonlocal),
                    fmt17(r.local),
                    opt(r.coupled),
                ]],
            ),
            Report::MaxPrinciple(r) => csv_text(
                &["method", "samples", "seed", "worst_violation", "pass"],
                vec![vec![
                    r.method.clone(),
                    r.samples.to_string(),
                    r.seed.to_string(),
                    fmt17(r.worst_violation),
                    r.pass.to_string(),
                ]],
            ),
        }
    }
}

pub fn patch_test_csv(r: &PatchTestReport) -> Result<String, CliError> {
    csv_text(
        &["method", "degree", "sup_error", "sup_residual", "pass"],
        vec![vec![
            r.method.clone(),
            r.degree.to_string(),
            fmt17(r.sup_error),
            fmt17(r.sup_residual),
            r.pass.to_string(),
        ]],
    )
}

/// One row per delta, then a `slope` row with the fitted slopes in the error columns.
pub fn convergence_csv(r: &ConvergenceReport) -> Result<String, CliError> {
    let mut rows: Vec<Vec<String>> = r
        .rows
        .iter()
        .map(|row| {
            vec![
                r.method.clone(),
                fmt17(row.delta),
                fmt17(row.h),
                fmt17(row.l2_error),
                fmt17(row.h1_error),
            ]
        })
        .collect();
    rows.push(vec!["slope".into(), String::new(), String::new(), fmt17(r.l2_slope), fmt17(r.h1_slope)]);
    csv_text(&["method", "delta", "h", "l2_error", "h1_error"], rows)
}

pub fn trace_csv(t: &IterationTrace) -> Result<String, CliError> {
    csv_text(
        &["iteration", "residual", "mismatch", "reduction_factor"],
        (0..t.iterations)
            .map(|k| {
                vec![
                    (k + 1).to_string(),
                    fmt17(t.residuals[k]),
                    fmt17(t.mismatches[k]),
                    opt(t.reduction_factors[k]),
                ]
            })
            .collect(),
    )
}

pub fn solution_csv(x: &[f64], u: &[f64], regions: &[Region]) -> Result<String, CliError> {
    csv_text(
        &["x", "u", "region"],
        x.iter()
            .zip(u)
            .zip(regions)
            .map(|((x, u), r)| vec![fmt17(*x), fmt17(*u), r.label().to_string()])
            .collect(),
    )
}

pub fn triplets_csv(t: &[(usize, usize, f64)]) -> Result<String, CliError> {
    csv_text(
        &["row", "col", "value"],
        t.iter().map(|(i, j, v)| vec![i.to_string(), j.to_string(), fmt17(*v)]).collect(),
    )
}

pub fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
