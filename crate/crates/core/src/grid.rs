//! Uniform 1D grids, domain decompositions and blending functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when snapping coordinates onto grid nodes.
const SNAP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_lo: f64,
    pub x_hi: f64,
    pub n_nodes: usize,
    pub h: f64,
}

impl Grid1D {
    pub fn new(x_lo: f64, x_hi: f64, n_nodes: usize) -> Result<Self> {
        if n_nodes < 3 {
            return Err(Error::InvalidGrid(format!("n_nodes = {n_nodes} < 3")));
        }
        if !(x_hi > x_lo) || !x_lo.is_finite() || !x_hi.is_finite() {
            return Err(Error::InvalidGrid(format!("bounds [{x_lo}, {x_hi}]")));
        }
        let h = (x_hi - x_lo) / (n_nodes - 1) as f64;
        Ok(Self { x_lo, x_hi, n_nodes, h })
    }

    /// Grid with spacing `h`; the interval length must be a whole number of cells.
    pub fn with_spacing(x_lo: f64, x_hi: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::InvalidGrid(format!("h = {h}")));
        }
        let cells = (x_hi - x_lo) / h;
        let n = cells.round();
        if (cells - n).abs() > SNAP * cells.max(1.0) {
            return Err(Error::InvalidGrid(format!(
                "length {} is not a multiple of h = {h}",
                x_hi - x_lo
            )));
        }
        let mut g = Self::new(x_lo, x_hi, n as usize + 1)?;
        g.h = h;
        Ok(g)
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_lo + i as f64 * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_nodes).map(|i| self.x(i)).collect()
    }

    /// Index of the node at `x`, if `x` sits on the grid.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let t = (x - self.x_lo) / self.h;
        let i = t.round();
        if (t - i).abs() <= SNAP * t.abs().max(1.0) && i >= 0.0 && (i as usize) < self.n_nodes {
            Some(i as usize)
        } else {
            None
        }
    }

    pub fn tol(&self) -> f64 {
        SNAP * self.h
    }
}

/// Number of grid spacings per horizon. Fails unless `delta` is an integer multiple of `h`.
pub fn horizon_ratio(delta: f64, h: f64) -> Result<usize> {
    let ratio = delta / h;
    let m = ratio.round();
    if !(ratio > 0.0) || (ratio - m).abs() > SNAP * m.max(1.0) {
        return Err(Error::NonIntegerRatio { delta, h, ratio });
    }
    Ok(m as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Half-open membership `[lo, hi)` with absolute tolerance `tol`.
    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x < self.hi - tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DecompositionMode {
    Overlap,
    BlendedTransition,
    SharpInterface,
    VariableHorizon,
}

impl std::fmt::Display for DecompositionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

/// Node labels; every node gets exactly one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Region {
    BoundaryLayer,
    Nonlocal,
    Transition,
    VirtualLocal,
    Overlap,
    VirtualNonlocal,
    Local,
    LocalBoundary,
}

impl Region {
    pub fn label(&self) -> &'static str {
        match self {
            Region::BoundaryLayer => "omega_p",
            Region::Nonlocal => "omega_nl",
            Region::Transition => "omega_t",
            Region::VirtualLocal => "gamma_v",
            Region::Overlap => "omega_o",
            Region::VirtualNonlocal => "omega_v",
            Region::Local => "omega_l",
            Region::LocalBoundary => "gamma_p",
        }
    }

    pub fn is_constrained(&self) -> bool {
        matches!(self, Region::BoundaryLayer | Region::LocalBoundary)
    }
}

/// User-facing description of a decomposition, relative to the physical domain `omega`.
/// The grid always carries a nonlocal boundary layer of width `delta` to the left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionSpec {
    pub mode: DecompositionMode,
    pub omega: Interval,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interface: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blend: Option<Interval>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transition_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlap: Option<Interval>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub mode: DecompositionMode,
    pub delta: f64,
    pub x_lo: f64,
    pub x_hi: f64,
    pub omega_p: Interval,
    pub omega_nl: Interval,
    pub omega_t: Option<Interval>,
    pub omega_b: Option<Interval>,
    pub omega_o: Option<Interval>,
    pub omega_v: Option<Interval>,
    pub gamma_v: Option<f64>,
    pub interface: Option<f64>,
    pub omega_l: Interval,
    pub gamma_p: f64,
}

pub fn build_decomposition(spec: &DecompositionSpec) -> Result<Decomposition> {
    let delta = spec.delta;
    let (lo, hi) = (spec.omega.lo, spec.omega.hi);
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!("delta = {delta}")));
    }
    if !(hi > lo) {
        return Err(Error::InconsistentIntervals(format!("domain ({lo}, {hi})")));
    }
    let tol = SNAP * delta;
    let inside = |x: f64| x > lo + tol && x < hi - tol;
    let mut d = Decomposition {
        mode: spec.mode,
        delta,
        x_lo: lo - delta,
        x_hi: hi,
        omega_p: Interval::new(lo - delta, lo),
        omega_nl: Interval::new(lo, hi),
        omega_t: None,
        omega_b: None,
        omega_o: None,
        omega_v: None,
        gamma_v: None,
        interface: None,
        omega_l: Interval::new(hi, hi),
        gamma_p: hi,
    };
    match spec.mode {
        DecompositionMode::SharpInterface => {
            let xs = spec
                .interface
                .ok_or_else(|| Error::MissingParameter("interface".into()))?;
            if !inside(xs) {
                return Err(Error::InconsistentIntervals(format!(
                    "interface {xs} outside ({lo}, {hi})"
                )));
            }
            d.interface = Some(xs);
            d.omega_nl = Interval::new(lo, xs);
            d.omega_l = Interval::new(xs, hi);
        }
        DecompositionMode::BlendedTransition => {
            let t = if let Some(b) = spec.blend {
                if !(b.hi > b.lo) {
                    return Err(Error::InconsistentIntervals(format!(
                        "blend interval ({}, {})",
                        b.lo, b.hi
                    )));
                }
                d.omega_b = Some(b);
                Interval::new(b.lo - delta, b.hi + delta)
            } else if let Some(xs) = spec.interface {
                d.interface = Some(xs);
                Interval::new(xs, xs + delta)
            } else {
                return Err(Error::MissingParameter("blend or interface".into()));
            };
            if t.lo < lo - tol || t.hi > hi + tol || !inside(t.lo) || !inside(t.hi) {
                return Err(Error::InconsistentIntervals(format!(
                    "transition ({}, {}) not inside ({lo}, {hi})",
                    t.lo, t.hi
                )));
            }
            d.omega_t = Some(t);
            d.omega_nl = Interval::new(lo, t.lo);
            d.omega_l = Interval::new(t.hi, hi);
        }
        DecompositionMode::VariableHorizon => {
            let xs = spec
                .interface
                .ok_or_else(|| Error::MissingParameter("interface".into()))?;
            if !inside(xs) {
                return Err(Error::InconsistentIntervals(format!(
                    "interface {xs} outside ({lo}, {hi})"
                )));
            }
            d.interface = Some(xs);
            let w = spec.transition_width.unwrap_or(0.0);
            if w < 0.0 || (w > 0.0 && !inside(xs - w)) {
                return Err(Error::InconsistentIntervals(format!(
                    "transition width {w} does not fit left of {xs}"
                )));
            }
            if w > 0.0 {
                d.omega_t = Some(Interval::new(xs - w, xs));
            }
            d.omega_nl = Interval::new(lo, xs - w);
            d.omega_l = Interval::new(xs, hi);
        }
        DecompositionMode::Overlap => {
            let o = spec
                .overlap
                .ok_or_else(|| Error::MissingParameter("overlap".into()))?;
            let width = o.width();
            if width < delta - tol {
                return Err(Error::OverlapTooSmall { width, required: delta });
            }
            if !inside(o.lo) || !inside(o.hi) {
                return Err(Error::InconsistentIntervals(format!(
                    "overlap ({}, {}) not inside ({lo}, {hi})",
                    o.lo, o.hi
                )));
            }
            d.omega_o = Some(o);
            d.omega_v = Some(Interval::new(o.hi - delta, o.hi));
            d.gamma_v = Some(o.lo);
            d.omega_nl = Interval::new(lo, o.lo);
            d.omega_l = Interval::new(o.hi, hi);
        }
    }
    Ok(d)
}

impl Decomposition {
    pub fn classify(&self, x: f64, tol: f64) -> Region {
        if x < self.omega_p.hi - tol {
            return Region::BoundaryLayer;
        }
        if x >= self.gamma_p - tol {
            return Region::LocalBoundary;
        }
        if let (Some(o), Some(v)) = (self.omega_o, self.omega_v) {
            return if x < o.lo - tol {
                Region::Nonlocal
            } else if x <= o.lo + tol {
                Region::VirtualLocal
            } else if x <= v.lo + tol {
                Region::Overlap
            } else if x <= v.hi + tol {
                Region::VirtualNonlocal
            } else {
                Region::Local
            };
        }
        if let Some(t) = self.omega_t {
            if t.contains(x, tol) {
                return Region::Transition;
            }
        }
        if x < self.omega_nl.hi - tol {
            Region::Nonlocal
        } else {
            Region::Local
        }
    }

    pub fn classify_grid(&self, grid: &Grid1D) -> Vec<Region> {
        let tol = grid.tol();
        (0..grid.n_nodes).map(|i| self.classify(grid.x(i), tol)).collect()
    }

    /// Grid matching this decomposition with spacing `h`; requires `delta / h` integral.
    pub fn grid(&self, h: f64) -> Result<Grid1D> {
        horizon_ratio(self.delta, h)?;
        Grid1D::with_spacing(self.x_lo, self.x_hi, h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlendingShape {
    PiecewiseConstant,
    PiecewiseLinear,
    CubicSmooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlendingFunction {
    pub shape: BlendingShape,
    pub support: Interval,
}

impl BlendingFunction {
    pub fn new(shape: BlendingShape, support: Interval) -> Self {
        Self { shape, support }
    }

    pub fn eval(&self, x: f64) -> f64 {
        eval_blending(self, x)
    }
}

/// beta(x): 1 on the nonlocal side of the support, 0 on the local side.
pub fn eval_blending(beta: &BlendingFunction, x: f64) -> f64 {
    let Interval { lo, hi } = beta.support;
    if x <= lo {
        return 1.0;
    }
    if x >= hi {
        return 0.0;
    }
    let t = (x - lo) / (hi - lo);
    match beta.shape {
        BlendingShape::PiecewiseConstant => {
            if t < 0.5 {
                1.0
            } else {
                0.0
            }
        }
        BlendingShape::PiecewiseLinear => 1.0 - t,
        BlendingShape::CubicSmooth => 1.0 - t * t * (3.0 - 2.0 * t),
    }
}
