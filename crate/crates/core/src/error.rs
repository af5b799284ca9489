use thiserror::Error;

use crate::solvers::IterationTrace;

/// Everything that can go wrong between config validation and a finished solve.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("delta/h must be an integer: delta = {delta}, h = {h} (ratio {ratio})")]
    NonIntegerRatio { delta: f64, h: f64, ratio: f64 },
    #[error("overlap width {width} is smaller than required {required}")]
    OverlapTooSmall { width: f64, required: f64 },
    #[error("inconsistent intervals: {0}")]
    InconsistentIntervals(String),
    #[error("horizon spans only {m} grid spacings; at least 2 are required")]
    HorizonNotResolved { m: usize },
    #[error("inverse-distance kernel evaluated at a zero-length bond")]
    ZeroBond,
    #[error("region has {nodes} nodes; at least 3 are required")]
    RegionTooSmall { nodes: usize },
    #[error("node {node} has a neighbourhood leaving the grid")]
    MissingBoundaryLayer { node: usize },
    #[error("method {method} requires decomposition mode {expected}, got {found}")]
    ModeMismatch { method: String, expected: String, found: String },
    #[error("volume constraint layer width {width} is thinner than delta = {delta}")]
    IncompleteVolumeConstraint { width: f64, delta: f64 },
    #[error("kappa1 = 0 gives an L2-only coupling whose well-posedness is unclear")]
    IllPosedCoupling,
    #[error("missing parameter: {0}")]
    MissingParameter(String),
    #[error("Robin coefficient must be non-negative, got {0}")]
    InvalidRobin(f64),
    #[error("method {0} is not supported by this operation")]
    UnsupportedMethod(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("linear system is singular")]
    SingularSystem,
    #[error("coupling matrix is rank deficient")]
    RankDeficientCoupling,
    #[error("reduced optimization system is singular (overlap too small?)")]
    ReducedSystemSingular,
    #[error("partitioned iteration did not converge in {max_iter} sweeps")]
    NotConverged { max_iter: usize, trace: Box<IterationTrace> },
}

impl Error {
    /// True for failures inside a numerical solve, false for bad input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::SingularSystem
                | Error::RankDeficientCoupling
                | Error::ReducedSystemSingular
                | Error::NotConverged { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
