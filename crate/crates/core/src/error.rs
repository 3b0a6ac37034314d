use alloc::string::String;
use alloc::vec::Vec;

use crate::geometry::Region;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid bump profile: {0}")]
    InvalidProfile(String),

    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    #[error("dumbbell stitching failed: {0}")]
    Stitching(String),

    /// The obstacle does not fit with the requested clearance. This is an
    /// expected outcome of a placement sweep, not a geometric failure.
    #[error("infeasible obstacle placement: {0}")]
    InfeasiblePlacement(String),

    #[error("invalid subregion layout: {0}")]
    Subregion(String),

    #[error("meshing failed: {0}")]
    Meshing(String),

    #[error("mesh quality unreachable: worst angle {worst_angle_deg:.3} deg at ({x:.6}, {y:.6})")]
    QualityUnreachable { worst_angle_deg: f64, x: f64, y: f64 },

    #[error("degenerate triangle {0} (zero or negative area)")]
    DegenerateTriangle(usize),

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("eigensolver did not converge after {matvecs} operator applications (residuals {achieved:?})")]
    NotConverged { matvecs: usize, achieved: Vec<f64> },

    #[error("eigensolver quality check failed: {0}")]
    SolverQuality(String),

    #[error("dense reference limited to dimension {cap}, got {dim}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("region {0:?} contains no elements")]
    EmptyRegion(Region),

    #[error("empty cross-section at x1 = {0}")]
    EmptyCrossSection(f64),

    #[error("decay hypothesis not satisfied: lambda = {lambda} >= mu = {mu}")]
    InapplicableHypothesis { lambda: f64, mu: f64 },

    #[error("no feasible obstacle placement on the grid")]
    EmptyPlacementSet,

    #[error("field is identically below the noise floor")]
    ZeroField,
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
