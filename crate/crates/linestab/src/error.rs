//! Error and diagnostic types shared by every module.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Every failure the library can report. Each variant maps to a stable
/// machine-readable code through [`Error::code`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("points coincide within tolerance")]
    CoincidentPoints,
    #[error("the four lines admit an infinite family of transversals")]
    DegenerateQuadruple,
    #[error("pivot line cannot be separated from polyhedron {0}")]
    NotSeparable(usize),
    #[error("bodies overlap; no separating plane exists")]
    Overlapping,
    #[error("line does not meet the pivot")]
    DoesNotMeetPivot,
    #[error("line coincides with the pivot")]
    IsPivot,
    #[error("edge {edge} of polyhedron {poly} is coplanar with the pivot")]
    CoplanarEdge { poly: usize, edge: usize },
    #[error("slice plane is parallel to the pivot")]
    ParallelSlice,
    #[error("direction lies on an arrangement circle")]
    OnBoundary,
    #[error("direction is parallel to the separating plane")]
    ParallelDirection,
    #[error("arcs {0} and {1} cross more often than their declared bound")]
    CrossingBoundViolated(usize, usize),
    #[error("bodies are not pairwise disjoint")]
    NotDisjoint,
    #[error("bodies are not all unbounded along the pivot")]
    MixedBoundedness,
    #[error("line is not a transversal of the scene")]
    NotTransversal,
    #[error("line lies on a wedge or interval boundary")]
    OnLabelBoundary,
    #[error("candidate enumeration too large: {0} combinations")]
    TooLarge(u128),
    #[error("parse error: {0}")]
    ParseError(String),
    #[error("polyhedron {0} is not convex")]
    ConvexityViolation(usize),
    #[error("declared flag `{0}` does not hold")]
    FlagMismatch(String),
    #[error("random packing failed after {0} attempts")]
    PackingFailed(usize),
    #[error("general-position audit still failing after {0} perturbations")]
    AuditFailedAfterRetries(usize),
    #[error("general position violated: {0}")]
    GeneralPosition(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable identifier used in reports and CLI exit payloads.
    pub fn code(&self) -> &'static str {
        match self {
            Error::CoincidentPoints => "coincident_points",
            Error::DegenerateQuadruple => "degenerate_quadruple",
            Error::NotSeparable(_) => "not_separable",
            Error::Overlapping => "overlapping",
            Error::DoesNotMeetPivot => "does_not_meet_pivot",
            Error::IsPivot => "is_pivot",
            Error::CoplanarEdge { .. } => "coplanar_edge",
            Error::ParallelSlice => "parallel_slice",
            Error::OnBoundary => "on_boundary",
            Error::ParallelDirection => "parallel_direction",
            Error::CrossingBoundViolated(..) => "crossing_bound_violated",
            Error::NotDisjoint => "not_disjoint",
            Error::MixedBoundedness => "mixed_boundedness",
            Error::NotTransversal => "not_transversal",
            Error::OnLabelBoundary => "on_label_boundary",
            Error::TooLarge(_) => "too_large",
            Error::ParseError(_) => "parse_error",
            Error::ConvexityViolation(_) => "convexity_violation",
            Error::FlagMismatch(_) => "flag_mismatch",
            Error::PackingFailed(_) => "packing_failed",
            Error::AuditFailedAfterRetries(_) => "audit_failed_after_retries",
            Error::GeneralPosition(_) => "general_position",
            Error::InvalidInput(_) => "invalid_input",
            Error::Io(_) => "io_error",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// A non-fatal event surfaced to the caller instead of being resolved
/// silently (degenerate ties, merged circles, boundary crossings).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        Diagnostic { code: code.to_string(), message: message.into() }
    }
}
