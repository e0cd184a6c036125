use thiserror::Error;

pub type Result<T, E = LpError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("row {row_id} has zero norm over the live variables")]
    ZeroRow { row_id: usize },

    #[error("objective direction has norm {norm:e}, below the direction tolerance")]
    DegenerateObjective { norm: f64 },

    #[error("no constraint opposes the objective direction")]
    UnboundedDirection,

    #[error("every candidate row has been rejected")]
    NoCandidates,

    #[error("row {row_id} reduced to 0 <= {rhs:e}: region is empty")]
    InfeasibleDetected { row_id: usize, rhs: f64 },

    #[error("variable {var} is not a valid pivot for row {row_id}")]
    InvalidPivot { row_id: usize, var: usize },

    #[error("expected exactly one live variable, found {live}")]
    NotOneDimensional { live: usize },

    #[error("variable {var} was never assigned during back-substitution")]
    IncompleteTrace { var: usize },

    #[error("point is not strictly interior: row {row_id} has residual {residual:e}")]
    NotInterior { row_id: usize, residual: f64 },

    #[error("monte carlo redundancy needs an interior point")]
    MissingInteriorPoint,

    #[error("redundancy test received no sample points")]
    EmptySample,

    #[error("hit point is {distance:e} away from plane {row_id}")]
    NotOnPlane { row_id: usize, distance: f64 },

    #[error("vertex enumeration needs {combinations} subsets, above the cap of {cap}")]
    OracleTooLarge { combinations: u128, cap: u128 },

    #[error("linear system is singular")]
    Singular,

    #[error("feasible region has no vertex")]
    EmptyRegion,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}
