//! Error type shared by every module of the crate.

use std::fmt;

/// Errors produced by basis construction, transforms, norms, propagators and
/// the nonlinear solver.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A numeric parameter violated its precondition.
    InvalidParameter(String),
    /// A point or field had a different dimension than the basis expects.
    DimensionMismatch { expected: usize, got: usize },
    /// Two fields with different basis specs were combined.
    SpecMismatch,
    /// A field or function value was NaN or infinite.
    NonFinite(&'static str),
    /// Kernel evaluation requested within the singular-set guard around `pi * Z`.
    SingularTime { t: f64, guard: f64 },
    /// Exponent pair fails the sharp admissibility conditions.
    NotAdmissible { q: f64, r: f64, sigma: f64 },
    /// An operation over a family of admissible pairs received an empty family.
    EmptyFamily,
    /// Trajectory length does not match its time grid.
    MisalignedTrajectory { nodes: usize, fields: usize },
    /// An operation that normalizes by the data received zero data.
    ZeroData(&'static str),
    /// The nonlinearity power is outside the supported (sub)critical range.
    Regime(String),
    /// The critical smallness condition failed on the supplied interval.
    SmallnessNotMet { achieved: f64, eta: f64 },
    /// A serialized record could not be decoded.
    Format(String),
    /// Filesystem failure while reading or writing a record.
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::SpecMismatch => write!(f, "basis specs of the operands differ"),
            Error::NonFinite(what) => write!(f, "non-finite value in {what}"),
            Error::SingularTime { t, guard } => write!(
                f,
                "t = {t} is within {guard} of the kernel singular set pi*Z"
            ),
            Error::NotAdmissible { q, r, sigma } => {
                write!(f, "({q}, {r}) is not sharp {sigma}-admissible")
            }
            Error::EmptyFamily => write!(f, "admissible-pair family is empty"),
            Error::MisalignedTrajectory { nodes, fields } => write!(
                f,
                "trajectory has {fields} fields but the time grid has {nodes} nodes"
            ),
            Error::ZeroData(what) => write!(f, "zero data: {what}"),
            Error::Regime(msg) => write!(f, "regime rejected: {msg}"),
            Error::SmallnessNotMet { achieved, eta } => write!(
                f,
                "smallness condition not met: achieved {achieved}, required <= {eta}"
            ),
            Error::Format(msg) => write!(f, "format error: {msg}"),
            Error::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
