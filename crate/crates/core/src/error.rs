use thiserror::Error;

/// Errors raised by evaluators, constructors and estimators.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Argument outside the validity window of a formula or evaluator.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series or integral does not converge at the requested point.
    #[error("divergence: {0}")]
    Divergence(String),

    /// No evaluator exists for this combination of descriptors.
    #[error("unsupported variant: {0}")]
    Unsupported(String),

    /// Construction would exceed the configured budget.
    #[error("capacity exceeded: {what} needs {needed}, budget is {budget}")]
    Capacity {
        what: &'static str,
        needed: u128,
        budget: u128,
    },

    /// Invalid construction parameters.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The requested closed form does not exist for this input.
    #[error("no closed form: {0}")]
    NoClosedForm(String),

    /// Contour quadrature failed to stabilize.
    #[error("residue did not stabilize: {0}")]
    NonStabilizing(String),

    /// Argument principle is ill-conditioned because a pole sits on a cell edge.
    #[error("pole on cell boundary near {0}")]
    BoundaryPole(String),

    /// Tube samples cover too narrow a range of scales.
    #[error("insufficient range: {0}")]
    InsufficientRange(String),

    /// Exponent vectors are rationally dependent; carries the dependency.
    #[error("exponent vectors are rationally dependent: {certificate:?}")]
    IndependenceViolation { certificate: Vec<i128> },

    /// Estimated error exceeds the requested tolerance.
    #[error("resolution too coarse: estimated error {est_error:e} exceeds tolerance {tol:e}")]
    TooCoarse { est_error: f64, tol: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn diverge(msg: impl Into<String>) -> Self {
        Error::Divergence(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }
}
