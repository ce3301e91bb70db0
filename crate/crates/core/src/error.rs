use thiserror::Error;

/// Every failure the toolkit can report.
///
/// Variants carrying a `String` name the offending field, identity or
/// fixture so that CLI diagnostics stay actionable.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian (defect {defect:.3e} relative to norm)")]
    NotHermitian { defect: f64 },
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("invalid real structure: K*conj(K) deviates from I by {defect:.3e}")]
    InvalidRealStructure { defect: f64 },
    #[error("singular system (pivot {pivot:.3e})")]
    Singular { pivot: f64 },
    #[error("derivation index {index} out of range for base dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema error in `{field}`: {reason}")]
    Schema { field: String, reason: String },
    #[error("invariant violated in `{field}`: {reason}")]
    InvariantViolation { field: String, reason: String },
    #[error("real structure kappa is required but missing")]
    MissingRealStructure,
    #[error("spectra share an eigenvalue (gap {gap:.3e} <= {threshold:.3e})")]
    CommonEigenvalue { gap: f64, threshold: f64 },
    #[error("spectrum is not real (max imaginary part {max_imag:.3e})")]
    NonRealSpectrum { max_imag: f64 },
    #[error("IS condition violated (margin {margin:.3e})")]
    IsViolated { margin: f64 },
    #[error("connection is not flat/holomorphic: {0}")]
    NotFlat(String),
    #[error("Q is not constant in a flat frame (variation {variation:.3e})")]
    NonConstant { variation: f64 },
    #[error("pairing preconditions violated: {0}")]
    PairingViolated(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("weight shift requested but bundle carries no weight")]
    MissingWeight,
    #[error("fiber connection does not split into lines: {0}")]
    NotDecomposable(String),
    #[error("closed-form monodromy needs a constant residue: {0}")]
    NotConstantResidue(String),
    #[error("step count {steps} below minimum {min}")]
    StepCountTooSmall { steps: usize, min: usize },
    #[error("Hermitian form block for p={p} is degenerate")]
    NondegeneracyFailure { p: i64 },
    #[error("eigenvalue {eigenvalue} lies on the wall (w+1)/2 + Z for weight {weight}")]
    EigenvalueOnWall { eigenvalue: f64, weight: i64 },
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("numerical method did not converge: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn schema(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Schema { field: field.into(), reason: reason.into() }
    }

    pub(crate) fn invariant(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvariantViolation { field: field.into(), reason: reason.into() }
    }

    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}

impl Error {
    /// True for findings about the mathematics of the input, false for
    /// malformed input or unusable arguments.
    pub fn is_mathematical(&self) -> bool {
        matches!(
            self,
            Error::InvalidRealStructure { .. }
                | Error::CommonEigenvalue { .. }
                | Error::NonRealSpectrum { .. }
                | Error::IsViolated { .. }
                | Error::NotFlat(_)
                | Error::NonConstant { .. }
                | Error::PairingViolated(_)
                | Error::PreconditionViolated(_)
                | Error::NotDecomposable(_)
                | Error::NotConstantResidue(_)
                | Error::EigenvalueOnWall { .. }
        )
    }
}
