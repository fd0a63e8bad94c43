//! Error type shared by every module in the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CoreError>;

/// Failure modes of the library operations.
///
/// Each variant carries a human-readable message; [`CoreError::code`] exposes
/// a stable machine-readable name for front ends that serialize errors.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoreError {
    /// An argument violates a precondition (non-finite number, empty or
    /// non-monotone grid, mismatched lengths, out-of-range count).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The parameters are outside the domain of the requested closed form
    /// (for example an operation that requires cavity-atom resonance).
    #[error("domain error: {0}")]
    Domain(String),

    /// The eigenvalue pair is too close to coalescence for the spectral
    /// decomposition to be numerically meaningful. Callers should use the
    /// closed-form or confluent path instead.
    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    /// Evaluation exactly on the principal-value pole of the two-photon
    /// spectral kernel.
    #[error("principal value point: {0}")]
    PrincipalValuePoint(String),

    /// A permutation sum would exceed the documented size cap.
    #[error("complexity limit: {0}")]
    ComplexityLimit(String),

    /// Too few usable samples to fit the requested quantity.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Adaptive quadrature hit its subdivision cap with the error estimate
    /// still above tolerance. Carries the achieved relative error.
    #[error("quadrature did not converge: achieved relative error {achieved:.3e}, requested {requested:.3e}")]
    QuadratureNotConverged { achieved: f64, requested: f64 },
}

impl CoreError {
    /// Stable kebab-case name of the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            CoreError::InvalidArgument(_) => "invalid-argument",
            CoreError::Domain(_) => "domain-error",
            CoreError::DegenerateSpectrum(_) => "degenerate-spectrum",
            CoreError::PrincipalValuePoint(_) => "principal-value-point",
            CoreError::ComplexityLimit(_) => "complexity-limit",
            CoreError::InsufficientData(_) => "insufficient-data",
            CoreError::QuadratureNotConverged { .. } => "quadrature-not-converged",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_are_kebab_case() {
        let samples = [
            CoreError::InvalidArgument("x".into()),
            CoreError::Domain("x".into()),
            CoreError::DegenerateSpectrum("x".into()),
            CoreError::PrincipalValuePoint("x".into()),
            CoreError::ComplexityLimit("x".into()),
            CoreError::InsufficientData("x".into()),
            CoreError::QuadratureNotConverged {
                achieved: 1e-3,
                requested: 1e-9,
            },
        ];
        for err in samples {
            let code = err.code();
            assert!(code
                .chars()
                .all(|c| c.is_ascii_lowercase() || c == '-'));
        }
    }

    #[test]
    fn display_includes_message() {
        let err = CoreError::Domain("requires resonance".into());
        assert!(err.to_string().contains("requires resonance"));
    }
}
