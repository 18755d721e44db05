use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("{0}")]
    Math(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) | CliError::Io(_) => 2,
            CliError::Math(_) => 3,
        }
    }
}

impl From<crtfhe::Error> for CliError {
    /// Validation-type failures map to exit 2, mathematical failures to exit 3.
    fn from(e: crtfhe::Error) -> Self {
        use crtfhe::Error::*;
        match e {
            InvalidModulus(_) | ContextMismatch | DimensionMismatch { .. } | InvalidParameter(_)
            | RangeViolation { .. } | MalformedCircuit(_) => CliError::Input(e.to_string()),
            SingularBasis | DependentSet | ZeroDivisorGenerator | NotPrincipal | NotCoprime(_)
            | IrreducibilityDoubt | ResampleExhausted(_) | SelfCheck(_) | MalformedCiphertext { .. }
            | DimensionTooLarge(_) | SearchSpaceTooLarge(_) => CliError::Math(e.to_string()),
        }
    }
}
