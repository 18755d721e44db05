use thiserror::Error;

/// Errors raised by the lattice, key generation and encryption layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid modulus polynomial: {0}")]
    InvalidModulus(String),
    #[error("operands belong to different ring contexts")]
    ContextMismatch,
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("basis is singular")]
    SingularBasis,
    #[error("vectors are linearly dependent")]
    DependentSet,
    #[error("generator is a zero divisor (ideal matrix has determinant 0)")]
    ZeroDivisorGenerator,
    #[error("ideal has no recorded generator")]
    NotPrincipal,
    #[error("ideals are not coprime: {0}")]
    NotCoprime(String),
    #[error("modulus polynomial failed the irreducibility check")]
    IrreducibilityDoubt,
    #[error("resampling exhausted: {0}")]
    ResampleExhausted(String),
    #[error("self-check failed: {0}")]
    SelfCheck(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("plaintext residue {index} out of range [0, {modulus})")]
    RangeViolation { index: usize, modulus: String },
    #[error("ciphertext residue modulo ideal {index} is not a scalar embedding")]
    MalformedCiphertext { index: usize },
    #[error("malformed circuit: {0}")]
    MalformedCircuit(String),
    #[error("dimension {0} too large for exact enumeration (max 4)")]
    DimensionTooLarge(usize),
    #[error("search space of {0} candidates exceeds the brute-force limit")]
    SearchSpaceTooLarge(String),
}

pub type Result<T> = std::result::Result<T, Error>;
