use thiserror::Error;

/// Errors surfaced by the library. The CLI maps these onto exit codes:
/// invalid input → 2, numerical refusal → 3, invariant violation → 4.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The requested computation is refused on mathematical grounds
    /// (recurrent graph handed to a BEC pipeline, resolvent requested
    /// inside the spectrum, singular occupied mode, ...). Never a guess.
    #[error("numerical refusal: {0}")]
    Refusal(String),

    /// An internal invariant failed; indicates inconsistent inputs or a bug,
    /// and is reported as a certificate rather than papered over.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("no convergence after {iterations} iterations: {context}")]
    NonConvergence { iterations: usize, context: String },
}

pub type Result<T> = std::result::Result<T, CoreError>;
