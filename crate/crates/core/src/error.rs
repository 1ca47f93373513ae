//! Error type shared by the whole library.
//!
//! Variants are split between *input* errors (malformed text, unknown names,
//! shape problems) and *mathematical* errors (a claimed property that the
//! exact arithmetic refutes).  The CLI maps the former to exit code 2 and the
//! latter to exit code 1.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    // ---- input / parse errors -------------------------------------------
    #[error("syntax error at byte {offset}: {msg}")]
    Syntax { offset: usize, msg: String },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("unknown builtin square `{0}`")]
    UnknownSquare(String),

    #[error("unsupported ring for this operation: {0}")]
    UnsupportedRing(String),

    #[error("malformed input: {0}")]
    Invalid(String),

    // ---- mathematical check failures ------------------------------------
    #[error("polynomial is not monic in `{0}`")]
    NotMonic(String),

    #[error("ring mismatch: {0}")]
    RingMismatch(String),

    #[error("matrix is not special linear: determinant is {0}")]
    NotSpecialLinear(String),

    #[error("element is not a unit: {0}")]
    NotAUnit(String),

    #[error("homomorphism is not surjective; no canonical preimage")]
    NotSurjective,

    #[error("fibre glue mismatch: f(right) = {f_value} but g(left) = {g_value}")]
    GlueMismatch { f_value: String, g_value: String },

    #[error("not a loop: value at {var} = {at} is {value}")]
    NotALoop { var: String, at: String, value: String },

    #[error("boundary mismatch in {condition}: {detail}")]
    BoundaryMismatch { condition: String, detail: String },

    #[error("row is not unimodular: pairing residual is {0}")]
    NotUnimodular(String),

    #[error("matrix does not complete the row: {0}")]
    NotACompletion(String),

    #[error("unexpected block shape: {0}")]
    ShapeError(String),

    #[error("splitting witness is invalid: {0}")]
    SplitInvalid(String),

    #[error("factor list does not assemble to the required matrix: {0}")]
    NotStablyElementary(String),

    #[error("winding sampler did not converge within {samples} samples")]
    NonConvergent { samples: usize },

    #[error("quotient-ring equality assumption unmet: {0}")]
    AssumptionUnmet(String),
}

impl Error {
    /// True for errors that indicate malformed *input* rather than a failed
    /// mathematical check.  Drives the CLI exit code (2 vs 1).
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. }
                | Error::UnknownVariable(_)
                | Error::UnknownSquare(_)
                | Error::UnsupportedRing(_)
                | Error::Invalid(_)
        )
    }
}
