use thiserror::Error;

/// Errors raised by the library. The CLI maps each variant onto an exit code
/// through [`Error::exit_code`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("symmetry violation at ({0},{1})")]
    NotSymmetric(usize, usize),

    #[error("non-finite entry at ({0},{1})")]
    NonFinite(usize, usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("eigensolver did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },

    #[error("not semi-positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotSemiPositive { min_eigenvalue: f64 },

    #[error("not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("rank-deficient matrix (|det| = {det:e})")]
    RankDeficient { det: f64 },

    #[error("unexpected signature: {positive} positive, {negative} negative, {zero} zero eigenvalues")]
    Signature {
        positive: usize,
        negative: usize,
        zero: usize,
    },

    #[error("no diagonal scaling with simple nonzero eigenvalues found (best gap {best_gap:e})")]
    PerturbationFailed { best_gap: f64 },

    #[error("not an angle Gram candidate: diagonal entry {index} is {value}")]
    NotAngleGramCandidate { index: usize, value: f64 },

    #[error("invalid angle matrix: {0}")]
    InvalidAngles(String),

    #[error("degenerate simplex: {0}")]
    DegenerateSimplex(String),

    #[error("not a hyperbolic Gram matrix: {0}")]
    NotHyperbolicGram(String),

    #[error("classification mismatch: expected {expected}, found {found}")]
    ClassificationMismatch { expected: String, found: String },

    #[error("boundary matrix: use `degenerate` to approach it")]
    BoundaryMatrix,

    #[error("point off the hyperboloid or de Sitter sphere (form value {value})")]
    OffHyperboloid { value: f64 },

    #[error("hyperplanes do not intersect (|<u,v>| = {value})")]
    HyperplanesDisjoint { value: f64 },

    #[error("ideal or exterior point (norm {norm})")]
    IdealPoint { norm: f64 },

    #[error("hypotheses not met: {0}")]
    LemmaHypotheses(String),

    #[error("path leaves the {expected} class at t = {t}")]
    PathExitsClass { t: f64, expected: String },

    #[error("rejection budget exhausted after {attempts} attempts")]
    RejectionExhausted { attempts: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("input error: {0}")]
    Input(String),
}

impl Error {
    /// 2 = input validation, 3 = domain or classification, 4 = internal numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotSymmetric(..)
            | Error::NonFinite(..)
            | Error::DimensionMismatch { .. }
            | Error::IndexOutOfRange { .. }
            | Error::NotAngleGramCandidate { .. }
            | Error::InvalidAngles(_)
            | Error::InvalidArgument(_)
            | Error::Input(_) => 2,
            Error::NoConvergence { .. } | Error::PerturbationFailed { .. } => 4,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
