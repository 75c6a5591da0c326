use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite value at row {row}, col {col}")]
    NonFinite { row: usize, col: usize },

    #[error("axis index {index} out of range [1, {n}]")]
    AxisOutOfRange { index: usize, n: usize },

    #[error("axis {axis} used twice in a disjoint plan")]
    DuplicateAxis { axis: usize },

    #[error("pair ({i}, {j}) violates i < j")]
    UnorderedPair { i: usize, j: usize },

    #[error("SVD did not converge within {sweeps} sweeps")]
    SvdNoConvergence { sweeps: usize },

    #[error("matrix is singular or numerically rank-deficient")]
    Singular,

    #[error("linear system ill-conditioned (estimate {cond:.3e})")]
    IllConditioned { cond: f64 },

    #[error("dimension {n} exceeds exact matching cap {cap}; fall back to greedy selection")]
    MatchingDimensionCap { n: usize, cap: usize },

    #[error("matrix not orthonormal enough: defect {defect:.3e} exceeds {limit:.3e}")]
    NotRotation { defect: f64, limit: f64 },

    #[error("determinant {det:.6} is not +1")]
    NotSpecialOrthogonal { det: f64 },

    #[error("parameter A must be antisymmetric (asymmetry {asym:.3e})")]
    NotAntisymmetric { asym: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {kind}")]
    DataFormat { path: String, kind: FormatErrorKind },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// What went wrong while decoding a vector file.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatErrorKind {
    #[error("record dimension {0} is not positive")]
    BadDimension(i32),
    #[error("inconsistent dimension: first record has {expected}, later record has {got}")]
    InconsistentDimension { expected: usize, got: usize },
    #[error("truncated record at byte offset {offset}")]
    Truncated { offset: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
