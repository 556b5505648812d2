use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("index `{0}` is not known to this kernel")]
    UnknownIndex(String),

    #[error("index set is not closed under the involution: partner of `{0}` is missing")]
    NotClosedUnderInvolution(String),

    #[error("word of length {len} exceeds the perfect-matching cap of {cap}")]
    WordTooLong { len: usize, cap: usize },

    #[error("kernel is not Hermitian: |K[{row},{col}] - conj(K[{col},{row}])| = {deviation:e}")]
    NotHermitian { row: usize, col: usize, deviation: f64 },

    #[error("kernel is not positive semi-definite: smallest eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("kernel matrix is {rows}x{cols} but {indices} indices were given")]
    Shape { rows: usize, cols: usize, indices: usize },

    #[error("duplicate index `{0}`")]
    DuplicateIndex(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("length mismatch: {indices} indices but {lambdas} parameters")]
    LengthMismatch { indices: usize, lambdas: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("conditioner has vanishing norm: rho(X^+ X) = {0:e}")]
    NullConditioner(f64),

    #[error("Gram matrix is indefinite: eigenvalue {0:e} below tolerance")]
    IndefiniteGram(f64),

    #[error(
        "quadrature did not converge: estimated error {error:e} on [{lower}, {upper}] after {evaluations} evaluations"
    )]
    Quadrature {
        lower: f64,
        upper: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("parse error: {0}")]
    Parse(String),
}
