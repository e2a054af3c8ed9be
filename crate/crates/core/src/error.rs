use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shift operator is not symmetric (max asymmetry {0:.3e})")]
    NonSymmetric(f64),
    #[error("eigendecomposition failed: {0}")]
    EigFailure(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("no connected graph sampled after {0} attempts")]
    ConnectivityTimeout(usize),
    #[error("filter order {order} exceeds the number of distinct eigenvalues {n_distinct}")]
    OrderExceedsMinimalPolynomial { order: usize, n_distinct: usize },
    #[error("filter has no coefficient above tolerance")]
    DegenerateFilter,
    #[error("invalid filter rule: {0}")]
    InvalidRule(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("cross-relation systems need at least two blocks, got {0}")]
    FewerThanTwoBlocks(usize),
    #[error("orders must be strictly increasing, got {0:?}")]
    NonIncreasingOrders(Vec<usize>),
    #[error("singular value decomposition failed")]
    SvdFailure,
    #[error("ground-truth vector is zero")]
    ZeroTruth,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("spectral support is empty")]
    EmptySupport,
    #[error("invalid weight scheme: {0}")]
    InvalidScheme(String),
    #[error("data constraint is infeasible (residual {0:.3e})")]
    Infeasible(f64),
    #[error("solver hit the iteration cap ({0})")]
    MaxIterations(usize),
    #[error("certificate inner matrix is numerically singular (condition {0:.3e})")]
    SingularInner(f64),
    #[error("support columns are rank deficient")]
    RankDeficientSupport,
    #[error("cannot scale noise to a zero signal")]
    ZeroSignalWithNoise,
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
