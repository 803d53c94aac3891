use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report. Variant names double as the
/// machine-readable error codes emitted by the CLI.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix contains NaN or infinite entries")]
    NonFinite,
    #[error("matrix is not Hermitian (asymmetry {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("columns are not orthonormal (deviation {0:.3e})")]
    NotOrthonormal(f64),
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("Gram matrix has a negative eigenvalue {0:.6e}")]
    NotPsd(f64),
    #[error("operator is zero")]
    ZeroOperator,
    #[error("operator is not weakly contracting (largest eigenvalue of L^dag L is {0:.6e})")]
    NotContracting(f64),
    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("state is not normalized (norm {0:.12})")]
    NotNormalized(f64),
    #[error("member {index} of the combination is not unitary (deviation {deviation:.3e})")]
    NotUnitaryMember { index: usize, deviation: f64 },
    #[error("bad weights: {0}")]
    BadWeights(String),
    #[error("vector is zero and does not name a projective point")]
    ZeroVector,
    #[error("points are not in general position")]
    NotGeneralPosition,
    #[error("tetrad has three or four coincident points; the cross-ratio has no continuous extension there")]
    SingularConfiguration,
    #[error("invalid suite: {0}")]
    InvalidSuite(String),
    #[error("bad options: {0}")]
    BadOptions(String),
    #[error("operation requires Hilbert dimension {expected}, got {actual}")]
    WrongDimension { expected: usize, actual: usize },
    #[error("suite is not on the border of PL")]
    NotBorder,
    #[error("domain half must be (0, inf, 1, -1)")]
    WrongDomain,
    #[error("range point {0} is infinite")]
    InfiniteRangePoint(usize),
    #[error("fewer than three usable grid points ({0})")]
    DegenerateGrid(usize),
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
}

impl Error {
    /// Stable identifier used in machine-readable error reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonFinite => "NonFinite",
            Error::NotHermitian(_) => "NotHermitian",
            Error::NotSquare { .. } => "NotSquare",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::NotOrthonormal(_) => "NotOrthonormal",
            Error::Singular => "Singular",
            Error::NotPsd(_) => "NotPSD",
            Error::ZeroOperator => "ZeroOperator",
            Error::NotContracting(_) => "NotContracting",
            Error::NotUnitary(_) => "NotUnitary",
            Error::NotNormalized(_) => "NotNormalized",
            Error::NotUnitaryMember { .. } => "NotUnitaryMember",
            Error::BadWeights(_) => "BadWeights",
            Error::ZeroVector => "ZeroVector",
            Error::NotGeneralPosition => "NotGeneralPosition",
            Error::SingularConfiguration => "SingularConfiguration",
            Error::InvalidSuite(_) => "InvalidSuite",
            Error::BadOptions(_) => "BadOptions",
            Error::WrongDimension { .. } => "WrongDimension",
            Error::NotBorder => "NotBorder",
            Error::WrongDomain => "WrongDomain",
            Error::InfiniteRangePoint(_) => "InfiniteRangePoint",
            Error::DegenerateGrid(_) => "DegenerateGrid",
            Error::InvalidDensity(_) => "InvalidDensity",
        }
    }
}
