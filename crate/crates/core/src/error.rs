//! Error type shared by every module in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the matrix core, the eigensolver,
/// the diagonalization pipelines, and the CLI front end.
#[derive(Debug, Error)]
pub enum Error {
    /// Operands have incompatible shapes.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A NaN or infinity was about to enter a matrix.
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    /// LU elimination hit a pivot below the admissible floor.
    #[error(
        "matrix is singular to tolerance: pivot magnitude {pivot:.3e} at elimination step {step}"
    )]
    SingularMatrix { pivot: f64, step: usize },

    /// The QR iteration did not triangularize within the sweep budget.
    #[error("eigenvalue iteration did not converge within {sweeps} sweeps")]
    NonConvergence { sweeps: usize },

    /// Eigenvector extraction failed the residual or conditioning gate.
    #[error("matrix is not diagonalizable to tolerance: {0}")]
    NotDiagonalizable(String),

    /// Single-linkage chaining produced a cluster too wide to trust.
    #[error("eigenvalue clustering is ambiguous: spread {spread:.3e} exceeds the admissible {limit:.3e}")]
    AmbiguousClustering { spread: f64, limit: f64 },

    /// The restriction matrix has mass outside its block diagonal.
    #[error(
        "restriction matrix leaks outside the block diagonal: {residual:.3e} exceeds {bound:.3e}"
    )]
    BlockLeakage { residual: f64, bound: f64 },

    /// The commutation check failed where commuting inputs are required.
    #[error("matrices do not commute: residual {residual:.3e}")]
    NotCommuting { residual: f64 },

    /// The star-commutation check failed where it is required.
    #[error("matrices do not star-commute: residual {residual:.3e}")]
    NotStarCommuting { residual: f64 },

    /// A cluster's eigenvector columns are linearly dependent to tolerance.
    #[error("eigenvector columns of cluster {index} are linearly dependent to tolerance")]
    RankDeficientCluster { index: usize },

    /// No column-wise permutation-and-scale relation exists.
    #[error("no column correspondence: {0}")]
    NoCorrespondence(String),

    /// The permutation data is not a bijection or not a 0/1 matrix.
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    /// A generator spec violates its invariants.
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    /// An internal consistency check failed; indicates a misconfiguration
    /// or a bug rather than bad user input.
    #[error("internal diagnostic: {0}")]
    InternalDiagnostic(String),

    /// Matrix file text is malformed. Line numbers are 1-based file lines;
    /// entries are 1-based positions within the line.
    #[error("parse error at line {line}, entry {entry}: {message}")]
    Parse {
        line: usize,
        entry: usize,
        message: String,
    },

    /// A verification report does not have the expected shape.
    #[error("malformed report: {0}")]
    MalformedReport(String),

    /// A tolerance configuration violates its invariants.
    #[error("invalid tolerance configuration: {0}")]
    InvalidTolerance(String),

    /// File system failure wrapped with the offending path.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
