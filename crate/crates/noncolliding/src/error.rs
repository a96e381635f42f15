use thiserror::Error;

/// Errors produced by coefficient evaluation, integration and analysis.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// A pairwise gap with an active repulsion kernel is below the
    /// machine-zero threshold, so the singular drift 1/(x_i - x_j) is
    /// meaningless in double precision.
    #[error("singular drift: gap |x{i} - x{j}| = {gap:e} below machine-zero threshold")]
    Singularity { i: usize, j: usize, gap: f64 },

    /// Root recovery left the set of real-rooted polynomials by more than
    /// the repair tolerance.
    #[error("non-real roots: residual imaginary part {max_imag:e} exceeds tolerance {tol:e}")]
    NonRealRoots { max_imag: f64, tol: f64 },

    /// The root finder did not converge on the companion matrix.
    #[error("root extraction failed for degree {degree} polynomial")]
    RootExtraction { degree: usize },

    /// A state coordinate became non-finite during integration.
    #[error("state exploded at t = {time}")]
    Explosion { time: f64 },

    /// A per-path failure inside an ensemble run.
    #[error("path {path} failed: {source}")]
    Path {
        path: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown preset: {0}")]
    UnknownPreset(String),

    #[error("preset {preset} has no closed-form prediction for {observable}")]
    UnsupportedPrediction { preset: String, observable: String },

    #[error("empty sample")]
    EmptySample,

    /// Configuration problems; every offending key is listed.
    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("expression error: {0}")]
    Expr(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("{0}")]
    Invalid(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
