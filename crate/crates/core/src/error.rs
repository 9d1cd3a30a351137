use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shell {shell} is not admissible on this grid (nyquist shell {nyquist})")]
    ShellAboveNyquist { shell: u32, nyquist: u32 },

    #[error("shell index {0} is not a power of two")]
    NotDyadic(u32),

    #[error("recentering vector {0:?} is not a lattice point")]
    CenterOffLattice([i64; 3]),

    #[error("grids of the two operands differ")]
    GridMismatch,

    #[error("no gaussian drawn for cube {0:?}")]
    MissingCube([i64; 3]),

    #[error("time window [0, {0}] is empty or outside the stored horizon")]
    EmptyWindow(f64),

    #[error("trace has no time-derivative samples")]
    MissingTimeDerivative,

    #[error("fixed point did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("cascade level {level}: {source}")]
    AtLevel {
        level: u32,
        #[source]
        source: Box<Error>,
    },

    #[error("undefined ratio: {0}")]
    Undefined(String),

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Strip level annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtLevel { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
