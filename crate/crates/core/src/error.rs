use thiserror::Error;

/// Errors raised anywhere in the model or analysis chain.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of a function.
    #[error("{what}: {detail}")]
    Domain { what: &'static str, detail: String },

    /// A requested level is too close to the charge-basis cutoff.
    #[error("level {level} needs n_cut >= {needed} (got {n_cut})")]
    Truncation {
        level: usize,
        n_cut: usize,
        needed: usize,
    },

    /// An iterative numerical routine ran out of iterations.
    #[error("{0} did not converge")]
    NoConvergence(&'static str),

    /// Expectation maximisation hit its iteration cap.
    #[error("EM stopped after {iterations} iterations without converging")]
    EmNotConverged {
        iterations: usize,
        log_likelihood: Vec<f64>,
    },

    /// The data cannot support the requested estimate.
    #[error("degenerate data: {0}")]
    Degenerate(String),

    /// The fit problem is not identifiable from the data.
    #[error("rank-deficient fit: {0}")]
    RankDeficient(String),

    /// A fit could not proceed.
    #[error("fit failed: {0}")]
    Fit(String),

    /// Malformed input file.
    #[error("{path}:{line}: {message}")]
    Format {
        path: String,
        line: u64,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            what,
            detail: detail.into(),
        }
    }
}
