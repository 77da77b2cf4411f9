use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// TPR and FPR are (numerically) equal, so the count cannot be adjusted.
    #[error("degenerate classifier: tpr - fpr = {diff:e}, adjustment undefined")]
    DegenerateClassifier { diff: f64 },

    #[error("population has {atoms} atoms, enumeration limit is {limit}")]
    TooManyAtoms { atoms: usize, limit: usize },

    #[error("invalid population: {0}")]
    InvalidPopulation(String),

    #[error("sample has no {0} records")]
    MissingClass(&'static str),

    #[error("empty sample")]
    EmptySample,

    #[error("line {line}: {message} (token `{token}`)")]
    Parse {
        line: u64,
        token: String,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64) -> Self {
        Error::Domain { what, value }
    }
}
