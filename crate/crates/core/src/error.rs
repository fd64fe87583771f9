use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid history: {0}")]
    InvalidHistory(String),

    #[error(
        "points {first} and {second} coincide (max-norm distance {distance:e} below threshold)"
    )]
    DuplicatePoints {
        first: usize,
        second: usize,
        distance: f64,
    },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("correlation matrix not factorizable even with diagonal jitter {max_jitter:e}")]
    IllConditioned { max_jitter: f64 },

    #[error("every candidate is degenerate; no point can be selected")]
    AllCandidatesDegenerate,

    #[error("objective returned non-finite value {value} at {point:?}")]
    ObjectiveNonFinite { point: Vec<f64>, value: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported division: {0}")]
    UnsupportedDivision(String),

    #[error("unsupported scale: {0}")]
    UnsupportedScale(String),

    #[error("numeral parse error: {0}")]
    Parse(String),

    #[error("extended criterion did not collapse to a finite value at step {step} (residual {residual:e})")]
    CollapseFailure { step: usize, residual: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by bad user input (including unreadable or
    /// malformed input files) rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_)
                | Error::InvalidRegion(_)
                | Error::InvalidKernel(_)
                | Error::Parse(_)
                | Error::UnsupportedScale(_)
                | Error::Io(_)
                | Error::Json(_)
                | Error::Csv(_)
        )
    }
}
