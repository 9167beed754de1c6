use thiserror::Error;

/// Errors raised by the simulator library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("{what} = {value} is outside the domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("integration step {dt} ns exceeds the accuracy limit {limit} ns")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("waveform violates the {which} bound at sample {index}")]
    WaveformBound { which: &'static str, index: usize },

    #[error("target |t| = {target} is above the branch maximum {max}")]
    CouplerRange { target: f64, max: f64 },

    #[error("|t(M)| is not monotone on [0, {m_hi}] pH")]
    NonMonotone { m_hi: f64 },

    #[error("singular configuration: {0}")]
    Singular(&'static str),

    #[error("delay configuration: {0}")]
    Delay(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("Fock cutoff too small: at least {required} levels are needed")]
    Cutoff { required: usize },

    #[error("input state is not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("design matrix is rank deficient")]
    RankDeficient,

    #[error("sweep specification: {0}")]
    Sweep(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
