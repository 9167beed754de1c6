use thiserror::Error;

/// Exit 2: the request is invalid. Exit 3: the computation failed.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<qxfer::Error> for CliError {
    fn from(e: qxfer::Error) -> Self {
        use qxfer::Error::*;
        let msg = e.to_string();
        match e {
            Parameter { .. }
            | Domain { .. }
            | StepTooLarge { .. }
            | CouplerRange { .. }
            | Delay(_)
            | Dimension { .. }
            | Cutoff { .. }
            | NotNormalized(_)
            | Sweep(_)
            | Json(_)
            | Io(_) => CliError::Validation(msg),
            _ => CliError::Numeric(msg),
        }
    }
}
