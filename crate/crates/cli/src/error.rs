use nehari_core::Error;

/// Failures mapped onto the process exit status.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed config, or a violated ordering.
    Parse(String),
    /// A hypothesis of the problem does not hold for the given data.
    Precondition(String),
    /// A solver stopped short of its tolerance; `best` is the last iterate.
    NonConvergence { message: String, best: Vec<f64> },
    /// The output directory cannot be created or written.
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Precondition(_) => 3,
            CliError::NonConvergence { .. } => 4,
            CliError::Output(_) => 5,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Parse(m) | CliError::Precondition(m) | CliError::Output(m) => m,
            CliError::NonConvergence { message, .. } => message,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::InvalidExponents(_) | Error::InvalidMesh(_) | Error::Dimension(_) => CliError::Parse(message),
            Error::NoPositiveWeight => CliError::Precondition(format!(
                "{message} (hypothesis: f+ is not identically zero)"
            )),
            Error::NonConvergence { best, .. } => CliError::NonConvergence { message, best },
            Error::AtLambda { source, .. } => match CliError::from(*source) {
                CliError::NonConvergence { best, .. } => CliError::NonConvergence { message, best },
                CliError::Parse(_) => CliError::Parse(message),
                CliError::Output(_) => CliError::Output(message),
                CliError::Precondition(_) => CliError::Precondition(message),
            },
            _ => CliError::Precondition(message),
        }
    }
}
