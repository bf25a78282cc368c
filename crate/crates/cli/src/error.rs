use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(#[from] metrofi::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Output(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(2),
            CliError::Numerical(
                metrofi::Error::InvalidParameter(_)
                | metrofi::Error::TooLarge(_)
                | metrofi::Error::UnsupportedNoise(_),
            ) => ExitCode::from(2),
            _ => ExitCode::from(3),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
