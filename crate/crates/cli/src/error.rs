use std::path::PathBuf;

use thiserror::Error;

#[derive(Error, Debug)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("solver failed: {0}")]
    Solver(tracking_game::Error),

    #[error("verification failed: {}", .0.join(", "))]
    VerifyFailed(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::VerifyFailed(_) => 1,
            Self::Validation(_) => 2,
            Self::Io { .. } => 3,
            Self::Solver(_) => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<tracking_game::Error> for CliError {
    fn from(e: tracking_game::Error) -> Self {
        use tracking_game::Error as E;
        match e {
            E::InvalidParams(_)
            | E::InvalidGrid(_)
            | E::InvalidTarget(_)
            | E::InvalidArgument(_)
            | E::MissingPath
            | E::GridMismatch(_)
            | E::Unsupported(_) => Self::Validation(e.to_string()),
            E::Domain { .. } | E::Singularity { .. } | E::IntegrationFailure { .. } => Self::Solver(e),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        use tracking_game::Error as E;
        assert_eq!(CliError::from(E::InvalidParams("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(E::MissingPath).exit_code(), 2);
        assert_eq!(CliError::from(E::Singularity { t: 1.0, horizon: 1.0 }).exit_code(), 4);
        let failure = E::IntegrationFailure {
            t: 0.5,
            reason: "step underflow".into(),
        };
        assert_eq!(CliError::from(failure).exit_code(), 4);
        assert_eq!(CliError::io("f", std::io::Error::other("x")).exit_code(), 3);
        let v = CliError::VerifyFailed(vec!["nash_vertex_offset".into()]);
        assert_eq!(v.exit_code(), 1);
        assert!(v.to_string().contains("nash_vertex_offset"));
    }
}
