use thiserror::Error;

use twophoton::Error as CoreError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(CoreError),
    #[error("i/o error: {0}")]
    Io(String),
}

fn is_numerical(e: &CoreError) -> bool {
    matches!(
        e,
        CoreError::PhaseUnwrap { .. }
            | CoreError::Undersampled { .. }
            | CoreError::FitFailed(_)
            | CoreError::NoDip { .. }
    )
}

impl CliError {
    /// Core error raised while handling config key `key`.
    pub fn config(key: &str, e: CoreError) -> Self {
        if is_numerical(&e) {
            CliError::Numerical(e)
        } else {
            CliError::Config(format!("`{key}`: {e}"))
        }
    }

    pub fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        if is_numerical(&e) {
            CliError::Numerical(e)
        } else {
            CliError::Config(e.to_string())
        }
    }
}
