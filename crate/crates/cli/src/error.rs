use cloak_core::CloakError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration; `field` is the dotted path of the offending key.
    #[error("invalid config `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: CloakError,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {reason}")]
    Format { path: String, reason: String },
}

impl CliError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// 1 for anything the user can fix in the inputs, 2 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core { source, .. } => match source {
                CloakError::InvalidParameter { .. }
                | CloakError::LengthMismatch { .. }
                | CloakError::Geometry(_) => 1,
                CloakError::Domain(_)
                | CloakError::Singular(_)
                | CloakError::NotFound(_)
                | CloakError::Numerical(_) => 2,
            },
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Attaches a module context to core errors.
pub(crate) trait Context<T> {
    fn context(self, what: &str) -> Result<T>;
}

impl<T> Context<T> for cloak_core::Result<T> {
    fn context(self, what: &str) -> Result<T> {
        self.map_err(|source| CliError::Core {
            context: what.to_string(),
            source,
        })
    }
}
