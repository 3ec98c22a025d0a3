use std::path::{Path, PathBuf};

use serde::Serialize;

pub type Result<T> = std::result::Result<T, CliError>;

/// Machine-readable failure class; each maps to a distinct exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Usage,
    Config,
    Io,
    Format,
    MissingInput,
    InvalidInput,
    Numerical,
}

impl Category {
    pub fn name(self) -> &'static str {
        match self {
            Category::Usage => "usage",
            Category::Config => "config",
            Category::Io => "io",
            Category::Format => "format",
            Category::MissingInput => "missing_input",
            Category::InvalidInput => "invalid_input",
            Category::Numerical => "numerical",
        }
    }

    /// 2 matches clap's own usage failures.
    pub fn exit_code(self) -> i32 {
        match self {
            Category::Usage => 2,
            Category::Config => 3,
            Category::Io => 4,
            Category::Format => 5,
            Category::MissingInput => 6,
            Category::InvalidInput => 7,
            Category::Numerical => 8,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },

    #[error("missing input: {0}")]
    Missing(String),

    #[error(transparent)]
    Core(#[from] dynrecon_core::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn format(path: &Path, message: impl Into<String>) -> Self {
        CliError::Format { path: path.to_path_buf(), message: message.into() }
    }

    pub fn category(&self) -> Category {
        use dynrecon_core::Error as E;
        match self {
            CliError::Usage(_) => Category::Usage,
            CliError::Config(_) => Category::Config,
            CliError::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => Category::MissingInput,
            CliError::Io { .. } => Category::Io,
            CliError::Format { .. } => Category::Format,
            CliError::Missing(_) => Category::MissingInput,
            CliError::Core(e) => match e {
                E::MissingInput(_) => Category::MissingInput,
                E::NonFinite(_) | E::Diverged { .. } | E::NotConverged { .. } => Category::Numerical,
                E::Dimension { .. } | E::Pattern(_) | E::InvalidParameter(_) => Category::InvalidInput,
            },
        }
    }

    /// One-line JSON report for stderr.
    pub fn report(&self) -> String {
        serde_json::json!({ "category": self.category(), "message": self.to_string() }).to_string()
    }
}
