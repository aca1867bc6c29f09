use std::path::PathBuf;

use thiserror::Error;

/// Problems with a scenario configuration.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown key `{key}`{}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    UnknownKey { key: String, line: Option<usize> },
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("bad override `{0}`: expected section.key=value")]
    Override(String),
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Numerical(#[from] polaritrans_core::Error),
    #[error("window [{t_start}, {t_end}] fs does not fit the record span [{first}, {last}] fs")]
    WindowOutOfRange {
        t_start: f64,
        t_end: f64,
        first: f64,
        last: f64,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed file: {reason}")]
    Format { path: PathBuf, reason: String },
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<SimError>,
    },
}

impl SimError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Self::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Process exit status: 2 configuration, 3 numerical, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Numerical(polaritrans_core::Error::Invalid { .. }) => 2,
            Self::Numerical(_) | Self::WindowOutOfRange { .. } => 3,
            Self::Io { .. } | Self::Format { .. } => 4,
            Self::Context { source, .. } => source.exit_code(),
        }
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Config(ConfigError::Parse { .. }) => "parse",
            Self::Config(ConfigError::UnknownKey { .. }) => "unknown-key",
            Self::Config(_) => "validation",
            Self::Numerical(polaritrans_core::Error::Invalid { .. }) => "validation",
            Self::Numerical(polaritrans_core::Error::Instability { .. }) => "instability",
            Self::Numerical(_) => "numerical",
            Self::WindowOutOfRange { .. } => "window-out-of-range",
            Self::Io { .. } => "io",
            Self::Format { .. } => "format",
            Self::Context { source, .. } => source.kind(),
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
