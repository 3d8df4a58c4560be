use std::path::{Path, PathBuf};

use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] panomem_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("run directory {} is locked by another process", .0.display())]
    Locked(PathBuf),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }

    pub fn format(path: impl AsRef<Path>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.as_ref().to_path_buf(),
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Error::Usage(message.into())
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Format { .. } => "format",
            Error::Usage(_) => "usage",
            Error::Locked(_) => "locked",
            Error::Core(e) => match e {
                panomem_core::Error::InvalidArgument(_) => "invalid_argument",
                panomem_core::Error::Degenerate(_) => "degenerate",
                panomem_core::Error::Conflict(_) => "conflict",
                panomem_core::Error::NotFound(_) => "not_found",
                panomem_core::Error::UndefinedDirection(_) => "undefined_direction",
                panomem_core::Error::Generator { .. } => "generator",
                panomem_core::Error::Reconstructor { .. } => "reconstructor",
            },
        }
    }

    pub fn path(&self) -> Option<&Path> {
        match self {
            Error::Io { path, .. } | Error::Format { path, .. } | Error::Locked(path) => Some(path),
            _ => None,
        }
    }

    /// The object printed on stderr when a command fails.
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({ "error": self.kind(), "message": self.to_string() });
        if let Some(p) = self.path() {
            v["path"] = json!(p.display().to_string());
        }
        if let Error::Core(
            panomem_core::Error::Generator { step, .. } | panomem_core::Error::Reconstructor { step, .. },
        ) = self
        {
            v["step"] = json!(step);
        }
        v
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            _ => 1,
        }
    }
}
