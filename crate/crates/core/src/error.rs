use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Config errors carry the 1-based line number, or `None` for command-line overrides.
    #[error("{}: key `{key}`: {message}", origin_label(*line))]
    Config {
        line: Option<usize>,
        key: String,
        message: String,
    },

    #[error("{context}: {source}")]
    Cell {
        context: String,
        #[source]
        source: Box<LabError>,
    },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("thread pool: {0}")]
    Pool(String),
}

fn origin_label(line: Option<usize>) -> String {
    match line {
        Some(l) => format!("line {l}"),
        None => "override".to_string(),
    }
}

impl LabError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        LabError::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }

    /// Annotates an error with the parameters of the cell that produced it.
    pub fn in_cell(self, context: impl Into<String>) -> Self {
        LabError::Cell {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
