//! Error type shared across the crate.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed input text (graph files, manifests). Carries the 1-based line number.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// An edge references a vertex that was never declared.
    #[error("{path}:{line}: edge endpoint {vertex} is not a declared vertex")]
    DanglingEndpoint {
        path: PathBuf,
        line: usize,
        vertex: u32,
    },

    /// Vertex ids must be dense 0..n-1; `vertex` has no `v` record.
    #[error("{path}: no label declared for vertex {vertex} (vertex ids must be dense)")]
    MissingLabel { path: PathBuf, vertex: u32 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Invalid parameter combination (gamma, kappa, k, generator arguments, ...).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Distribution statistics need at least two vertices.
    #[error("graph has {0} vertices; similarity distribution needs at least 2")]
    DegenerateStats(usize),

    /// Bad magic bytes or unsupported version in an index file.
    #[error("{path}: not a readable index file: {message}")]
    IndexFormat { path: PathBuf, message: String },

    /// Stored graph digest does not match the graph supplied at query time.
    #[error("index digest mismatch: the index was built from a different graph")]
    DigestMismatch,

    /// Query extraction could not reach the requested size from any start vertex.
    #[error("could not extract a connected {size}-vertex query after {attempts} attempts")]
    QueryExhausted { size: usize, attempts: usize },

    /// Chi-square statistic over an empty symbol sequence.
    #[error("symbol sequence is empty")]
    EmptySequence,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input (maps to CLI exit code 2).
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::DanglingEndpoint { .. }
                | Error::MissingLabel { .. }
                | Error::Config(_)
        )
    }
}
