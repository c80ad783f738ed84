//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An index referred past the end of a collection.
    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    /// A mesh violated a structural invariant (orientation, vertex reuse, …).
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    /// A partition violated a structural invariant.
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    /// An operation that requires a connected graph received a disconnected one.
    #[error("graph is disconnected ({components} components); split it by components first")]
    DisconnectedGraph { components: usize },

    /// A class of a probabilistic partition carries no volume.
    #[error("partition class {class} has zero volume")]
    ZeroVolume { class: usize },

    /// Matrix or layer dimensions do not line up.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A geometric computation hit a degenerate configuration.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// A generator exhausted its retry budget without producing a valid mesh.
    #[error("mesh generation failed: {0}")]
    GenerationFailed(String),

    /// A numeric quantity became non-finite.
    #[error("numerical failure in {context}")]
    NonFinite { context: String },

    /// Configuration rejected before any work was attempted.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A file did not parse as the expected format.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    /// A model file was structurally valid JSON but incompatible with the
    /// architecture compiled into this crate.
    #[error("model file rejected: {0}")]
    ModelFormat(String),

    /// Plain I/O failure, with the offending path.
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Attaches a path to a raw I/O error.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures indicating numerical breakdown rather than bad input.
    /// The CLI maps these to a distinct exit code.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonFinite { .. })
    }
}
