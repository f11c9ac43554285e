use std::path::PathBuf;

use crate::polymesh::MeshError;
use crate::vtk_io::VtkError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Vtk(#[from] VtkError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid boundary name sidecar {}: {reason}", path.display())]
    SidecarInvalid { path: PathBuf, reason: String },
    #[error("unknown field {name:?}; available fields: {}", available.join(", "))]
    UnknownField { name: String, available: Vec<String> },
    #[error("unknown boundary {name:?}; available boundaries: {}", available.join(", "))]
    UnknownBoundary { name: String, available: Vec<String> },
    #[error("component index {index} out of range for a field with {components} component(s)")]
    IndexOutOfRange { index: usize, components: usize },
    #[error("size mismatch: expected {expected} entries, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("the probe line does not intersect the mesh")]
    NoIntersection,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("cannot overlay an empty profile")]
    EmptyProfile,
    #[error("layer handle does not refer to a live layer of this figure")]
    StaleHandle,
    #[error("figure has no layers to render")]
    EmptyFigure,
    #[error("invalid plot spec at {pointer}: {reason}")]
    SpecInvalid { pointer: String, reason: String },
    #[error("pattern {0:?} matched no datasets")]
    NoMatches(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn spec(pointer: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::SpecInvalid {
            pointer: pointer.into(),
            reason: reason.into(),
        }
    }
}
