use thiserror::Error;

use crate::geometry::GeometryError;
use crate::linalg::EigenError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed record at line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("unknown point cloud format: {0:?}")]
    UnknownFormat(String),
    #[error("normals required")]
    NormalsRequired,
    #[error("PLY error: {0}")]
    Ply(String),
    #[error("only {0} valid points, at least 10 required")]
    TooFewPoints(usize),
    #[error("invalid point cloud: {0}")]
    InvalidCloud(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no planar structure detected")]
    NoPlanes,
    #[error("insufficient support: cluster has {0} points")]
    InsufficientSupport(usize),
    #[error("no bounded polytope constructible")]
    NoBoundedPolytope,
    #[error("clustering failed: {0}")]
    Clustering(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage { stage, source: Box::new(self) }
    }

    /// True for failures caused by the input file or configuration rather than the pipeline.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Io { .. }
            | Error::Malformed { .. }
            | Error::UnknownFormat(_)
            | Error::NormalsRequired
            | Error::Ply(_)
            | Error::TooFewPoints(_)
            | Error::InvalidCloud(_)
            | Error::Config(_)
            | Error::Json(_) => true,
            Error::Stage { source, .. } => source.is_input_error(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
