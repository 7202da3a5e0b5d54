use std::path::PathBuf;

/// Errors produced by the landmark pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("point {index} at ({x}, {y}) lies outside the {width}x{height} frame")]
    OutOfFrame {
        index: usize,
        x: f64,
        y: f64,
        width: u32,
        height: u32,
    },

    #[error("dimension mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    DimensionMismatch {
        left_width: u32,
        left_height: u32,
        right_width: u32,
        right_height: u32,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("cannot split {surgeries} surgeries into {k} folds")]
    InfeasibleSplit { k: usize, surgeries: usize },

    #[error("scene constraints infeasible: {0}")]
    InfeasibleScene(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed JSON: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: frame {record}: {message}")]
    Schema {
        path: PathBuf,
        record: String,
        message: String,
    },

    #[error("{path}: image error: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
