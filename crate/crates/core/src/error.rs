use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },

    #[error("line {line}: singular map ({msg})")]
    SingularMap { line: usize, msg: String },

    #[error("line {line}: map of kind {kind} does not live on space {space}")]
    MixedSpaces {
        line: usize,
        kind: &'static str,
        space: &'static str,
    },

    #[error("ifs has no maps")]
    EmptySystem,

    #[error("ifs has {0} maps, at most 64 are supported")]
    TooManyMaps(usize),

    #[error("point {0} lies outside the domain of the map")]
    OutsideDomain(String),

    #[error("point {0} lies outside the image of the map")]
    OutsideImage(String),

    #[error("word index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("inverse map is not expansive (L = {0})")]
    NotExpansive(f64),

    #[error("map {index} is not contractive on the window (Lipschitz constant {lipschitz})")]
    NotContractive { index: usize, lipschitz: f64 },

    #[error("raster did not stabilize after {0} iterations")]
    DidNotStabilize(usize),

    #[error("partial maps (halfsqrt) are not supported by this operation")]
    PartialMapsUnsupported,

    #[error("operation is not available on space {0}")]
    UnsupportedSpace(&'static str),

    #[error("cutoff K = {0} exceeds the maximum of 254")]
    CutoffTooLarge(usize),

    #[error("invalid radius {0}, must be positive")]
    InvalidRadius(f64),

    #[error("box counting needs at least 3 scales, got {0}")]
    DegenerateScaleRange(usize),

    #[error("no suitable point found: {0}")]
    NotFound(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid data format: {0}")]
    Format(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
