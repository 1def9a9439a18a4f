use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("malformed input at {location}: {message}")]
    MalformedInput { location: String, message: String },
    #[error("topology error: {0}")]
    Topology(String),
    #[error("input contains no geometry")]
    EmptyInput,
    #[error("surface is not watertight: {inconsistent} of {probes} probe points disagree across ray directions")]
    NotWatertight { inconsistent: usize, probes: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("point {0:?} lies outside the field domain")]
    OutOfDomain(Vec<f64>),
    #[error("degenerate normal: interpolated gradient magnitude {0:e} is below 1e-8")]
    DegenerateNormal(f64),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("narrow band is empty: no coarse cell lies within one coarse spacing of the surface")]
    EmptyBand,
    #[error("lattice seeding produced no particles (spacing {spacing} too coarse for the geometry)")]
    EmptySeed { spacing: f64 },
    #[error("particle {index} escaped the domain at {position:?}")]
    ParticleEscaped { index: usize, position: Vec<f64> },
    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse error classes, mapped onto process exit codes by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Io,
    Geometry,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Config => 2,
            ErrorCategory::Io => 3,
            ErrorCategory::Geometry => 4,
        }
    }
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Io { .. } => ErrorCategory::Io,
            Error::Configuration(_) => ErrorCategory::Config,
            Error::MalformedInput { .. }
            | Error::Topology(_)
            | Error::EmptyInput
            | Error::NotWatertight { .. }
            | Error::Domain(_)
            | Error::OutOfDomain(_)
            | Error::DegenerateNormal(_)
            | Error::EmptyBand
            | Error::EmptySeed { .. }
            | Error::ParticleEscaped { .. } => ErrorCategory::Geometry,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::MalformedInput {
            location: location.into(),
            message: message.into(),
        }
    }
}
