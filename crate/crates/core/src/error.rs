use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown measure `{0}`")]
    UnknownMeasure(String),

    #[error("measure `{measure}` has no parameter `{param}`")]
    UnknownParameter { measure: String, param: String },

    #[error("parameter `{param}` of `{measure}` must lie in {interval}, got {value}")]
    ParameterOutOfRange {
        measure: String,
        param: String,
        value: f64,
        interval: String,
    },

    #[error("grid resolution must be at least 1, got {0}")]
    InvalidResolution(u64),

    #[error("{message}")]
    Unrealizable {
        message: String,
        /// Nearest realizable values below and above the request.
        suggestions: Vec<f64>,
    },

    #[error("measure `{0}` is undefined at every grid point")]
    EmptyGamut(String),

    #[error("invalid colormap: {0}")]
    InvalidColormap(String),

    #[error("invalid gamut: min {min} must be below max {max}")]
    InvalidGamut { min: f64, max: f64 },

    #[error("bracket error: {0}")]
    Bracket(String),

    #[error("oracle-shape error: {0}")]
    OracleShape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Coarse error taxonomy shared by the command line exit codes and the HTTP
/// error codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Argument,
    Resolution,
    Bracket,
    Io,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Argument => 2,
            ErrorClass::Resolution => 3,
            ErrorClass::Bracket => 4,
            ErrorClass::Io => 5,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            ErrorClass::Argument => "argument",
            ErrorClass::Resolution => "resolution",
            ErrorClass::Bracket => "bracket",
            ErrorClass::Io => "io",
        }
    }
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::UnknownMeasure(_)
            | Error::UnknownParameter { .. }
            | Error::ParameterOutOfRange { .. }
            | Error::InvalidResolution(_)
            | Error::InvalidColormap(_)
            | Error::InvalidGamut { .. }
            | Error::InvalidArgument(_) => ErrorClass::Argument,
            Error::Unrealizable { .. } | Error::EmptyGamut(_) => ErrorClass::Resolution,
            Error::Bracket(_) | Error::OracleShape(_) | Error::Domain(_) => ErrorClass::Bracket,
            Error::Io(_) => ErrorClass::Io,
        }
    }
}
