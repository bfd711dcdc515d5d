//! Drivers, file formats and the command-line front end for `lazyfe-core`.

use std::fmt;

use serde::Serialize;

pub mod drivers;
pub mod manufactured;
pub mod mesh_io;
pub mod vtk;

pub use lazyfe_core as core;

/// Errors of the std layer. Serialized as `{"kind": ..., "message": ...}`.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    Core(lazyfe_core::Error),
    Io(String),
    Format(String),
    Config(String),
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Core(_) => "core",
            Error::Io(_) => "io",
            Error::Format(_) => "format",
            Error::Config(_) => "config",
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Core(e) => write!(f, "{e}"),
            Error::Io(m) => write!(f, "I/O error: {m}"),
            Error::Format(m) => write!(f, "format error: {m}"),
            Error::Config(m) => write!(f, "invalid configuration: {m}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<lazyfe_core::Error> for Error {
    fn from(e: lazyfe_core::Error) -> Self {
        Error::Core(e)
    }
}

impl Serialize for Error {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Error", 2)?;
        st.serialize_field("kind", self.kind())?;
        st.serialize_field("message", &self.to_string())?;
        st.end()
    }
}
