use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, DexError>;

/// Every failure the library can report.
///
/// Variant names are stable; the Python bindings surface them verbatim in
/// exception messages.
#[derive(Debug, Error)]
pub enum DexError {
    #[error("LengthMismatch: expected {expected} values for shape {shape}, got {actual}")]
    LengthMismatch {
        shape: String,
        expected: usize,
        actual: usize,
    },

    #[error("ValueOutOfRange: value {value} at flat index {index} is outside the {dtype} range")]
    ValueOutOfRange {
        dtype: &'static str,
        index: usize,
        value: f64,
    },

    #[error("IndexOutOfRange: {0}")]
    IndexOutOfRange(String),

    #[error("InvalidArgument: {0}")]
    InvalidArgument(String),

    #[error("ShapeError: {0}")]
    Shape(String),

    #[error("ChannelError: {0}")]
    Channel(String),

    #[error("DtypeError: {0}")]
    Dtype(String),

    #[error("SpecMismatch: {0}")]
    SpecMismatch(String),

    #[error("UnsupportedFormat: {}", .0.display())]
    UnsupportedFormat(PathBuf),

    #[error("CorruptFile: {}: {reason}", path.display())]
    CorruptFile { path: PathBuf, reason: String },

    #[error("BadMagic: expected \"DEXT\", found {found:?}")]
    BadMagic { found: [u8; 4] },

    #[error("VersionMismatch: unsupported container version {0}")]
    VersionMismatch(u8),

    #[error("UnknownStrategy: {name:?} (valid: {valid})")]
    UnknownStrategy { name: String, valid: String },

    #[error("UnknownProfile: {0:?}")]
    UnknownProfile(String),

    #[error("ConfigError: {0}")]
    Config(String),

    #[error("IoError: {0}")]
    Io(#[from] std::io::Error),
}

impl DexError {
    /// The stable variant name, as used in messages and by the bindings.
    pub fn kind(&self) -> &'static str {
        match self {
            DexError::LengthMismatch { .. } => "LengthMismatch",
            DexError::ValueOutOfRange { .. } => "ValueOutOfRange",
            DexError::IndexOutOfRange(_) => "IndexOutOfRange",
            DexError::InvalidArgument(_) => "InvalidArgument",
            DexError::Shape(_) => "ShapeError",
            DexError::Channel(_) => "ChannelError",
            DexError::Dtype(_) => "DtypeError",
            DexError::SpecMismatch(_) => "SpecMismatch",
            DexError::UnsupportedFormat(_) => "UnsupportedFormat",
            DexError::CorruptFile { .. } => "CorruptFile",
            DexError::BadMagic { .. } => "BadMagic",
            DexError::VersionMismatch(_) => "VersionMismatch",
            DexError::UnknownStrategy { .. } => "UnknownStrategy",
            DexError::UnknownProfile(_) => "UnknownProfile",
            DexError::Config(_) => "ConfigError",
            DexError::Io(_) => "IoError",
        }
    }
}
