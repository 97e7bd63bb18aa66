//! On-disk formats: line-oriented text key files and binary store files.

mod keyfile;
mod storefile;

use thiserror::Error;

pub use keyfile::{key_pair_to_string, parse_key_pair, parse_public_key, public_key_to_string, KEY_HEADER};
pub use storefile::{read_store, write_store, STORE_MAGIC, STORE_VERSION};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormatError {
    #[error("not a key file (expected header '{KEY_HEADER}')")]
    BadHeader,
    #[error("line {line}: expected 'field = value'")]
    BadLine { line: usize },
    #[error("field '{0}' appears more than once")]
    DuplicateField(String),
    #[error("missing field '{0}'")]
    MissingField(&'static str),
    #[error("unexpected field '{0}'")]
    UnknownField(String),
    #[error("field '{field}': {reason}")]
    BadValue { field: String, reason: String },
    #[error("unknown scheme '{0}'")]
    UnknownScheme(String),
    #[error("this is a public key file; a private key file is required")]
    NotPrivate,
    #[error("not a store file (bad magic)")]
    BadMagic,
    #[error("unsupported store version {0}")]
    UnsupportedVersion(u8),
    #[error("unknown store scheme byte {0}")]
    UnknownSchemeByte(u8),
    #[error("store file truncated")]
    Truncated,
    #[error("{0} trailing bytes after store data")]
    TrailingBytes(usize),
    #[error("malformed store: {0}")]
    Malformed(String),
}

pub(crate) fn bad(field: &str, reason: impl Into<String>) -> FormatError {
    FormatError::BadValue { field: field.to_string(), reason: reason.into() }
}
