use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
    #[error("p = {p} is a prime of bad reduction")]
    BadPrime { p: u64 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("singular curve")]
    Singular,
    #[error("no root number table entry for p = {p}, key {key}")]
    MissingRootNumber { p: u64, key: String },
    #[error("root number table for p = {p} failed its checksum")]
    TableChecksum { p: u64 },
    #[error("record file header mismatch: {0}")]
    HeaderMismatch(String),
    #[error("malformed file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
