//! The `murmur` command line tool.

pub mod commands;
pub mod config;
pub mod pipeline;

use std::fmt;

/// A failed command and its exit status.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config or mismatched inputs: exit 2.
    Config(String),
    /// A self-check exceeded its tolerance: exit 3.
    Tolerance(String),
    /// Anything else: exit 1.
    Runtime(String),
    /// The reader closed stdout: exit 0 silently.
    Closed,
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Tolerance(_) => 3,
            Failure::Runtime(_) => 1,
            Failure::Closed => 0,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Tolerance(m) => write!(f, "tolerance check failed: {m}"),
            Failure::Runtime(m) => write!(f, "error: {m}"),
            Failure::Closed => Ok(()),
        }
    }
}

impl From<murmur_core::Error> for Failure {
    fn from(e: murmur_core::Error) -> Self {
        use murmur_core::Error as E;
        match e {
            E::InvalidArgument(_) | E::HeaderMismatch(_) | E::NotPrime(_) | E::BadPrime { .. } | E::Singular => {
                Failure::Config(e.to_string())
            }
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            return Failure::Closed;
        }
        Failure::Runtime(e.to_string())
    }
}

/// Size the global thread pool from the flag, then MURMUR_THREADS, else
/// all logical cores.
pub fn init_threads(flag: Option<usize>) -> Result<(), Failure> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("MURMUR_THREADS") {
            Ok(v) => Some(v.parse().map_err(|_| Failure::Config(format!("MURMUR_THREADS={v:?} is not a count")))?),
            Err(_) => None,
        },
    };
    if let Some(n) = n.filter(|&n| n > 0) {
        // A second call finds the pool already built; keep the first size.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}
