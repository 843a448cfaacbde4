use std::fmt;
use std::path::Path;

/// Why a command stopped. The variant decides the process exit code.
#[derive(Debug)]
pub enum Failure {
    /// The input was understood but the work could not be done (exit 1).
    Domain(String),
    /// Bad flags, unreadable files, unusable configuration (exit 2).
    Usage(String),
}

impl Failure {
    pub fn domain(msg: impl Into<String>) -> Self {
        Failure::Domain(msg.into())
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        Failure::Usage(msg.into())
    }

    pub fn io(path: &Path, e: impl fmt::Display) -> Self {
        Failure::Usage(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Domain(_) => 1,
            Failure::Usage(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Domain(m) | Failure::Usage(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for Failure {}

pub type CmdResult<T = ()> = Result<T, Failure>;
