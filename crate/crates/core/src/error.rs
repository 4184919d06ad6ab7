use thiserror::Error;

use crate::allocator::AllocError;
use crate::ingest::IngestError;
use crate::oracle::OracleError;
use crate::selection::SelectionError;

/// Process exit codes used by the command-line tool and mirrored by the C API.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INPUT: i32 = 1;
    pub const INSUFFICIENT_QUBITS: i32 = 2;
    pub const NO_FEASIBLE_ALLOCATION: i32 = 3;
    pub const INSTANCE_TOO_LARGE: i32 = 4;
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Alloc(#[from] AllocError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{0}")]
    Usage(String),
    #[error("writing output: {0}")]
    Output(#[from] std::io::Error),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Alloc(AllocError::InsufficientQubits { .. })
            | Error::Oracle(OracleError::Alloc(AllocError::InsufficientQubits { .. })) => exit::INSUFFICIENT_QUBITS,
            Error::Selection(_) | Error::Oracle(OracleError::Selection(_)) => exit::NO_FEASIBLE_ALLOCATION,
            Error::Oracle(OracleError::InstanceTooLarge { .. }) => exit::INSTANCE_TOO_LARGE,
            Error::Ingest(_) | Error::Alloc(_) | Error::Oracle(OracleError::Alloc(_)) | Error::Usage(_) | Error::Output(_) => {
                exit::INPUT
            }
        }
    }
}
