//! Dataset ingestion, configuration, experiment orchestration and reports.

pub mod config;
pub mod experiment;
pub mod io;
pub mod report;

use crate::error::Error;

/// Process exit code for an error: 2 for configuration problems, 3 for data
/// problems, 1 for I/O and anything else.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidArgument(_) => 2,
        Error::Parse { .. }
        | Error::Validation(_)
        | Error::DimensionMismatch { .. }
        | Error::UndefinedAuc(_)
        | Error::Generation(_) => 3,
        Error::Io(_) => 1,
    }
}
