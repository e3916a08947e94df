//! File formats, persistence, and the command line for `seqcompact-core`.

pub mod cli;
pub mod error;
pub mod io;
pub mod persist;
pub mod report;

pub use error::AppError;
pub use persist::PersistedTree;
