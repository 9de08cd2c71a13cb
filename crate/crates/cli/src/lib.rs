//! Library side of the `pg` binary: manifest loading, command implementations
//! and the JSON report format.

pub mod commands;
pub mod manifest;
pub mod report;

pub use commands::CliError;
pub use manifest::{Manifest, ManifestError};
pub use report::{Record, Report};
