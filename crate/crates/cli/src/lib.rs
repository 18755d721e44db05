//! Command-line front end: key files, ciphertext files, and batch commands.

pub mod commands;
pub mod error;
pub mod format;

pub use commands::{run, Cli};
pub use error::CliError;
