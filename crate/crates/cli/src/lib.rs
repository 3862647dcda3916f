//! Command-line front end: one command per pipeline stage plus a cached
//! end-to-end runner.

pub mod commands;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod seasons;
pub mod spec;

pub use error::{CliError, Result};
