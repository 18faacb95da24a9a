//! Model files, reports and the command line for the iradic risk engine.
//!
//! The analysis itself lives in `iradic-core`; this crate reads and writes
//! the JSON model format, renders text and JSON reports, and exposes
//! [`run_command`] which the `iradic` binary wraps.

pub mod cli;
pub mod format;
pub mod report;

pub use cli::{run_command, run_command_with, CommandOutcome, Env};
pub use format::{parse_model, render_model, ParseError};
