//! Command-line front end, report formats and kernel files for `uconc-core`.

pub mod cli;
pub mod commands;
pub mod error;
pub mod kernel_format;
pub mod parse;
pub mod report;
