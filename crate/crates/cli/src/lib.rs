//! JSON documents, DOT export and the command-line driver for
//! `accessibility-core`.

pub mod commands;
pub mod document;
pub mod dot;
pub mod error;
pub mod report;

pub use commands::{run, Outcome};
pub use document::{parse_graph_document, LoadedGraph};
pub use error::{CliError, CliResult};
pub use report::RunReport;
