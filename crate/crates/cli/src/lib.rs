//! Library surface of the command-line tool: configuration parsing,
//! artifact serialization, and the subcommand pipelines. Exposed as a
//! library so integration tests can drive pipelines in-process.

pub mod config;
pub mod report;
pub mod run;
