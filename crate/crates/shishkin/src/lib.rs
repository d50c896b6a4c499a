//! File formats, parallel convergence tables and the command line front end for
//! [`shishkin_core`].

pub mod cli;
pub mod error;
pub mod output;
pub mod problem_file;
pub mod table;

pub use error::CliError;
