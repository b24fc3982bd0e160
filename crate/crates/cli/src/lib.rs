//! Command-line front end: configuration, output files and the acceptance
//! suite, over the numerical core in `cetlab-core`.

pub mod acceptance;
pub mod checks;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::run;
