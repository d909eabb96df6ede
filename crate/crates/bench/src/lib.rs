//! Command line front end of `choselect`: data files, experiment
//! configurations, replicate orchestration and reports.

pub mod cli;
pub mod config;
pub mod error;
pub mod estimators;
pub mod io;
pub mod oracle;
pub mod report;
pub mod runner;

pub use error::{BenchError, Result};
