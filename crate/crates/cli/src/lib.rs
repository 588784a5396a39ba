//! Configuration, execution and reporting for the `nmhl` command.

// `!(x > 0.0)` is used deliberately so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod run;

pub use config::{parse_config, parse_config_with, RunConfig};
pub use error::CliError;
pub use run::{run, ReportSummary};
