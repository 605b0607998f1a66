//! Command-line front end for `qbern`: value tables, identity checks,
//! level-sum convergence studies and `q -> 1` limits, as JSON lines or CSV.
//!
//! Exit codes: 0 success, 1 a non-diagnostic identity failure, 2 usage
//! error (bad flags, unknown identity, insufficient order), 3 level-sum
//! budget exceeded.

pub mod config;
pub mod run;

pub use config::RunConfig;
pub use run::{execute, CliError, Outcome};
