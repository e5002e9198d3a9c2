//! Verification driver for the `valfour` transform: identity suites, reports and
//! file conversion used by the `valfour` binary.

pub mod config;
pub mod report;
pub mod suites;
pub mod transform;

pub use config::Config;
pub use report::{Check, Environment, Format, Report};
pub use suites::{run_suite, IDENTITIES, SUITES};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("unknown suite '{0}' (expected one of: {list})", list = SUITES.join(", "))]
    UnknownSuite(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Valfour(#[from] valfour::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Check(String),
}

pub type Result<T> = std::result::Result<T, CliError>;
