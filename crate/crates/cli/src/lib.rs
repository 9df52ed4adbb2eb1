//! Verification campaigns and reports behind the `qentropy` binary.

pub mod campaigns;
pub mod report;

pub use campaigns::CampaignConfig;
pub use report::{Format, MarginRecord, Report, Units};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Core(#[from] qentropy::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
