//! Survey ingestion, prior configuration and command implementations for
//! the `finex` binary.

pub mod commands;
pub mod config;
pub mod report;
pub mod survey;

pub use commands::{run_command, Command, Report};
pub use config::{OutputFormat, PriorSpec, RunConfig};
pub use survey::{parse_survey, SurveyDataset};
