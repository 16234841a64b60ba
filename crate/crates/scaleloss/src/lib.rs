//! File formats, reports and the command line for `scaleloss-core`.

pub mod coco;
pub mod commands;
pub mod error;
pub mod output;
pub mod pairs;
pub mod report;

pub use commands::{run, Cli};
pub use error::{exit, CliError};
