//! File formats and the `catspace` command line.

pub mod commands;
pub mod csvio;
pub mod error;
pub mod manifest;
pub mod model_io;
pub mod svg;

pub use commands::run;
pub use csvio::{load_csv, LabelColumn, LabeledData};
pub use error::{CliError, CliResult};
