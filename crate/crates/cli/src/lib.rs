//! Scenario-driven front end for `mixchan`: TOML scenarios, compiled-in
//! presets, CSV/JSON artifacts and verification suites.

pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod run;
pub mod verify;

pub use error::CliError;
