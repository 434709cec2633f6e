//! Configuration, figure presets, sweeps and CSV output for the `shadowsim`
//! binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod expr;
pub mod output;
pub mod presets;
pub mod sweep;

pub use commands::{execute, Outcome};
pub use config::{parse_config, parse_with_overrides, Command, InitialData, ModelSpec, RunSpec};
pub use error::CliError;
pub use expr::Expr;
pub use output::emit_csv;
pub use sweep::{sweep, SweepRow};
