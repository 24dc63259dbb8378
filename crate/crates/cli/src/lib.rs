//! Configuration, record formats and command implementations behind the
//! `heat-impulse` binary.

pub mod commands;
pub mod config;
pub mod format;
pub mod record;

pub use commands::{cmd_oracle, cmd_solve, cmd_sweep, cmd_verify, sweep_csv, Outcome};
pub use config::{ConfigError, RunConfig, SweepAxes};
pub use record::{CertificateOutcome, ResultRecord};
