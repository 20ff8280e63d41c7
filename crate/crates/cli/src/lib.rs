//! Config parsing, scenario runs and audit wiring behind the `fracg` binary.

pub mod config;
pub mod error;
pub mod scenario;
pub mod specs;

pub use config::{parse_config, AuditKind, MethodChoice, RunConfig};
pub use error::{CliError, CliResult};
pub use scenario::{run_audit, run_scenario, young_summary, AuditInput, AuditRecord, ScenarioReport};
