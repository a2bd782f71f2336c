//! Batch runner for scenario files: parsing, execution and report output.

pub mod report;
pub mod run;
pub mod scenario;

pub use report::{emit_report, emit_suite, CheckRow, Format, RunReport};
pub use run::{run_scenario, RunOptions};
pub use scenario::{parse_scenario, serialize_scenario, FieldError, Kind, Scenario, ScenarioError};
