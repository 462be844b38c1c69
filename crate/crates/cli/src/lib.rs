//! Command-line plumbing for `longperm`: long-format CSV input, scenario
//! files, and CSV/text reports.

pub mod analyze;
pub mod config;
pub mod data;
pub mod error;
pub mod report;
pub mod scenario;

pub use analyze::{run_analyze, AnalysisRequest, DataSource, EffectRequest};
pub use config::{load_scenario, parse_scenario, ScenarioFile, StudyKind};
pub use data::{assemble, parse_long_csv, parse_long_csv_from, to_long_table, write_long_csv, Assembled, LongRecord, LongTable};
pub use error::{exit, CliError, CliResult};
pub use report::{ReportRow, ReportTable, Source};
pub use scenario::{run_scenario, run_study, write_outputs, StudyResult};
