//! Files: datasets, scenario configurations and reports.

pub mod config;
pub mod dataset;
pub mod report;

pub use config::{ResolvedConfig, ScenarioConfig};
pub use dataset::{format_dataset, load_dataset, parse_dataset, write_dataset};
pub use report::{render_report, write_report, ReportFormat, ReportRow, REPORT_COLUMNS};
