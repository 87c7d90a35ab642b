//! Config-driven scenarios and their CSV/JSON reports.

mod checks;
mod config;
mod registration;
mod report;
mod scenarios;

pub use checks::{run_check, CheckSuite};
pub use config::{
    default_suite, load_configs, parse_configs, ScenarioConfig, ScenarioKind, Tolerances,
    DEFAULT_M_LIST, DEFAULT_N_LIST,
};
pub use registration::{canonical_kernel, classical_registration_povm};
pub use report::{rows_to_csv, Report, ReportRow, Verdict, CSV_HEADER};
pub use scenarios::{fuzz_case, loglog_slope, run_scenario, FuzzCase};
