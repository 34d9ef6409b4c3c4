//! Convergence, log-factor and stability sweeps, with their reports.

pub mod config;
pub mod convergence;
pub mod report;
pub mod stability;
pub mod targets;
pub mod verify;

pub use config::{KeyValues, SweepConfig};
pub use convergence::{run_convergence, run_logfactor_probe, LogFactorReport, Operator};
pub use report::{emit_report, ErrorReport, ReportFormat};
pub use stability::run_stability;
pub use targets::TargetFunction;
pub use verify::{run_verify, VerifyReport};
