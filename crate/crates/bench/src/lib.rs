//! Experiment harness for `singctrl`: configuration, the ε sweep, CSV output
//! and the verification suites.

// `!(x > 0.0)` guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod output;
pub mod verify;

pub use config::{ConfigError, ExperimentConfig, InitialData};
pub use experiments::{ExperimentRow, Rate};
pub use verify::SuiteOutcome;
