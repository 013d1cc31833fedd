//! Configuration, validation and report emission for the `tracestab` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod report;
pub mod run;

pub use config::{CommandKind, Format, Params, RunConfig, SweepArg, WeightArg};
pub use report::{Check, Report, CHECK_IDS};
pub use run::{execute, validate, RunError};
