//! Command-line front end for `diamondperc`: graph generation, detection,
//! scoring and the experiment runners.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod error;
pub mod experiment;
pub mod rule;

pub use commands::{run, Cli};
pub use error::CliError;
pub use experiment::{Experiment, ExperimentConfig, ExperimentKind, ExperimentOutput, SummaryRow, TrialRow};
pub use rule::Rule;
