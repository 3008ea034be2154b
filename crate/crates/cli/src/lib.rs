//! Command-line frontend for the planner: file formats, SVG output and the
//! `seqpar` subcommands.

// NaN-rejecting comparisons are written as negations on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod format;
pub mod svg;

pub use commands::{run, Cli, CliError, Context};
pub use format::{ScenarioFile, TrajectoryFile};
