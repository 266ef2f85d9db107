//! Command-line front end for `dampo-core`.
//!
//! Exit codes: 0 on success, 1 when the physics check fails (positivity,
//! validation, oracle deviation beyond its bound), 2 for usage or
//! configuration errors.

// Negated comparisons such as `!(x > 0.0)` are used on purpose: they also
// reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod config;
pub mod figures;
pub mod model;
pub mod svg;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unreadable or inconsistent configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// The requested model is unphysical or a check failed.
    #[error("physics check failed: {0}")]
    Physics(String),
    #[error(transparent)]
    Core(#[from] dampo_core::Error),
    #[error("output error: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Output(_) => 2,
            CliError::Physics(_) | CliError::Core(_) => 1,
        }
    }
}
