//! Library side of the `qpjacobi` command-line tool: configuration parsing
//! and the command implementations, kept separate from argument handling so
//! they can be tested directly.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Parse(#[from] config::ConfigError),
    #[error(transparent)]
    Numerics(qpjacobi::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 config/validation, 3 numerical degeneracy, 4 positivity violation,
    /// 5 AP determinant violation.
    pub fn exit_code(&self) -> i32 {
        use qpjacobi::Error as E;
        match self {
            CliError::Config(_) | CliError::Parse(_) | CliError::Io { .. } => 2,
            CliError::Numerics(e) if e.is_numerical_degeneracy() => 3,
            CliError::Numerics(E::PositivityViolated { .. }) => 4,
            CliError::Numerics(E::DeterminantTooLarge { .. }) => 5,
            CliError::Numerics(_) => 2,
        }
    }
}
