use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("transfer product collapsed to the zero matrix at step {step}")]
    DegenerateProduct { step: usize },

    #[error("|b| = {value:e} below floor {floor:e} at orbit step {step} (phase {phase})")]
    NearSingularSamplingFunction {
        step: usize,
        phase: f64,
        value: f64,
        floor: f64,
    },

    #[error("{dropped} of {total} phase samples were degenerate (limit 1%)")]
    TooManyDegenerateSamples { dropped: usize, total: usize },

    #[error("|det A_{index}| = {det} exceeds 1")]
    DeterminantTooLarge { index: usize, det: f64 },

    #[error("avalanche principle hypotheses not met: {0}")]
    HypothesesNotMet(String),

    #[error("Lyapunov exponent not positive at energies {energies:?}")]
    PositivityViolated { energies: Vec<f64> },

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

impl Error {
    /// True for failures caused by degenerate orbits or samples, as opposed to
    /// bad arguments.
    pub fn is_numerical_degeneracy(&self) -> bool {
        matches!(
            self,
            Error::DegenerateProduct { .. }
                | Error::NearSingularSamplingFunction { .. }
                | Error::TooManyDegenerateSamples { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
