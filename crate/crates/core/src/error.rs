//! Crate-wide error type and the process exit codes the CLI maps it to.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad argument, malformed config, or a violated precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Every firing strength underflowed to zero or was non-finite.
    #[error("degenerate firing strengths: {0}")]
    DegenerateFiring(String),

    /// Non-finite values where finite numbers were required.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Unregularized least squares on a rank-deficient design matrix.
    #[error("rank-deficient least-squares system: {0}")]
    RankDeficient(String),

    /// Inverse kinematics target outside the leg's reachable annulus.
    #[error("unreachable target: distance {dist} outside [{min}, {max}]")]
    Unreachable { dist: f64, min: f64, max: f64 },

    /// Dataset generation hit an infeasible gait configuration.
    #[error("gait generation failed at phase {phase}: {detail}")]
    Generation { phase: f64, detail: String },

    /// A signal name that no controller in the hierarchy produces.
    #[error("wiring error: {0}")]
    Wiring(String),

    /// Training or chain iteration produced a non-finite signal.
    #[error("divergence: {0}")]
    Divergence(String),

    /// Malformed CSV, config, or model file content.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Prefix the error's message with where it happened, keeping the
    /// variant (and therefore the exit code) intact. Variants without a
    /// free-form message pass through unchanged.
    pub fn with_context(self, context: &str) -> Error {
        match self {
            Error::InvalidArgument(m) => Error::InvalidArgument(format!("{context}: {m}")),
            Error::DegenerateFiring(m) => Error::DegenerateFiring(format!("{context}: {m}")),
            Error::Numerical(m) => Error::Numerical(format!("{context}: {m}")),
            Error::RankDeficient(m) => Error::RankDeficient(format!("{context}: {m}")),
            Error::Generation { phase, detail } => {
                Error::Generation { phase, detail: format!("{context}: {detail}") }
            }
            Error::Wiring(m) => Error::Wiring(format!("{context}: {m}")),
            Error::Divergence(m) => Error::Divergence(format!("{context}: {m}")),
            Error::Parse(m) => Error::Parse(format!("{context}: {m}")),
            other => other,
        }
    }

    /// Exit code contract: 0 success, 1 usage/validation, 2 I/O, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_)
            | Error::Wiring(_)
            | Error::Parse(_)
            | Error::Unreachable { .. }
            | Error::Generation { .. } => 1,
            Error::Io(_) => 2,
            Error::DegenerateFiring(_)
            | Error::Numerical(_)
            | Error::RankDeficient(_)
            | Error::Divergence(_) => 3,
        }
    }
}
