//! Crate-wide error type with the exit-code contract used by the CLI.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("coupling is subcritical (alpha = {alpha}): the decay ladder requires alpha > 1/4")]
    Subcritical { alpha: f64 },

    #[error("coupling is critical (alpha = 1/4): the ladder spacing degenerates, spectrum computation unsupported")]
    Critical,

    #[error("log-gamma pole at non-positive integer z = {0}")]
    GammaPole(f64),

    #[error("overflow in {0}")]
    Overflow(String),

    #[error("catastrophic cancellation: {0}")]
    Cancellation(String),

    #[error("function magnitude dipped below floor on the contour boundary (min |f| = {min_abs:.3e})")]
    BoundaryZero { min_abs: f64 },

    #[error("did not converge: {0}")]
    NonConvergence(String),

    #[error("subdivision exceeded maximum depth ({0} levels)")]
    MaxDepth(usize),

    #[error("ladder gap: {0}")]
    LadderGap(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("ill-conditioned problem: {0}")]
    IllConditioned(String),

    #[error("step size underflow during integration at r = {0:.6e}")]
    StepUnderflow(f64),

    #[error("evolution unstable: field grew beyond threshold at t = {onset:.4}")]
    Instability { onset: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code: 0 success, 1 usage/config, 2 physics domain, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParams(_) | Error::Config(_) | Error::Io(_) | Error::Json(_) => 1,
            Error::Subcritical { .. } | Error::Critical | Error::Domain(_) => 2,
            _ => 3,
        }
    }
}
