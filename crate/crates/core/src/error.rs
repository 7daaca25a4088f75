//! Error types shared across the crate.
//!
//! Numeric payloads are carried as `f64` regardless of the working scalar
//! type so the error enum stays non-generic.

use thiserror::Error;

/// Errors produced by configuration validation, the physics layer, the
/// solvers, and the experiment harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// One or more configuration fields violate their bounds. Every violated
    /// field is listed, not just the first.
    #[error("invalid configuration: {}", violations.join("; "))]
    ConfigInvalid { violations: Vec<String> },

    /// Compression-ratio lookup with a ratio that is not a table row.
    /// Ratios are matched exactly; there is no interpolation.
    #[error("compression ratio {lambda} is not in the profile table")]
    UnknownRatio { lambda: f64 },

    /// A participating device was given a zero bandwidth share, which would
    /// make its transmission delay infinite.
    #[error("device {device} participates but has zero bandwidth share")]
    ZeroBandwidth { device: usize },

    /// The bandwidth-demand function was evaluated at or below some
    /// participant's compute time, where it is singular.
    #[error("latency {t} does not exceed the compute time {t_comp} of device {device}")]
    BracketViolation { t: f64, t_comp: f64, device: usize },

    /// Bisection failed to reach the residual tolerance within the iteration
    /// budget.
    #[error("bisection did not converge within {max_iter} iterations (residual {residual})")]
    NoConvergence { max_iter: u32, residual: f64 },

    /// Exhaustive decision search was asked to enumerate more devices than
    /// the configured threshold allows.
    #[error("{devices} devices exceed the exhaustive-search threshold {threshold}")]
    TooManyDevices { devices: usize, threshold: usize },

    /// The grid oracle only enumerates the bandwidth simplex for up to three
    /// participants.
    #[error("grid oracle supports at most 3 participants, got {0}")]
    TooManyParticipants(usize),

    /// The grid oracle's step size is outside its supported range.
    #[error("grid step {0} is outside [1e-4, 1e-2]")]
    InvalidGridStep(f64),

    /// A solver was invoked with an empty participant set where at least one
    /// participant is required.
    #[error("operation requires at least one participating device")]
    NoParticipants,

    /// Normalization over an empty record set.
    #[error("cannot normalize an empty sweep")]
    EmptySweep,

    /// Efficiency is undefined at zero cost.
    #[error("efficiency is undefined for zero system cost")]
    ZeroCost,

    /// A config file, profile CSV, or flag value failed to parse.
    #[error("parse error: {0}")]
    Parse(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
