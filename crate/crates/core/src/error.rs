use std::io;

use thiserror::Error;

/// Errors raised by the simulation engine and the oracles.
#[derive(Debug, Error)]
pub enum ModelError {
    /// Routing probabilities no longer sum to one, so a register or the
    /// learning vector left its admissible set.
    #[error("model integrity violated: |w|^2 + |z|^2 = {total} (expected 1)")]
    Integrity { total: f64 },
    #[error("wrong-association rate {0} outside [0, 1]")]
    RateOutOfRange(f64),
    #[error("photons per setting change must be at least 1, got {0}")]
    InvalidBlockLength(u64),
    #[error("learning parameter alpha = {0} outside (0, 1)")]
    InvalidAlpha(f64),
}

/// Errors raised while fitting or inverting measured frequency curves.
#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("need at least 4 distinct phase points spanning at least pi, got {distinct} points")]
    InsufficientCoverage { distinct: usize },
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("fitted offset C = {0} is not positive; data is nonphysical")]
    NonPhysical(f64),
    #[error("wrong-association rate is not identifiable when sin(delta) = 0 and psi != 0")]
    Unidentifiable,
    #[error("inferred rate E = {e} is inconsistent with both models")]
    Inconsistent { e: f64 },
}

/// Errors from configuration, file formats and experiment orchestration.
#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: both detectors fired (coincidence violates single-particle data)")]
    Coincidence { line: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}
