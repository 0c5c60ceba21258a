//! Crate-wide error type.

use thiserror::Error;

/// Errors produced while loading data, validating configuration, evaluating
/// path geometry, or integrating the dynamics.
#[derive(Debug, Error)]
pub enum Error {
    /// Underlying I/O failure while reading a dataset or writing outputs.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A centerline row (or header) could not be parsed. `line` is 1-based
    /// and counts every line of the input, including the header.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// The input geometry violates a structural invariant (too few points,
    /// coincident consecutive waypoints, non-positive radii, ...).
    #[error("invalid geometry: {0}")]
    Geometry(String),

    /// A path-distance query fell outside the spline domain; the spline
    /// never extrapolates.
    #[error("path distance {s} outside domain [{a}, {b}]")]
    OutOfDomain { s: f64, a: f64, b: f64 },

    /// The tangent magnitude fell below the degenerate-speed threshold, so
    /// curvature (which divides by speed cubed) is undefined there.
    #[error("singular curvature at s = {s}: tangent speed {speed:e} below threshold")]
    SingularCurvature { s: f64, speed: f64 },

    /// A configuration value failed validation. The message names the
    /// offending field.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// The integrator produced a non-finite force or state; the run aborts
    /// with this diagnostic instead of emitting garbage.
    #[error("numerical blowup at t = {t}: {msg}")]
    NumericalBlowup { t: f64, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
