//! Error type shared by the geometric pipeline.

use alloc::boxed::Box;
use thiserror::Error;

use crate::expr::{EvalError, ParseError};

/// Everything that can go wrong between parsing a metric and transporting a
/// vector along a curve.
#[derive(Clone, Debug, Error, PartialEq)]
pub enum CoreError {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The Riemannian part failed the pivoted factorization check.
    #[error("alpha is not positive definite at the queried point (pivot {pivot:e})")]
    NotPositiveDefinite { pivot: f64 },

    /// `sup ||beta#||_alpha < 1` is the standard strong-convexity criterion
    /// for Randers metrics; we enforce it with a small safety margin.
    #[error("Randers convexity bound violated: ||beta#||_alpha = {norm} at the queried point")]
    ConvexityViolated { norm: f64 },

    /// `beta` vanishes at the point, so the metric degenerates to the
    /// Riemannian case there; the Levi-Civita connection of alpha is the
    /// appropriate fallback.
    #[error("beta vanishes at the queried point; use the Levi-Civita connection of alpha")]
    DegeneratePoint,

    #[error(
        "compatibility equations unsolvable: max |C_n,i| = {max_violation:e} exceeds {tolerance:e}"
    )]
    NotGeneralizedBerwald { max_violation: f64, tolerance: f64 },

    #[error("zero vector is not a valid tangent direction")]
    ZeroVector,

    #[error("empty sample list")]
    EmptySamples,

    #[error("tolerance must be positive, got {0}")]
    NonPositiveTolerance(f64),

    #[error("system has {rows} rows for {cols} unknowns; supply more sample vectors")]
    InsufficientRows { rows: usize, cols: usize },

    #[error("curve does not close: |c(1) - c(0)| = {gap:e}")]
    LoopNotClosed { gap: f64 },

    #[error("connection field evaluation failed at t = {t}: {source}")]
    Transport {
        t: f64,
        #[source]
        source: Box<CoreError>,
    },
}
