//! Smoothing B-spline fitting and arc-length parameterized evaluation.
//!
//! A demonstrated point sequence is encoded as a clamped B-spline curve
//! minimizing a weighted least-squares + curvature-penalty cost, then
//! reparameterized by arc length so the tangent has unit norm everywhere.

mod arclength;
mod bspline;
mod fit;

pub use arclength::{build_arclength_table, ArcLengthTable, PathCurve};
pub use bspline::{BSplineCurve, CurveEval};
pub use fit::{chord_length_sites, fit_smoothing_spline, fit_smoothing_spline_with, DemoSample};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SplineError {
    #[error("need at least {needed} samples for degree {degree}, got {got}")]
    TooFewSamples { needed: usize, got: usize, degree: usize },
    #[error("samples are degenerate (total chord length is zero)")]
    DegenerateSamples,
    #[error("sample timestamps must be strictly increasing (row {index})")]
    NonIncreasingTimestamps { index: usize },
    #[error("sample coordinates must be finite (row {index})")]
    NonFiniteSample { index: usize },
    #[error("weights must all be positive and match the sample count")]
    InvalidWeights,
    #[error("smoothing factor must be non-negative and finite")]
    InvalidLambda,
    #[error("invalid curve definition: {0}")]
    InvalidCurve(String),
    #[error("parameter {value} outside curve domain [{min}, {max}]")]
    OutOfDomain { value: f64, min: f64, max: f64 },
    #[error("arc length {value} outside [0, {total}]")]
    OutOfRange { value: f64, total: f64 },
    #[error("curve has zero length")]
    ZeroLengthCurve,
    #[error("normal equations are singular; samples underdetermine the control points")]
    SingularFit,
}

/// 5-point Gauss-Legendre nodes on [-1, 1].
pub(crate) const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];

/// 5-point Gauss-Legendre weights.
pub(crate) const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];
