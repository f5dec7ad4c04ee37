//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by measure construction and the numeric operations.
#[derive(Debug, Error)]
pub enum Error {
    /// Measure data failed validation (weights, digits, dimensions, atoms).
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    /// A config document was recognized but is outside the supported families.
    #[error("unsupported measure: {0}")]
    UnsupportedMeasure(String),

    /// The truncation depth needed for the requested tolerance exceeds the cap.
    #[error("nonconvergent tolerance: need depth {needed} > cap {cap}")]
    NonconvergentTolerance { needed: usize, cap: usize },

    /// A conditioning digit prefix leaves the support of the marginal digit set.
    #[error("prefix outside support at level {level}: digit {digit:?}")]
    PrefixOutsideSupport { level: usize, digit: Vec<u32> },

    /// A moment table was asked for a frequency it does not hold.
    #[error("missing moment at frequency {0}")]
    MissingMoment(i64),

    /// Operation requires dimension >= 2.
    #[error("dimension too small: got {got}, need at least {need}")]
    DimensionTooSmall { got: usize, need: usize },

    /// Quadrature sample or prefix budget exceeded.
    #[error("quadrature budget exceeded: {0}")]
    QuadratureBudgetExceeded(String),

    /// Disk evaluation point outside the allowed radius.
    #[error("point outside disk: |w| = {modulus} > {max}")]
    PointOutsideDisk { modulus: f64, max: f64 },

    /// Power-series reciprocal with vanishing constant term.
    #[error("singular reciprocal: constant term {0} too close to zero")]
    SingularReciprocal(f64),

    /// Requested radius cannot be certified at the given truncation orders.
    #[error("radius too close to one: tail bound {tail} exceeds tolerance {tol} at r = {radius}")]
    RadiusTooCloseToOne { radius: f64, tail: f64, tol: f64 },

    /// Measure is not invariant under the coordinate swap.
    #[error("measure is not symmetric under coordinate swap")]
    NotSymmetric,

    /// Config document could not be parsed.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
