//! Slice-singularity classification for Cartesian digit IFS measures.
//!
//! For digit maps x -> (x + a)/b the images of the reduced per-coordinate
//! contraction set partition [0,1) exactly when the reduced digit set is all
//! of {0..b-1}; in that case Lebesgue measure is invariant precisely for the
//! uniform weights 1/b, and by the Kakutani dichotomy any other weight
//! vector makes the coordinate marginal singular. A non-full reduced digit
//! set leaves a Lebesgue-null attractor, which is singular outright. The
//! measure is slice singular in any variable order exactly when every
//! one-dimensional coordinate marginal is singular.

use serde::Serialize;

use crate::measure::{DigitIfs, Measure};

/// Weight equality tolerance for the Lebesgue verdict. Inputs are rationals
/// in practice, so the dichotomy is exact for exact inputs.
pub const LEBESGUE_WEIGHT_TOL: f64 = 1e-12;

/// Near-miss band: weights this close to 1/b are still classified singular
/// but flagged for attention.
pub const NEAR_MISS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoordinateVerdict {
    Singular,
    Lebesgue,
    /// Reserved for systems outside the digit-IFS partition analysis; the
    /// digit-IFS classifier itself always decides.
    Indeterminate,
}

/// Per-coordinate reduction of the contraction system.
#[derive(Debug, Clone, Serialize)]
pub struct CoordinateRecord {
    pub coord: usize,
    /// Reduced row contractions: (digit, merged weight), positive weights only.
    pub reduced: Vec<(u32, f64)>,
    /// The weight vector that would make Lebesgue measure invariant.
    pub lebesgue_candidate: Vec<f64>,
    pub verdict: CoordinateVerdict,
    /// Set when weights miss 1/b by less than `NEAR_MISS_TOL` but more than
    /// `LEBESGUE_WEIGHT_TOL`; the verdict is still singular.
    pub near_miss_warning: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub base: u32,
    pub dim: usize,
    pub coordinates: Vec<CoordinateRecord>,
    /// True iff every coordinate marginal is singular, i.e. the measure is
    /// slice singular in any variable order.
    pub overall_slice_singular: bool,
}

/// Classify each coordinate marginal of a digit IFS.
pub fn classify(m: &DigitIfs) -> ClassificationReport {
    let b = m.base();
    let uniform = 1.0 / b as f64;
    let coordinates: Vec<CoordinateRecord> = (0..m.dim())
        .map(|coord| {
            let law = m.coordinate_digit_law(coord);
            let reduced: Vec<(u32, f64)> = law
                .probs()
                .iter()
                .enumerate()
                .filter(|(_, &w)| w > 0.0)
                .map(|(d, &w)| (d as u32, w))
                .collect();
            let full = reduced.len() == b as usize;
            let max_miss = reduced
                .iter()
                .map(|&(_, w)| (w - uniform).abs())
                .fold(0.0, f64::max);
            let verdict = if full && max_miss <= LEBESGUE_WEIGHT_TOL {
                CoordinateVerdict::Lebesgue
            } else {
                CoordinateVerdict::Singular
            };
            let near_miss_warning =
                full && verdict == CoordinateVerdict::Singular && max_miss <= NEAR_MISS_TOL;
            CoordinateRecord {
                coord,
                reduced,
                lebesgue_candidate: vec![uniform; b as usize],
                verdict,
                near_miss_warning,
            }
        })
        .collect();
    let overall_slice_singular = coordinates
        .iter()
        .all(|c| c.verdict == CoordinateVerdict::Singular);
    ClassificationReport {
        base: b,
        dim: m.dim(),
        coordinates,
        overall_slice_singular,
    }
}

/// Gate used by the expansion routines: is every coordinate marginal
/// singular?
///
/// Atomic measures pass outright (purely atomic marginals are singular);
/// digit IFS measures go through `classify`; products require every factor
/// to pass.
pub fn slice_singularity_gate(m: &Measure) -> bool {
    match m {
        Measure::Atomic(_) => true,
        Measure::Digit(d) => classify(d).overall_slice_singular,
        Measure::Product(p) => p.factors().iter().all(slice_singularity_gate),
    }
}
