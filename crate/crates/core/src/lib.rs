//! Non-orthogonal Fourier expansions in L2(mu) for singular measures on
//! [0,1)^d.
//!
//! The measures handled here are digit iterated function systems, atomic
//! measures, and their coordinate products. For measures whose Rokhlin
//! slice disintegration is singular coordinate by coordinate, every
//! f in L2(mu) expands against the nonnegative-frequency exponentials
//! with coefficients read off a Kaczmarz dual system:
//!
//! ```text
//! g_0 = e_0,   g_n = e_n - sum_{k<n} <e_n, e_k> g_k,
//! ```
//!
//! generalized across dimensions through slice-conditioned dual sequences.
//! The crate computes moments, dual (auxiliary) matrices, d-indexed
//! expansion coefficients, Normalized Cauchy Transforms on the polydisk,
//! Herglotz inner functions, model-space residual diagnostics, and a
//! slice-singularity classifier, plus the batch export formats used by the
//! CLI.

// Index-heavy numeric loops intentionally mirror the matrix subscripts.
#![allow(clippy::needless_range_loop)]

pub mod canonical;
pub mod classify;
pub mod error;
pub mod expansion;
pub mod export;
pub mod kaczmarz;
pub mod measure;
pub mod rng;
pub mod sum;
pub mod transforms;
pub mod trig;
pub mod verify;

pub use error::{Error, Result};
pub use measure::{
    chaos_digits, chaos_sample, measure_from_json, measure_to_json, slice_law, slice_of,
    AtomicMeasure, DigitIfs, Measure, MomentSource, MomentTable, ProductMeasure, Slice, SliceLaw,
};
pub use trig::TrigPoly;
