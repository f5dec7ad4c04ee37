//! Cached one-dimensional moment tables.
//!
//! A `MomentTable` holds `mu_hat(n)` for `|n| <= n_max` together with a
//! per-entry truncation bound. Tables are immutable after construction;
//! rebuilding one is idempotent, so concurrent fills behave as if absent.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measure::{Measure, SliceLaw};

/// Anything that can produce one-dimensional integer moments.
pub trait MomentSource {
    fn moment_at(&self, n: i64, eps: f64) -> Result<(Complex64, f64)>;
    /// Short label recorded in tables for provenance.
    fn describe(&self) -> String;
}

impl MomentSource for Measure {
    fn moment_at(&self, n: i64, eps: f64) -> Result<(Complex64, f64)> {
        if self.dim() != 1 {
            return Err(Error::InvalidMeasure(
                "moment table sources must be one-dimensional".into(),
            ));
        }
        self.moment_int(&[n], eps)
    }

    fn describe(&self) -> String {
        match self {
            Measure::Digit(m) => {
                format!("digit_ifs(base={}, digits={})", m.base(), m.digits().len())
            }
            Measure::Atomic(m) => format!("atomic({} atoms)", m.points().len()),
            Measure::Product(_) => "product".into(),
        }
    }
}

impl MomentSource for SliceLaw {
    fn moment_at(&self, n: i64, eps: f64) -> Result<(Complex64, f64)> {
        self.moment(n, eps)
    }

    fn describe(&self) -> String {
        format!(
            "slice_law(base={}, prefix={})",
            self.base(),
            self.levels().len()
        )
    }
}

/// Dense table of `mu_hat(n)`, `|n| <= n_max`, with truncation bounds.
#[derive(Debug, Clone)]
pub struct MomentTable {
    source: String,
    n_max: usize,
    values: Vec<Complex64>,
    bounds: Vec<f64>,
}

impl MomentTable {
    /// Evaluate the source at every frequency in the symmetric box.
    pub fn build(source: &impl MomentSource, n_max: usize, eps: f64) -> Result<Self> {
        if eps.is_nan() || eps <= 0.0 {
            return Err(Error::InvalidMeasure("tolerance must be positive".into()));
        }
        let size = 2 * n_max + 1;
        let mut values = Vec::with_capacity(size);
        let mut bounds = Vec::with_capacity(size);
        for i in 0..size {
            let n = i as i64 - n_max as i64;
            let (v, e) = source.moment_at(n, eps)?;
            values.push(v);
            bounds.push(e);
        }
        Ok(Self {
            source: source.describe(),
            n_max,
            values,
            bounds,
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Moment at `n`, or `MissingMoment` outside the stored range.
    pub fn get(&self, n: i64) -> Result<Complex64> {
        self.index(n).map(|i| self.values[i])
    }

    /// Truncation bound recorded for frequency `n`.
    pub fn bound(&self, n: i64) -> Result<f64> {
        self.index(n).map(|i| self.bounds[i])
    }

    fn index(&self, n: i64) -> Result<usize> {
        let shifted = n + self.n_max as i64;
        if shifted < 0 || shifted >= self.values.len() as i64 {
            return Err(Error::MissingMoment(n));
        }
        Ok(shifted as usize)
    }

    /// Largest stored truncation bound.
    pub fn max_bound(&self) -> f64 {
        self.bounds.iter().cloned().fold(0.0, f64::max)
    }
}
