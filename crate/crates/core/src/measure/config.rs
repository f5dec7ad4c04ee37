//! JSON measure configuration documents.
//!
//! ```json
//! {"kind": "digit_ifs", "base": 3, "dim": 2, "digits": [[0,0],[2,2]], "weights": [0.5, 0.5]}
//! {"kind": "atomic", "dim": 1, "points": [[0.0],[0.5]], "weights": [0.5, 0.5]}
//! {"kind": "product", "factors": [ ... one-dimensional configs ... ]}
//! ```
//!
//! Density-weighted products (`"kind": "density_product"`) are recognized
//! but rejected: only the plain families above are supported.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{AtomicMeasure, DigitIfs, Measure, ProductMeasure};

/// Serializable measure description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureConfig {
    DigitIfs {
        base: u32,
        dim: usize,
        digits: Vec<Vec<u32>>,
        weights: Vec<f64>,
    },
    Atomic {
        dim: usize,
        points: Vec<Vec<f64>>,
        weights: Vec<f64>,
    },
    Product {
        factors: Vec<MeasureConfig>,
    },
    /// Recognized for clearer error reporting, never constructed.
    DensityProduct {
        #[serde(default)]
        factors: Vec<MeasureConfig>,
        #[serde(default)]
        density: serde_json::Value,
    },
}

impl MeasureConfig {
    pub fn build(&self) -> Result<Measure> {
        match self {
            MeasureConfig::DigitIfs {
                base,
                dim,
                digits,
                weights,
            } => Ok(Measure::Digit(DigitIfs::new(
                *base,
                *dim,
                digits.clone(),
                weights.clone(),
            )?)),
            MeasureConfig::Atomic {
                dim,
                points,
                weights,
            } => Ok(Measure::Atomic(AtomicMeasure::new(
                *dim,
                points.clone(),
                weights.clone(),
            )?)),
            MeasureConfig::Product { factors } => {
                let factors: Result<Vec<Measure>> = factors.iter().map(|f| f.build()).collect();
                Ok(Measure::Product(ProductMeasure::new(factors?)?))
            }
            MeasureConfig::DensityProduct { .. } => Err(Error::UnsupportedMeasure(
                "density-weighted products are recognized but not supported; \
                 supply a plain digit_ifs, atomic, or product config"
                    .into(),
            )),
        }
    }

    pub fn from_measure(m: &Measure) -> Self {
        match m {
            Measure::Digit(d) => MeasureConfig::DigitIfs {
                base: d.base(),
                dim: d.dim(),
                digits: d.digits().to_vec(),
                weights: d.weights().to_vec(),
            },
            Measure::Atomic(a) => MeasureConfig::Atomic {
                dim: a.dim(),
                points: a.points().to_vec(),
                weights: a.weights().to_vec(),
            },
            Measure::Product(p) => MeasureConfig::Product {
                factors: p.factors().iter().map(Self::from_measure).collect(),
            },
        }
    }
}

/// Parse a measure from a JSON document.
pub fn measure_from_json(text: &str) -> Result<Measure> {
    let config: MeasureConfig =
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    config.build()
}

/// Serialize a measure as a JSON document.
pub fn measure_to_json(m: &Measure) -> String {
    serde_json::to_string_pretty(&MeasureConfig::from_measure(m)).expect("config serializes")
}
