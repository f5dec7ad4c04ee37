//! Trigonometric polynomials on the d-torus with integer frequency vectors.
//!
//! A `TrigPoly` is a finite sum `f(x) = sum_v c_v e^{2 pi i v.x}` over
//! `v` in Z^d. Coefficients live in a `BTreeMap` so that every iteration,
//! sum, and serialization is order-deterministic.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Finite trigonometric polynomial with frequencies in Z^dim.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    dim: usize,
    terms: BTreeMap<Vec<i64>, Complex64>,
}

impl TrigPoly {
    /// The zero polynomial in `dim` variables.
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    /// The constant polynomial `c`.
    pub fn constant(dim: usize, c: Complex64) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(vec![0; dim], c);
        p
    }

    /// The constant 1.
    pub fn one(dim: usize) -> Self {
        Self::constant(dim, Complex64::new(1.0, 0.0))
    }

    /// The exponential `e^{2 pi i v.x}`.
    pub fn exponential(freq: Vec<i64>) -> Self {
        let dim = freq.len();
        let mut p = Self::zero(dim);
        p.add_term(freq, Complex64::new(1.0, 0.0));
        p
    }

    /// Build from explicit (frequency, coefficient) pairs.
    pub fn from_terms(
        dim: usize,
        terms: impl IntoIterator<Item = (Vec<i64>, Complex64)>,
    ) -> Result<Self> {
        let mut p = Self::zero(dim);
        for (v, c) in terms {
            if v.len() != dim {
                return Err(Error::InvalidMeasure(format!(
                    "frequency vector {v:?} has length {}, expected {dim}",
                    v.len()
                )));
            }
            p.add_term(v, c);
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of stored terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Iterate terms in frequency order.
    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &Complex64)> {
        self.terms.iter()
    }

    /// Coefficient at a frequency (zero if absent).
    pub fn coeff(&self, freq: &[i64]) -> Complex64 {
        self.terms
            .get(freq)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Add `c` to the coefficient at `freq`, dropping exact-zero results.
    pub fn add_term(&mut self, freq: Vec<i64>, c: Complex64) {
        debug_assert_eq!(freq.len(), self.dim);
        let updated = self.coeff(&freq) + c;
        if updated.re == 0.0 && updated.im == 0.0 {
            self.terms.remove(&freq);
        } else {
            self.terms.insert(freq, updated);
        }
    }

    /// Pointwise evaluation at `x` in [0,1)^dim.
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        debug_assert_eq!(x.len(), self.dim);
        let mut acc = Complex64::new(0.0, 0.0);
        for (v, c) in &self.terms {
            let phase: f64 = v.iter().zip(x.iter()).map(|(&n, &xi)| n as f64 * xi).sum();
            acc += c * Complex64::from_polar(1.0, TAU * phase);
        }
        acc
    }

    /// `self + other`.
    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (v, c) in &other.terms {
            out.add_term(v.clone(), *c);
        }
        out
    }

    /// `self - other`.
    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (v, c) in &other.terms {
            out.add_term(v.clone(), -*c);
        }
        out
    }

    /// `alpha * self`.
    pub fn scale(&self, alpha: Complex64) -> Self {
        let mut out = Self::zero(self.dim);
        if alpha.re == 0.0 && alpha.im == 0.0 {
            return out;
        }
        for (v, c) in &self.terms {
            out.terms.insert(v.clone(), alpha * c);
        }
        out
    }

    /// Multiply by the exponential `e^{2 pi i shift.x}` (frequency translation).
    pub fn shift(&self, shift: &[i64]) -> Self {
        debug_assert_eq!(shift.len(), self.dim);
        let mut out = Self::zero(self.dim);
        for (v, c) in &self.terms {
            let moved: Vec<i64> = v.iter().zip(shift.iter()).map(|(a, b)| a + b).collect();
            out.terms.insert(moved, *c);
        }
        out
    }

    /// Permute the variables: term frequency `v` becomes `v[perm[i]]` at slot `i`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        debug_assert_eq!(perm.len(), self.dim);
        let mut out = Self::zero(self.dim);
        for (v, c) in &self.terms {
            let moved: Vec<i64> = perm.iter().map(|&j| v[j]).collect();
            out.add_term(moved, *c);
        }
        out
    }

    /// Tensor product of two polynomials on disjoint variable blocks.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.dim + other.dim);
        for (v, c) in &self.terms {
            for (w, d) in &other.terms {
                let mut freq = v.clone();
                freq.extend_from_slice(w);
                out.terms.insert(freq, c * d);
            }
        }
        out
    }

    /// Largest absolute frequency entry over all terms and coordinates.
    pub fn max_abs_freq(&self) -> i64 {
        self.terms
            .keys()
            .flat_map(|v| v.iter().map(|n| n.abs()))
            .max()
            .unwrap_or(0)
    }

    /// Sum of coefficient magnitudes (an L-infinity bound on the torus).
    pub fn coeff_l1(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }
}
