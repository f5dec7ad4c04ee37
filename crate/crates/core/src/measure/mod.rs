//! Measures on [0,1)^d: digit iterated function systems, atomic measures,
//! and coordinate products, together with their Fourier moments
//! `mu_hat(xi) = integral of e^{-2 pi i xi.x} d mu`, chaos-game sampling,
//! marginals, and digit-level slice disintegration.
//!
//! All values are probability measures. Every operation is a pure function
//! of immutable inputs, so concurrent use needs no synchronization.

mod config;
mod moments;
mod slice;

pub use config::{measure_from_json, measure_to_json, MeasureConfig};
pub use moments::{MomentSource, MomentTable};
pub use slice::{
    atomic_slice, conditional_digit_law, slice_law, slice_of, stationary_last_law,
    DigitDistribution, Slice, SliceContext, SliceLaw,
};

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rng;
use crate::sum;
use crate::trig::TrigPoly;

/// Weight-sum and distinctness tolerance used by all constructors.
pub const WEIGHT_TOL: f64 = 1e-12;

/// Hard cap on truncation depth for infinite-product moment evaluation.
pub const DEPTH_CAP: usize = 2048;

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// Cartesian base-b digit IFS on [0,1)^dim.
///
/// The maps are x -> (x + delta)/b for digit vectors delta in {0..b-1}^dim;
/// they are strict contractions with ratio 1/b. The invariant measure is the
/// law of sum_k delta_k b^{-k} with i.i.d. digit vectors delta_k drawn from
/// the weights. Digit vectors are deduplicated on construction (weights
/// summed) and kept in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitIfs {
    base: u32,
    dim: usize,
    digits: Vec<Vec<u32>>,
    weights: Vec<f64>,
}

impl DigitIfs {
    pub fn new(base: u32, dim: usize, digits: Vec<Vec<u32>>, weights: Vec<f64>) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidMeasure(format!("base {base} < 2")));
        }
        if dim == 0 {
            return Err(Error::InvalidMeasure("dim must be >= 1".into()));
        }
        if digits.is_empty() || digits.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "need equally many digits ({}) and weights ({})",
                digits.len(),
                weights.len()
            )));
        }
        for d in &digits {
            if d.len() != dim {
                return Err(Error::InvalidMeasure(format!(
                    "digit vector {d:?} has length {}, expected {dim}",
                    d.len()
                )));
            }
            if d.iter().any(|&v| v >= base) {
                return Err(Error::InvalidMeasure(format!(
                    "digit vector {d:?} has an entry >= base {base}"
                )));
            }
        }
        if weights.iter().any(|&w| w.is_nan() || w <= 0.0) {
            return Err(Error::InvalidMeasure("weights must be positive".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidMeasure(format!(
                "weights sum to {sum}, expected 1 within {WEIGHT_TOL}"
            )));
        }

        // Merge repeated digit vectors, then sort for a canonical layout.
        // Merged weights use compensated sums so that exactly representable
        // totals come out exact.
        let mut pairs: Vec<(Vec<u32>, f64)> = digits.into_iter().zip(weights).collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Vec<u32>, sum::Accumulator)> = Vec::with_capacity(pairs.len());
        for (d, w) in pairs {
            match merged.last_mut() {
                Some((last, acc)) if *last == d => acc.add(w),
                _ => {
                    let mut acc = sum::Accumulator::default();
                    acc.add(w);
                    merged.push((d, acc));
                }
            }
        }
        let (digits, weights) = merged.into_iter().map(|(d, a)| (d, a.value())).unzip();
        Ok(Self {
            base,
            dim,
            digits,
            weights,
        })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn digits(&self) -> &[Vec<u32>] {
        &self.digits
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// One-level character sum m(eta) = sum_delta w_delta e^{-2 pi i delta.eta}.
    pub fn level_factor(&self, eta: &[f64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (d, &w) in self.digits.iter().zip(&self.weights) {
            let phase: f64 = d
                .iter()
                .zip(eta.iter())
                .map(|(&dv, &ev)| dv as f64 * ev)
                .sum();
            acc += w * Complex64::from_polar(1.0, -TAU * phase);
        }
        acc
    }

    /// Moment by the level product `prod_k m(xi / b^k)`, truncated once the
    /// rigorous tail bound `exp(2 pi |xi|_1 b^-K) - 1` drops below `eps`.
    pub fn moment(&self, xi: &[f64], eps: f64) -> Result<(Complex64, f64)> {
        if xi.len() != self.dim {
            return Err(Error::InvalidMeasure(format!(
                "frequency vector of length {}, measure has dim {}",
                xi.len(),
                self.dim
            )));
        }
        let l1: f64 = xi.iter().map(|v| v.abs()).sum();
        if l1 == 0.0 {
            return Ok((one(), 0.0));
        }
        let b = self.base as f64;
        let mut depth = None;
        for k in 1..=DEPTH_CAP {
            let bound = (TAU * l1 * b.powi(-(k as i32))).exp_m1() + 1e-15 * (k as f64 + 1.0);
            if bound <= eps {
                depth = Some((k, bound));
                break;
            }
        }
        let (depth, bound) = depth.ok_or(Error::NonconvergentTolerance {
            needed: DEPTH_CAP + 1,
            cap: DEPTH_CAP,
        })?;
        let mut value = one();
        let mut eta: Vec<f64> = xi.to_vec();
        for _ in 1..=depth {
            for e in eta.iter_mut() {
                *e /= b;
            }
            value *= self.level_factor(&eta);
        }
        Ok((value, bound))
    }

    /// Per-coordinate digit law of the invariant measure (merged projection).
    pub fn coordinate_digit_law(&self, coord: usize) -> DigitDistribution {
        let mut law = vec![sum::Accumulator::default(); self.base as usize];
        for (d, &w) in self.digits.iter().zip(&self.weights) {
            law[d[coord] as usize].add(w);
        }
        DigitDistribution::new(self.base, law.iter().map(|a| a.value()).collect())
    }

    /// Marginal onto a coordinate subset: digits projected and merged.
    pub fn marginal(&self, keep: &[usize]) -> Result<DigitIfs> {
        check_keep(keep, self.dim)?;
        let digits: Vec<Vec<u32>> = self
            .digits
            .iter()
            .map(|d| keep.iter().map(|&i| d[i]).collect())
            .collect();
        DigitIfs::new(self.base, keep.len(), digits, self.weights.clone())
    }

    /// Apply a coordinate permutation: digit slot `i` takes the old slot `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Result<DigitIfs> {
        if perm.len() != self.dim {
            return Err(Error::InvalidMeasure("permutation length mismatch".into()));
        }
        let digits: Vec<Vec<u32>> = self
            .digits
            .iter()
            .map(|d| perm.iter().map(|&j| d[j]).collect())
            .collect();
        DigitIfs::new(self.base, self.dim, digits, self.weights.clone())
    }
}

/// Finitely supported probability measure on [0,1)^dim.
///
/// Exact-oracle workhorse: every moment is a finite sum with zero
/// truncation error, and atomic measures are singular by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    dim: usize,
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl AtomicMeasure {
    pub fn new(dim: usize, points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidMeasure("dim must be >= 1".into()));
        }
        if points.is_empty() || points.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "need equally many points ({}) and weights ({})",
                points.len(),
                weights.len()
            )));
        }
        for p in &points {
            if p.len() != dim {
                return Err(Error::InvalidMeasure(format!(
                    "atom {p:?} has length {}, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|&x| !(0.0..1.0).contains(&x)) {
                return Err(Error::InvalidMeasure(format!(
                    "atom {p:?} outside [0,1)^{dim}"
                )));
            }
        }
        if weights.iter().any(|&w| w.is_nan() || w <= 0.0) {
            return Err(Error::InvalidMeasure("weights must be positive".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidMeasure(format!(
                "weights sum to {sum}, expected 1 within {WEIGHT_TOL}"
            )));
        }

        // Merge exactly coincident atoms and sort for a canonical layout.
        let mut pairs: Vec<(Vec<f64>, f64)> = points.into_iter().zip(weights).collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("atoms are finite"));
        let mut merged: Vec<(Vec<f64>, sum::Accumulator)> = Vec::with_capacity(pairs.len());
        for (p, w) in pairs {
            match merged.last_mut() {
                Some((last, acc)) if *last == p => acc.add(w),
                _ => {
                    let mut acc = sum::Accumulator::default();
                    acc.add(w);
                    merged.push((p, acc));
                }
            }
        }
        let (points, weights) = merged.into_iter().map(|(p, a)| (p, a.value())).unzip();
        Ok(Self {
            dim,
            points,
            weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Exact finite-sum moment.
    pub fn moment(&self, xi: &[f64]) -> Result<(Complex64, f64)> {
        if xi.len() != self.dim {
            return Err(Error::InvalidMeasure(format!(
                "frequency vector of length {}, measure has dim {}",
                xi.len(),
                self.dim
            )));
        }
        if xi.iter().all(|&v| v == 0.0) {
            return Ok((one(), 0.0));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (p, &w) in self.points.iter().zip(&self.weights) {
            let phase: f64 = p.iter().zip(xi.iter()).map(|(&x, &v)| x * v).sum();
            acc += w * Complex64::from_polar(1.0, -TAU * phase);
        }
        Ok((acc, 0.0))
    }

    pub fn marginal(&self, keep: &[usize]) -> Result<AtomicMeasure> {
        check_keep(keep, self.dim)?;
        let points: Vec<Vec<f64>> = self
            .points
            .iter()
            .map(|p| keep.iter().map(|&i| p[i]).collect())
            .collect();
        AtomicMeasure::new(keep.len(), points, self.weights.clone())
    }

    /// Apply a coordinate permutation: slot `i` takes the old slot `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Result<AtomicMeasure> {
        if perm.len() != self.dim {
            return Err(Error::InvalidMeasure("permutation length mismatch".into()));
        }
        let points: Vec<Vec<f64>> = self
            .points
            .iter()
            .map(|p| perm.iter().map(|&j| p[j]).collect())
            .collect();
        AtomicMeasure::new(self.dim, points, self.weights.clone())
    }
}

/// Product of one-dimensional factor measures, one per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductMeasure {
    factors: Vec<Measure>,
}

impl ProductMeasure {
    pub fn new(factors: Vec<Measure>) -> Result<Self> {
        if factors.len() < 2 {
            return Err(Error::InvalidMeasure(
                "a product measure needs at least two factors".into(),
            ));
        }
        for f in &factors {
            if f.dim() != 1 {
                return Err(Error::InvalidMeasure(
                    "product factors must be one-dimensional".into(),
                ));
            }
            if matches!(f, Measure::Product(_)) {
                return Err(Error::InvalidMeasure(
                    "product factors cannot themselves be products".into(),
                ));
            }
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[Measure] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn moment(&self, xi: &[f64], eps: f64) -> Result<(Complex64, f64)> {
        if xi.len() != self.dim() {
            return Err(Error::InvalidMeasure(format!(
                "frequency vector of length {}, measure has dim {}",
                xi.len(),
                self.dim()
            )));
        }
        let per = eps / self.factors.len() as f64;
        let mut value = one();
        let mut err = 0.0;
        for (f, &v) in self.factors.iter().zip(xi.iter()) {
            let (m, e) = f.moment(&[v], per)?;
            value *= m;
            // factor moduli are <= 1 + per, so bounds combine additively
            err += e;
        }
        Ok((value, err))
    }
}

/// Any supported measure.
#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    Digit(DigitIfs),
    Atomic(AtomicMeasure),
    Product(ProductMeasure),
}

impl Measure {
    pub fn dim(&self) -> usize {
        match self {
            Measure::Digit(m) => m.dim(),
            Measure::Atomic(m) => m.dim(),
            Measure::Product(m) => m.dim(),
        }
    }

    /// Moment at a real frequency vector with a certified error bound.
    /// Returns exactly 1 + 0i at frequency zero.
    pub fn moment(&self, xi: &[f64], eps: f64) -> Result<(Complex64, f64)> {
        if eps.is_nan() || eps <= 0.0 {
            return Err(Error::InvalidMeasure("tolerance must be positive".into()));
        }
        match self {
            Measure::Digit(m) => m.moment(xi, eps),
            Measure::Atomic(m) => m.moment(xi),
            Measure::Product(m) => m.moment(xi, eps),
        }
    }

    /// Moment at an integer frequency vector.
    pub fn moment_int(&self, xi: &[i64], eps: f64) -> Result<(Complex64, f64)> {
        let real: Vec<f64> = xi.iter().map(|&n| n as f64).collect();
        self.moment(&real, eps)
    }

    /// Marginal measure on `keep` (a nonempty strict coordinate subset,
    /// given in increasing order).
    pub fn marginal(&self, keep: &[usize]) -> Result<Measure> {
        match self {
            Measure::Digit(m) => Ok(Measure::Digit(m.marginal(keep)?)),
            Measure::Atomic(m) => Ok(Measure::Atomic(m.marginal(keep)?)),
            Measure::Product(m) => {
                check_keep(keep, m.dim())?;
                if keep.len() == 1 {
                    Ok(m.factors()[keep[0]].clone())
                } else {
                    let factors: Vec<Measure> =
                        keep.iter().map(|&i| m.factors()[i].clone()).collect();
                    Ok(Measure::Product(ProductMeasure::new(factors)?))
                }
            }
        }
    }

    /// Apply a coordinate permutation to the measure.
    pub fn permute_coords(&self, perm: &[usize]) -> Result<Measure> {
        match self {
            Measure::Digit(m) => Ok(Measure::Digit(m.permute(perm)?)),
            Measure::Atomic(m) => Ok(Measure::Atomic(m.permute(perm)?)),
            Measure::Product(m) => {
                if perm.len() != m.dim() {
                    return Err(Error::InvalidMeasure("permutation length mismatch".into()));
                }
                let factors: Vec<Measure> = perm.iter().map(|&j| m.factors()[j].clone()).collect();
                Ok(Measure::Product(ProductMeasure::new(factors)?))
            }
        }
    }

    /// Exact L2(mu) inner product of trig polynomials:
    /// `<p, q> = sum_{v,k} p_v conj(q_k) mu_hat(k - v)`, with the accumulated
    /// moment truncation bound returned alongside.
    pub fn trig_inner(&self, p: &TrigPoly, q: &TrigPoly, eps: f64) -> Result<(Complex64, f64)> {
        if p.dim() != self.dim() || q.dim() != self.dim() {
            return Err(Error::InvalidMeasure(format!(
                "trig polynomials of dim {}/{} against measure of dim {}",
                p.dim(),
                q.dim(),
                self.dim()
            )));
        }
        let mass: f64 = p.coeff_l1() * q.coeff_l1();
        if mass == 0.0 {
            return Ok((Complex64::new(0.0, 0.0), 0.0));
        }
        let per = eps / mass;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut err = 0.0;
        for (v, cp) in p.terms() {
            for (k, cq) in q.terms() {
                let diff: Vec<i64> = k.iter().zip(v.iter()).map(|(a, b)| a - b).collect();
                let (m, e) = self.moment_int(&diff, per)?;
                acc += cp * cq.conj() * m;
                err += cp.norm() * cq.norm() * e;
            }
        }
        Ok((acc, err))
    }

    /// Squared L2(mu) norm of a trig polynomial (real part of the inner
    /// product; the imaginary part is rounding noise).
    pub fn norm_sq(&self, p: &TrigPoly, eps: f64) -> Result<(f64, f64)> {
        let (v, e) = self.trig_inner(p, p, eps)?;
        Ok((v.re, e))
    }
}

fn check_keep(keep: &[usize], dim: usize) -> Result<()> {
    if keep.is_empty() || keep.len() >= dim {
        return Err(Error::InvalidMeasure(format!(
            "keep set {keep:?} must be a nonempty strict subset of 0..{dim}"
        )));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&i| i >= dim) {
        return Err(Error::InvalidMeasure(format!(
            "keep set {keep:?} must be strictly increasing within 0..{dim}"
        )));
    }
    Ok(())
}

/// Depth-truncated chaos-game digit strings: `count` samples, each a
/// `depth x dim` digit array with i.i.d. levels. Sample `i` is a pure
/// function of `(seed, i)`.
pub fn chaos_digits(m: &DigitIfs, count: usize, depth: usize, seed: u64) -> Vec<Vec<Vec<u32>>> {
    assert!(count >= 1 && depth >= 1, "count and depth must be >= 1");
    (0..count)
        .map(|i| {
            (0..depth)
                .map(|k| {
                    let u = rng::unit(seed, i as u64, k as u64);
                    m.digits()[rng::pick_weighted(m.weights(), u)].clone()
                })
                .collect()
        })
        .collect()
}

/// Chaos-game samples of the invariant measure: each point is
/// `sum_{k=1..depth} delta_k b^{-k}` with i.i.d. digit vectors.
pub fn chaos_sample(m: &DigitIfs, count: usize, depth: usize, seed: u64) -> Vec<Vec<f64>> {
    let b = m.base() as f64;
    chaos_digits(m, count, depth, seed)
        .into_iter()
        .map(|levels| {
            let mut point = vec![0.0; m.dim()];
            let mut scale = 1.0;
            for level in &levels {
                scale /= b;
                for (c, &d) in point.iter_mut().zip(level.iter()) {
                    *c += d as f64 * scale;
                }
            }
            point
        })
        .collect()
}

#[cfg(test)]
mod tests;
