//! Digit-level slice disintegration.
//!
//! Conditioning a digit IFS on the base-b digit string of its first d-1
//! coordinates leaves the last coordinate with independent digits whose
//! per-level law is the conditional digit distribution given that level's
//! conditioning digit. A `SliceLaw` stores those conditionals along a finite
//! prefix plus the stationary (prefix-independent, marginal-mixture) law
//! used for all deeper levels; its moment function is again an infinite
//! product truncated with a rigorous tail bound.
//!
//! The disintegration is realized only at digit-coded points: an explicit
//! prefix of conditioning digits stands in for the point. Points with
//! non-unique or missing codings form a null set and are not represented.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measure::{AtomicMeasure, DigitIfs, Measure, DEPTH_CAP};

/// Probability distribution over digit values {0, .., base-1}.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitDistribution {
    base: u32,
    probs: Vec<f64>,
}

impl DigitDistribution {
    pub fn new(base: u32, probs: Vec<f64>) -> Self {
        debug_assert_eq!(probs.len(), base as usize);
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        Self { base, probs }
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Character sum `sum_n p(n) e^{-2 pi i n eta}`.
    pub fn factor(&self, eta: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (n, &p) in self.probs.iter().enumerate() {
            if p != 0.0 {
                acc += p * Complex64::from_polar(1.0, -TAU * n as f64 * eta);
            }
        }
        acc
    }

    /// Mean digit value, the first-order phase of the factor near eta = 0.
    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(n, &p)| n as f64 * p)
            .sum()
    }
}

/// Conditional law of the last coordinate given a digit prefix of the others.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceLaw {
    base: u32,
    levels: Vec<DigitDistribution>,
    tail: DigitDistribution,
}

impl SliceLaw {
    pub fn new(base: u32, levels: Vec<DigitDistribution>, tail: DigitDistribution) -> Self {
        Self { base, levels, tail }
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    /// Per-level conditional distributions along the stored prefix.
    pub fn levels(&self) -> &[DigitDistribution] {
        &self.levels
    }

    /// Stationary law used beyond the stored prefix depth.
    pub fn tail(&self) -> &DigitDistribution {
        &self.tail
    }

    /// Moment of the slice measure at integer frequency `n`:
    /// `prod_k factor(levels_k, n / b^k)`, continued with the stationary
    /// tail law until the remaining factors contribute below `eps`.
    pub fn moment(&self, n: i64, eps: f64) -> Result<(Complex64, f64)> {
        if n == 0 {
            return Ok((Complex64::new(1.0, 0.0), 0.0));
        }
        let b = self.base as f64;
        let l1 = n.unsigned_abs() as f64 * (self.base - 1) as f64;
        let k0 = self.levels.len();
        let mut depth = None;
        for k in k0.max(1)..=DEPTH_CAP {
            // |factor - 1| <= 2 pi (b-1) |n| b^-k per level; geometric tail.
            let tail_l1 = TAU * l1 * b.powi(-(k as i32)) / (b - 1.0);
            let bound = tail_l1.exp_m1() + 1e-15 * (k as f64 + 1.0);
            if bound <= eps {
                depth = Some((k, bound));
                break;
            }
        }
        let (depth, bound) = depth.ok_or(Error::NonconvergentTolerance {
            needed: DEPTH_CAP + 1,
            cap: DEPTH_CAP,
        })?;
        let mut value = Complex64::new(1.0, 0.0);
        let mut scale = 1.0;
        for k in 1..=depth {
            scale /= b;
            let law = self.levels.get(k - 1).unwrap_or(&self.tail);
            value *= law.factor(n as f64 * scale);
        }
        Ok((value, bound))
    }
}

/// Conditional digit distribution of the last coordinate of `m` given the
/// projection of the digit vector onto the first dim-1 coordinates.
pub fn conditional_digit_law(m: &DigitIfs, rho: &[u32]) -> Option<DigitDistribution> {
    let d = m.dim();
    debug_assert!(d >= 2 && rho.len() == d - 1);
    let mut buckets = vec![crate::sum::Accumulator::default(); m.base() as usize];
    let mut mass = crate::sum::Accumulator::default();
    for (digit, &w) in m.digits().iter().zip(m.weights()) {
        if digit[..d - 1] == *rho {
            buckets[digit[d - 1] as usize].add(w);
            mass.add(w);
        }
    }
    let mass = mass.value();
    if mass <= 0.0 {
        return None;
    }
    let probs = buckets.iter().map(|a| a.value() / mass).collect();
    Some(DigitDistribution::new(m.base(), probs))
}

/// Stationary last-coordinate digit law: the marginal mixture of the
/// conditional laws, equal to the digit law of the last 1-dim marginal.
pub fn stationary_last_law(m: &DigitIfs) -> DigitDistribution {
    m.coordinate_digit_law(m.dim() - 1)
}

/// Rokhlin slice law of a digit IFS at a digit-coded point of the marginal,
/// given as a prefix of conditioning digit vectors (first dim-1 coordinates,
/// one per level).
pub fn slice_law(m: &DigitIfs, prefix: &[Vec<u32>]) -> Result<SliceLaw> {
    if m.dim() < 2 {
        return Err(Error::DimensionTooSmall {
            got: m.dim(),
            need: 2,
        });
    }
    let mut levels = Vec::with_capacity(prefix.len());
    for (k, rho) in prefix.iter().enumerate() {
        if rho.len() != m.dim() - 1 {
            return Err(Error::PrefixOutsideSupport {
                level: k + 1,
                digit: rho.clone(),
            });
        }
        let law = conditional_digit_law(m, rho).ok_or(Error::PrefixOutsideSupport {
            level: k + 1,
            digit: rho.clone(),
        })?;
        levels.push(law);
    }
    Ok(SliceLaw::new(m.base(), levels, stationary_last_law(m)))
}

/// A slice measure: a digit-level law, or an exactly representable measure.
#[derive(Debug, Clone, PartialEq)]
pub enum Slice {
    Law(SliceLaw),
    Exact(Measure),
}

impl Slice {
    /// Moment of the slice at integer frequency `n`.
    pub fn moment(&self, n: i64, eps: f64) -> Result<(Complex64, f64)> {
        match self {
            Slice::Law(law) => law.moment(n, eps),
            Slice::Exact(m) => m.moment_int(&[n], eps),
        }
    }
}

/// Context selecting one slice of a measure.
#[derive(Debug, Clone, PartialEq)]
pub enum SliceContext {
    /// Digit prefix of the first dim-1 coordinates (digit IFS).
    DigitPrefix(Vec<Vec<u32>>),
    /// Index into the canonical marginal atom list (atomic measures).
    MarginalAtom(usize),
    /// Products: the slice does not depend on the conditioning point.
    Any,
}

/// Last-coordinate slice of `m` in the given context.
pub fn slice_of(m: &Measure, ctx: &SliceContext) -> Result<Slice> {
    if m.dim() < 2 {
        return Err(Error::DimensionTooSmall {
            got: m.dim(),
            need: 2,
        });
    }
    match (m, ctx) {
        (Measure::Digit(d), SliceContext::DigitPrefix(prefix)) => {
            Ok(Slice::Law(slice_law(d, prefix)?))
        }
        (Measure::Product(p), _) => Ok(Slice::Exact(
            p.factors().last().expect("nonempty product").clone(),
        )),
        (Measure::Atomic(a), SliceContext::MarginalAtom(idx)) => {
            Ok(Slice::Exact(Measure::Atomic(atomic_slice(a, *idx)?)))
        }
        _ => Err(Error::UnsupportedMeasure(
            "slice context does not match the measure kind".into(),
        )),
    }
}

/// Conditional atomic measure of the last coordinate over the fiber of the
/// `idx`-th marginal atom.
pub fn atomic_slice(a: &AtomicMeasure, idx: usize) -> Result<AtomicMeasure> {
    let d = a.dim();
    let keep: Vec<usize> = (0..d - 1).collect();
    let marginal = a.marginal(&keep)?;
    let base = marginal
        .points()
        .get(idx)
        .ok_or_else(|| Error::InvalidMeasure(format!("marginal atom index {idx} out of range")))?;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut mass = 0.0;
    for (p, &w) in a.points().iter().zip(a.weights()) {
        if p[..d - 1] == base[..] {
            points.push(vec![p[d - 1]]);
            weights.push(w);
            mass += w;
        }
    }
    for w in weights.iter_mut() {
        *w /= mass;
    }
    AtomicMeasure::new(1, points, weights)
}
