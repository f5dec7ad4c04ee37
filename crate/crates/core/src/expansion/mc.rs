//! Monte Carlo quadrature over the marginal.
//!
//! The innermost coordinate is always integrated exactly through slice
//! moments; the remaining integral over the (d-1)-dimensional marginal is
//! estimated by chaos-game samples:
//!
//! ```text
//! c_{n_1..n_d}  ~=  (1/S) sum_s  <f(X_s, .), g^{X_s}_{n_d}>_slice
//!                              * conj( g^{X_s..}_{n_{d-1}} ... g_{n_1} )(X_s)
//! ```
//!
//! Sampling is counter-based per (seed, sample index), and samples are
//! accumulated in fixed blocks, so the estimate is bit-identical for any
//! worker count. Per-entry standard errors are estimated from the sample
//! variance.

use std::collections::HashMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expansion::{stage, CoeffTensor, QuadratureMeta};
use crate::kaczmarz::{aux_matrix, AuxMatrix, MOMENT_EPS};
use crate::measure::{
    atomic_slice, stationary_last_law, DigitDistribution, DigitIfs, Measure, MomentTable, SliceLaw,
};
use crate::rng;
use crate::trig::TrigPoly;

/// Digit depth sampled per coordinate (resolves positions to ~1e-13).
const SAMPLE_DEPTH: usize = 40;

/// Conditioning depth for memoized slice dual matrices. Deeper levels use
/// the stationary law; their influence is far below Monte Carlo noise.
const CONDITION_DEPTH: usize = 16;

/// Samples per accumulation block (fixed, for thread-count determinism).
const BLOCK: usize = 1024;

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

struct SamplePoint {
    positions: Vec<f64>,
    /// Digit rows per level (digit IFS marginals only).
    digit_levels: Option<Vec<Vec<u32>>>,
}

fn draw(m: &Measure, seed: u64, index: u64) -> SamplePoint {
    match m {
        Measure::Digit(d) => {
            let b = d.base() as f64;
            let mut levels = Vec::with_capacity(SAMPLE_DEPTH);
            let mut positions = vec![0.0; d.dim()];
            let mut scale = 1.0;
            for k in 0..SAMPLE_DEPTH {
                let u = rng::unit(seed, index, k as u64);
                let digit = d.digits()[rng::pick_weighted(d.weights(), u)].clone();
                scale /= b;
                for (p, &dv) in positions.iter_mut().zip(digit.iter()) {
                    *p += dv as f64 * scale;
                }
                levels.push(digit);
            }
            SamplePoint {
                positions,
                digit_levels: Some(levels),
            }
        }
        Measure::Atomic(a) => {
            let u = rng::unit(seed, index, 0);
            let atom = rng::pick_weighted(a.weights(), u);
            SamplePoint {
                positions: a.points()[atom].clone(),
                digit_levels: None,
            }
        }
        Measure::Product(p) => {
            let mut positions = Vec::with_capacity(p.dim());
            for (c, factor) in p.factors().iter().enumerate() {
                let offset = (c as u64 + 1) << 8;
                match factor {
                    Measure::Digit(d) => {
                        let b = d.base() as f64;
                        let mut x = 0.0;
                        let mut scale = 1.0;
                        for k in 0..SAMPLE_DEPTH {
                            let u = rng::unit(seed, index, offset + k as u64);
                            let digit = &d.digits()[rng::pick_weighted(d.weights(), u)];
                            scale /= b;
                            x += digit[0] as f64 * scale;
                        }
                        positions.push(x);
                    }
                    Measure::Atomic(a) => {
                        let u = rng::unit(seed, index, offset);
                        positions.push(a.points()[rng::pick_weighted(a.weights(), u)][0]);
                    }
                    Measure::Product(_) => unreachable!("factors are one-dimensional"),
                }
            }
            SamplePoint {
                positions,
                digit_levels: None,
            }
        }
    }
}

/// Slice machinery for one marginal level.
enum LevelSlicer {
    /// Conditioning digit classes of a digit IFS level.
    Digit {
        measure: DigitIfs,
        conditioning_digits: Vec<Vec<u32>>,
        sl_class: Vec<u8>,
        sl_reps: Vec<DigitDistribution>,
        stationary: DigitDistribution,
    },
    /// Prefix-independent slice (products) with precomputed dual data.
    Fixed(AuxMatrix, MomentTable),
    /// One fiber per marginal atom.
    Atomic {
        marginal_points: Vec<Vec<f64>>,
        fibers: Vec<(AuxMatrix, MomentTable)>,
    },
}

impl LevelSlicer {
    fn build(m: &Measure, order: usize, table_range: usize) -> Result<Self> {
        match m {
            Measure::Digit(d) => {
                let trivial = vec![0usize; d.digits().len()];
                let peel = stage::digit_peel(d, &trivial)?;
                let sl_of_digit = peel
                    .class_of_digit
                    .iter()
                    .map(|&c| peel.sl_of_class[c] as u8)
                    .collect();
                Ok(LevelSlicer::Digit {
                    measure: d.clone(),
                    conditioning_digits: peel.marginal.digits().to_vec(),
                    sl_class: sl_of_digit,
                    sl_reps: peel.sl_reps,
                    stationary: stationary_last_law(d),
                })
            }
            Measure::Product(p) => {
                let last = p.factors().last().expect("nonempty").clone();
                let table = MomentTable::build(&last, table_range, MOMENT_EPS)?;
                let aux = aux_matrix(&table, order)?;
                Ok(LevelSlicer::Fixed(aux, table))
            }
            Measure::Atomic(a) => {
                let keep: Vec<usize> = (0..a.dim() - 1).collect();
                let marg = a.marginal(&keep)?;
                let fibers = (0..marg.points().len())
                    .map(|u| {
                        let fiber = Measure::Atomic(atomic_slice(a, u)?);
                        let table = MomentTable::build(&fiber, table_range, MOMENT_EPS)?;
                        let aux = aux_matrix(&table, order)?;
                        Ok((aux, table))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(LevelSlicer::Atomic {
                    marginal_points: marg.points().to_vec(),
                    fibers,
                })
            }
        }
    }

    /// Memo key of the sample's conditioning context.
    fn key(&self, coords: usize, sample: &SamplePoint) -> Result<Vec<u8>> {
        match self {
            LevelSlicer::Fixed(..) => Ok(Vec::new()),
            LevelSlicer::Digit {
                conditioning_digits,
                sl_class,
                ..
            } => {
                let levels = sample
                    .digit_levels
                    .as_ref()
                    .expect("digit marginals carry digits");
                let mut key = Vec::with_capacity(CONDITION_DEPTH);
                for level in levels.iter().take(CONDITION_DEPTH) {
                    let rho: Vec<u32> = level[..coords].to_vec();
                    let idx = conditioning_digits.binary_search(&rho).map_err(|_| {
                        Error::PrefixOutsideSupport {
                            level: key.len() + 1,
                            digit: rho.clone(),
                        }
                    })?;
                    key.push(sl_class[idx]);
                }
                Ok(key)
            }
            LevelSlicer::Atomic {
                marginal_points, ..
            } => {
                let proj: Vec<f64> = sample.positions[..coords].to_vec();
                let idx = marginal_points
                    .binary_search_by(|p| p.partial_cmp(&proj).expect("finite"))
                    .map_err(|_| Error::InvalidMeasure("sample off the atom set".into()))?;
                Ok(vec![idx as u8, (idx >> 8) as u8])
            }
        }
    }

    /// Dual matrix and slice moments for a memo key.
    fn realize(
        &self,
        key: &[u8],
        order: usize,
        table_range: usize,
    ) -> Result<(AuxMatrix, MomentTable)> {
        match self {
            LevelSlicer::Fixed(aux, table) => Ok((aux.clone(), table.clone())),
            LevelSlicer::Digit {
                measure,
                sl_reps,
                stationary,
                ..
            } => {
                let levels: Vec<DigitDistribution> =
                    key.iter().map(|&s| sl_reps[s as usize].clone()).collect();
                let law = SliceLaw::new(measure.base(), levels, stationary.clone());
                let table = MomentTable::build(&law, table_range, MOMENT_EPS)?;
                let aux = aux_matrix(&table, order)?;
                Ok((aux, table))
            }
            LevelSlicer::Atomic { fibers, .. } => {
                let idx = key[0] as usize | ((key[1] as usize) << 8);
                let (aux, table) = &fibers[idx];
                Ok((aux.clone(), table.clone()))
            }
        }
    }
}

pub(crate) fn analyze_mc(
    m: &Measure,
    f: &TrigPoly,
    orders: &[usize],
    samples: usize,
    seed: u64,
) -> Result<CoeffTensor> {
    let d = m.dim();
    debug_assert!(d >= 2);

    // Marginal chain: margs[r] has dimension r.
    let mut margs: Vec<Measure> = vec![m.clone(); d + 1];
    for r in (1..d).rev() {
        let keep: Vec<usize> = (0..r).collect();
        margs[r] = margs[r + 1].marginal(&keep)?;
    }

    let max_last_freq = f.terms().map(|(v, _)| v[d - 1].abs()).max().unwrap_or(0) as usize;
    let inner_range = orders[d - 1] + max_last_freq;

    // Slicers: levels 2..=d condition on sample prefixes; level 1 is fixed.
    let slicers: Vec<LevelSlicer> = (2..=d)
        .map(|r| {
            let range = if r == d { inner_range } else { orders[r - 1] };
            LevelSlicer::build(&margs[r], orders[r - 1], range)
        })
        .collect::<Result<_>>()?;
    let base_table = MomentTable::build(&margs[1], orders[0], MOMENT_EPS)?;
    let base_aux = aux_matrix(&base_table, orders[0])?;

    let flat_len: usize = orders.iter().map(|n| n + 1).product();
    let f_terms: Vec<(Vec<i64>, Complex64)> = f.terms().map(|(v, c)| (v.clone(), *c)).collect();

    let blocks = samples.div_ceil(BLOCK);
    let partials: Vec<Result<(Vec<Complex64>, Vec<f64>)>> = (0..blocks)
        .into_par_iter()
        .map(|blk| {
            let lo = blk * BLOCK;
            let hi = ((blk + 1) * BLOCK).min(samples);
            let mut sums = vec![czero(); flat_len];
            let mut sumsq = vec![0.0f64; flat_len];
            let mut memo: HashMap<(usize, Vec<u8>), (AuxMatrix, MomentTable)> = HashMap::new();
            let mut value = vec![czero(); flat_len];

            for i in lo..hi {
                let sample = draw(&margs[d - 1], seed, i as u64);

                // Inner exact integral over the last coordinate.
                let slicer_d = &slicers[d - 2];
                let key = slicer_d.key(d - 1, &sample)?;
                let (aux_d, table_d) = match memo.entry((d, key)) {
                    std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
                    std::collections::hash_map::Entry::Vacant(v) => {
                        let realized =
                            slicer_d.realize(v.key().1.as_slice(), orders[d - 1], inner_range)?;
                        v.insert(realized)
                    }
                };
                let mut inner = vec![czero(); orders[d - 1] + 1];
                for (freq, coef) in &f_terms {
                    let phase: f64 = freq[..d - 1]
                        .iter()
                        .zip(&sample.positions)
                        .map(|(&n, &x)| n as f64 * x)
                        .sum();
                    let outer = coef * Complex64::from_polar(1.0, TAU * phase);
                    for (n, slot) in inner.iter_mut().enumerate() {
                        let mut acc = czero();
                        for j in 0..=n {
                            acc +=
                                aux_d.entry(n, j).conj() * table_d.get(j as i64 - freq[d - 1])?;
                        }
                        *slot += outer * acc;
                    }
                }

                // Outer dual factors, conjugated.
                let mut gvals: Vec<Vec<Complex64>> = Vec::with_capacity(d - 1);
                for r in 1..d {
                    let x = sample.positions[r - 1];
                    let aux_r: &AuxMatrix = if r == 1 {
                        &base_aux
                    } else {
                        let slicer = &slicers[r - 2];
                        let key = slicer.key(r - 1, &sample)?;
                        match memo.entry((r, key)) {
                            std::collections::hash_map::Entry::Occupied(e) => &e.into_mut().0,
                            std::collections::hash_map::Entry::Vacant(v) => {
                                let realized = slicer.realize(
                                    v.key().1.as_slice(),
                                    orders[r - 1],
                                    orders[r - 1],
                                )?;
                                &v.insert(realized).0
                            }
                        }
                    };
                    let vals: Vec<Complex64> = (0..=orders[r - 1])
                        .map(|n| {
                            let mut acc = czero();
                            for j in 0..=n {
                                acc += aux_r.entry(n, j)
                                    * Complex64::from_polar(1.0, TAU * j as f64 * x);
                            }
                            acc.conj()
                        })
                        .collect();
                    gvals.push(vals);
                }

                // Tensor of per-sample values.
                let mut idx = vec![0usize; d];
                for (flat, v) in value.iter_mut().enumerate() {
                    let mut acc = inner[idx[d - 1]];
                    for r in 0..d - 1 {
                        acc *= gvals[r][idx[r]];
                    }
                    *v = acc;
                    // advance mixed-radix counter, last index fastest
                    for pos in (0..d).rev() {
                        idx[pos] += 1;
                        if idx[pos] <= orders[pos] {
                            break;
                        }
                        idx[pos] = 0;
                    }
                    let _ = flat;
                }
                for (flat, v) in value.iter().enumerate() {
                    sums[flat] += v;
                    sumsq[flat] += v.norm_sqr();
                }
            }
            Ok((sums, sumsq))
        })
        .collect();

    let mut sums = vec![czero(); flat_len];
    let mut sumsq = vec![0.0f64; flat_len];
    for partial in partials {
        let (s, q) = partial?;
        for (acc, v) in sums.iter_mut().zip(s) {
            *acc += v;
        }
        for (acc, v) in sumsq.iter_mut().zip(q) {
            *acc += v;
        }
    }

    let s = samples as f64;
    let data: Vec<Complex64> = sums.iter().map(|v| v / s).collect();
    let se: Vec<f64> = sums
        .iter()
        .zip(&sumsq)
        .map(|(sum, &sq)| {
            if samples < 2 {
                return f64::INFINITY;
            }
            let mean_sq = sum.norm_sqr() / (s * s);
            let var = ((sq / s) - mean_sq).max(0.0) * s / (s - 1.0);
            (var / s).sqrt()
        })
        .collect();
    let worst = se.iter().cloned().fold(0.0, f64::max);

    let meta = QuadratureMeta {
        mode: "monte_carlo",
        depth: None,
        samples: Some(samples),
        seed,
        error_estimate: 3.0 * worst,
        coeff_se: Some(se),
    };
    Ok(CoeffTensor::new(orders.to_vec(), data, meta))
}
