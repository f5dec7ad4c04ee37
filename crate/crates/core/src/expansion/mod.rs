//! d-indexed expansion coefficients and partial-sum reconstruction.
//!
//! For a slice-singular (or atomic) measure, the coefficient of the
//! multi-index (n_1, .., n_d) is the inner product of f with the product
//! frame function built from nested slice dual sequences,
//!
//! ```text
//! c_{n_1..n_d} = < f, g^{x_1..x_{d-1}}_{n_d} ... g^{x_1}_{n_2} g_{n_1} >,
//! ```
//!
//! computed innermost coordinate first: the last coordinate is integrated
//! exactly through slice moments, and the remaining integrals run either
//! over enumerated digit-prefix classes (prefix-exact quadrature) or by a
//! chaos-game Monte Carlo over the marginal. The map f -> {c} is linear and
//! an isometry onto its coefficient space in the limit of all orders, so
//! partial coefficient energy never exceeds the squared norm.

mod mc;
pub(crate) mod stage;

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::classify::slice_singularity_gate;
use crate::error::{Error, Result};
use crate::kaczmarz::{aux_matrix, dual_coefficients, MOMENT_EPS};
use crate::measure::{Measure, MomentTable};
use crate::trig::TrigPoly;

use stage::CylinderPoly;

/// Default digit depth for prefix-exact quadrature.
pub const DEFAULT_PREFIX_DEPTH: usize = 12;

/// Quadrature driving the marginal integrals of `analyze`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureSpec {
    /// Enumerate digit-prefix classes to the given depth; deterministic,
    /// with a computable truncation estimate. Exact for atomic measures and
    /// products regardless of depth.
    PrefixExact { depth: usize },
    /// Chaos-game sampling over the marginal with counter-based randomness;
    /// deterministic given the seed, independent of thread count.
    MonteCarlo { samples: usize, seed: u64 },
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec::PrefixExact {
            depth: DEFAULT_PREFIX_DEPTH,
        }
    }
}

/// Provenance and error metadata attached to a coefficient tensor.
#[derive(Debug, Clone, Serialize)]
pub struct QuadratureMeta {
    pub mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    pub seed: u64,
    /// Estimated coefficient error: conditioning-truncation spread for
    /// prefix-exact mode, three standard errors of the worst entry for
    /// Monte Carlo.
    pub error_estimate: f64,
    /// Per-entry standard errors (Monte Carlo only), tensor layout.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coeff_se: Option<Vec<f64>>,
}

/// Dense d-indexed coefficient tensor, first index slowest.
#[derive(Debug, Clone)]
pub struct CoeffTensor {
    orders: Vec<usize>,
    data: Vec<Complex64>,
    meta: QuadratureMeta,
}

impl CoeffTensor {
    pub(crate) fn new(orders: Vec<usize>, data: Vec<Complex64>, meta: QuadratureMeta) -> Self {
        debug_assert_eq!(data.len(), orders.iter().map(|n| n + 1).product::<usize>());
        Self { orders, data, meta }
    }

    pub fn dim(&self) -> usize {
        self.orders.len()
    }

    /// Inclusive truncation orders per coordinate.
    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn meta(&self) -> &QuadratureMeta {
        &self.meta
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.orders.len());
        let mut flat = 0;
        for (i, &n) in idx.iter().enumerate() {
            debug_assert!(n <= self.orders[i]);
            flat = flat * (self.orders[i] + 1) + n;
        }
        flat
    }

    /// Multi-index of a flat position.
    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0usize; self.orders.len()];
        for i in (0..self.orders.len()).rev() {
            let size = self.orders[i] + 1;
            idx[i] = flat % size;
            flat /= size;
        }
        idx
    }

    pub fn get(&self, idx: &[usize]) -> Complex64 {
        self.data[self.flat_index(idx)]
    }

    /// Total coefficient energy `sum |c|^2`.
    pub fn energy(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Energy restricted to the rectangle `n_i <= rect_i`.
    pub fn rect_energy(&self, rect: &[usize]) -> f64 {
        debug_assert_eq!(rect.len(), self.orders.len());
        let mut acc = 0.0;
        for (flat, c) in self.data.iter().enumerate() {
            let idx = self.unflatten(flat);
            if idx.iter().zip(rect).all(|(n, r)| n <= r) {
                acc += c.norm_sqr();
            }
        }
        acc
    }

    /// The rectangular partial sum as a trig polynomial.
    pub fn to_trig_poly(&self, rect: &[usize]) -> TrigPoly {
        let mut p = TrigPoly::zero(self.orders.len());
        for (flat, &c) in self.data.iter().enumerate() {
            let idx = self.unflatten(flat);
            if idx.iter().zip(rect).all(|(n, r)| n <= r) {
                p.add_term(idx.iter().map(|&n| n as i64).collect(), c);
            }
        }
        p
    }
}

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn validate(m: &Measure, f: &TrigPoly, orders: &[usize]) -> Result<()> {
    if orders.is_empty() || orders.len() != m.dim() {
        return Err(Error::InvalidMeasure(format!(
            "orders {orders:?} do not match measure dimension {}",
            m.dim()
        )));
    }
    if f.dim() != m.dim() {
        return Err(Error::InvalidMeasure(format!(
            "function dimension {} does not match measure dimension {}",
            f.dim(),
            m.dim()
        )));
    }
    if !slice_singularity_gate(m) {
        return Err(Error::UnsupportedMeasure(
            "measure is not slice singular in every coordinate (and not atomic); \
             the expansion coefficients are not defined for it"
                .into(),
        ));
    }
    Ok(())
}

/// Expansion coefficients of `f` against the nested dual frame of `m`.
pub fn analyze(
    m: &Measure,
    f: &TrigPoly,
    orders: &[usize],
    q: &QuadratureSpec,
) -> Result<CoeffTensor> {
    validate(m, f, orders)?;
    if m.dim() == 1 {
        return analyze_1d(m, f, orders[0], q);
    }
    match *q {
        QuadratureSpec::PrefixExact { depth } => {
            if depth == 0 {
                return Err(Error::InvalidMeasure("prefix depth must be >= 1".into()));
            }
            let input = CylinderPoly::from_trig(f);
            let mut quad_err = 0.0;
            let data = analyze_rec(m, &input, orders, depth, &mut quad_err)?;
            let meta = QuadratureMeta {
                mode: "prefix_exact",
                depth: Some(depth),
                samples: None,
                seed: 0,
                error_estimate: quad_err + 1e-10,
                coeff_se: None,
            };
            Ok(CoeffTensor::new(orders.to_vec(), data, meta))
        }
        QuadratureSpec::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::InvalidMeasure("sample count must be >= 1".into()));
            }
            mc::analyze_mc(m, f, orders, samples, seed)
        }
    }
}

/// One-dimensional reduction: the tensor is exactly the dual coefficient
/// vector of the `kaczmarz` module (same code path, bitwise).
fn analyze_1d(m: &Measure, f: &TrigPoly, n_max: usize, q: &QuadratureSpec) -> Result<CoeffTensor> {
    let range = n_max + f.max_abs_freq() as usize;
    let moments = MomentTable::build(m, range, MOMENT_EPS)?;
    let aux = aux_matrix(&moments, n_max)?;
    let data = dual_coefficients(&moments, &aux, f)?;
    let meta = match *q {
        QuadratureSpec::PrefixExact { depth } => QuadratureMeta {
            mode: "prefix_exact",
            depth: Some(depth),
            samples: None,
            seed: 0,
            error_estimate: moments.max_bound() * (n_max as f64 + 1.0),
            coeff_se: None,
        },
        // One-dimensional integrals are moment sums; sampling is never used.
        QuadratureSpec::MonteCarlo { samples, seed } => QuadratureMeta {
            mode: "monte_carlo",
            depth: None,
            samples: Some(samples),
            seed,
            error_estimate: moments.max_bound() * (n_max as f64 + 1.0),
            coeff_se: Some(vec![0.0; data.len()]),
        },
    };
    Ok(CoeffTensor::new(vec![n_max], data, meta))
}

fn analyze_rec(
    m: &Measure,
    input: &CylinderPoly,
    orders: &[usize],
    depth: usize,
    quad_err: &mut f64,
) -> Result<Vec<Complex64>> {
    let r = orders.len();
    if r == 1 {
        return stage::final_stage(m, input, orders[0], depth);
    }
    let n_last = orders[r - 1];
    let out = stage::stage(m, input, n_last, depth)?;
    *quad_err += out.quad_error;

    let branches: Vec<(Vec<Complex64>, f64)> = out
        .per_order
        .par_iter()
        .map(|h| {
            let mut sub_err = 0.0;
            let sub = analyze_rec(&out.marginal, h, &orders[..r - 1], depth, &mut sub_err)?;
            Ok((sub, sub_err))
        })
        .collect::<Result<_>>()?;
    // Branch errors are identical replicas of the same marginal chain; keep
    // the worst rather than summing duplicates.
    *quad_err += branches.iter().map(|(_, e)| *e).fold(0.0, f64::max);

    let sub_len = branches[0].0.len();
    let mut data = vec![czero(); sub_len * (n_last + 1)];
    for (nr, (sub, _)) in branches.iter().enumerate() {
        for (prefix, &v) in sub.iter().enumerate() {
            data[prefix * (n_last + 1) + nr] = v;
        }
    }
    Ok(data)
}

/// Evaluate the full-rectangle partial sum at a list of points.
pub fn synthesize(c: &CoeffTensor, points: &[Vec<f64>]) -> Vec<Complex64> {
    let freqs: Vec<Vec<i64>> = (0..c.data().len())
        .map(|flat| c.unflatten(flat).iter().map(|&n| n as i64).collect())
        .collect();
    points
        .par_iter()
        .map(|x| {
            debug_assert_eq!(x.len(), c.dim());
            let mut acc = czero();
            for (freq, &coef) in freqs.iter().zip(c.data()) {
                let phase: f64 = freq
                    .iter()
                    .zip(x.iter())
                    .map(|(&n, &xi)| n as f64 * xi)
                    .sum();
                acc += coef * Complex64::from_polar(1.0, std::f64::consts::TAU * phase);
            }
            acc
        })
        .collect()
}

/// One row of a convergence sweep.
///
/// Two error notions are tabulated. `error` is the exact L2(mu) distance
/// of the rectangular partial sum from f; it converges along the iterated
/// order but is not monotone step by step, because partial sums against
/// the exponentials are not orthogonal projections. `defect` is the
/// coefficient-energy defect `||f||^2 - sum_rect |c|^2`, which decreases
/// at every step (the frame is Parseval) and coincides with `error^2` in
/// one dimension.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub orders: Vec<usize>,
    /// L2(mu) reconstruction error of the rectangular partial sum.
    pub error: f64,
    /// Squared error (the quantity with a clean noise estimate).
    pub error_sq: f64,
    /// First-order standard error of `error_sq` under Monte Carlo noise
    /// (zero in prefix-exact mode).
    pub error_sq_se: f64,
    /// Energy defect `||f||^2 - sum_rect |c|^2`; nonincreasing by
    /// construction.
    pub defect: f64,
    /// Standard error of the defect under Monte Carlo noise.
    pub defect_se: f64,
}

/// Reconstruction error report with the iterated-order sweep table.
#[derive(Debug, Clone)]
pub struct ReconstructionReport {
    pub coeffs: CoeffTensor,
    /// Error at the full truncation rectangle.
    pub error: f64,
    /// Staircase sweep: the first index grows to its cap first, then the
    /// second, and so on, matching the iterated-limit order.
    pub sweep: Vec<SweepRow>,
}

/// Exact L2(mu) reconstruction error of rectangular partial sums along the
/// iterated-order staircase.
pub fn reconstruction_error(
    m: &Measure,
    f: &TrigPoly,
    orders: &[usize],
    q: &QuadratureSpec,
) -> Result<ReconstructionReport> {
    let coeffs = analyze(m, f, orders, q)?;
    let d = orders.len();

    // Sweep path: grow index 0 to its cap, then index 1, ...
    let mut path = vec![vec![0usize; d]];
    for i in 0..d {
        for n in 1..=orders[i] {
            let mut rect = path.last().unwrap().clone();
            rect[i] = n;
            path.push(rect);
        }
    }

    let mut cache: HashMap<Vec<i64>, Complex64> = HashMap::new();
    let mut moment_of = |m: &Measure, diff: Vec<i64>| -> Result<Complex64> {
        if let Some(v) = cache.get(&diff) {
            return Ok(*v);
        }
        let (v, _) = m.moment_int(&diff, MOMENT_EPS)?;
        cache.insert(diff, v);
        Ok(v)
    };

    let (f_norm_sq, _) = m.norm_sq(f, 1e-12)?;
    let se = coeffs.meta().coeff_se.clone();
    let mut sweep = Vec::with_capacity(path.len());
    for rect in path {
        let partial = coeffs.to_trig_poly(&rect);
        let diff = f.sub(&partial);
        // ||diff||^2 with cached moments.
        let mut esq = Complex64::new(0.0, 0.0);
        let terms: Vec<(Vec<i64>, Complex64)> =
            diff.terms().map(|(v, c)| (v.clone(), *c)).collect();
        for (v, cv) in &terms {
            for (k, ck) in &terms {
                let delta: Vec<i64> = k.iter().zip(v.iter()).map(|(a, b)| a - b).collect();
                esq += cv * ck.conj() * moment_of(m, delta)?;
            }
        }
        let error_sq = esq.re.max(0.0);
        // First-order noise on ||f - S||^2 from coefficient standard errors:
        // perturbing c_n moves the square by -2 Re conj(dc_n) <f - S, e_n>.
        let error_sq_se = if let Some(se) = &se {
            let mut acc = 0.0;
            let mut second = 0.0;
            for (flat, s) in se.iter().enumerate() {
                let idx = coeffs.unflatten(flat);
                if !idx.iter().zip(&rect).all(|(n, r)| n <= r) {
                    continue;
                }
                let freq: Vec<i64> = idx.iter().map(|&n| n as i64).collect();
                // g_n = <f - S, e_n>
                let mut g = Complex64::new(0.0, 0.0);
                for (v, cv) in &terms {
                    let delta: Vec<i64> = freq.iter().zip(v.iter()).map(|(a, b)| a - b).collect();
                    g += cv * moment_of(m, delta)?;
                }
                acc += 4.0 * g.norm_sqr() * s * s;
                second += s * s;
            }
            acc.sqrt() + second
        } else {
            0.0
        };
        let defect = f_norm_sq - coeffs.rect_energy(&rect);
        let defect_se = if let Some(se) = &se {
            let mut first = 0.0;
            let mut second = 0.0;
            for (flat, s) in se.iter().enumerate() {
                let idx = coeffs.unflatten(flat);
                if idx.iter().zip(&rect).all(|(n, r)| n <= r) {
                    let mag = coeffs.data()[flat].norm();
                    first += (2.0 * mag * s) * (2.0 * mag * s);
                    second += s * s;
                }
            }
            first.sqrt() + second
        } else {
            0.0
        };
        sweep.push(SweepRow {
            orders: rect,
            error: error_sq.sqrt(),
            error_sq,
            error_sq_se,
            defect,
            defect_se,
        });
    }

    let error = sweep.last().map(|r| r.error).unwrap_or(0.0);
    Ok(ReconstructionReport {
        coeffs,
        error,
        sweep,
    })
}
