//! Cauchy transforms, Herglotz inner functions, and Normalized Cauchy
//! Transforms on the polydisk, with the model-space and boundary
//! diagnostics built on them.
//!
//! For a one-dimensional probability measure the Cauchy transform is
//! `C(f)(w) = integral f dmu / (1 - w e^{-2 pi i x})`, a power series whose
//! n-th coefficient is `<f, e_n>`. For singular measures the inner function
//! of the Herglotz correspondence is `b = 1 - 1/C(1)`, with `b(0) = 0` and
//! `|b(w)| <= |w|`. The Normalized Cauchy Transform `V(f) = C(f)/C(1)` has
//! the dual-coefficient series `sum <f, g_n> w^n`, which is the form
//! computed here; in d variables its coefficients are exactly the expansion
//! tensor of `analyze`, and the transform factors through the marginal
//! chain one slice at a time.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expansion::{
    analyze, stage, CoeffTensor, QuadratureMeta, QuadratureSpec, DEFAULT_PREFIX_DEPTH,
};
use crate::kaczmarz::{aux_matrix, dual_coefficients, MOMENT_EPS};
use crate::measure::{
    chaos_digits, slice_law, slice_of, Measure, MomentTable, Slice, SliceContext,
};
use crate::trig::TrigPoly;

/// Largest disk radius at which series evaluation is certified.
pub const R_MAX: f64 = 0.999;

/// Hard cap on Cauchy-series truncation length.
const CAUCHY_TERM_CAP: usize = 500_000;

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Truncated multivariate power series on the open polydisk, backed by an
/// expansion coefficient tensor.
#[derive(Debug, Clone)]
pub struct PowerSeriesGrid {
    tensor: CoeffTensor,
}

impl PowerSeriesGrid {
    pub fn new(tensor: CoeffTensor) -> Self {
        Self { tensor }
    }

    pub fn dim(&self) -> usize {
        self.tensor.dim()
    }

    pub fn orders(&self) -> &[usize] {
        self.tensor.orders()
    }

    pub fn tensor(&self) -> &CoeffTensor {
        &self.tensor
    }

    pub fn meta(&self) -> &QuadratureMeta {
        self.tensor.meta()
    }

    /// Squared l2 norm of the stored coefficients.
    pub fn energy(&self) -> f64 {
        self.tensor.energy()
    }

    /// Evaluate the finite sum `sum c z_1^{n_1} .. z_d^{n_d}`.
    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        if z.len() != self.dim() {
            return Err(Error::InvalidMeasure(format!(
                "point has {} coordinates, series has {}",
                z.len(),
                self.dim()
            )));
        }
        for zi in z {
            if zi.norm() > R_MAX {
                return Err(Error::PointOutsideDisk {
                    modulus: zi.norm(),
                    max: R_MAX,
                });
            }
        }
        let mut acc = czero();
        for (flat, &c) in self.tensor.data().iter().enumerate() {
            let idx = self.tensor.unflatten(flat);
            let mut term = c;
            for (zi, &n) in z.iter().zip(&idx) {
                term *= zi.powu(n as u32);
            }
            acc += term;
        }
        Ok(acc)
    }
}

/// Truncated Taylor series of a Herglotz inner function at the origin.
#[derive(Debug, Clone, Serialize)]
pub struct InnerFunctionSeries {
    /// Coefficients b_0..b_N; b_0 is exactly zero.
    pub coeffs: Vec<[f64; 2]>,
    /// Label of the generating moments.
    pub source: String,
}

impl InnerFunctionSeries {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> Complex64 {
        let [re, im] = self.coeffs[n];
        Complex64::new(re, im)
    }

    pub fn eval(&self, w: Complex64) -> Result<Complex64> {
        if w.norm() > R_MAX {
            return Err(Error::PointOutsideDisk {
                modulus: w.norm(),
                max: R_MAX,
            });
        }
        let mut acc = czero();
        let mut pw = Complex64::new(1.0, 0.0);
        for n in 0..self.coeffs.len() {
            acc += self.coeff(n) * pw;
            pw *= w;
        }
        Ok(acc)
    }

    /// Coefficient energy `sum_{m>=1} |b_m|^2`; 1 for an inner function in
    /// the limit of infinite order.
    pub fn energy(&self) -> f64 {
        self.coeffs[1..]
            .iter()
            .map(|[re, im]| re * re + im * im)
            .sum()
    }
}

/// Cauchy transform `C(f)(w)` of a one-dimensional measure, with the
/// geometric tail bound of the truncation.
pub fn cauchy_transform(
    m: &Measure,
    f: &TrigPoly,
    w: Complex64,
    tol: f64,
) -> Result<(Complex64, f64)> {
    if m.dim() != 1 || f.dim() != 1 {
        return Err(Error::InvalidMeasure(
            "the Cauchy transform needs a one-dimensional measure and function".into(),
        ));
    }
    let r = w.norm();
    if r > R_MAX {
        return Err(Error::PointOutsideDisk {
            modulus: r,
            max: R_MAX,
        });
    }
    // |<f, e_n>| <= sum |f_v|, so the dropped tail after N terms is at most
    // B r^{N+1} / (1 - r).
    let bound_after = |n: usize| f.coeff_l1() * r.powi(n as i32 + 1) / (1.0 - r);
    let mut n_terms = 0usize;
    while bound_after(n_terms) > tol {
        n_terms += 1;
        if n_terms > CAUCHY_TERM_CAP {
            return Err(Error::NonconvergentTolerance {
                needed: n_terms,
                cap: CAUCHY_TERM_CAP,
            });
        }
    }
    let mut acc = czero();
    let mut pw = Complex64::new(1.0, 0.0);
    for n in 0..=n_terms {
        // <f, e_n> = sum_v f_v mu_hat(n - v)
        let mut coef = czero();
        for (v, c) in f.terms() {
            let (mv, _) = m.moment_int(&[n as i64 - v[0]], MOMENT_EPS)?;
            coef += c * mv;
        }
        acc += coef * pw;
        pw *= w;
    }
    Ok((acc, bound_after(n_terms)))
}

/// Taylor coefficients of the reciprocal of a unit-constant power series,
/// by the triangular convolution recursion.
fn reciprocal_series(a: &[Complex64]) -> Result<Vec<Complex64>> {
    let a0 = a[0];
    if (a0 - Complex64::new(1.0, 0.0)).norm() > 0.5 {
        return Err(Error::SingularReciprocal(a0.norm()));
    }
    let mut r = Vec::with_capacity(a.len());
    r.push(a0.inv());
    for n in 1..a.len() {
        let mut acc = czero();
        for k in 1..=n {
            acc += a[k] * r[n - k];
        }
        r.push(-acc / a0);
    }
    Ok(r)
}

/// Inner function of the Herglotz correspondence, `b = 1 - 1/C(1)`, as a
/// truncated Taylor series. Meaningful for singular probability measures;
/// the constant coefficient is exactly zero by construction.
pub fn inner_function(m: &Measure, n_max: usize) -> Result<InnerFunctionSeries> {
    if m.dim() != 1 {
        return Err(Error::InvalidMeasure(
            "inner functions correspond to one-dimensional measures".into(),
        ));
    }
    let table = MomentTable::build(m, n_max, MOMENT_EPS)?;
    inner_function_from_moments(&table, n_max)
}

/// Inner function series from an existing moment table.
pub fn inner_function_from_moments(
    table: &MomentTable,
    n_max: usize,
) -> Result<InnerFunctionSeries> {
    let symbol: Vec<Complex64> = (0..=n_max as i64)
        .map(|n| table.get(n))
        .collect::<Result<_>>()?;
    let recip = reciprocal_series(&symbol)?;
    let mut coeffs = Vec::with_capacity(n_max + 1);
    coeffs.push([0.0, 0.0]);
    for r in &recip[1..] {
        coeffs.push([-r.re, -r.im]);
    }
    Ok(InnerFunctionSeries {
        coeffs,
        source: table.source().to_string(),
    })
}

/// Max coefficient deviation of `(1 + b)/(1 - b)` from the Herglotz series
/// `1 + 2 sum_{n>=1} mu_hat(n) w^n`, through order `n_max`.
pub fn herglotz_consistency(m: &Measure, n_max: usize) -> Result<f64> {
    let table = MomentTable::build(m, n_max, MOMENT_EPS)?;
    let b = inner_function_from_moments(&table, n_max)?;
    // one_minus_b and its reciprocal
    let mut one_minus_b: Vec<Complex64> = (0..=n_max).map(|n| -b.coeff(n)).collect();
    one_minus_b[0] += 1.0;
    let inv = reciprocal_series(&one_minus_b)?;
    // (1 + b) * 1/(1 - b)
    let mut worst = 0.0f64;
    for n in 0..=n_max {
        let mut acc = czero();
        for k in 0..=n {
            let one_plus_b = if k == 0 {
                Complex64::new(1.0, 0.0) + b.coeff(0)
            } else {
                b.coeff(k)
            };
            acc += one_plus_b * inv[n - k];
        }
        let want = if n == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            2.0 * table.get(n as i64)?
        };
        worst = worst.max((acc - want).norm());
    }
    Ok(worst)
}

/// One-dimensional Normalized Cauchy Transform as a coefficient series:
/// `V(f)(w) = sum_n <f, g_n> w^n`.
pub fn nct_1d(m: &Measure, f: &TrigPoly, n_max: usize) -> Result<PowerSeriesGrid> {
    let tensor = analyze(m, f, &[n_max], &QuadratureSpec::default())?;
    Ok(PowerSeriesGrid::new(tensor))
}

/// d-dimensional Normalized Cauchy Transform: the coefficient tensor of
/// `analyze` read as a power series on the polydisk.
pub fn nct_d(
    m: &Measure,
    f: &TrigPoly,
    orders: &[usize],
    q: &QuadratureSpec,
) -> Result<PowerSeriesGrid> {
    Ok(PowerSeriesGrid::new(analyze(m, f, orders, q)?))
}

/// The transform computed as the explicit stage composition: slice the last
/// coordinate, materialize every coefficient function on the marginal, and
/// continue level by level. Coefficientwise this must agree with `nct_d`.
pub fn nct_staged(
    m: &Measure,
    f: &TrigPoly,
    orders: &[usize],
    q: &QuadratureSpec,
) -> Result<PowerSeriesGrid> {
    let depth = match *q {
        QuadratureSpec::PrefixExact { depth } => depth,
        QuadratureSpec::MonteCarlo { .. } => {
            return Err(Error::UnsupportedMeasure(
                "the staged composition is defined for prefix-exact quadrature".into(),
            ))
        }
    };
    if orders.len() != m.dim() || f.dim() != m.dim() {
        return Err(Error::InvalidMeasure(
            "orders and function must match the measure dimension".into(),
        ));
    }
    if !crate::classify::slice_singularity_gate(m) {
        return Err(Error::UnsupportedMeasure(
            "measure is not slice singular in every coordinate".into(),
        ));
    }

    let d = orders.len();
    // Breadth-first composition: after peeling k coordinates, `layer` holds
    // one coefficient function per suffix (n_{d-k+1}, .., n_d).
    let mut layer: Vec<(Vec<usize>, stage::CylinderPoly)> =
        vec![(Vec::new(), stage::CylinderPoly::from_trig(f))];
    let mut measure = m.clone();
    for r in (2..=d).rev() {
        let n_r = orders[r - 1];
        let mut next = Vec::with_capacity(layer.len() * (n_r + 1));
        let mut marginal = None;
        for (suffix, h) in &layer {
            let out = stage::stage(&measure, h, n_r, depth)?;
            for (n, poly) in out.per_order.into_iter().enumerate() {
                let mut s = vec![n];
                s.extend_from_slice(suffix);
                next.push((s, poly));
            }
            marginal = Some(out.marginal);
        }
        measure = marginal.expect("at least one branch");
        layer = next;
    }

    // Final coordinate: dual coefficients of each materialized function.
    let mut data = vec![czero(); orders.iter().map(|n| n + 1).product()];
    let strides: Vec<usize> = {
        let mut s = vec![1usize; d];
        for i in (0..d - 1).rev() {
            s[i] = s[i + 1] * (orders[i + 1] + 1);
        }
        s
    };
    for (suffix, h) in &layer {
        let coeffs = stage::final_stage(&measure, h, orders[0], depth)?;
        let offset: usize = suffix
            .iter()
            .enumerate()
            .map(|(i, &n)| n * strides[i + 1])
            .sum();
        for (n1, &v) in coeffs.iter().enumerate() {
            data[n1 * strides[0] + offset] = v;
        }
    }
    let meta = QuadratureMeta {
        mode: "prefix_exact",
        depth: Some(depth),
        samples: None,
        seed: 0,
        error_estimate: 0.0,
        coeff_se: None,
    };
    Ok(PowerSeriesGrid::new(CoeffTensor::new(
        orders.to_vec(),
        data,
        meta,
    )))
}

/// Residual of one slice context, with its truncation allowance.
#[derive(Debug, Clone, Serialize)]
pub struct ModelSpaceContext {
    /// Worst |<series, b w^k>| over the shift probes at finite truncation.
    pub residual: f64,
    /// Rigorous bound on the truncated tail of that pairing:
    /// sqrt of the slice-series energy left beyond the series order (the
    /// inner-function energy is at most one). Exact slices have zero
    /// allowance; membership at finite truncation means
    /// `residual <= allowance` up to rounding.
    pub allowance: f64,
}

/// Report of the slice model-space membership diagnostic.
#[derive(Debug, Clone, Serialize)]
pub struct ModelSpaceReport {
    /// Worst residual over slice contexts and shift probes.
    pub max_residual: f64,
    /// Worst truncation allowance over contexts.
    pub max_allowance: f64,
    /// Per-context rows.
    pub per_context: Vec<ModelSpaceContext>,
}

/// Check that slice transforms land in the slice model space: for sampled
/// slice contexts x, the series `V_slice(f)(x, .)` must be orthogonal to
/// `b^x w^k` for every shift `k`, where `b^x` is the slice inner function.
pub fn model_space_residual(
    m: &Measure,
    f: &TrigPoly,
    series_order: usize,
    probes: usize,
    contexts: usize,
    seed: u64,
) -> Result<ModelSpaceReport> {
    if m.dim() != 2 {
        return Err(Error::DimensionTooSmall {
            got: m.dim(),
            need: 2,
        });
    }
    if !crate::classify::slice_singularity_gate(m) {
        return Err(Error::UnsupportedMeasure(
            "measure is not slice singular".into(),
        ));
    }

    // Sampled slice contexts with the digit-coded evaluation point x1.
    let ctxs: Vec<(f64, Slice)> = match m {
        Measure::Digit(d) => {
            let marg = d.marginal(&[0])?;
            let b = d.base() as f64;
            chaos_digits(&marg, contexts, DEFAULT_PREFIX_DEPTH, seed)
                .into_iter()
                .map(|prefix| {
                    let x1 = prefix
                        .iter()
                        .enumerate()
                        .map(|(k, row)| row[0] as f64 * b.powi(-(k as i32 + 1)))
                        .sum();
                    Ok((x1, Slice::Law(slice_law(d, &prefix)?)))
                })
                .collect::<Result<_>>()?
        }
        Measure::Product(p) => {
            // Slice independent of x1; one context at a representative point.
            let _ = p;
            vec![(0.0, slice_of(m, &SliceContext::Any)?)]
        }
        Measure::Atomic(a) => {
            let marg = a.marginal(&[0])?;
            (0..marg.points().len())
                .map(|u| {
                    Ok((
                        marg.points()[u][0],
                        slice_of(m, &SliceContext::MarginalAtom(u))?,
                    ))
                })
                .collect::<Result<_>>()?
        }
    };

    let max_nu2 = f.terms().map(|(v, _)| v[1].abs()).max().unwrap_or(0) as usize;
    let per_context: Vec<ModelSpaceContext> = ctxs
        .iter()
        .map(|(x1, slice)| {
            let table = match slice {
                Slice::Law(law) => MomentTable::build(law, series_order + max_nu2, MOMENT_EPS)?,
                Slice::Exact(meas) => MomentTable::build(meas, series_order + max_nu2, MOMENT_EPS)?,
            };
            let aux = aux_matrix(&table, series_order)?;
            // The restriction of f to the slice as a one-variable polynomial
            // with the x1 phases folded into the coefficients.
            let mut restricted = TrigPoly::zero(1);
            for (v, c) in f.terms() {
                let scalar =
                    c * Complex64::from_polar(1.0, std::f64::consts::TAU * v[0] as f64 * x1);
                restricted.add_term(vec![v[1]], scalar);
            }
            // Slice series a_n = sum_j conj(A[n,j]) <restricted, e_j>.
            let series = dual_coefficients(&table, &aux, &restricted)?;
            let inner = inner_function_from_moments(&table, series_order)?;
            // residual(k) = <series, b w^k> = sum_{n >= k} a_n conj(b_{n-k})
            let mut worst = 0.0f64;
            for k in 0..=probes.min(series_order) {
                let mut acc = czero();
                for (n, a) in series.iter().enumerate().skip(k) {
                    acc += a * inner.coeff(n - k).conj();
                }
                worst = worst.max(acc.norm());
            }
            // Dropped-tail allowance: residual energy of the slice series
            // times the unit inner-function energy.
            let mut norm_sq = czero();
            for (v, cv) in restricted.terms() {
                for (k, ck) in restricted.terms() {
                    norm_sq += cv * ck.conj() * table.get(k[0] - v[0])?;
                }
            }
            let captured: f64 = series.iter().map(|a| a.norm_sqr()).sum();
            let allowance = (norm_sq.re - captured).max(0.0).sqrt();
            Ok(ModelSpaceContext {
                residual: worst,
                allowance,
            })
        })
        .collect::<Result<_>>()?;

    let max_residual = per_context.iter().map(|c| c.residual).fold(0.0, f64::max);
    let max_allowance = per_context.iter().map(|c| c.allowance).fold(0.0, f64::max);
    Ok(ModelSpaceReport {
        max_residual,
        max_allowance,
        per_context,
    })
}

/// Verdict of the two-transform comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EqualityVerdict {
    Equal,
    Unequal,
    /// Deviation between one and ten quadrature tolerances.
    Borderline,
}

#[derive(Debug, Clone, Serialize)]
pub struct EqualityReport {
    pub max_deviation: f64,
    pub tolerance: f64,
    pub verdict: EqualityVerdict,
}

/// Tensor of the transform built from the opposite disintegration order:
/// swap the coordinates of measure and function, analyze, and transpose.
fn swapped_tensor(
    m: &Measure,
    f: &TrigPoly,
    orders: &[usize],
    q: &QuadratureSpec,
) -> Result<CoeffTensor> {
    let swapped_m = m.permute_coords(&[1, 0])?;
    let swapped_f = f.permute(&[1, 0]);
    let swapped_orders = [orders[1], orders[0]];
    analyze(&swapped_m, &swapped_f, &swapped_orders, q)
}

/// Compare the two planar transforms arising from the two disintegration
/// orders. They agree exactly when the measure is a product.
pub fn nct_equality_test(
    m: &Measure,
    basket: &[TrigPoly],
    orders: &[usize],
    q: &QuadratureSpec,
) -> Result<EqualityReport> {
    if m.dim() != 2 || orders.len() != 2 {
        return Err(Error::DimensionTooSmall {
            got: m.dim(),
            need: 2,
        });
    }
    let mut max_deviation = 0.0f64;
    let mut tolerance = 1e-8f64;
    for f in basket {
        let t1 = analyze(m, f, orders, q)?;
        let t2 = swapped_tensor(m, f, orders, q)?;
        tolerance = tolerance
            .max(t1.meta().error_estimate)
            .max(t2.meta().error_estimate);
        for a in 0..=orders[0] {
            for b in 0..=orders[1] {
                let dev = (t1.get(&[a, b]) - t2.get(&[b, a])).norm();
                max_deviation = max_deviation.max(dev);
            }
        }
    }
    let verdict = if max_deviation <= tolerance {
        EqualityVerdict::Equal
    } else if max_deviation > 10.0 * tolerance {
        EqualityVerdict::Unequal
    } else {
        EqualityVerdict::Borderline
    };
    Ok(EqualityReport {
        max_deviation,
        tolerance,
        verdict,
    })
}

/// Reflection identity for symmetric measures: the first transform equals
/// the second conjugated by the coordinate swap and the tensor transpose.
pub fn symmetry_reflection_test(
    m: &Measure,
    basket: &[TrigPoly],
    orders: &[usize],
    q: &QuadratureSpec,
) -> Result<f64> {
    if m.dim() != 2 || orders.len() != 2 {
        return Err(Error::DimensionTooSmall {
            got: m.dim(),
            need: 2,
        });
    }
    let swapped = m.permute_coords(&[1, 0])?;
    if swapped != *m {
        return Err(Error::NotSymmetric);
    }
    let mut worst = 0.0f64;
    for f in basket {
        let lhs = analyze(m, f, orders, q)?;
        // T' o V^2 o T: applying the swapped-order transform to T f and
        // transposing unwinds both swaps, leaving the transform taken
        // against the rebuilt swapped measure.
        let rhs = analyze(&swapped, f, orders, q)?;
        for a in 0..=orders[0] {
            for b in 0..=orders[1] {
                worst = worst.max((lhs.get(&[a, b]) - rhs.get(&[a, b])).norm());
            }
        }
    }
    Ok(worst)
}

/// One row of the iterated radial boundary table.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryRow {
    pub r1: f64,
    pub r2: f64,
    /// `|| V(f)(r1 e(x1), r2 e(x2)) - f ||_{L2(mu)}`.
    pub error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryReport {
    /// Full grid in iteration order: r2 outer, r1 inner.
    pub rows: Vec<BoundaryRow>,
    /// Diagonal r1 = r2 = r summary.
    pub diagonal: Vec<BoundaryRow>,
}

/// Iterated radial boundary diagnostic: evaluate the transform on circles
/// of radii (r1, r2) and measure the L2(mu) distance to f. The marginal
/// radius r1 varies fastest, matching the iterated limit.
pub fn boundary_limit_test(
    m: &Measure,
    f: &TrigPoly,
    radii: &[f64],
    orders: &[usize],
    q: &QuadratureSpec,
    tail_tol: f64,
) -> Result<BoundaryReport> {
    if m.dim() != 2 || orders.len() != 2 {
        return Err(Error::DimensionTooSmall {
            got: m.dim(),
            need: 2,
        });
    }
    if radii.iter().any(|r| !(0.0..1.0).contains(r)) {
        return Err(Error::InvalidMeasure(
            "radii must lie strictly inside (0, 1)".into(),
        ));
    }
    let tensor = analyze(m, f, orders, q)?;
    let (norm_sq, _) = m.norm_sq(f, 1e-12)?;
    // Coefficient mass outside the rectangle, bounded through the expansion
    // isometry; with radius damping it bounds the dropped series mass.
    let defect = (norm_sq - tensor.energy()).max(0.0);
    let r_hi = radii.iter().cloned().fold(0.0, f64::max);
    let n_min = *orders.iter().min().expect("nonempty") as i32;
    let packing = 2.0 * r_hi.powi(2 * (n_min + 1)) / (1.0 - r_hi * r_hi).powi(2);
    let tail = defect.sqrt() * packing.sqrt();
    if tail > tail_tol {
        return Err(Error::RadiusTooCloseToOne {
            radius: r_hi,
            tail,
            tol: tail_tol,
        });
    }

    let mut cache: HashMap<Vec<i64>, Complex64> = HashMap::new();
    let mut error_at = |r1: f64, r2: f64| -> Result<f64> {
        // Damped partial sum as a trig polynomial.
        let mut damped = TrigPoly::zero(2);
        for (flat, &c) in tensor.data().iter().enumerate() {
            let idx = tensor.unflatten(flat);
            let scale = r1.powi(idx[0] as i32) * r2.powi(idx[1] as i32);
            damped.add_term(vec![idx[0] as i64, idx[1] as i64], c * scale);
        }
        let diff = f.sub(&damped);
        let terms: Vec<(Vec<i64>, Complex64)> =
            diff.terms().map(|(v, c)| (v.clone(), *c)).collect();
        let mut esq = czero();
        for (v, cv) in &terms {
            for (k, ck) in &terms {
                let delta: Vec<i64> = k.iter().zip(v.iter()).map(|(a, b)| a - b).collect();
                let mv = match cache.get(&delta) {
                    Some(mv) => *mv,
                    None => {
                        let (mv, _) = m.moment_int(&delta, MOMENT_EPS)?;
                        cache.insert(delta.clone(), mv);
                        mv
                    }
                };
                esq += cv * ck.conj() * mv;
            }
        }
        Ok(esq.re.max(0.0).sqrt())
    };

    let mut rows = Vec::new();
    for &r2 in radii {
        for &r1 in radii {
            rows.push(BoundaryRow {
                r1,
                r2,
                error: error_at(r1, r2)?,
            });
        }
    }
    let mut diagonal = Vec::new();
    for &r in radii {
        diagonal.push(BoundaryRow {
            r1: r,
            r2: r,
            error: error_at(r, r)?,
        });
    }
    Ok(BoundaryReport { rows, diagonal })
}
