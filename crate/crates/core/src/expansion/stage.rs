//! One disintegration stage of the coefficient computation.
//!
//! Peeling the last coordinate of a measure turns a function into the
//! sequence of its slice dual coefficients
//!
//! ```text
//! h_n(x') = < f(x', .), g^{x'}_n >_{slice at x'},
//! ```
//!
//! each a function on the marginal. For digit IFS measures the slice at a
//! digit-coded x' depends on x' only through the per-level class of its
//! conditioning digits, so h_n is a sum of exponential terms whose
//! coefficients are tables over class sequences of depth K (the quadrature
//! prefix depth), with the stationary law absorbing all deeper levels. For
//! atomic measures the classes are the marginal atoms and everything is an
//! exact finite sum; for products the slice never depends on x' at all.
//!
//! The stage machinery is shared by the recursive analyzer and by the
//! explicit transform composition in `transforms`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kaczmarz::{aux_matrix, AuxMatrix, MOMENT_EPS};
use crate::measure::{
    atomic_slice, conditional_digit_law, stationary_last_law, AtomicMeasure, DigitDistribution,
    DigitIfs, Measure, MomentTable, ProductMeasure, SliceLaw,
};
use crate::trig::TrigPoly;

/// Largest class-sequence table materialized before refusing the quadrature.
pub const MAX_CONTEXTS: u64 = 1 << 21;

/// Largest number of slice dual matrices built in one stage.
pub const MAX_AUX_MATRICES: u64 = 1 << 16;

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Context space indexing the tables of a cylinder polynomial.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum CtxSpace {
    /// Single context; tables have length 1.
    Trivial,
    /// Class sequences of length `depth` over `n_classes` per-level classes;
    /// `class_of_digit[i]` is the class of the carrying measure's i-th
    /// canonical digit vector.
    DigitClasses {
        n_classes: usize,
        depth: usize,
        class_of_digit: Vec<usize>,
    },
    /// One context per canonical atom of the carrying atomic measure.
    AtomIds { count: usize },
}

impl CtxSpace {
    pub(crate) fn count(&self) -> usize {
        match self {
            CtxSpace::Trivial => 1,
            CtxSpace::DigitClasses {
                n_classes, depth, ..
            } => n_classes.pow(*depth as u32),
            CtxSpace::AtomIds { count } => *count,
        }
    }
}

/// Finite sum of exponential terms with context-resolved coefficients,
/// living on one measure of the marginal chain.
#[derive(Debug, Clone)]
pub(crate) struct CylinderPoly {
    pub ctx: CtxSpace,
    pub terms: BTreeMap<Vec<i64>, Vec<Complex64>>,
}

impl CylinderPoly {
    pub(crate) fn from_trig(f: &TrigPoly) -> Self {
        let mut terms = BTreeMap::new();
        for (v, c) in f.terms() {
            terms.insert(v.clone(), vec![*c]);
        }
        Self {
            ctx: CtxSpace::Trivial,
            terms,
        }
    }

    fn zero_like(ctx: CtxSpace) -> Self {
        Self {
            ctx,
            terms: BTreeMap::new(),
        }
    }

    fn entry(&mut self, freq: Vec<i64>) -> &mut Vec<Complex64> {
        let count = self.ctx.count();
        self.terms
            .entry(freq)
            .or_insert_with(|| vec![czero(); count])
    }
}

/// Product of the stationary level factors beyond `skip`:
/// `prod_{k > skip} law_factor(n / b^k)`, truncated at tolerance `eps`.
pub(crate) fn tail_moment(
    law: &DigitDistribution,
    skip: usize,
    n: i64,
    eps: f64,
) -> Result<Complex64> {
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let b = law.base() as f64;
    let mut value = Complex64::new(1.0, 0.0);
    let mut k = skip;
    loop {
        let remaining = (std::f64::consts::TAU * n.abs() as f64 * b.powi(-(k as i32))).exp_m1();
        if remaining <= eps {
            return Ok(value);
        }
        k += 1;
        if k > crate::measure::DEPTH_CAP {
            return Err(Error::NonconvergentTolerance {
                needed: k,
                cap: crate::measure::DEPTH_CAP,
            });
        }
        value *= law.factor(n as f64 * b.powi(-(k as i32)));
    }
}

/// Output of one peel: coefficient functions on the marginal, one per order.
pub(crate) struct StageOutput {
    pub marginal: Measure,
    pub per_order: Vec<CylinderPoly>,
    /// Estimated error from conditioning truncation at the prefix depth
    /// (zero when the slice law is prefix-independent or exact).
    pub quad_error: f64,
}

/// Dispatch on the measure kind.
pub(crate) fn stage(
    m: &Measure,
    input: &CylinderPoly,
    n_last: usize,
    depth: usize,
) -> Result<StageOutput> {
    match m {
        Measure::Digit(d) => digit_stage(d, input, n_last, depth),
        Measure::Atomic(a) => atomic_stage(a, input, n_last),
        Measure::Product(p) => product_stage(p, input, n_last),
    }
}

/// Class analysis of one digit peel, shared with the Monte Carlo path.
pub(crate) struct DigitPeel {
    pub marginal: DigitIfs,
    /// Conditional last-digit law per marginal digit.
    pub conditionals: Vec<DigitDistribution>,
    /// Merged-class id per marginal digit (conditional law + refinement map).
    pub class_of_digit: Vec<usize>,
    pub n_classes: usize,
    /// Slice-law class (conditional law only) per merged class.
    pub sl_of_class: Vec<usize>,
    /// Representative conditional law per slice-law class.
    pub sl_reps: Vec<DigitDistribution>,
}

/// Group the marginal digits of `m` by conditional law and, when the input
/// tables refine further, by the induced map from last digits to input
/// classes.
pub(crate) fn digit_peel(m: &DigitIfs, prev_of_digit: &[usize]) -> Result<DigitPeel> {
    let r = m.dim();
    let keep: Vec<usize> = (0..r - 1).collect();
    let marginal = m.marginal(&keep)?;
    let base = m.base() as usize;

    let mut conditionals = Vec::with_capacity(marginal.digits().len());
    let mut keys: Vec<(Vec<u64>, Vec<Option<usize>>)> = Vec::new();
    let mut sl_keys: Vec<Vec<u64>> = Vec::new();
    let mut class_of_digit = Vec::with_capacity(marginal.digits().len());
    let mut sl_of_class = Vec::new();
    let mut sl_reps = Vec::new();

    for rho in marginal.digits() {
        let law = conditional_digit_law(m, rho).ok_or(Error::PrefixOutsideSupport {
            level: 0,
            digit: rho.clone(),
        })?;
        let law_bits: Vec<u64> = law.probs().iter().map(|p| p.to_bits()).collect();
        // Map each last digit to the input class of the extended digit.
        let mut ext = Vec::with_capacity(base);
        for n in 0..base {
            let mut full = rho.clone();
            full.push(n as u32);
            let idx = m.digits().binary_search(&full).ok();
            ext.push(idx.map(|i| prev_of_digit[i]));
        }
        let key = (law_bits.clone(), ext);
        let class = match keys.iter().position(|k| *k == key) {
            Some(c) => c,
            None => {
                keys.push(key);
                let sl = match sl_keys.iter().position(|k| *k == law_bits) {
                    Some(s) => s,
                    None => {
                        sl_keys.push(law_bits);
                        sl_reps.push(law.clone());
                        sl_reps.len() - 1
                    }
                };
                sl_of_class.push(sl);
                keys.len() - 1
            }
        };
        class_of_digit.push(class);
        conditionals.push(law);
    }
    Ok(DigitPeel {
        marginal,
        conditionals,
        class_of_digit,
        n_classes: keys.len(),
        sl_of_class,
        sl_reps,
    })
}

/// Slice law whose stored levels follow a slice-class sequence.
pub(crate) fn law_for_sl_sequence(m: &DigitIfs, peel: &DigitPeel, seq: &[usize]) -> SliceLaw {
    let levels: Vec<DigitDistribution> = seq.iter().map(|&s| peel.sl_reps[s].clone()).collect();
    SliceLaw::new(m.base(), levels, stationary_last_law(m))
}

fn decode(mut flat: usize, radix: usize, depth: usize) -> Vec<usize> {
    let mut seq = vec![0usize; depth];
    for slot in (0..depth).rev() {
        seq[slot] = flat % radix;
        flat /= radix;
    }
    seq
}

/// Conditioning-truncation error estimate: how much the stationary tail can
/// differ from any conditional law beyond the stored depth, accumulated over
/// the frequencies the stage touches and scaled by the dual-row count.
fn stationary_tail_spread(
    peel: &DigitPeel,
    base: u32,
    depth: usize,
    max_freq: i64,
    rows: usize,
) -> f64 {
    if peel.sl_reps.len() <= 1 {
        return 0.0;
    }
    let b = base as f64;
    let mut spread = 0.0;
    for k in (depth + 1)..=(depth + 80) {
        let eta = max_freq as f64 * b.powi(-(k as i32));
        let mut worst: f64 = 0.0;
        for a in &peel.sl_reps {
            for c in &peel.sl_reps {
                worst = worst.max((a.factor(eta) - c.factor(eta)).norm());
            }
        }
        spread += worst;
        if worst < 1e-18 {
            break;
        }
    }
    spread * 4.0 * (rows as f64 + 1.0)
}

fn digit_stage(
    m: &DigitIfs,
    input: &CylinderPoly,
    n_last: usize,
    depth: usize,
) -> Result<StageOutput> {
    let r = m.dim();
    debug_assert!(r >= 2);
    let (n_prev, prev_of_digit): (usize, Vec<usize>) = match &input.ctx {
        CtxSpace::Trivial => (1, vec![0; m.digits().len()]),
        CtxSpace::DigitClasses {
            n_classes,
            depth: d,
            class_of_digit,
        } => {
            debug_assert_eq!(*d, depth);
            debug_assert_eq!(class_of_digit.len(), m.digits().len());
            (*n_classes, class_of_digit.clone())
        }
        CtxSpace::AtomIds { .. } => {
            return Err(Error::UnsupportedMeasure(
                "atomic contexts cannot condition a digit stage".into(),
            ))
        }
    };
    let peel = digit_peel(m, &prev_of_digit)?;
    let n_new = peel.n_classes;
    let n_sl = peel.sl_reps.len();

    let contexts = (n_new as u64)
        .checked_pow(depth as u32)
        .filter(|&c| c <= MAX_CONTEXTS)
        .ok_or_else(|| {
            Error::QuadratureBudgetExceeded(format!(
                "{n_new} slice classes at prefix depth {depth} exceed the context budget"
            ))
        })? as usize;
    let aux_count = (n_sl as u64)
        .checked_pow(depth as u32)
        .filter(|&c| c <= MAX_AUX_MATRICES)
        .ok_or_else(|| {
            Error::QuadratureBudgetExceeded(format!(
                "{n_sl} slice laws at prefix depth {depth} exceed the dual-matrix budget"
            ))
        })? as usize;

    // Frequencies the stage touches.
    let max_last_freq = input
        .terms
        .keys()
        .map(|v| v[r - 1].abs())
        .max()
        .unwrap_or(0);
    let n_max_slice = n_last as i64 + max_last_freq;

    // One dual matrix per slice-class sequence.
    let aux: Vec<AuxMatrix> = (0..aux_count)
        .into_par_iter()
        .map(|flat| {
            let seq = decode(flat, n_sl, depth);
            let law = law_for_sl_sequence(m, &peel, &seq);
            let table = MomentTable::build(&law, n_max_slice as usize, MOMENT_EPS)?;
            aux_matrix(&table, n_last)
        })
        .collect::<Result<_>>()?;

    // Map merged-class sequences onto slice-class sequences.
    let sl_index_of: Vec<u32> = (0..contexts)
        .into_par_iter()
        .map(|flat| {
            let seq = decode(flat, n_new, depth);
            let mut sl_flat = 0usize;
            for &c in &seq {
                sl_flat = sl_flat * n_sl + peel.sl_of_class[c];
            }
            sl_flat as u32
        })
        .collect();

    // Class representatives for the transfer matrices.
    let mut rep_of_class = vec![usize::MAX; n_new];
    for (i, &c) in peel.class_of_digit.iter().enumerate() {
        if rep_of_class[c] == usize::MAX {
            rep_of_class[c] = i;
        }
    }

    let base = m.base() as usize;
    let bf = m.base() as f64;
    let stat = stationary_last_law(m);
    let ctx_out = CtxSpace::DigitClasses {
        n_classes: n_new,
        depth,
        class_of_digit: peel.class_of_digit.clone(),
    };
    let mut per_order: Vec<CylinderPoly> = (0..=n_last)
        .map(|_| CylinderPoly::zero_like(ctx_out.clone()))
        .collect();

    for (freq, table) in &input.terms {
        let nu_last = freq[r - 1];
        let nu_rest: Vec<i64> = freq[..r - 1].to_vec();
        for j in 0..=n_last {
            let m_freq = nu_last - j as i64;
            // Per-level transfer matrices Phi_k[a][s] at this frequency.
            let phi: Vec<Vec<Complex64>> = (1..=depth)
                .map(|k| {
                    let scale = bf.powi(-(k as i32));
                    let mut mat = vec![czero(); n_new * n_prev];
                    for (a, mat_row) in (0..n_new).zip(mat.chunks_mut(n_prev)) {
                        let rho_idx = rep_of_class[a];
                        let rho = &peel.marginal.digits()[rho_idx];
                        let law = &peel.conditionals[rho_idx];
                        for n in 0..base {
                            let p = law.probs()[n];
                            if p == 0.0 {
                                continue;
                            }
                            let mut full = rho.clone();
                            full.push(n as u32);
                            let di = m
                                .digits()
                                .binary_search(&full)
                                .expect("supported digit extends");
                            let s = prev_of_digit[di];
                            mat_row[s] += p * Complex64::from_polar(
                                1.0,
                                std::f64::consts::TAU * m_freq as f64 * n as f64 * scale,
                            );
                        }
                    }
                    mat
                })
                .collect();

            // Contract the input table through the levels.
            let transferred = contract_digit_levels(table, n_prev, n_new, depth, &phi);
            // Stationary mass beyond the stored depth.
            let tail = tail_moment(&stat, depth, j as i64 - nu_last, MOMENT_EPS)?;

            for (n, out) in per_order.iter_mut().enumerate().skip(j) {
                let slot = out.entry(nu_rest.clone());
                for (sigma, value) in transferred.iter().enumerate() {
                    let a = &aux[sl_index_of[sigma] as usize];
                    slot[sigma] += a.entry(n, j).conj() * tail * value;
                }
            }
        }
    }

    let quad_error = stationary_tail_spread(&peel, m.base(), depth, n_max_slice, n_last);
    Ok(StageOutput {
        marginal: Measure::Digit(peel.marginal),
        per_order,
        quad_error,
    })
}

/// Apply the per-level transfer matrices to a class-sequence table.
/// Level 1 is the most significant axis of the flat index.
fn contract_digit_levels(
    table: &[Complex64],
    n_prev: usize,
    n_new: usize,
    depth: usize,
    phi: &[Vec<Complex64>],
) -> Vec<Complex64> {
    debug_assert_eq!(table.len(), n_prev.pow(depth as u32));
    let mut cur = table.to_vec();
    for k in 1..=depth {
        let lead = n_new.pow((k - 1) as u32);
        let trail = n_prev.pow((depth - k) as u32);
        let mat = &phi[k - 1];
        let mut next = vec![czero(); lead * n_new * trail];
        for l in 0..lead {
            for a in 0..n_new {
                for s in 0..n_prev {
                    let w = mat[a * n_prev + s];
                    if w.re == 0.0 && w.im == 0.0 {
                        continue;
                    }
                    let src = (l * n_prev + s) * trail;
                    let dst = (l * n_new + a) * trail;
                    for t in 0..trail {
                        next[dst + t] += w * cur[src + t];
                    }
                }
            }
        }
        cur = next;
    }
    cur
}

fn atomic_stage(m: &AtomicMeasure, input: &CylinderPoly, n_last: usize) -> Result<StageOutput> {
    let r = m.dim();
    debug_assert!(r >= 2);
    let keep: Vec<usize> = (0..r - 1).collect();
    let marginal = m.marginal(&keep)?;
    let prev_of_atom: Vec<usize> = match &input.ctx {
        CtxSpace::Trivial => vec![0; m.points().len()],
        CtxSpace::AtomIds { count } => {
            debug_assert_eq!(*count, m.points().len());
            (0..*count).collect()
        }
        CtxSpace::DigitClasses { .. } => {
            return Err(Error::UnsupportedMeasure(
                "digit contexts cannot condition an atomic stage".into(),
            ))
        }
    };

    // Per marginal atom: slice atoms with their source index in the full list.
    struct Fiber {
        aux: AuxMatrix,
        values: Vec<f64>,  // slice positions
        weights: Vec<f64>, // conditional weights
        sources: Vec<usize>,
    }
    let max_last_freq = input
        .terms
        .keys()
        .map(|v| v[r - 1].abs())
        .max()
        .unwrap_or(0);
    let n_max_slice = n_last + max_last_freq as usize;

    let fibers: Vec<Fiber> = (0..marginal.points().len())
        .map(|u| {
            let slice = atomic_slice(m, u)?;
            let base_point = &marginal.points()[u];
            let mut sources = Vec::new();
            for p in slice.points() {
                let mut full = base_point.clone();
                full.push(p[0]);
                let idx = m
                    .points()
                    .binary_search_by(|probe| probe.partial_cmp(&full).expect("finite"))
                    .map_err(|_| Error::InvalidMeasure("fiber atom not found".into()))?;
                sources.push(idx);
            }
            let meas = Measure::Atomic(slice.clone());
            let moments = MomentTable::build(&meas, n_max_slice, MOMENT_EPS)?;
            let aux = aux_matrix(&moments, n_last)?;
            Ok(Fiber {
                aux,
                values: slice.points().iter().map(|p| p[0]).collect(),
                weights: slice.weights().to_vec(),
                sources,
            })
        })
        .collect::<Result<_>>()?;

    let ctx_out = CtxSpace::AtomIds {
        count: marginal.points().len(),
    };
    let mut per_order: Vec<CylinderPoly> = (0..=n_last)
        .map(|_| CylinderPoly::zero_like(ctx_out.clone()))
        .collect();

    for (freq, table) in &input.terms {
        let nu_last = freq[r - 1];
        let nu_rest: Vec<i64> = freq[..r - 1].to_vec();
        for j in 0..=n_last {
            let m_freq = (nu_last - j as i64) as f64;
            // inner_u = sum_v q_uv e^{2 pi i (nu_r - j) s_v} T[source]
            let inner: Vec<Complex64> = fibers
                .iter()
                .map(|f| {
                    let mut acc = czero();
                    for ((&x, &q), &src) in f.values.iter().zip(&f.weights).zip(&f.sources) {
                        acc += q
                            * Complex64::from_polar(1.0, std::f64::consts::TAU * m_freq * x)
                            * table[prev_of_atom[src]];
                    }
                    acc
                })
                .collect();
            for (n, out) in per_order.iter_mut().enumerate().skip(j) {
                let slot = out.entry(nu_rest.clone());
                for (u, f) in fibers.iter().enumerate() {
                    slot[u] += f.aux.entry(n, j).conj() * inner[u];
                }
            }
        }
    }

    Ok(StageOutput {
        marginal: Measure::Atomic(marginal),
        per_order,
        quad_error: 0.0,
    })
}

fn product_stage(p: &ProductMeasure, input: &CylinderPoly, n_last: usize) -> Result<StageOutput> {
    let r = p.dim();
    if !matches!(input.ctx, CtxSpace::Trivial) {
        return Err(Error::UnsupportedMeasure(
            "product stages carry trivial contexts".into(),
        ));
    }
    let last = p.factors().last().expect("nonempty product").clone();
    let keep: Vec<usize> = (0..r - 1).collect();
    let marginal = Measure::Product(p.clone()).marginal(&keep)?;

    let max_last_freq = input
        .terms
        .keys()
        .map(|v| v[r - 1].abs())
        .max()
        .unwrap_or(0);
    let n_max_slice = n_last + max_last_freq as usize;
    let moments = MomentTable::build(&last, n_max_slice, MOMENT_EPS)?;
    let aux = aux_matrix(&moments, n_last)?;

    let mut per_order: Vec<CylinderPoly> = (0..=n_last)
        .map(|_| CylinderPoly::zero_like(CtxSpace::Trivial))
        .collect();
    for (freq, table) in &input.terms {
        let nu_last = freq[r - 1];
        let nu_rest: Vec<i64> = freq[..r - 1].to_vec();
        for j in 0..=n_last {
            // <e_{nu_r}, e_j> = mu_hat(j - nu_r) for the factor measure
            let pairing = moments.get(j as i64 - nu_last)?;
            for (n, out) in per_order.iter_mut().enumerate().skip(j) {
                out.entry(nu_rest.clone())[0] += aux.entry(n, j).conj() * pairing * table[0];
            }
        }
    }

    Ok(StageOutput {
        marginal,
        per_order,
        quad_error: 0.0,
    })
}

/// Final one-dimensional integration: dual coefficients of a cylinder
/// polynomial against the last marginal.
pub(crate) fn final_stage(
    m: &Measure,
    input: &CylinderPoly,
    n_max: usize,
    depth: usize,
) -> Result<Vec<Complex64>> {
    debug_assert_eq!(m.dim(), 1);
    let max_freq = input.terms.keys().map(|v| v[0].abs()).max().unwrap_or(0);
    let table_range = n_max + max_freq as usize;
    let moments = MomentTable::build(m, table_range, MOMENT_EPS)?;
    let aux = aux_matrix(&moments, n_max)?;

    // <F, e_j> for each j, resolving the context dependence.
    let mut against = vec![czero(); n_max + 1];
    match (&input.ctx, m) {
        (CtxSpace::Trivial, _) => {
            for (freq, table) in &input.terms {
                for (j, slot) in against.iter_mut().enumerate() {
                    *slot += table[0] * moments.get(j as i64 - freq[0])?;
                }
            }
        }
        (
            CtxSpace::DigitClasses {
                n_classes,
                depth: d,
                class_of_digit,
            },
            Measure::Digit(dm),
        ) => {
            debug_assert_eq!(*d, depth);
            let law = dm.coordinate_digit_law(0);
            let bf = dm.base() as f64;
            for (freq, table) in &input.terms {
                for (j, slot) in against.iter_mut().enumerate() {
                    let m_freq = freq[0] - j as i64;
                    // psi_k[s] = sum_{digit in class s} w e^{2 pi i M digit / b^k}
                    let psi: Vec<Vec<Complex64>> = (1..=depth)
                        .map(|k| {
                            let scale = bf.powi(-(k as i32));
                            let mut v = vec![czero(); *n_classes];
                            for (i, digit) in dm.digits().iter().enumerate() {
                                v[class_of_digit[i]] += dm.weights()[i]
                                    * Complex64::from_polar(
                                        1.0,
                                        std::f64::consts::TAU
                                            * m_freq as f64
                                            * digit[0] as f64
                                            * scale,
                                    );
                            }
                            v
                        })
                        .collect();
                    let contracted = contract_to_scalar(table, *n_classes, depth, &psi);
                    let tail = tail_moment(&law, depth, -m_freq, MOMENT_EPS)?;
                    *slot += contracted * tail;
                }
            }
        }
        (CtxSpace::AtomIds { count }, Measure::Atomic(am)) => {
            debug_assert_eq!(*count, am.points().len());
            for (freq, table) in &input.terms {
                for (j, slot) in against.iter_mut().enumerate() {
                    let m_freq = (freq[0] - j as i64) as f64;
                    let mut acc = czero();
                    for (i, (p, &w)) in am.points().iter().zip(am.weights()).enumerate() {
                        acc += w
                            * Complex64::from_polar(1.0, std::f64::consts::TAU * m_freq * p[0])
                            * table[i];
                    }
                    *slot += acc;
                }
            }
        }
        _ => {
            return Err(Error::UnsupportedMeasure(
                "context space does not match the final marginal".into(),
            ))
        }
    }

    Ok((0..=n_max)
        .map(|n| {
            let mut acc = czero();
            for (j, v) in against.iter().enumerate().take(n + 1) {
                acc += aux.entry(n, j).conj() * v;
            }
            acc
        })
        .collect())
}

/// Fold a class-sequence table against per-level vectors down to a scalar.
fn contract_to_scalar(
    table: &[Complex64],
    n_classes: usize,
    depth: usize,
    psi: &[Vec<Complex64>],
) -> Complex64 {
    let mut cur = table.to_vec();
    for k in 1..=depth {
        let trail = n_classes.pow((depth - k) as u32);
        let v = &psi[k - 1];
        let mut next = vec![czero(); trail];
        for (s, &w) in v.iter().enumerate() {
            if w.re == 0.0 && w.im == 0.0 {
                continue;
            }
            let src = s * trail;
            for t in 0..trail {
                next[t] += w * cur[src + t];
            }
        }
        cur = next;
    }
    cur[0]
}
