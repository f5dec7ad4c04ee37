//! Kaczmarz dual sequences for the nonnegative-frequency exponentials.
//!
//! Against a probability measure with moments `mu_hat`, the dual (auxiliary)
//! system is defined by
//!
//! ```text
//! g_0 = e_0,    g_n = e_n - sum_{k<n} <e_n, e_k> g_k,
//! ```
//!
//! with `<e_n, e_k> = mu_hat(k - n)`. Writing `g_n = sum_{j<=n} a_{n,j} e_j`
//! yields a unit lower triangular coefficient matrix `A` characterized by
//! `T A = I`, where `T` is the lower triangular Toeplitz matrix with entries
//! `T_{n,j} = conj(mu_hat(n - j))`. Rows are produced by forward
//! substitution, never by explicit inversion.
//!
//! The same recursion applied per Rokhlin slice gives the slice dual
//! sequences, and in operator form the sliced system is diagonal over slice
//! contexts: the strictly lower block `M` acts as multiplication by the
//! slice moment `gamma_hat(n - j)`, and the matrix `U` solving
//! `(I + M)(I + U) = I` acts as multiplication by the negated slice inner
//! function. `operator_kaczmarz_report` materializes those scalar fields at
//! finite truncation and reports the identity residual together with a
//! partial-isometry defect for `U`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{atomic_slice, chaos_digits, slice_law, Measure, MomentTable, Slice};
use crate::trig::TrigPoly;

/// Default moment tolerance used when building tables internally.
pub const MOMENT_EPS: f64 = 1e-13;

/// Unit lower triangular coefficient matrix of a dual sequence.
///
/// Row `n` holds the coefficients `a_{n,0..=n}` expanding `g_n` in the
/// exponentials `e_0..=e_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxMatrix {
    source: String,
    rows: Vec<Vec<Complex64>>,
}

impl AuxMatrix {
    /// Matrix order (N + 1 for truncation order N).
    pub fn order(&self) -> usize {
        self.rows.len()
    }

    /// Coefficient rows, row `n` of length `n + 1`.
    pub fn rows(&self) -> &[Vec<Complex64>] {
        &self.rows
    }

    /// Entry `a_{n,j}` (zero above the diagonal).
    pub fn entry(&self, n: usize, j: usize) -> Complex64 {
        if j > n {
            Complex64::new(0.0, 0.0)
        } else {
            self.rows[n][j]
        }
    }

    /// Label of the generating moment table.
    pub fn source(&self) -> &str {
        &self.source
    }

    /// Row `n` as a trig polynomial in one variable.
    pub fn row_poly(&self, n: usize) -> TrigPoly {
        TrigPoly::from_terms(
            1,
            self.rows[n]
                .iter()
                .enumerate()
                .map(|(j, &c)| (vec![j as i64], c)),
        )
        .expect("row frequencies are valid")
    }

    /// Max-entry residual of `T A - I` against the generating moments.
    pub fn consistency_residual(&self, moments: &MomentTable) -> Result<f64> {
        let n = self.order();
        let mut worst = 0.0f64;
        for row in 0..n {
            for col in 0..=row {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in col..=row {
                    acc += moments.get((row - k) as i64)?.conj() * self.rows[k][col];
                }
                let want = if row == col { 1.0 } else { 0.0 };
                worst = worst.max((acc - want).norm());
            }
        }
        Ok(worst)
    }

    /// Squared L2 norm of `g_n` under the generating moments
    /// (`row . Gram . row^H` with `Gram_{j,k} = mu_hat(k - j)`).
    pub fn row_norm_sq(&self, n: usize, moments: &MomentTable) -> Result<f64> {
        let row = &self.rows[n];
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &aj) in row.iter().enumerate() {
            for (k, &ak) in row.iter().enumerate() {
                acc += aj * ak.conj() * moments.get((k as i64) - (j as i64))?;
            }
        }
        Ok(acc.re)
    }
}

/// Dual coefficient matrix of order `n_max + 1` by forward substitution.
///
/// Requires moments for |frequency| <= n_max.
pub fn aux_matrix(moments: &MomentTable, n_max: usize) -> Result<AuxMatrix> {
    if moments.n_max() < n_max {
        return Err(Error::MissingMoment(n_max as i64));
    }
    let mut rows: Vec<Vec<Complex64>> = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut row = vec![Complex64::new(0.0, 0.0); n + 1];
        row[n] = Complex64::new(1.0, 0.0);
        for k in 0..n {
            // <e_n, e_k> = mu_hat(k - n)
            let ip = moments.get(k as i64 - n as i64)?;
            if ip.re != 0.0 || ip.im != 0.0 {
                for j in 0..=k {
                    row[j] -= ip * rows[k][j];
                }
            }
        }
        rows.push(row);
    }
    Ok(AuxMatrix {
        source: moments.source().to_string(),
        rows,
    })
}

/// Dual matrix of a slice measure, through its moment function.
pub fn slice_aux(slice: &Slice, n_max: usize) -> Result<AuxMatrix> {
    let table = match slice {
        Slice::Law(law) => MomentTable::build(law, n_max, MOMENT_EPS)?,
        Slice::Exact(m) => MomentTable::build(m, n_max, MOMENT_EPS)?,
    };
    aux_matrix(&table, n_max)
}

/// Expansion coefficients `<f, g_n>` for `n = 0..=n_max` against the dual
/// matrix generated by `moments`.
///
/// `<f, g_n> = sum_{j<=n} conj(a_{n,j}) <f, e_j>` with
/// `<f, e_j> = sum_v f_v mu_hat(j - v)`.
pub fn dual_coefficients(
    moments: &MomentTable,
    aux: &AuxMatrix,
    f: &TrigPoly,
) -> Result<Vec<Complex64>> {
    if f.dim() != 1 {
        return Err(Error::InvalidMeasure(
            "dual coefficients need a one-dimensional trig polynomial".into(),
        ));
    }
    // <f, e_j> for every j in the matrix range.
    let mut against_exponentials = Vec::with_capacity(aux.order());
    for j in 0..aux.order() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (v, c) in f.terms() {
            acc += c * moments.get(j as i64 - v[0])?;
        }
        against_exponentials.push(acc);
    }
    Ok((0..aux.order())
        .map(|n| {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..=n {
                acc += aux.entry(n, j).conj() * against_exponentials[j];
            }
            acc
        })
        .collect())
}

/// Parseval partial-sum diagnostics for one function.
#[derive(Debug, Clone)]
pub struct ParsevalReport {
    /// Coefficients `<f, g_n>`.
    pub coefficients: Vec<Complex64>,
    /// Partial sums `s_n = sum_{k<=n} |<f, g_k>|^2`.
    pub partial_sums: Vec<f64>,
    /// `||f||^2` computed from the same moment table.
    pub norm_sq: f64,
    /// `||f||^2 - s_N`.
    pub defect: f64,
}

/// Partial sums of squared dual coefficients and the Parseval defect.
pub fn parseval_defect(
    moments: &MomentTable,
    f: &TrigPoly,
    n_max: usize,
) -> Result<ParsevalReport> {
    let aux = aux_matrix(moments, n_max)?;
    let coefficients = dual_coefficients(moments, &aux, f)?;
    let mut partial_sums = Vec::with_capacity(coefficients.len());
    let mut acc = 0.0;
    for c in &coefficients {
        acc += c.norm_sqr();
        partial_sums.push(acc);
    }
    // ||f||^2 = sum_{v,k} f_v conj(f_k) mu_hat(k - v)
    let mut norm = Complex64::new(0.0, 0.0);
    for (v, cv) in f.terms() {
        for (k, ck) in f.terms() {
            norm += cv * ck.conj() * moments.get(k[0] - v[0])?;
        }
    }
    let defect = norm.re - acc;
    Ok(ParsevalReport {
        coefficients,
        partial_sums,
        norm_sq: norm.re,
        defect,
    })
}

/// Options for the operator-level diagnostics.
#[derive(Debug, Clone)]
pub struct OperatorReportOptions {
    /// Number of sampled slice contexts (digit IFS measures).
    pub slice_count: usize,
    /// Digit depth of each sampled conditioning prefix.
    pub prefix_depth: usize,
    /// Seed for the prefix sampler.
    pub seed: u64,
    /// Truncation order for the partial-isometry defect of `U`.
    pub isometry_order: usize,
}

impl Default for OperatorReportOptions {
    fn default() -> Self {
        Self {
            slice_count: 64,
            prefix_depth: 12,
            seed: 0,
            isometry_order: 1024,
        }
    }
}

/// Scalar field data for one slice context.
#[derive(Debug, Clone, Serialize)]
pub struct SliceFieldDiagnostics {
    /// Human-readable context label.
    pub context: String,
    /// Slice moments `gamma_hat(0..=N)`; these are the diagonals of the
    /// lower Toeplitz block `I + M`.
    pub symbol: Vec<[f64; 2]>,
    /// Coefficients of the inverse symbol; `I + U` is the lower Toeplitz
    /// block they generate, and `-U` carries the slice inner function.
    pub inverse_symbol: Vec<[f64; 2]>,
    /// Max-entry residual of `(I + M)(I + U) - I` for this context.
    pub residual: f64,
    /// `|1 - sum_{m>=1} |b_m|^2|` at the isometry truncation order.
    pub isometry_defect: f64,
}

/// Finite-truncation diagnostics of the operator Kaczmarz identity.
#[derive(Debug, Clone, Serialize)]
pub struct OperatorKaczmarzReport {
    /// Block order N + 1.
    pub order: usize,
    /// Worst residual of `(I + M)(I + U) - I` over contexts.
    pub residual: f64,
    /// Worst partial-isometry defect over contexts.
    pub isometry_defect: f64,
    /// Per-context fields.
    pub slices: Vec<SliceFieldDiagnostics>,
}

impl OperatorKaczmarzReport {
    /// Materialize the dense `I + M` and `I + U` blocks for one context.
    pub fn dense_blocks(&self, ctx: usize) -> (Vec<Vec<Complex64>>, Vec<Vec<Complex64>>) {
        let s = &self.slices[ctx];
        let n = self.order;
        let toeplitz = |sym: &[[f64; 2]]| -> Vec<Vec<Complex64>> {
            (0..n)
                .map(|r| {
                    (0..n)
                        .map(|c| {
                            if c > r {
                                Complex64::new(0.0, 0.0)
                            } else {
                                let [re, im] = sym[r - c];
                                Complex64::new(re, im)
                            }
                        })
                        .collect()
                })
                .collect()
        };
        (toeplitz(&s.symbol), toeplitz(&s.inverse_symbol))
    }
}

fn slice_contexts(m: &Measure, opts: &OperatorReportOptions) -> Result<Vec<(String, Slice)>> {
    match m {
        Measure::Digit(d) => {
            let keep: Vec<usize> = (0..d.dim() - 1).collect();
            let marg = d.marginal(&keep)?;
            let prefixes = chaos_digits(&marg, opts.slice_count, opts.prefix_depth, opts.seed);
            prefixes
                .into_iter()
                .enumerate()
                .map(|(i, prefix)| {
                    Ok((
                        format!("digit_prefix[{i}]"),
                        Slice::Law(slice_law(d, &prefix)?),
                    ))
                })
                .collect()
        }
        Measure::Product(p) => Ok(vec![(
            "product_tail".to_string(),
            Slice::Exact(p.factors().last().expect("nonempty").clone()),
        )]),
        Measure::Atomic(a) => {
            let keep: Vec<usize> = (0..a.dim() - 1).collect();
            let marg = a.marginal(&keep)?;
            (0..marg.points().len().min(opts.slice_count))
                .map(|i| {
                    Ok((
                        format!("marginal_atom[{i}]"),
                        Slice::Exact(Measure::Atomic(atomic_slice(a, i)?)),
                    ))
                })
                .collect()
        }
    }
}

/// Diagnostics for the truncated operator identity `(I + M)(I + U) = I`.
///
/// The operators act diagonally over slice contexts, so the blocks are
/// lower Toeplitz in the slice moments; each context is processed
/// independently and the worst residual and defect are reported.
pub fn operator_kaczmarz_report(
    m: &Measure,
    n_max: usize,
    opts: &OperatorReportOptions,
) -> Result<OperatorKaczmarzReport> {
    if m.dim() < 2 {
        return Err(Error::DimensionTooSmall {
            got: m.dim(),
            need: 2,
        });
    }
    let contexts = slice_contexts(m, opts)?;
    let deep = opts.isometry_order.max(n_max);
    let slices: Result<Vec<SliceFieldDiagnostics>> = contexts
        .into_par_iter()
        .map(|(context, slice)| {
            // One-sided moments gamma_hat(0..=deep).
            let mut symbol = Vec::with_capacity(deep + 1);
            for mfreq in 0..=deep {
                let (v, _) = slice.moment(mfreq as i64, MOMENT_EPS)?;
                symbol.push(v);
            }
            // Inverse symbol by triangular reciprocal recursion.
            let mut inv = vec![Complex64::new(1.0, 0.0)];
            for mfreq in 1..=deep {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 1..=mfreq {
                    acc += symbol[k] * inv[mfreq - k];
                }
                inv.push(-acc);
            }
            // Residual of the truncated product over the report order.
            let n = n_max + 1;
            let mut residual = 0.0f64;
            for r in 0..n {
                for c in 0..=r {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in c..=r {
                        acc += symbol[r - k] * inv[k - c];
                    }
                    let want = if r == c { 1.0 } else { 0.0 };
                    residual = residual.max((acc - want).norm());
                }
            }
            // Partial-isometry defect: U acts as multiplication by the
            // negated slice inner function b; an isometry has unit
            // coefficient energy.
            let energy: f64 = inv[1..].iter().map(|c| c.norm_sqr()).sum();
            let isometry_defect = (1.0 - energy).abs();
            Ok(SliceFieldDiagnostics {
                context,
                symbol: symbol.iter().map(|c| [c.re, c.im]).collect(),
                inverse_symbol: inv.iter().map(|c| [c.re, c.im]).collect(),
                residual,
                isometry_defect,
            })
        })
        .collect();
    let slices = slices?;
    let residual = slices.iter().map(|s| s.residual).fold(0.0, f64::max);
    let isometry_defect = slices.iter().map(|s| s.isometry_defect).fold(0.0, f64::max);
    Ok(OperatorKaczmarzReport {
        order: n_max + 1,
        residual,
        isometry_defect,
        slices,
    })
}
