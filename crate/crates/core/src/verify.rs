//! Named invariant suites runnable against any measure config.
//!
//! Each suite evaluates module invariants at fixed seeds and truncations
//! and reports one pass/fail row per check. All computations are
//! deterministic functions of (config, seed), independent of thread count,
//! so repeated runs produce byte-identical reports.

use num_complex::Complex64;
use serde::Serialize;

use crate::classify::{classify, slice_singularity_gate};
use crate::error::{Error, Result};
use crate::expansion::{analyze, reconstruction_error, QuadratureSpec};
use crate::kaczmarz::{aux_matrix, parseval_defect, MOMENT_EPS};
use crate::measure::{chaos_sample, Measure, MomentTable};
use crate::rng;
use crate::transforms::{
    herglotz_consistency, inner_function, model_space_residual, nct_1d, nct_d, nct_staged,
};
use crate::trig::TrigPoly;

/// One invariant check row.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// The measured quantity (residual, deviation, defect).
    pub value: f64,
    /// The threshold it was compared against.
    pub threshold: f64,
}

impl Check {
    fn leq(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            pass: value <= threshold,
            value,
            threshold,
        }
    }

    fn holds(name: impl Into<String>, pass: bool) -> Self {
        Check {
            name: name.into(),
            pass,
            value: if pass { 0.0 } else { 1.0 },
            threshold: 0.0,
        }
    }
}

/// Suite report; serializes deterministically.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// Names accepted by `run_suite`.
pub const SUITES: &[&str] = &[
    "moments",
    "kaczmarz",
    "parseval",
    "expansion",
    "transforms",
    "classify",
    "disintegration",
    "all",
];

/// Run one named invariant suite against a measure.
pub fn run_suite(m: &Measure, suite: &str, seed: u64) -> Result<VerifyReport> {
    let checks = match suite {
        "moments" => moments_suite(m)?,
        "kaczmarz" => kaczmarz_suite(m)?,
        "parseval" => parseval_suite(m, seed)?,
        "expansion" => expansion_suite(m, seed)?,
        "transforms" => transforms_suite(m, seed)?,
        "classify" => classify_suite(m)?,
        "disintegration" => disintegration_suite(m, seed)?,
        "all" => {
            let mut all = Vec::new();
            for s in SUITES.iter().filter(|s| **s != "all") {
                all.extend(run_suite(m, s, seed)?.checks);
            }
            all
        }
        other => {
            return Err(Error::Config(format!(
                "unknown suite {other:?}; expected one of {SUITES:?}"
            )))
        }
    };
    let pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport {
        suite: suite.to_string(),
        seed,
        checks,
        pass,
    })
}

/// Smallest eigenvalue of a Hermitian matrix by cyclic Jacobi rotations.
/// Used as the positive-semidefiniteness oracle for moment Gram matrices.
pub fn hermitian_min_eigenvalue(a: &[Vec<Complex64>]) -> f64 {
    let n = a.len();
    let mut m: Vec<Vec<Complex64>> = a.to_vec();
    for _sweep in 0..40 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(m[p][q].norm());
            }
        }
        if off < 1e-13 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p][q];
                if apq.norm() < 1e-15 {
                    continue;
                }
                // Unitary 2x2 rotation diagonalizing the (p, q) block.
                let phase = apq / apq.norm();
                let app = m[p][p].re;
                let aqq = m[q][q].re;
                let tau = (aqq - app) / (2.0 * apq.norm());
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Columns: v_p' = c v_p - s conj(phase) v_q ; v_q' = s phase v_p + c v_q
                for i in 0..n {
                    let aip = m[i][p];
                    let aiq = m[i][q];
                    m[i][p] = c * aip - s * phase.conj() * aiq;
                    m[i][q] = s * phase * aip + c * aiq;
                }
                for i in 0..n {
                    let api = m[p][i];
                    let aqi = m[q][i];
                    m[p][i] = c * api - s * phase * aqi;
                    m[q][i] = s * phase.conj() * api + c * aqi;
                }
            }
        }
    }
    (0..n).map(|i| m[i][i].re).fold(f64::INFINITY, f64::min)
}

fn one_dim_marginals(m: &Measure) -> Result<Vec<Measure>> {
    if m.dim() == 1 {
        return Ok(vec![m.clone()]);
    }
    (0..m.dim()).map(|k| m.marginal(&[k])).collect()
}

fn moments_suite(m: &Measure) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let zero = vec![0.0; m.dim()];
    let (v0, _) = m.moment(&zero, 1e-12)?;
    checks.push(Check::holds(
        "moment_zero_frequency_exact_one",
        v0 == Complex64::new(1.0, 0.0),
    ));

    // Conjugate symmetry and modulus bound over a frequency box.
    let mut sym_worst = 0.0f64;
    let mut mod_worst = 0.0f64;
    let freqs: Vec<Vec<i64>> = (0..32)
        .map(|i| {
            (0..m.dim())
                .map(|d| (rng::unit(17, i, d as u64) * 17.0).floor() as i64 - 8)
                .collect()
        })
        .collect();
    for xi in &freqs {
        let (v, e) = m.moment_int(xi, 1e-12)?;
        let neg: Vec<i64> = xi.iter().map(|n| -n).collect();
        let (w, f) = m.moment_int(&neg, 1e-12)?;
        sym_worst = sym_worst.max(((w - v.conj()).norm() - 2.0 * (e + f)).max(0.0));
        mod_worst = mod_worst.max(v.norm() - 1.0 - e);
    }
    checks.push(Check::leq("moment_conjugate_symmetry", sym_worst, 1e-13));
    checks.push(Check::leq("moment_modulus_bound", mod_worst, 1e-13));

    // Refinement identity for digit measures at real frequencies.
    if let Measure::Digit(d) = m {
        let b = d.base() as f64;
        let mut worst = 0.0f64;
        for i in 0..8u64 {
            let xi: Vec<f64> = (0..d.dim())
                .map(|c| rng::unit(23, i, c as u64) * 128.0 - 64.0)
                .collect();
            let (full, e1) = m.moment(&xi, 1e-12)?;
            let scaled: Vec<f64> = xi.iter().map(|v| v / b).collect();
            let (sub, e2) = m.moment(&scaled, 1e-12)?;
            let factor = d.level_factor(&scaled);
            worst = worst.max(((full - factor * sub).norm() - e1 - e2).max(0.0));
        }
        checks.push(Check::leq("moment_refinement_identity", worst, 1e-12));
    }

    // Gram positivity of each 1-dim marginal, N = 32.
    for (k, marg) in one_dim_marginals(m)?.iter().enumerate() {
        let n = 32usize;
        let table = MomentTable::build(marg, n, MOMENT_EPS)?;
        let gram: Vec<Vec<Complex64>> = (0..=n)
            .map(|r| {
                (0..=n)
                    .map(|c| table.get(c as i64 - r as i64).expect("in range"))
                    .collect()
            })
            .collect();
        let min_eig = hermitian_min_eigenvalue(&gram);
        checks.push(Check::leq(
            format!("moment_gram_psd_marginal_{k}"),
            (-min_eig).max(0.0),
            1e-8,
        ));
    }
    Ok(checks)
}

fn kaczmarz_suite(m: &Measure) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (k, marg) in one_dim_marginals(m)?.iter().enumerate() {
        let n = 64usize;
        let table = MomentTable::build(marg, n, MOMENT_EPS)?;
        let aux = aux_matrix(&table, n)?;
        let mut unit = true;
        for (r, row) in aux.rows().iter().enumerate() {
            unit &= row[r] == Complex64::new(1.0, 0.0);
        }
        checks.push(Check::holds(
            format!("aux_unit_diagonal_marginal_{k}"),
            unit,
        ));
        checks.push(Check::leq(
            format!("aux_toeplitz_identity_marginal_{k}"),
            aux.consistency_residual(&table)?,
            1e-10,
        ));

        // Function-form consistency at a few rows.
        let mut worst = 0.0f64;
        for n_probe in [0usize, 7, 31, 64] {
            let mut combo = TrigPoly::zero(1);
            for j in 0..=n_probe {
                let w = table.get((n_probe - j) as i64)?.conj();
                combo = combo.add(&aux.row_poly(j).scale(w));
            }
            let diff = combo.sub(&TrigPoly::exponential(vec![n_probe as i64]));
            worst = worst.max(diff.coeff_l1());
        }
        checks.push(Check::leq(
            format!("aux_function_form_marginal_{k}"),
            worst,
            1e-10,
        ));
    }

    // Operator-level identity over sampled slice contexts.
    if m.dim() >= 2 {
        let opts = crate::kaczmarz::OperatorReportOptions {
            slice_count: 16,
            isometry_order: 128,
            ..Default::default()
        };
        let report = crate::kaczmarz::operator_kaczmarz_report(m, 16, &opts)?;
        checks.push(Check::leq(
            "operator_identity_residual",
            report.residual,
            1e-8,
        ));
    }
    Ok(checks)
}

fn seeded_basket(dim: usize, seed: u64, count: usize) -> Vec<TrigPoly> {
    (0..count)
        .map(|i| {
            let mut p = TrigPoly::zero(dim);
            for t in 0..3 {
                let freq: Vec<i64> = (0..dim)
                    .map(|d| {
                        (rng::unit(seed ^ 0xA5A5, (i * 8 + t) as u64, d as u64) * 9.0).floor()
                            as i64
                    })
                    .collect();
                let re = rng::unit(seed ^ 0x5A5A, (i * 8 + t) as u64, 50) * 2.0 - 1.0;
                let im = rng::unit(seed ^ 0x5A5A, (i * 8 + t) as u64, 51) * 2.0 - 1.0;
                p.add_term(freq, Complex64::new(re, im));
            }
            p
        })
        .collect()
}

fn parseval_suite(m: &Measure, seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (k, marg) in one_dim_marginals(m)?.iter().enumerate() {
        let n = 32usize;
        let table = MomentTable::build(marg, n + 9, MOMENT_EPS)?;
        let mut monotone = true;
        let mut bound_excess = 0.0f64;
        let mut defect_floor = 0.0f64;
        for f in seeded_basket(1, seed.wrapping_add(k as u64), 6) {
            let report = parseval_defect(&table, &f, n)?;
            monotone &= report.partial_sums.windows(2).all(|w| w[1] >= w[0] - 1e-15);
            bound_excess = bound_excess
                .max(report.partial_sums.last().unwrap() - report.norm_sq * (1.0 + 1e-8));
            defect_floor = defect_floor.max(-report.defect);
        }
        checks.push(Check::holds(
            format!("parseval_partial_sums_monotone_marginal_{k}"),
            monotone,
        ));
        checks.push(Check::leq(
            format!("parseval_bessel_bound_marginal_{k}"),
            bound_excess.max(0.0),
            0.0,
        ));
        checks.push(Check::leq(
            format!("parseval_defect_floor_marginal_{k}"),
            defect_floor.max(0.0),
            1e-8,
        ));
    }
    Ok(checks)
}

fn expansion_suite(m: &Measure, seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    if !slice_singularity_gate(m) {
        checks.push(Check::holds("expansion_gate_rejects_measure", true));
        return Ok(checks);
    }
    let orders: Vec<usize> = vec![if m.dim() >= 3 { 3 } else { 6 }; m.dim()];
    let q = QuadratureSpec::PrefixExact {
        depth: if m.dim() >= 3 { 8 } else { 10 },
    };
    let basket = seeded_basket(m.dim(), seed, 3);

    // Linearity.
    let alpha = Complex64::new(0.6, -0.2);
    let beta = Complex64::new(-0.3, 0.8);
    let combo = basket[0].scale(alpha).add(&basket[1].scale(beta));
    let ta = analyze(m, &basket[0], &orders, &q)?;
    let tb = analyze(m, &basket[1], &orders, &q)?;
    let tc = analyze(m, &combo, &orders, &q)?;
    let mut lin_worst = 0.0f64;
    for flat in 0..tc.data().len() {
        lin_worst = lin_worst
            .max((tc.data()[flat] - (alpha * ta.data()[flat] + beta * tb.data()[flat])).norm());
    }
    checks.push(Check::leq("expansion_linearity", lin_worst, 1e-10));

    // Bessel bound and defect monotonicity per function. The rectangle
    // reconstruction error itself is descriptive, not monotone step by
    // step; the monotone certificate is the coefficient-energy defect.
    let mut bessel_excess = 0.0f64;
    let mut defect_monotone = true;
    let mut improves = true;
    for f in &basket {
        let t = analyze(m, f, &orders, &q)?;
        let (norm_sq, nerr) = m.norm_sq(f, 1e-12)?;
        let tol = t.meta().error_estimate.max(1e-8) + nerr;
        bessel_excess = bessel_excess.max(t.energy() - norm_sq * (1.0 + tol));
        let rep = reconstruction_error(m, f, &orders, &q)?;
        defect_monotone &= rep
            .sweep
            .windows(2)
            .all(|w| w[1].defect <= w[0].defect + 1e-12);
        let first = rep.sweep.first().expect("nonempty sweep");
        let last = rep.sweep.last().expect("nonempty sweep");
        improves &= last.defect <= first.defect;
    }
    checks.push(Check::leq(
        "expansion_bessel_bound",
        bessel_excess.max(0.0),
        0.0,
    ));
    checks.push(Check::holds("expansion_defect_monotone", defect_monotone));
    checks.push(Check::holds("expansion_sweep_improves", improves));
    Ok(checks)
}

fn transforms_suite(m: &Measure, seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (k, marg) in one_dim_marginals(m)?.iter().enumerate() {
        checks.push(Check::leq(
            format!("herglotz_consistency_marginal_{k}"),
            herglotz_consistency(marg, 32)?,
            1e-10,
        ));
        let b = inner_function(marg, 256)?;
        checks.push(Check::holds(
            format!("inner_constant_term_zero_marginal_{k}"),
            b.coeff(0) == Complex64::new(0.0, 0.0),
        ));
        let mut grid_excess = 0.0f64;
        for ir in 1..=8 {
            let r = 0.9 * ir as f64 / 8.0;
            for it in 0..8 {
                let w = Complex64::from_polar(r, std::f64::consts::TAU * it as f64 / 8.0);
                grid_excess = grid_excess.max(b.eval(w)?.norm() - w.norm());
            }
        }
        checks.push(Check::leq(
            format!("inner_contraction_bound_marginal_{k}"),
            grid_excess.max(0.0),
            1e-6,
        ));

        // Shifted-exponential identity at order 32.
        let v = nct_1d(marg, &TrigPoly::exponential(vec![-1]), 32)?;
        let b33 = inner_function(marg, 33)?;
        let mut worst = 0.0f64;
        for n in 0..=32usize {
            worst = worst.max((v.tensor().get(&[n]) - b33.coeff(n + 1)).norm());
        }
        checks.push(Check::leq(
            format!("inner_equals_shifted_transform_marginal_{k}"),
            worst,
            1e-9,
        ));

        // Backward-shift identity over a small seeded basket.
        let mut shift_worst = 0.0f64;
        for f in seeded_basket(1, seed.wrapping_add(100 + k as u64), 5) {
            let lhs = nct_1d(marg, &f, 17)?;
            let (mean, _) = marg.trig_inner(&f, &TrigPoly::one(1), 1e-12)?;
            let shifted = f.sub(&TrigPoly::constant(1, mean)).shift(&[-1]);
            let rhs = nct_1d(marg, &shifted, 16)?;
            for n in 0..=16usize {
                shift_worst =
                    shift_worst.max((lhs.tensor().get(&[n + 1]) - rhs.tensor().get(&[n])).norm());
            }
        }
        checks.push(Check::leq(
            format!("backward_shift_identity_marginal_{k}"),
            shift_worst,
            1e-9,
        ));
    }

    if m.dim() >= 2 && slice_singularity_gate(m) {
        // Staged composition agrees with the recursive transform.
        let orders: Vec<usize> = vec![if m.dim() >= 3 { 3 } else { 5 }; m.dim()];
        let q = QuadratureSpec::PrefixExact {
            depth: if m.dim() >= 3 { 8 } else { 10 },
        };
        let f = seeded_basket(m.dim(), seed ^ 0x77, 1).pop().expect("one");
        let direct = nct_d(m, &f, &orders, &q)?;
        let staged = nct_staged(m, &f, &orders, &q)?;
        let mut worst = 0.0f64;
        for flat in 0..direct.tensor().data().len() {
            worst = worst.max((direct.tensor().data()[flat] - staged.tensor().data()[flat]).norm());
        }
        checks.push(Check::leq(
            "transform_stage_composition",
            worst,
            if m.dim() >= 3 { 1e-6 } else { 1e-8 },
        ));
    }
    if m.dim() == 2 && slice_singularity_gate(m) {
        let f = seeded_basket(2, seed ^ 0x99, 1).pop().expect("one");
        let rep = model_space_residual(m, &f, 64, 8, 8, seed)?;
        let mut excess = 0.0f64;
        for ctx in &rep.per_context {
            excess = excess.max(ctx.residual - ctx.allowance);
        }
        checks.push(Check::leq(
            "model_space_residual_within_allowance",
            excess.max(0.0),
            1e-9,
        ));
    }
    Ok(checks)
}

fn classify_suite(m: &Measure) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    if let Measure::Digit(d) = m {
        let report = classify(d);
        // Verdicts commute with taking marginals.
        let mut agree = true;
        if d.dim() >= 2 {
            for k in 0..d.dim() {
                let sub = classify(&d.marginal(&[k])?);
                agree &= sub.coordinates[0].verdict == report.coordinates[k].verdict
                    && sub.coordinates[0].reduced == report.coordinates[k].reduced;
            }
        }
        checks.push(Check::holds("classify_marginal_agreement", agree));

        // Invariance under digit relabeling (reversing the digit list).
        let digits: Vec<Vec<u32>> = d.digits().iter().rev().cloned().collect();
        let weights: Vec<f64> = d.weights().iter().rev().cloned().collect();
        let relabeled = crate::measure::DigitIfs::new(d.base(), d.dim(), digits, weights)?;
        let again = classify(&relabeled);
        checks.push(Check::holds(
            "classify_relabel_invariance",
            again.overall_slice_singular == report.overall_slice_singular,
        ));
        checks.push(Check::holds(
            "classify_gate_matches_report",
            slice_singularity_gate(m) == report.overall_slice_singular,
        ));
    } else {
        checks.push(Check::holds(
            "classify_gate_defined",
            matches!(slice_singularity_gate(m), true | false),
        ));
    }
    Ok(checks)
}

fn disintegration_suite(m: &Measure, seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    if m.dim() >= 2 && slice_singularity_gate(m) {
        // Iterated slice integral of f against the constant frame function
        // equals the plain integral: c_{0..0} = <f, 1>.
        let orders = vec![0usize; m.dim()];
        let q = QuadratureSpec::PrefixExact { depth: 10 };
        let mut worst = 0.0f64;
        for f in seeded_basket(m.dim(), seed ^ 0x33, 4) {
            let t = analyze(m, &f, &orders, &q)?;
            let (direct, derr) = m.trig_inner(&f, &TrigPoly::one(m.dim()), 1e-12)?;
            worst = worst.max(((t.data()[0] - direct).norm() - derr).max(0.0));
        }
        checks.push(Check::leq("disintegration_consistency", worst, 1e-9));
    }
    if let Measure::Digit(d) = m {
        // Chaos-game law of large numbers at a reduced sample count.
        let samples = 100_000;
        let pts = chaos_sample(d, samples, 36, seed ^ 0x44);
        let mut worst = 0.0f64;
        for i in 0..4u64 {
            let xi: Vec<i64> = (0..d.dim())
                .map(|c| (rng::unit(seed ^ 0x55, i, c as u64) * 17.0).floor() as i64 - 8)
                .collect();
            let mut acc = Complex64::new(0.0, 0.0);
            for p in &pts {
                let phase: f64 = xi.iter().zip(p).map(|(&n, &x)| n as f64 * x).sum();
                acc += Complex64::from_polar(1.0, -std::f64::consts::TAU * phase);
            }
            let avg = acc / samples as f64;
            let (want, _) = m.moment_int(&xi, 1e-12)?;
            worst = worst.max((avg - want).norm());
        }
        checks.push(Check::leq("chaos_law_of_large_numbers", worst, 1.5e-2));
    }
    Ok(checks)
}
