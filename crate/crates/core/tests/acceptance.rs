//! Acceptance suite: one test per release criterion, each printing a
//! pass/fail line (run with `--nocapture` to see them).
//!
//! Criteria pin exact tolerances; the canonical measures come from the
//! shipped configs so the JSON surface is exercised too.

use std::time::Instant;

use num_complex::Complex64;

use singfour::canonical::{cantor, delta_zero, half_atomic, lebesgue2_ifs, menger};
use singfour::classify::classify;
use singfour::expansion::{analyze, reconstruction_error, QuadratureSpec};
use singfour::kaczmarz::{aux_matrix, parseval_defect, MOMENT_EPS};
use singfour::measure::{measure_from_json, Measure, MomentTable};
use singfour::rng;
use singfour::transforms::{
    boundary_limit_test, inner_function, nct_1d, nct_d, nct_equality_test, nct_staged,
    symmetry_reflection_test, EqualityVerdict,
};
use singfour::trig::TrigPoly;
use singfour::verify::run_suite;

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn report(num: u32, name: &str, detail: &str, start: Instant) {
    println!(
        "criterion {num:02} ({name}): PASS — {detail} [{:.2}s]",
        start.elapsed().as_secs_f64()
    );
}

fn config(name: &str) -> Measure {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/");
    let text = std::fs::read_to_string(format!("{path}{name}")).expect("config readable");
    measure_from_json(&text).expect("config parses")
}

/// Seeded basket of trig polynomials with nonnegative frequencies.
fn basket(dim: usize, seed: u64, count: usize, max_freq: f64) -> Vec<TrigPoly> {
    (0..count)
        .map(|i| {
            let mut p = TrigPoly::zero(dim);
            for t in 0..3 {
                let freq: Vec<i64> = (0..dim)
                    .map(|d| {
                        (rng::unit(seed, (i * 4 + t) as u64, d as u64) * max_freq).floor() as i64
                    })
                    .collect();
                let re = rng::unit(seed, (i * 4 + t) as u64, 40) * 2.0 - 1.0;
                let im = rng::unit(seed, (i * 4 + t) as u64, 41) * 2.0 - 1.0;
                p.add_term(freq, c64(re, im));
            }
            p
        })
        .collect()
}

#[test]
fn c01_kaczmarz_consistency() {
    let start = Instant::now();
    let menger_marginal = Measure::Digit(menger().marginal(&[0]).unwrap());
    let mut worst = 0.0f64;
    for m in [
        Measure::Digit(cantor()),
        Measure::Atomic(half_atomic()),
        Measure::Atomic(delta_zero()),
        menger_marginal,
    ] {
        let table = MomentTable::build(&m, 64, MOMENT_EPS).unwrap();
        let aux = aux_matrix(&table, 64).unwrap();
        let residual = aux.consistency_residual(&table).unwrap();
        assert!(
            residual <= 1e-10,
            "criterion 01 FAIL: residual {residual} for {m:?}"
        );
        worst = worst.max(residual);
    }
    report(
        1,
        "kaczmarz consistency",
        &format!("max T*A-I residual {worst:.2e} at N=64"),
        start,
    );
}

#[test]
fn c02_exact_atomic_oracle() {
    let start = Instant::now();
    let m = config("atoms4.json");
    let q = QuadratureSpec::PrefixExact { depth: 4 };
    // The four exponentials span every trig poly with frequencies in
    // {0,1}^2; random combinations exercise the span.
    let mut fs: Vec<TrigPoly> = Vec::new();
    for a in 0..=1i64 {
        for b in 0..=1i64 {
            fs.push(TrigPoly::exponential(vec![a, b]));
        }
    }
    for i in 0..5u64 {
        let mut p = TrigPoly::zero(2);
        for (t, f) in fs[..4].to_vec().iter().enumerate() {
            let re = rng::unit(2, i, t as u64) * 2.0 - 1.0;
            let im = rng::unit(3, i, t as u64) * 2.0 - 1.0;
            p = p.add(&f.scale(c64(re, im)));
        }
        fs.push(p);
    }
    let mut worst_err = 0.0f64;
    let mut worst_energy = 0.0f64;
    for f in &fs {
        let rep = reconstruction_error(&m, f, &[1, 1], &q).unwrap();
        assert!(
            rep.error <= 1e-12,
            "criterion 02 FAIL: reconstruction error {} for {f:?}",
            rep.error
        );
        let t = analyze(&m, f, &[1, 1], &q).unwrap();
        let (norm_sq, _) = m.norm_sq(f, 1e-13).unwrap();
        let gap = (t.energy() - norm_sq).abs();
        assert!(gap <= 1e-12, "criterion 02 FAIL: energy gap {gap}");
        worst_err = worst_err.max(rep.error);
        worst_energy = worst_energy.max(gap);
    }
    report(
        2,
        "exact atomic oracle",
        &format!("round-trip error {worst_err:.2e}, Parseval gap {worst_energy:.2e}"),
        start,
    );
}

#[test]
fn c03_parseval_bessel() {
    let start = Instant::now();

    // One-dimensional Cantor at orders 8 vs 32.
    let m1 = config("cantor.json");
    let table = MomentTable::build(&m1, 41, MOMENT_EPS).unwrap();
    for f in basket(1, 100, 10, 7.0) {
        let rep = parseval_defect(&table, &f, 32).unwrap();
        for w in rep.partial_sums.windows(2) {
            assert!(w[1] >= w[0] - 1e-15, "criterion 03 FAIL: sums decrease");
        }
        assert!(
            *rep.partial_sums.last().unwrap() <= rep.norm_sq * (1.0 + 1e-8),
            "criterion 03 FAIL: Bessel bound broken"
        );
        let defect_8 = rep.norm_sq - rep.partial_sums[8];
        let defect_32 = rep.norm_sq - rep.partial_sums[32];
        assert!(
            defect_32 < defect_8,
            "criterion 03 FAIL: 1-d defect did not shrink ({defect_8} -> {defect_32})"
        );
    }

    // Planar Cantor x Cantor with prefix-exact quadrature at depth 12.
    let m2 = config("cantor2.json");
    let q = QuadratureSpec::PrefixExact { depth: 12 };
    for f in basket(2, 200, 10, 5.0) {
        let t = analyze(&m2, &f, &[16, 16], &q).unwrap();
        let (norm_sq, _) = m2.norm_sq(&f, 1e-12).unwrap();
        assert!(
            t.energy() <= norm_sq * (1.0 + 1e-8),
            "criterion 03 FAIL: 2-d Bessel bound broken"
        );
        let defect_4 = norm_sq - t.rect_energy(&[4, 4]);
        let defect_16 = norm_sq - t.rect_energy(&[16, 16]);
        assert!(
            defect_16 < defect_4,
            "criterion 03 FAIL: 2-d defect did not shrink ({defect_4} -> {defect_16})"
        );
    }
    report(
        3,
        "parseval/bessel",
        "partial sums monotone, bounded; defects shrink at (32,)/(16,16)",
        start,
    );
}

#[test]
fn c04_iterated_order_convergence() {
    let start = Instant::now();
    let m = config("cantor2.json");
    let f = TrigPoly::exponential(vec![1, 1]);

    // Prefix-exact: the coefficient-energy defect column is nonincreasing
    // within 1e-9; the reconstruction error column decreases end to end.
    let rep = reconstruction_error(
        &m,
        &f,
        &[16, 16],
        &QuadratureSpec::PrefixExact { depth: 12 },
    )
    .unwrap();
    for w in rep.sweep.windows(2) {
        assert!(
            w[1].defect <= w[0].defect + 1e-9,
            "criterion 04 FAIL: prefix defect rose at {:?}",
            w[1].orders
        );
    }
    let first = rep.sweep.first().unwrap().error;
    assert!(
        rep.error < first,
        "criterion 04 FAIL: error did not improve ({first} -> {})",
        rep.error
    );

    // Monte Carlo: both columns nonincreasing within three standard errors.
    let rep_mc = reconstruction_error(
        &m,
        &f,
        &[8, 8],
        &QuadratureSpec::MonteCarlo {
            samples: 30_000,
            seed: 4,
        },
    )
    .unwrap();
    for w in rep_mc.sweep.windows(2) {
        let band = 3.0 * (w[0].error_sq_se + w[1].error_sq_se);
        assert!(
            w[1].error_sq <= w[0].error_sq + band,
            "criterion 04 FAIL: mc error rose beyond 3 se at {:?}",
            w[1].orders
        );
        let dband = 3.0 * (w[0].defect_se + w[1].defect_se);
        assert!(
            w[1].defect <= w[0].defect + dband,
            "criterion 04 FAIL: mc defect rose beyond 3 se"
        );
    }
    report(
        4,
        "iterated-order convergence",
        &format!(
            "prefix defect monotone; error {:.3} -> {:.3}; mc within 3 se",
            first, rep.error
        ),
        start,
    );
}

#[test]
fn c05_inner_function_identities() {
    let start = Instant::now();
    // Closed forms: b(w) = w for the point mass, b(w) = w^2 for the
    // two-atom measure, to 1e-12.
    let b_delta = inner_function(&Measure::Atomic(delta_zero()), 66).unwrap();
    let b_half = inner_function(&Measure::Atomic(half_atomic()), 66).unwrap();
    for n in 0..=66usize {
        let want_delta = if n == 1 { 1.0 } else { 0.0 };
        let want_half = if n == 2 { 1.0 } else { 0.0 };
        assert!(
            (b_delta.coeff(n) - c64(want_delta, 0.0)).norm() <= 1e-12,
            "criterion 05 FAIL: delta coefficient {n}"
        );
        assert!(
            (b_half.coeff(n) - c64(want_half, 0.0)).norm() <= 1e-12,
            "criterion 05 FAIL: half-atomic coefficient {n}"
        );
    }

    let mut worst_grid = 0.0f64;
    let mut worst_match = 0.0f64;
    for m in [
        Measure::Atomic(delta_zero()),
        Measure::Atomic(half_atomic()),
        config("cantor.json"),
    ] {
        // b(0) = 0 within 1e-10 and the contraction bound on a 32x32 grid.
        let b = inner_function(&m, 400).unwrap();
        assert!(b.coeff(0).norm() <= 1e-10, "criterion 05 FAIL: b(0) != 0");
        for ir in 1..=32 {
            let r = 0.95 * ir as f64 / 32.0;
            for it in 0..32 {
                let w = Complex64::from_polar(r, std::f64::consts::TAU * it as f64 / 32.0);
                let excess = b.eval(w).unwrap().norm() - w.norm();
                assert!(
                    excess <= 1e-6,
                    "criterion 05 FAIL: |b| exceeds |w| by {excess} at {w}"
                );
                worst_grid = worst_grid.max(excess);
            }
        }
        // Coefficients of the transform of e^{-2 pi i x} match b(w)/w at N=64.
        let b65 = inner_function(&m, 65).unwrap();
        let v = nct_1d(&m, &TrigPoly::exponential(vec![-1]), 64).unwrap();
        for n in 0..=64usize {
            let dev = (v.tensor().get(&[n]) - b65.coeff(n + 1)).norm();
            assert!(
                dev <= 1e-9,
                "criterion 05 FAIL: shift identity at {n}: {dev}"
            );
            worst_match = worst_match.max(dev);
        }
    }
    report(
        5,
        "inner-function identities",
        &format!("closed forms exact; grid excess {worst_grid:.1e}; b/w match {worst_match:.1e}"),
        start,
    );
}

#[test]
fn c06_backward_shift_identity() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (mi, m) in [
        Measure::Atomic(delta_zero()),
        Measure::Atomic(half_atomic()),
        config("cantor.json"),
    ]
    .iter()
    .enumerate()
    {
        for t in 0..20u64 {
            let f = {
                let mut p = TrigPoly::zero(1);
                for term in 0..4u64 {
                    let freq = (rng::unit(900 + mi as u64, t, term) * 12.0).floor() as i64 - 3;
                    let re = rng::unit(901 + mi as u64, t, term) * 2.0 - 1.0;
                    let im = rng::unit(902 + mi as u64, t, term) * 2.0 - 1.0;
                    p.add_term(vec![freq], c64(re, im));
                }
                p
            };
            let n_max = 24usize;
            let lhs = nct_1d(m, &f, n_max + 1).unwrap();
            let (mean, _) = m.trig_inner(&f, &TrigPoly::one(1), 1e-12).unwrap();
            let shifted = f.sub(&TrigPoly::constant(1, mean)).shift(&[-1]);
            let rhs = nct_1d(m, &shifted, n_max).unwrap();
            for n in 0..=n_max {
                let dev = (lhs.tensor().get(&[n + 1]) - rhs.tensor().get(&[n])).norm();
                assert!(
                    dev <= 1e-9,
                    "criterion 06 FAIL: measure {mi}, poly {t}, coeff {n}: {dev}"
                );
                worst = worst.max(dev);
            }
        }
    }
    report(
        6,
        "backward-shift identity",
        &format!("20 random polynomials x 3 measures, worst deviation {worst:.1e}"),
        start,
    );
}

#[test]
fn c07_equality_dichotomy() {
    let start = Instant::now();
    let fs = vec![
        TrigPoly::exponential(vec![1, 0]),
        TrigPoly::exponential(vec![1, 1]),
        TrigPoly::exponential(vec![2, 1]),
        TrigPoly::from_terms(
            2,
            [(vec![0, 2], c64(1.0, 0.5)), (vec![1, 2], c64(-0.5, 0.0))],
        )
        .unwrap(),
    ];
    let q = QuadratureSpec::PrefixExact { depth: 12 };
    for m in [config("cantor2.json"), config("atoms4.json")] {
        let rep = nct_equality_test(&m, &fs, &[8, 8], &q).unwrap();
        assert!(
            rep.verdict == EqualityVerdict::Equal && rep.max_deviation <= 1e-8,
            "criterion 07 FAIL: expected equality, got {rep:?}"
        );
    }
    let m = config("nonproduct2.json");
    let rep = nct_equality_test(&m, &fs, &[8, 8], &q).unwrap();
    assert!(
        rep.verdict == EqualityVerdict::Unequal && rep.max_deviation >= 1e-3,
        "criterion 07 FAIL: expected inequality, got {rep:?}"
    );
    report(
        7,
        "equality dichotomy",
        &format!(
            "products equal; nonproduct deviates by {:.2e}",
            rep.max_deviation
        ),
        start,
    );
}

#[test]
fn c08_symmetry_reflection() {
    let start = Instant::now();
    let fs = vec![
        TrigPoly::exponential(vec![1, 0]),
        TrigPoly::from_terms(
            2,
            [(vec![2, 1], c64(1.0, -0.5)), (vec![0, 1], c64(0.25, 0.0))],
        )
        .unwrap(),
    ];
    let q = QuadratureSpec::PrefixExact { depth: 12 };
    let dev_prod = symmetry_reflection_test(&config("atoms4.json"), &fs, &[6, 6], &q).unwrap();
    assert!(
        dev_prod <= 1e-8,
        "criterion 08 FAIL: product deviation {dev_prod}"
    );
    let dev_cantor2 = symmetry_reflection_test(&config("cantor2.json"), &fs, &[6, 6], &q).unwrap();
    assert!(
        dev_cantor2 <= 1e-8,
        "criterion 08 FAIL: planar Cantor deviation {dev_cantor2}"
    );
    let dev_np = symmetry_reflection_test(&config("nonproduct2.json"), &fs, &[8, 8], &q).unwrap();
    assert!(
        dev_np <= 1e-4,
        "criterion 08 FAIL: nonproduct deviation {dev_np}"
    );
    report(
        8,
        "symmetry reflection",
        &format!("deviations: product {dev_prod:.1e}, nonproduct {dev_np:.1e}"),
        start,
    );
}

#[test]
fn c09_menger_classification() {
    let start = Instant::now();
    let m = config("menger.json");
    let Measure::Digit(d) = &m else {
        panic!("criterion 09 FAIL: menger config is a digit IFS")
    };
    let rep = classify(d);
    for coord in &rep.coordinates {
        assert_eq!(
            coord.reduced,
            vec![(0, 0.4), (1, 0.2), (2, 0.4)],
            "criterion 09 FAIL: reduced weights not exact"
        );
    }
    assert!(
        rep.overall_slice_singular,
        "criterion 09 FAIL: not singular"
    );
    let leb = classify(&lebesgue2_ifs());
    assert!(
        !leb.overall_slice_singular,
        "criterion 09 FAIL: Lebesgue product misclassified"
    );
    report(
        9,
        "menger classification",
        "reduced weights exactly (0.4, 0.2, 0.4); overall singular; Lebesgue control false",
        start,
    );
}

#[test]
fn c10_boundary_behavior() {
    let start = Instant::now();
    let m = config("atoms4.json");
    let f = TrigPoly::exponential(vec![1, 1]);
    let rep = boundary_limit_test(
        &m,
        &f,
        &[0.5, 0.9, 0.99],
        &[1, 1],
        &QuadratureSpec::PrefixExact { depth: 4 },
        1e-9,
    )
    .unwrap();
    let d: Vec<f64> = rep.diagonal.iter().map(|r| r.error).collect();
    assert!(
        d[1] < d[0] && d[2] < d[1],
        "criterion 10 FAIL: diagonal not strictly decreasing: {d:?}"
    );
    assert!(
        d[2] <= 0.05 * d[0],
        "criterion 10 FAIL: r=0.99 error {} vs 0.05 * {}",
        d[2],
        d[0]
    );
    report(
        10,
        "boundary behavior",
        &format!("diagonal errors {:.4} > {:.4} > {:.4}", d[0], d[1], d[2]),
        start,
    );
}

#[test]
fn c11_menger_composition() {
    let start = Instant::now();
    let m = config("menger.json");
    let f = TrigPoly::exponential(vec![1, 1, 1]);
    let q = QuadratureSpec::PrefixExact { depth: 10 };
    let direct = nct_d(&m, &f, &[6, 6, 6], &q).unwrap();
    let staged = nct_staged(&m, &f, &[6, 6, 6], &q).unwrap();
    let mut worst = 0.0f64;
    for flat in 0..direct.tensor().data().len() {
        let dev = (direct.tensor().data()[flat] - staged.tensor().data()[flat]).norm();
        assert!(
            dev <= 1e-6,
            "criterion 11 FAIL: composition deviates by {dev} at {flat}"
        );
        worst = worst.max(dev);
    }
    let (norm_sq, _) = m.norm_sq(&f, 1e-12).unwrap();
    let tol = direct.tensor().meta().error_estimate.max(1e-8);
    assert!(
        direct.energy() <= norm_sq * (1.0 + tol),
        "criterion 11 FAIL: Bessel bound broken ({} vs {})",
        direct.energy(),
        norm_sq
    );
    report(
        11,
        "d=3 composition",
        &format!(
            "staged vs direct deviation {worst:.1e}; energy {:.4} <= {norm_sq:.4}",
            direct.energy()
        ),
        start,
    );
}

#[test]
fn c12_determinism_across_thread_counts() {
    let start = Instant::now();
    let m = config("cantor2.json");

    let artifacts: Vec<(String, Vec<Complex64>)> = [1usize, 4, 8]
        .iter()
        .map(|&threads| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .expect("pool");
            pool.install(|| {
                let verify = run_suite(&m, "all", 7).unwrap();
                let verify_text = serde_json::to_string_pretty(&verify).expect("report serializes");
                let tensor = analyze(
                    &m,
                    &TrigPoly::exponential(vec![1, 1]),
                    &[6, 6],
                    &QuadratureSpec::MonteCarlo {
                        samples: 20_000,
                        seed: 7,
                    },
                )
                .unwrap();
                (verify_text, tensor.data().to_vec())
            })
        })
        .collect();
    for other in &artifacts[1..] {
        assert_eq!(
            artifacts[0].0, other.0,
            "criterion 12 FAIL: verify artifact differs across thread counts"
        );
        assert_eq!(
            artifacts[0].1, other.1,
            "criterion 12 FAIL: mc tensor differs across thread counts"
        );
    }
    report(
        12,
        "determinism",
        "verify JSON and mc tensors byte-identical under 1, 4, 8 worker threads",
        start,
    );
}
