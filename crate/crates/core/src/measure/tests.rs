use std::f64::consts::TAU;

use num_complex::Complex64;

use super::*;
use crate::canonical::{cantor, cantor2_ifs, half_atomic, lebesgue_ifs_1d, menger, point_mass_1d};

/// Frozen reference: Cantor measure moment at frequency 1, computed by a
/// 60-level truncated product, a cosine-product closed form, and a 1e7
/// chaos-game Monte Carlo run (agreement within 3 standard errors).
const CANTOR_MOMENT_1: f64 = 0.371_437_356_708_765_43;

#[test]
fn moment_zero_frequency_is_exactly_one() {
    for m in [
        Measure::Digit(cantor()),
        Measure::Atomic(half_atomic()),
        Measure::Digit(menger()),
        Measure::Product(
            ProductMeasure::new(vec![
                Measure::Digit(cantor()),
                Measure::Atomic(half_atomic()),
            ])
            .unwrap(),
        ),
    ] {
        let xi = vec![0.0; m.dim()];
        let (v, e) = m.moment(&xi, 1e-12).unwrap();
        assert_eq!(v, Complex64::new(1.0, 0.0));
        assert_eq!(e, 0.0);
    }
}

#[test]
fn lebesgue_ifs_moments_vanish_at_nonzero_integers() {
    // Oracle: Riemann sum over 10^6 uniform grid points. The geometric sum
    // (1/M) sum_j e^{-2 pi i n j / M} is exactly zero for 0 < n < M.
    let grid: usize = 1_000_000;
    for n in [1i64, 2, 3, 7] {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..grid {
            acc += Complex64::from_polar(1.0, -TAU * n as f64 * j as f64 / grid as f64);
        }
        let oracle = acc / grid as f64;
        assert!(oracle.norm() < 1e-9, "Riemann oracle not ~0: {oracle}");

        let m = Measure::Digit(lebesgue_ifs_1d());
        let (v, _) = m.moment_int(&[n], 1e-12).unwrap();
        assert!(
            (v - oracle).norm() < 1e-12,
            "mu_hat({n}) = {v} vs oracle {oracle}"
        );
    }
}

#[test]
fn cantor_moment_matches_frozen_reference() {
    let m = Measure::Digit(cantor());
    let (v, e) = m.moment_int(&[1], 1e-13).unwrap();
    assert!(e <= 1e-13);
    assert!((v.re - CANTOR_MOMENT_1).abs() < 1e-13, "got {v}");
    assert!(v.im.abs() < 1e-13);
}

#[test]
fn moment_respects_requested_tolerance_chain() {
    let m = Measure::Digit(cantor());
    let (loose, el) = m.moment_int(&[5], 1e-4).unwrap();
    let (tight, et) = m.moment_int(&[5], 1e-13).unwrap();
    assert!(el <= 1e-4 && et <= 1e-13);
    assert!((loose - tight).norm() <= el + et);
}

#[test]
fn moment_depth_cap_reports_nonconvergence() {
    let m = Measure::Digit(cantor());
    let err = m.moment(&[1.0], 1e-300).unwrap_err();
    assert!(matches!(
        err,
        crate::error::Error::NonconvergentTolerance { .. }
    ));
}

#[test]
fn moment_conjugate_symmetry() {
    let m = Measure::Digit(cantor2_ifs());
    for xi in [[1i64, 2], [3, -4], [0, 5]] {
        let (v, e) = m.moment_int(&xi, 1e-12).unwrap();
        let neg: Vec<i64> = xi.iter().map(|n| -n).collect();
        let (w, f) = m.moment_int(&neg, 1e-12).unwrap();
        assert!((w - v.conj()).norm() <= 2.0 * (e + f) + 1e-14);
    }
}

#[test]
fn moment_modulus_bounded() {
    let m = Measure::Digit(menger());
    for n1 in -3i64..=3 {
        for n2 in -3i64..=3 {
            let (v, e) = m.moment_int(&[n1, n2, 1], 1e-12).unwrap();
            assert!(v.norm() <= 1.0 + e + 1e-14);
        }
    }
}

#[test]
fn refinement_identity_on_real_frequencies() {
    // mu_hat(xi) = m(xi/b) * mu_hat(xi/b) with m the one-level factor.
    for m in [cantor(), menger(), cantor2_ifs()] {
        let meas = Measure::Digit(m.clone());
        let b = m.base() as f64;
        for raw in [[0.5f64, 31.0, 64.0], [7.25, 1.0, 3.5]] {
            let xi: Vec<f64> = raw[..m.dim()].to_vec();
            let (full, e1) = meas.moment(&xi, 1e-12).unwrap();
            let scaled: Vec<f64> = xi.iter().map(|v| v / b).collect();
            let (sub, e2) = meas.moment(&scaled, 1e-12).unwrap();
            let factor = m.level_factor(&scaled);
            assert!(
                (full - factor * sub).norm() <= e1 + e2 + 1e-13,
                "refinement failed at {xi:?}"
            );
        }
    }
}

#[test]
fn product_moment_multiplies_factors() {
    let p = Measure::Product(
        ProductMeasure::new(vec![Measure::Digit(cantor()), Measure::Digit(cantor())]).unwrap(),
    );
    let (v, _) = p.moment_int(&[1, 1], 1e-12).unwrap();
    let want = CANTOR_MOMENT_1 * CANTOR_MOMENT_1;
    assert!((v.re - want).abs() < 1e-12);
}

#[test]
fn digit_ifs_merges_duplicate_digits() {
    let m = DigitIfs::new(3, 1, vec![vec![0], vec![2], vec![0]], vec![0.25, 0.5, 0.25]).unwrap();
    assert_eq!(m.digits(), &[vec![0], vec![2]]);
    assert_eq!(m.weights(), &[0.5, 0.5]);
}

#[test]
fn digit_ifs_rejects_bad_input() {
    assert!(DigitIfs::new(1, 1, vec![vec![0]], vec![1.0]).is_err());
    assert!(DigitIfs::new(3, 1, vec![vec![3]], vec![1.0]).is_err());
    assert!(DigitIfs::new(3, 1, vec![vec![0], vec![1]], vec![0.5, 0.6]).is_err());
    assert!(DigitIfs::new(3, 1, vec![vec![0]], vec![-1.0]).is_err());
}

#[test]
fn chaos_cantor_depth_one_hits_first_level() {
    let pts = chaos_sample(&cantor(), 4, 1, 11);
    for p in pts {
        let x = p[0];
        assert!(x == 0.0 || (x - 2.0 / 3.0).abs() < 1e-15, "got {x}");
    }
}

#[test]
fn chaos_point_mass_is_constant_zero() {
    let m = point_mass_1d();
    for p in chaos_sample(&m, 8, 6, 5) {
        assert_eq!(p[0], 0.0);
    }
}

#[test]
fn chaos_menger_digits_have_at_most_one_middle_entry() {
    // Every level-k digit triple of the sponge has at most one coordinate
    // equal to 1.
    let digits = chaos_digits(&menger(), 200, 12, 3);
    for sample in digits {
        for level in sample {
            let ones = level.iter().filter(|&&d| d == 1).count();
            assert!(ones <= 1, "level digits {level:?}");
        }
    }
}

#[test]
fn chaos_is_deterministic_in_seed() {
    let a = chaos_sample(&cantor(), 16, 10, 99);
    let b = chaos_sample(&cantor(), 16, 10, 99);
    let c = chaos_sample(&cantor(), 16, 10, 100);
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn chaos_law_of_large_numbers() {
    // Empirical averages of e^{-2 pi i xi x} over 1e6 samples track the
    // moment within 5e-3 at a fixed seed.
    let m = cantor();
    let meas = Measure::Digit(m.clone());
    let pts = chaos_sample(&m, 1_000_000, 40, 2024);
    for n in [1i64, 2, 5, 8] {
        let mut acc = Complex64::new(0.0, 0.0);
        for p in &pts {
            acc += Complex64::from_polar(1.0, -TAU * n as f64 * p[0]);
        }
        let avg = acc / pts.len() as f64;
        let (want, _) = meas.moment_int(&[n], 1e-12).unwrap();
        assert!(
            (avg - want).norm() < 5e-3,
            "LLN failed at {n}: {avg} vs {want}"
        );
    }
}

#[test]
fn marginal_menger_weights() {
    // All three coordinate marginals reduce to base-3 weights (8, 4, 8)/20.
    let m = menger();
    for coord in 0..3 {
        let law = m.coordinate_digit_law(coord);
        assert_eq!(law.probs(), &[0.4, 0.2, 0.4]);
        let marg = m.marginal(&[coord]).unwrap();
        assert_eq!(marg.digits(), &[vec![0], vec![1], vec![2]]);
        assert_eq!(marg.weights(), &[0.4, 0.2, 0.4]);
    }
}

#[test]
fn marginal_of_product_is_factor() {
    let a = Measure::Digit(cantor());
    let b = Measure::Atomic(half_atomic());
    let p = Measure::Product(ProductMeasure::new(vec![a.clone(), b]).unwrap());
    assert_eq!(p.marginal(&[0]).unwrap(), a);
}

#[test]
fn marginal_cantor2_is_cantor() {
    // Hand enumeration of the 4 digit pairs: both kept coordinates merge to
    // digits {0, 2} with weights (1/2, 1/2).
    let m = cantor2_ifs();
    for keep in [[0usize], [1]] {
        let marg = m.marginal(&keep).unwrap();
        assert_eq!(marg, cantor());
    }
}

#[test]
fn marginal_rejects_bad_keep() {
    let m = Measure::Digit(menger());
    assert!(m.marginal(&[]).is_err());
    assert!(m.marginal(&[0, 1, 2]).is_err());
    assert!(m.marginal(&[1, 0]).is_err());
    assert!(m.marginal(&[4]).is_err());
}

#[test]
fn slice_law_menger_enumeration_oracle() {
    // Exhaustive enumeration of the 20 sponge digit triples.
    let m = menger();

    // Conditioning pair containing a 1: last digit uniform on {0, 2}.
    let law = slice_law(&m, &[vec![1, 0]]).unwrap();
    assert_eq!(law.levels()[0].probs(), &[0.5, 0.0, 0.5]);

    // Conditioning pair without a 1: last digit uniform on {0, 1, 2}.
    let law = slice_law(&m, &[vec![0, 2]]).unwrap();
    let probs = law.levels()[0].probs();
    for p in probs {
        assert!((p - 1.0 / 3.0).abs() < 1e-15);
    }

    // Independent oracle: recompute both conditionals by scanning triples.
    for rho in [[1u32, 0u32], [0, 2]] {
        let mut mass = 0.0;
        let mut per = [0.0f64; 3];
        for (d, &w) in m.digits().iter().zip(m.weights()) {
            if d[0] == rho[0] && d[1] == rho[1] {
                per[d[2] as usize] += w;
                mass += w;
            }
        }
        let law = slice_law(&m, &[rho.to_vec()]).unwrap();
        for (n, &p) in per.iter().enumerate() {
            assert!((law.levels()[0].probs()[n] - p / mass).abs() < 1e-15);
        }
    }

    // Stationary tail is the last-coordinate marginal law.
    let law = slice_law(&m, &[]).unwrap();
    assert_eq!(law.tail().probs(), &[0.4, 0.2, 0.4]);
}

#[test]
fn slice_law_rejects_unsupported_prefix() {
    let m = cantor2_ifs();
    let err = slice_law(&m, &[vec![1]]).unwrap_err();
    assert!(matches!(
        err,
        crate::error::Error::PrefixOutsideSupport { level: 1, .. }
    ));
}

#[test]
fn slice_of_product_is_last_factor() {
    let last = Measure::Atomic(half_atomic());
    let p = Measure::Product(
        ProductMeasure::new(vec![Measure::Digit(cantor()), last.clone()]).unwrap(),
    );
    let s = slice_of(&p, &SliceContext::Any).unwrap();
    assert_eq!(s, Slice::Exact(last));
}

#[test]
fn slice_moment_of_product_slice_matches_factor() {
    // A product's digit-level slice law (all levels stationary) reproduces
    // the factor's moments.
    let p2 = DigitIfs::new(
        3,
        2,
        vec![vec![0, 0], vec![0, 2], vec![2, 0], vec![2, 2]],
        vec![0.25; 4],
    )
    .unwrap();
    let law = slice_law(&p2, &[vec![0], vec![2], vec![0]]).unwrap();
    let cantor_m = Measure::Digit(cantor());
    for n in [1i64, 2, -3] {
        let (a, ea) = law.moment(n, 1e-12).unwrap();
        let (b, eb) = cantor_m.moment_int(&[n], 1e-12).unwrap();
        assert!((a - b).norm() <= ea + eb + 1e-14);
    }
}

#[test]
fn atomic_slice_conditional() {
    // Atoms on a single vertical line: the slice is the renormalized fiber.
    let a = AtomicMeasure::new(
        2,
        vec![vec![0.25, 0.0], vec![0.25, 0.5], vec![0.75, 0.125]],
        vec![0.3, 0.3, 0.4],
    )
    .unwrap();
    let s = atomic_slice(&a, 0).unwrap();
    assert_eq!(s.points(), &[vec![0.0], vec![0.5]]);
    assert_eq!(s.weights(), &[0.5, 0.5]);
}

#[test]
fn trig_inner_basics() {
    let one1 = TrigPoly::one(1);
    for m in [
        Measure::Digit(cantor()),
        Measure::Atomic(half_atomic()),
        Measure::Digit(lebesgue_ifs_1d()),
    ] {
        let (v, _) = m.trig_inner(&one1, &one1, 1e-12).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-13);
    }

    // Lebesgue: distinct exponentials are orthogonal.
    let leb = Measure::Digit(lebesgue_ifs_1d());
    let e1 = TrigPoly::exponential(vec![1]);
    let e0 = TrigPoly::one(1);
    let (v, _) = leb.trig_inner(&e1, &e0, 1e-12).unwrap();
    assert!(v.norm() < 1e-13);

    // Point mass at 0: every exponential evaluates to 1.
    let delta = Measure::Atomic(AtomicMeasure::new(1, vec![vec![0.0]], vec![1.0]).unwrap());
    for (n, k) in [(0i64, 0i64), (3, 1), (5, -2)] {
        let (v, _) = delta
            .trig_inner(
                &TrigPoly::exponential(vec![n]),
                &TrigPoly::exponential(vec![k]),
                1e-12,
            )
            .unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }
}

#[test]
fn config_round_trip_and_rejection() {
    let text = r#"{"kind":"digit_ifs","base":3,"dim":1,"digits":[[0],[2]],"weights":[0.5,0.5]}"#;
    let m = measure_from_json(text).unwrap();
    assert_eq!(m, Measure::Digit(cantor()));
    let again = measure_from_json(&measure_to_json(&m)).unwrap();
    assert_eq!(again, m);

    let density = r#"{"kind":"density_product","factors":[],"density":{"kind":"poly"}}"#;
    let err = measure_from_json(density).unwrap_err();
    assert!(matches!(err, crate::error::Error::UnsupportedMeasure(_)));

    assert!(measure_from_json("{not json").is_err());
}

#[test]
fn moment_table_invariants() {
    let m = Measure::Digit(cantor());
    let table = MomentTable::build(&m, 16, 1e-12).unwrap();
    assert_eq!(table.get(0).unwrap(), Complex64::new(1.0, 0.0));
    for n in -16i64..=16 {
        let v = table.get(n).unwrap();
        let e = table.bound(n).unwrap();
        assert!(v.norm() <= 1.0 + e + 1e-14);
        let sym = table.get(-n).unwrap();
        assert!((sym - v.conj()).norm() <= 2.0 * e + 1e-14);
    }
    assert!(matches!(
        table.get(17),
        Err(crate::error::Error::MissingMoment(17))
    ));
}
