//! Property tests for the structural invariants: constructor
//! canonicalization, moment symmetries, dual-matrix consistency, and
//! classification stability under relabeling.

use num_complex::Complex64;
use proptest::prelude::*;

use singfour::classify::classify;
use singfour::kaczmarz::{aux_matrix, MOMENT_EPS};
use singfour::measure::{AtomicMeasure, DigitIfs, Measure, MomentTable};
use singfour::trig::TrigPoly;

/// Random digit IFS: base 2..=4, a nonempty digit subset per dimension,
/// positive rational-ish weights normalized to 1.
fn digit_ifs_strategy(dim: usize) -> impl Strategy<Value = DigitIfs> {
    (2u32..=4)
        .prop_flat_map(move |base| {
            let digit = proptest::collection::vec(0..base, dim);
            let digits = proptest::collection::vec(digit, 1..=6);
            let weights = proptest::collection::vec(1u32..=16, 6);
            (Just(base), digits, weights)
        })
        .prop_map(move |(base, digits, raw_weights)| {
            let n = digits.len();
            let total: u32 = raw_weights[..n].iter().sum();
            let weights: Vec<f64> = raw_weights[..n]
                .iter()
                .map(|&w| w as f64 / total as f64)
                .collect();
            // Constructor may still reject a weight sum off by > 1e-12;
            // rationals with a common denominator keep it exact enough.
            DigitIfs::new(base, dim, digits, weights).expect("valid random IFS")
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn digit_ifs_canonical_under_input_permutation(
        m in digit_ifs_strategy(2),
        seed in 0u64..1000,
    ) {
        // Shuffling the (digit, weight) pairs cannot change the measure.
        let mut pairs: Vec<(Vec<u32>, f64)> = m
            .digits()
            .iter()
            .cloned()
            .zip(m.weights().iter().cloned())
            .collect();
        let n = pairs.len();
        for i in (1..n).rev() {
            let j = (singfour::rng::word(seed, 0, i as u64) % (i as u64 + 1)) as usize;
            pairs.swap(i, j);
        }
        let (digits, weights) = pairs.into_iter().unzip();
        let rebuilt = DigitIfs::new(m.base(), 2, digits, weights).unwrap();
        prop_assert_eq!(m.digits(), rebuilt.digits());
        prop_assert_eq!(m.weights(), rebuilt.weights());
    }

    #[test]
    fn moments_conjugate_symmetric_and_bounded(
        m in digit_ifs_strategy(1),
        n in -24i64..=24,
    ) {
        let meas = Measure::Digit(m);
        let (v, e) = meas.moment_int(&[n], 1e-12).unwrap();
        let (w, f) = meas.moment_int(&[-n], 1e-12).unwrap();
        prop_assert!((w - v.conj()).norm() <= 2.0 * (e + f) + 1e-14);
        prop_assert!(v.norm() <= 1.0 + e + 1e-14);
    }

    #[test]
    fn aux_matrix_is_unit_triangular_and_consistent(
        m in digit_ifs_strategy(1),
    ) {
        let meas = Measure::Digit(m);
        let table = MomentTable::build(&meas, 12, MOMENT_EPS).unwrap();
        let aux = aux_matrix(&table, 12).unwrap();
        for (r, row) in aux.rows().iter().enumerate() {
            prop_assert_eq!(row.len(), r + 1);
            prop_assert_eq!(row[r], Complex64::new(1.0, 0.0));
        }
        prop_assert!(aux.consistency_residual(&table).unwrap() <= 1e-10);
    }

    #[test]
    fn classify_stable_under_digit_relabeling(
        m in digit_ifs_strategy(2),
        seed in 0u64..1000,
    ) {
        let report = classify(&m);
        let mut pairs: Vec<(Vec<u32>, f64)> = m
            .digits()
            .iter()
            .cloned()
            .zip(m.weights().iter().cloned())
            .collect();
        let n = pairs.len();
        for i in (1..n).rev() {
            let j = (singfour::rng::word(seed, 1, i as u64) % (i as u64 + 1)) as usize;
            pairs.swap(i, j);
        }
        let (digits, weights) = pairs.into_iter().unzip();
        let rebuilt = DigitIfs::new(m.base(), 2, digits, weights).unwrap();
        let again = classify(&rebuilt);
        prop_assert_eq!(
            report.overall_slice_singular,
            again.overall_slice_singular
        );
        for (a, b) in report.coordinates.iter().zip(&again.coordinates) {
            prop_assert_eq!(a.verdict, b.verdict);
            prop_assert_eq!(&a.reduced, &b.reduced);
        }
    }

    #[test]
    fn trig_poly_algebra_matches_pointwise(
        coeffs in proptest::collection::vec((-8i64..=8, -1.0f64..1.0, -1.0f64..1.0), 1..5),
        shift in -3i64..=3,
        x in 0.0f64..1.0,
    ) {
        let f = TrigPoly::from_terms(
            1,
            coeffs
                .iter()
                .map(|&(n, re, im)| (vec![n], Complex64::new(re, im))),
        )
        .unwrap();
        let g = TrigPoly::exponential(vec![2]);
        // (f + g)(x) = f(x) + g(x)
        let sum = f.add(&g);
        prop_assert!((sum.eval(&[x]) - (f.eval(&[x]) + g.eval(&[x]))).norm() < 1e-12);
        // shift multiplies by the exponential
        let shifted = f.shift(&[shift]);
        let phase = Complex64::from_polar(1.0, std::f64::consts::TAU * shift as f64 * x);
        prop_assert!((shifted.eval(&[x]) - phase * f.eval(&[x])).norm() < 1e-12);
    }

    #[test]
    fn atomic_merges_duplicates_exactly(
        w in 1u32..=12,
    ) {
        // The same atom listed twice merges into one with the summed weight.
        let total = (2 * w + 8) as f64;
        let a = AtomicMeasure::new(
            1,
            vec![vec![0.25], vec![0.25], vec![0.75]],
            vec![w as f64 / total, w as f64 / total, 8.0 / total],
        )
        .unwrap();
        prop_assert_eq!(a.points().len(), 2);
        let merged = 2.0 * (w as f64 / total);
        prop_assert!((a.weights()[0] - merged).abs() < 1e-15);
    }
}
