//! Canonical example measures used throughout the tests, docs, and the
//! shipped config files.

use crate::measure::{AtomicMeasure, DigitIfs, Measure, ProductMeasure};

/// Middle-thirds Cantor measure: base 3, digits {0, 2}, equal weights.
pub fn cantor() -> DigitIfs {
    DigitIfs::new(3, 1, vec![vec![0], vec![2]], vec![0.5, 0.5]).expect("valid")
}

/// Cantor x Cantor as a genuine 2-dim digit IFS (4 digit pairs).
pub fn cantor2_ifs() -> DigitIfs {
    DigitIfs::new(
        3,
        2,
        vec![vec![0, 0], vec![0, 2], vec![2, 0], vec![2, 2]],
        vec![0.25; 4],
    )
    .expect("valid")
}

/// Sierpinski carpet: base 3 in the plane, all digit pairs except (1, 1).
pub fn sierpinski_carpet() -> DigitIfs {
    let mut digits = Vec::new();
    for l in 0..3u32 {
        for m in 0..3u32 {
            if (l, m) != (1, 1) {
                digits.push(vec![l, m]);
            }
        }
    }
    let w = 1.0 / digits.len() as f64;
    let n = digits.len();
    DigitIfs::new(3, 2, digits, vec![w; n]).expect("valid")
}

/// Menger sponge: base 3 in space, the 20 digit triples with at most one
/// coordinate equal to 1, equal weights.
pub fn menger() -> DigitIfs {
    let mut digits = Vec::new();
    for l in 0..3u32 {
        for m in 0..3u32 {
            for n in 0..3u32 {
                let ones = [l, m, n].iter().filter(|&&d| d == 1).count();
                if ones <= 1 {
                    digits.push(vec![l, m, n]);
                }
            }
        }
    }
    assert_eq!(digits.len(), 20);
    DigitIfs::new(3, 3, digits, vec![0.05; 20]).expect("valid")
}

/// Lebesgue measure on [0,1) realized as the full base-2 digit IFS.
pub fn lebesgue_ifs_1d() -> DigitIfs {
    DigitIfs::new(2, 1, vec![vec![0], vec![1]], vec![0.5, 0.5]).expect("valid")
}

/// Planar Lebesgue measure as the full base-2 digit IFS on [0,1)^2.
pub fn lebesgue2_ifs() -> DigitIfs {
    DigitIfs::new(
        2,
        2,
        vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]],
        vec![0.25; 4],
    )
    .expect("valid")
}

/// The two-atom measure (delta_0 + delta_{1/2}) / 2; its moments alternate
/// between 1 and 0.
pub fn half_atomic() -> AtomicMeasure {
    AtomicMeasure::new(1, vec![vec![0.0], vec![0.5]], vec![0.5, 0.5]).expect("valid")
}

/// Unit point mass at the origin as a single-digit IFS (all digits zero).
pub fn point_mass_1d() -> DigitIfs {
    DigitIfs::new(2, 1, vec![vec![0]], vec![1.0]).expect("valid")
}

/// Unit point mass at the origin as an atomic measure.
pub fn delta_zero() -> AtomicMeasure {
    AtomicMeasure::new(1, vec![vec![0.0]], vec![1.0]).expect("valid")
}

/// The 4-atom product ((delta_0 + delta_{1/2})/2) x ((delta_0 + delta_{1/2})/2).
pub fn four_atom_product() -> Measure {
    Measure::Product(
        ProductMeasure::new(vec![
            Measure::Atomic(half_atomic()),
            Measure::Atomic(half_atomic()),
        ])
        .expect("valid"),
    )
}

/// A symmetric planar digit IFS that is not a product measure: digits
/// {(0,0), (2,2), (0,2), (2,0)} with weights (0.4, 0.4, 0.1, 0.1).
pub fn nonproduct_symmetric() -> DigitIfs {
    DigitIfs::new(
        3,
        2,
        vec![vec![0, 0], vec![2, 2], vec![0, 2], vec![2, 0]],
        vec![0.4, 0.4, 0.1, 0.1],
    )
    .expect("valid")
}
