//! Rokhlin consistency through the literal route: enumerate raw marginal
//! digit prefixes, build each slice law explicitly, and check that the
//! iterated integral reproduces the plain integral,
//!
//! ```text
//! ∫∫ f dγ^{x₁} dμ₁  =  ∫ f dμ  =  <f, 1>.
//! ```
//!
//! This never touches the class-grouped expansion machinery, so agreement
//! cross-validates it from outside.

use num_complex::Complex64;

use singfour::canonical::{cantor2_ifs, nonproduct_symmetric, sierpinski_carpet};
use singfour::measure::{slice_law, DigitIfs, Measure};
use singfour::trig::TrigPoly;

/// E[e^{2 pi i M x}] over the digit tail beyond `skip` levels of a 1-dim
/// digit measure.
fn marginal_tail(m: &DigitIfs, skip: usize, m_freq: i64) -> Complex64 {
    let b = m.base() as f64;
    let mut acc = Complex64::new(1.0, 0.0);
    for k in (skip + 1)..=(skip + 60) {
        let mut factor = Complex64::new(0.0, 0.0);
        for (digit, &w) in m.digits().iter().zip(m.weights()) {
            factor += w
                * Complex64::from_polar(
                    1.0,
                    std::f64::consts::TAU * m_freq as f64 * digit[0] as f64 * b.powi(-(k as i32)),
                );
        }
        acc *= factor;
    }
    acc
}

fn iterated_integral(m: &DigitIfs, f: &TrigPoly, depth: usize) -> Complex64 {
    let marg = m.marginal(&[0]).unwrap();
    let b = m.base() as f64;
    // Enumerate all depth-`depth` digit prefixes of the marginal.
    let mut prefixes: Vec<(Vec<Vec<u32>>, f64, f64)> = vec![(Vec::new(), 1.0, 0.0)];
    for k in 1..=depth {
        let mut next = Vec::with_capacity(prefixes.len() * marg.digits().len());
        for (prefix, weight, x) in &prefixes {
            for (digit, &w) in marg.digits().iter().zip(marg.weights()) {
                let mut longer = prefix.clone();
                longer.push(digit.clone());
                next.push((longer, weight * w, x + digit[0] as f64 * b.powi(-(k as i32))));
            }
        }
        prefixes = next;
    }

    let mut acc = Complex64::new(0.0, 0.0);
    for (prefix, weight, x1) in &prefixes {
        let law = slice_law(m, prefix).unwrap();
        for (nu, c) in f.terms() {
            // inner integral: gamma_hat(-nu_2); cylinder phase of x1 with
            // the exact marginal tail.
            let (inner, _) = law.moment(-nu[1], 1e-13).unwrap();
            let phase = Complex64::from_polar(1.0, std::f64::consts::TAU * nu[0] as f64 * x1);
            acc += weight * c * phase * marginal_tail(&marg, depth, nu[0]) * inner;
        }
    }
    acc
}

#[test]
fn iterated_integral_matches_trig_inner() {
    let f = TrigPoly::from_terms(
        2,
        [
            (vec![1, 2], Complex64::new(1.0, -0.5)),
            (vec![3, 0], Complex64::new(0.25, 0.0)),
            (vec![0, 1], Complex64::new(0.0, 0.7)),
        ],
    )
    .unwrap();

    // Product structure: the slice law is prefix-independent and the
    // enumeration is exact up to moment tolerance.
    for m in [cantor2_ifs(), sierpinski_carpet()] {
        let meas = Measure::Digit(m.clone());
        let (want, werr) = meas.trig_inner(&f, &TrigPoly::one(2), 1e-12).unwrap();
        let got = iterated_integral(&m, &f, 8);
        assert!(
            (got - want).norm() <= werr + 1e-9,
            "{m:?}: {got} vs {want}"
        );
    }

    // Genuinely prefix-dependent slices: the stationary-tail truncation
    // enters at the enumeration depth.
    let m = nonproduct_symmetric();
    let meas = Measure::Digit(m.clone());
    let (want, _) = meas.trig_inner(&f, &TrigPoly::one(2), 1e-12).unwrap();
    let coarse = iterated_integral(&m, &f, 6);
    let fine = iterated_integral(&m, &f, 10);
    assert!((coarse - want).norm() < 2e-3, "coarse {coarse} vs {want}");
    assert!((fine - want).norm() < 3e-5, "fine {fine} vs {want}");
    assert!((fine - want).norm() < (coarse - want).norm());
}
