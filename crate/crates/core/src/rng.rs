//! Counter-based deterministic random numbers.
//!
//! Every draw is a pure function of `(seed, counter)`, so sampling is
//! bit-reproducible regardless of thread count or evaluation order. The
//! mixer is SplitMix64, which is statistically solid for Monte Carlo use
//! and cheap enough to re-key per draw.

/// SplitMix64 finalizer.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One 64-bit word from a keyed counter. Distinct `(seed, stream, counter)`
/// triples give independent-looking outputs.
#[inline]
pub fn word(seed: u64, stream: u64, counter: u64) -> u64 {
    mix(mix(seed ^ 0x6A09_E667_F3BC_C909).wrapping_add(stream) ^ mix(counter))
}

/// Uniform f64 in [0, 1) from a keyed counter (53 mantissa bits).
#[inline]
pub fn unit(seed: u64, stream: u64, counter: u64) -> f64 {
    (word(seed, stream, counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Sample an index from a finite weight vector by inverse CDF walk.
/// Weights need not be exactly normalized; the draw uses their total.
pub fn pick_weighted(weights: &[f64], u: f64) -> usize {
    let total: f64 = weights.iter().sum();
    let mut target = u * total;
    for (i, w) in weights.iter().enumerate() {
        target -= w;
        if target < 0.0 {
            return i;
        }
    }
    weights.len() - 1
}
