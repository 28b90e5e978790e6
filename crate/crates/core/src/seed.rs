//! Seed mixing shared by the scene, renderer and dataset code.

/// One step of the SplitMix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a sequence of words into one seed: `h ← splitmix64(h ^ w)`, starting from `base`.
pub fn mix(base: u64, words: &[u64]) -> u64 {
    words.iter().fold(splitmix64(base), |h, &w| splitmix64(h ^ w))
}

/// Uniform value in `[0, 1)` from a hash.
pub fn unit_f64(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
