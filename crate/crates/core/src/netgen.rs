//! Deterministic low-discrepancy point sets.

use num_complex::Complex64;

/// Radical inverse of `index` in `base` (van der Corput sequence).
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while index > 0 {
        out += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    out
}

/// 2-D Halton point `index` (bases 2 and 3), shifted by a seed-derived
/// offset modulo 1 (Cranley-Patterson rotation).
pub fn halton2(index: u64, seed: u64) -> (f64, f64) {
    let (s1, s2) = seed_shift(seed);
    (
        (radical_inverse(index + 1, 2) + s1).fract(),
        (radical_inverse(index + 1, 3) + s2).fract(),
    )
}

fn seed_shift(seed: u64) -> (f64, f64) {
    if seed == 0 {
        return (0.0, 0.0);
    }
    // splitmix64
    let mut x = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut next = || {
        x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = x;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        (z ^ (z >> 31)) as f64 / u64::MAX as f64
    };
    (next(), next())
}

/// `n` points of the upper half-plane with `|Re z| ≤ 3` and
/// `Im z ∈ [1e-3, 10]` spread log-uniformly.
pub fn upper_half_plane_sample(n: usize, seed: u64) -> Vec<Complex64> {
    (0..n as u64)
        .map(|i| {
            let (u, v) = halton2(i, seed);
            Complex64::new(6.0 * u - 3.0, 10f64.powf(-3.0 + 4.0 * v))
        })
        .collect()
}
