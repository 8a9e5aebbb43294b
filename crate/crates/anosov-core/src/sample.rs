//! Deterministic sampling helpers.
//!
//! All randomized-looking sampling in this crate is driven either by a
//! seeded SplitMix64 stream or by Kronecker (golden-ratio) sequences, so
//! identical seeds reproduce identical outputs bit for bit on every
//! platform.

use alloc::vec::Vec;

/// SplitMix64; tiny, seedable, portable.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// A point in `[0,1)^d`.
    pub fn point(&mut self, dim: usize) -> Vec<f64> {
        (0..dim).map(|_| self.next_f64()).collect()
    }
}

/// Low-discrepancy Kronecker sequence on the d-torus with per-axis
/// irrational steps (roots of small primes).
pub fn kronecker_points(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let alphas = [
        0.618_033_988_749_894_8,
        0.414_213_562_373_095_0,
        0.732_050_807_568_877_3,
        0.236_067_977_499_789_7,
        0.645_751_311_064_590_6,
        0.828_427_124_746_190_1,
        0.302_775_637_731_994_6,
        0.162_277_660_168_379_33,
    ];
    let mut rng = SplitMix64::new(seed);
    let offset: Vec<f64> = (0..dim).map(|_| rng.next_f64()).collect();
    (0..count)
        .map(|i| {
            (0..dim)
                .map(|j| {
                    let x = offset[j] + (i as f64) * alphas[j % alphas.len()];
                    x - libm::floor(x)
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible() {
        let mut a = SplitMix64::new(42);
        let mut b = SplitMix64::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn kronecker_in_unit_cube() {
        for p in kronecker_points(3, 50, 7) {
            for x in p {
                assert!((0.0..1.0).contains(&x));
            }
        }
    }
}
