//! A tiny fixed linear-congruential generator.
//!
//! Oracle checks compare two independent evaluation paths on "random" fields;
//! for those comparisons to be reproducible across implementations and
//! platforms, the generator is pinned exactly (same constants, same output
//! mapping) rather than delegated to a library whose stream may change:
//!
//! ```text
//! state ← state × 6364136223846793005 + 1442695040888963407   (mod 2⁶⁴)
//! uniform = (state >> 11) / 2⁵³                               ∈ [0, 1)
//! ```
//!
//! The seed is the initial state; the first output is produced after one
//! update step.

const MULTIPLIER: u64 = 6364136223846793005;
const INCREMENT: u64 = 1442695040888963407;
const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone)]
pub struct SpecLcg {
    state: u64,
}

impl SpecLcg {
    pub fn new(seed: u64) -> Self {
        SpecLcg { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self
            .state
            .wrapping_mul(MULTIPLIER)
            .wrapping_add(INCREMENT);
        self.state
    }

    /// Uniform draw in [0, 1) from the top 53 bits of the state.
    pub fn next_uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * INV_2_53
    }

    /// Uniform draw in [−1, 1), the distribution used for random test fields.
    pub fn next_symmetric(&mut self) -> f64 {
        2.0 * self.next_uniform() - 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The documented sequence, frozen: anyone reimplementing the generator
    /// from the constants above must reproduce these exact values.
    #[test]
    fn reference_sequence_from_seed_zero() {
        let mut rng = SpecLcg::new(0);
        assert_eq!(rng.next_u64(), 1442695040888963407);
        assert_eq!(rng.next_u64(), 1876011003808476466);
        assert_eq!(rng.next_u64(), 11166244414315200793);
        let mut rng = SpecLcg::new(0);
        assert_eq!(rng.next_uniform(), 704440937934064.0 / 9007199254740992.0);
    }

    #[test]
    fn symmetric_draws_cover_both_signs_within_bounds() {
        let mut rng = SpecLcg::new(42);
        let draws: Vec<f64> = (0..1000).map(|_| rng.next_symmetric()).collect();
        assert!(draws.iter().all(|v| (-1.0..1.0).contains(v)));
        assert!(draws.iter().any(|v| *v < -0.5));
        assert!(draws.iter().any(|v| *v > 0.5));
    }
}
