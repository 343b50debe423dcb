//! Random number generation.
//!
//! Every stochastic routine takes its generator explicitly. The generator is
//! xoshiro256++ seeded through SplitMix64 (`seed_from_u64`), which is fully
//! specified and platform independent. Per-trial seeds are derived from a
//! master seed with [`trial_seed`], so a trial's stream depends only on its
//! coordinates and never on scheduling order.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

/// Generator used for trials and estimators.
pub type TrialRng = Xoshiro256PlusPlus;

/// Creates a generator from a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> TrialRng {
    TrialRng::seed_from_u64(seed)
}

/// SplitMix64 finalizer (Stafford variant 13).
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a sequence of words into one seed: `h <- mix64(h ^ word + golden)`
/// starting from `h = mix64(master)`.
pub fn derive_seed(master: u64, words: &[u64]) -> u64 {
    const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
    words
        .iter()
        .fold(mix64(master), |h, &w| mix64((h ^ w).wrapping_add(GOLDEN)))
}

/// Seed of trial `trial` in cell `(n, B, c)` of an experiment keyed by `master`.
pub fn trial_seed(master: u64, n: usize, bound: usize, rate_num: u32, trial: u64) -> u64 {
    derive_seed(master, &[n as u64, bound as u64, u64::from(rate_num), trial])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn golden_stream() {
        // Pins the generator and its seeding; a change here breaks reproducibility
        // of every recorded experiment.
        let mut rng = rng_from_seed(42);
        let got: Vec<u64> = (0..3).map(|_| rng.next_u64()).collect();
        assert_eq!(got, GOLDEN_42);
        assert_eq!(got, reference_stream(42, 3));
    }

    /// Textbook SplitMix64 seeding followed by xoshiro256++.
    fn reference_stream(seed: u64, len: usize) -> Vec<u64> {
        let mut sm = seed;
        let mut s = [0u64; 4];
        for w in &mut s {
            sm = sm.wrapping_add(0x9e37_79b9_7f4a_7c15);
            let mut z = sm;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
            *w = z ^ (z >> 31);
        }
        (0..len)
            .map(|_| {
                let out = s[0].wrapping_add(s[3]).rotate_left(23).wrapping_add(s[0]);
                let t = s[1] << 17;
                s[2] ^= s[0];
                s[3] ^= s[1];
                s[1] ^= s[2];
                s[0] ^= s[3];
                s[2] ^= t;
                s[3] = s[3].rotate_left(45);
                out
            })
            .collect()
    }

    #[test]
    fn golden_trial_seed() {
        assert_eq!(mix64(0), 0);
        assert_eq!(trial_seed(42, 100, 33, 2, 0), GOLDEN_TRIAL_SEED);
        assert_ne!(trial_seed(42, 100, 33, 2, 0), trial_seed(42, 100, 33, 2, 1));
        assert_ne!(trial_seed(42, 100, 33, 2, 0), trial_seed(42, 100, 33, 1, 0));
    }

    const GOLDEN_42: [u64; 3] = [15021278609987233951, 5881210131331364753, 18149643915985481100];
    const GOLDEN_TRIAL_SEED: u64 = 9122034475378782797;
}
