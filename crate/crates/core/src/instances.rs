//! Problem instances: minimise `sum w_i x_i` subject to `x_1 + ... + x_n >= B`.
//!
//! Weights are stored in ascending order. Position 0 of a [`BitString`] holds
//! the smallest weight, which corresponds to the least significant bit when a
//! string is written most significant bit first.
//!
//! Infeasible strings are handled by a penalty: each missing one-bit costs
//! `n * w_max + 1`, which exceeds the objective of every string, so every
//! infeasible string is worse than every feasible one.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::rng_from_seed;

/// Weight base of the lower-bound family; the upper weights are `W + 1`.
pub const LOWER_BOUND_BASE_WEIGHT: u64 = 1000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("instance needs at least one weight")]
    Empty,
    #[error("constraint bound {bound} exceeds bit count {n}")]
    BoundOutOfRange { bound: usize, n: usize },
    #[error("weights too large: penalty arithmetic would overflow 64 bits")]
    Overflow,
    #[error("lower-bound instance needs n divisible by 4, got {0}")]
    NotDivisibleByFour(usize),
    #[error("weight upper limit must be at least 1")]
    InvalidWeightLimit,
    #[error("length mismatch: instance has {expected} bits, string has {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid bit string: {0}")]
    Parse(String),
    #[error("instance file: {0}")]
    File(String),
}

/// A linear objective with ascending weights and a uniform lower bound on the
/// number of one-bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    weights: Vec<u64>,
    bound: usize,
    f_opt: u64,
    penalty_unit: u64,
}

impl Instance {
    /// Builds an instance, sorting the weights ascending.
    ///
    /// Rejects `bound > n` and weights for which the largest possible fitness
    /// value, `sum(w) + B * (n * w_max + 1)`, does not fit in a `u64`.
    pub fn new(mut weights: Vec<u64>, bound: usize) -> Result<Self, InstanceError> {
        let n = weights.len();
        if n == 0 {
            return Err(InstanceError::Empty);
        }
        if bound > n {
            return Err(InstanceError::BoundOutOfRange { bound, n });
        }
        weights.sort_unstable();
        let w_max = weights[n - 1];
        let total: u128 = weights.iter().map(|&w| u128::from(w)).sum();
        let unit = n as u128 * u128::from(w_max) + 1;
        if total + bound as u128 * unit > u128::from(u64::MAX) {
            return Err(InstanceError::Overflow);
        }
        let f_opt = weights[..bound].iter().sum();
        Ok(Self {
            weights,
            bound,
            f_opt,
            penalty_unit: unit as u64,
        })
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    /// Ascending weights.
    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> u64 {
        self.weights[i]
    }

    pub fn w_max(&self) -> u64 {
        self.weights[self.n() - 1]
    }

    /// Optimal objective value: the sum of the `B` smallest weights.
    pub fn f_opt(&self) -> u64 {
        self.f_opt
    }

    /// Penalty per missing one-bit, `n * w_max + 1`.
    pub fn penalty_unit(&self) -> u64 {
        self.penalty_unit
    }

    /// The canonical optimum with one-bits exactly at the `B` smallest weights.
    pub fn optimum(&self) -> BitString {
        BitString::from_ones(self.n(), 0..self.bound)
    }

    /// Fitness from an objective value and a one-bit count.
    #[inline]
    pub fn fitness_parts(&self, objective: u64, ones: usize) -> FitnessValue {
        let penalty = self.bound.saturating_sub(ones) as u64 * self.penalty_unit;
        FitnessValue {
            objective,
            penalty,
            total: objective + penalty,
        }
    }

    pub fn objective(&self, x: &BitString) -> u64 {
        x.iter_ones().map(|i| self.weights[i]).sum()
    }

    /// Penalty fitness of `x`. Panics if the lengths differ.
    pub fn fitness(&self, x: &BitString) -> FitnessValue {
        assert_eq!(x.len(), self.n(), "bit string length must match instance");
        self.fitness_parts(self.objective(x), x.ones())
    }

    pub fn is_feasible(&self, x: &BitString) -> bool {
        x.ones() >= self.bound
    }

    pub fn is_tight(&self, x: &BitString) -> bool {
        x.ones() == self.bound
    }

    pub fn is_optimal(&self, x: &BitString) -> bool {
        self.is_feasible(x) && self.objective(x) == self.f_opt
    }

    /// Instance with weights `1, 2, ..., n`.
    pub fn iota(n: usize, bound: usize) -> Result<Self, InstanceError> {
        Self::new((1..=n as u64).collect(), bound)
    }

    /// Hard instance for RLS: `B = n/4`, the `B` lightest weights equal
    /// [`LOWER_BOUND_BASE_WEIGHT`] and the rest are one larger.
    pub fn lower_bound(n: usize) -> Result<Self, InstanceError> {
        if n == 0 || !n.is_multiple_of(4) {
            return Err(InstanceError::NotDivisibleByFour(n));
        }
        let bound = n / 4;
        let weights = (0..n)
            .map(|i| LOWER_BOUND_BASE_WEIGHT + u64::from(i >= bound))
            .collect();
        Self::new(weights, bound)
    }

    /// `w_1 = ... = w_B = 1` and `w_j = 1 + (j - B)` above the bound, so the
    /// `B` smallest weights coincide.
    pub fn onemax_like(n: usize, bound: usize) -> Result<Self, InstanceError> {
        if n == 0 {
            return Err(InstanceError::Empty);
        }
        if bound == 0 || bound > n {
            return Err(InstanceError::BoundOutOfRange { bound, n });
        }
        let weights = (1..=n)
            .map(|j| if j <= bound { 1 } else { 1 + (j - bound) as u64 })
            .collect();
        Self::new(weights, bound)
    }

    /// `n` weights drawn uniformly from `[1, w_max]` with a generator seeded
    /// by `seed`, then sorted.
    pub fn random(n: usize, bound: usize, w_max: u64, seed: u64) -> Result<Self, InstanceError> {
        if w_max == 0 {
            return Err(InstanceError::InvalidWeightLimit);
        }
        let mut rng = rng_from_seed(seed);
        let weights = (0..n).map(|_| rng.random_range(1..=w_max)).collect();
        Self::new(weights, bound)
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            n: self.n(),
            bound: self.bound,
            weights: self.weights.clone(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, InstanceError> {
        let text = std::fs::read_to_string(path).map_err(|e| InstanceError::File(e.to_string()))?;
        let file: InstanceFile =
            serde_json::from_str(&text).map_err(|e| InstanceError::File(e.to_string()))?;
        file.try_into()
    }
}

/// JSON form of an instance: `{"n": .., "B": .., "weights": [..]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    #[serde(rename = "B")]
    pub bound: usize,
    pub weights: Vec<u64>,
}

impl TryFrom<InstanceFile> for Instance {
    type Error = InstanceError;

    fn try_from(file: InstanceFile) -> Result<Self, Self::Error> {
        if file.weights.len() != file.n {
            return Err(InstanceError::LengthMismatch {
                expected: file.n,
                got: file.weights.len(),
            });
        }
        Instance::new(file.weights, file.bound)
    }
}

/// Objective, penalty and their sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct FitnessValue {
    pub objective: u64,
    pub penalty: u64,
    pub total: u64,
}

/// Fixed-length bit string with a cached one-bit count.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    bits: Vec<bool>,
    ones: usize,
}

impl BitString {
    pub fn zeros(n: usize) -> Self {
        Self {
            bits: vec![false; n],
            ones: 0,
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        let ones = bits.iter().filter(|&&b| b).count();
        Self { bits, ones }
    }

    /// String of length `n` with one-bits at the given positions.
    pub fn from_ones(n: usize, positions: impl IntoIterator<Item = usize>) -> Self {
        let mut x = Self::zeros(n);
        for i in positions {
            if !x.bits[i] {
                x.flip(i);
            }
        }
        x
    }

    /// Bit `i` is the `i`-th bit of `mask`. Requires `n <= 64`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        debug_assert!(n <= 64);
        Self::from_bits((0..n).map(|i| mask >> i & 1 == 1).collect())
    }

    /// Inverse of [`BitString::from_mask`]. Requires `len() <= 64`.
    pub fn to_mask(&self) -> u64 {
        debug_assert!(self.len() <= 64);
        self.iter_ones().fold(0, |m, i| m | 1 << i)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Number of one-bits.
    pub fn ones(&self) -> usize {
        self.ones
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        let b = &mut self.bits[i];
        *b = !*b;
        if *b {
            self.ones += 1;
        } else {
            self.ones -= 1;
        }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }
}

/// Most significant bit first.
impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in self.bits.iter().rev() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

/// Parses the most-significant-bit-first form produced by `Display`.
impl FromStr for BitString {
    type Err = InstanceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = s
            .chars()
            .rev()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(InstanceError::Parse(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_bits(bits))
    }
}

impl Serialize for BitString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ones(n: usize, one_based: &[usize]) -> BitString {
        BitString::from_ones(n, one_based.iter().map(|i| i - 1))
    }

    #[test]
    fn new_sorts_and_computes_optimum() {
        let inst = Instance::new(vec![3, 1, 2], 2).unwrap();
        assert_eq!(inst.weights(), &[1, 2, 3]);
        assert_eq!(inst.f_opt(), 3);
        assert_eq!(Instance::iota(7, 3).unwrap().f_opt(), 6);
        assert_eq!(
            Instance::new(vec![5], 2),
            Err(InstanceError::BoundOutOfRange { bound: 2, n: 1 })
        );
        assert_eq!(Instance::new(vec![], 0), Err(InstanceError::Empty));
    }

    #[test]
    fn overflow_guard() {
        assert_eq!(Instance::new(vec![u64::MAX / 2, 1], 1), Err(InstanceError::Overflow));
        assert!(Instance::new(vec![u64::MAX / 6; 4], 0).is_ok());
        // The penalty term dominates: B * (n * w_max + 1).
        assert_eq!(Instance::new(vec![u64::MAX / 6; 4], 1), Err(InstanceError::Overflow));
    }

    #[test]
    fn fitness_examples() {
        let inst = Instance::iota(4, 2).unwrap();
        let f = inst.fitness(&ones(4, &[4]));
        assert_eq!(f, FitnessValue { objective: 4, penalty: 17, total: 21 });
        let f = inst.fitness(&ones(4, &[1, 2]));
        assert_eq!((f.total, f.penalty), (3, 0));
        let f = inst.fitness(&ones(4, &[1, 2, 3, 4]));
        assert_eq!((f.total, f.penalty), (10, 0));
    }

    #[test]
    fn predicates() {
        let inst = Instance::iota(4, 2).unwrap();
        let x = ones(4, &[1, 3]);
        assert!(inst.is_feasible(&x) && inst.is_tight(&x) && !inst.is_optimal(&x));
        assert!(!inst.is_feasible(&BitString::zeros(4)));
        assert!(inst.is_optimal(&inst.optimum()));
    }

    #[test]
    fn named_families() {
        let inst = Instance::iota(4, 2).unwrap();
        assert_eq!((inst.weights(), inst.f_opt()), (&[1, 2, 3, 4][..], 3));
        let free = Instance::iota(10, 0).unwrap();
        assert_eq!(free.f_opt(), 0);
        assert!(free.is_optimal(&BitString::zeros(10)));
        assert_eq!(Instance::iota(100, 33).unwrap().f_opt(), 561);

        let lb = Instance::lower_bound(8).unwrap();
        assert_eq!(lb.bound(), 2);
        assert_eq!(lb.weights(), &[1000, 1000, 1001, 1001, 1001, 1001, 1001, 1001]);
        assert_eq!(Instance::lower_bound(4).unwrap().bound(), 1);
        assert_eq!(Instance::lower_bound(6), Err(InstanceError::NotDivisibleByFour(6)));

        assert_eq!(Instance::onemax_like(5, 3).unwrap().weights(), &[1, 1, 1, 2, 3]);
        assert_eq!(Instance::onemax_like(3, 3).unwrap().weights(), &[1, 1, 1]);

        let a = Instance::random(6, 2, 10, 1).unwrap();
        assert_eq!(a, Instance::random(6, 2, 10, 1).unwrap());
        assert!(a.weights().iter().all(|&w| (1..=10).contains(&w)));
        assert_eq!(Instance::random(6, 2, 0, 1), Err(InstanceError::InvalidWeightLimit));
    }

    #[test]
    fn display_is_msb_first() {
        let x = ones(4, &[1, 2]);
        assert_eq!(x.to_string(), "0011");
        assert_eq!("0011".parse::<BitString>().unwrap(), x);
        assert!("01a".parse::<BitString>().is_err());
        assert_eq!(BitString::from_mask(4, x.to_mask()), x);
    }

    #[test]
    fn json_round_trip() {
        let inst = Instance::new(vec![5, 3, 9], 1).unwrap();
        let text = serde_json::to_string(&inst.to_file()).unwrap();
        assert_eq!(text, r#"{"n":3,"B":1,"weights":[3,5,9]}"#);
        let back: InstanceFile = serde_json::from_str(&text).unwrap();
        assert_eq!(Instance::try_from(back).unwrap(), inst);
    }

    /// Every infeasible string is worse than every feasible one, and the
    /// brute-force optimum matches `f_opt`.
    #[test]
    fn exhaustive_penalty_dominance_and_optimum() {
        for seed in 0..40 {
            let n = 1 + (seed as usize % 10);
            let bound = seed as usize % (n + 1);
            let inst = Instance::random(n, bound, 50, seed).unwrap();
            let mut worst_feasible = 0;
            let mut best_infeasible = u64::MAX;
            let mut best_feasible_obj = u64::MAX;
            for mask in 0..1u64 << n {
                let x = BitString::from_mask(n, mask);
                let f = inst.fitness(&x);
                assert_eq!(f.penalty == 0, inst.is_feasible(&x));
                if inst.is_feasible(&x) {
                    worst_feasible = worst_feasible.max(f.total);
                    best_feasible_obj = best_feasible_obj.min(f.objective);
                } else {
                    best_infeasible = best_infeasible.min(f.total);
                }
            }
            assert!(bound == 0 || best_infeasible > worst_feasible);
            assert_eq!(best_feasible_obj, inst.f_opt());
            assert!(inst.is_optimal(&inst.optimum()));
        }
    }

    proptest! {
        #[test]
        fn permutation_invariant(mut w in prop::collection::vec(1u64..1000, 1..20), seed: u64) {
            let bound = (seed as usize) % (w.len() + 1);
            let a = Instance::new(w.clone(), bound).unwrap();
            let k = (seed as usize) % w.len();
            w.rotate_left(k);
            w.reverse();
            prop_assert_eq!(a, Instance::new(w, bound).unwrap());
        }

        #[test]
        fn adding_a_one_never_decreases_feasible_fitness(
            w in prop::collection::vec(0u64..1000, 1..24),
            mask: u32,
            pos: usize,
        ) {
            let n = w.len();
            let bound = n / 3;
            let inst = Instance::new(w, bound).unwrap();
            let x = BitString::from_mask(n, u64::from(mask) & ((1 << n) - 1));
            let i = pos % n;
            if inst.is_feasible(&x) && !x.get(i) {
                let mut y = x.clone();
                y.flip(i);
                prop_assert!(inst.fitness(&y).total >= inst.fitness(&x).total);
            }
        }

        #[test]
        fn ones_cache_tracks_flips(flips in prop::collection::vec(0usize..32, 0..100)) {
            let mut x = BitString::zeros(32);
            for i in flips {
                x.flip(i);
                prop_assert_eq!(x.ones(), x.bits().iter().filter(|&&b| b).count());
            }
        }
    }
}
