//! Adaptive potential function for the constrained linear problem.
//!
//! Per-position weights `g_j` follow the original weights' growth ratios but
//! are capped by a ceiling sequence
//!
//! ```text
//! gamma_j = 1                      for j <= B
//! gamma_j = 75 B (j - B)^7         for j > B   (general)
//! gamma_j = 8 (j - B)^7            for j > B   (modified, requires w_1 = w_B)
//!
//! g_1 = 1,  g_j = min{ gamma_j, g_{j-1} * w_j / w_{j-1} }
//! ```
//!
//! and the potential of a string is `g(x) = sum_{j>B, x_j=1} g_j - sum_{j<=B, x_j=0} g_j`,
//! which is zero exactly at the optimal objective among feasible strings.
//! Because `g_j = 1` for every `j <= B` and `g` is nondecreasing, feasibility
//! implies `g(x) >= 0`.
//!
//! The drift of `g` under the (1+1) EA is bounded below by
//! `0.025/(e n^2) * min{X^(8/7) / B^(2/7), X}` (general) and by
//! `0.055/(e n^2) * X^(15/14)` (modified). The proofs of these bounds rest on
//! the convexity identity `(a_1 + ... + a_k)^C <= k^(C-1) (a_1^C + ... + a_k^C)`
//! for `a_i >= 0`, `C > 1`.

use std::ops::Range;

use serde::Serialize;
use thiserror::Error;

use crate::heuristics::{rls_moves, Algorithm, HeuristicsError, Mutator, SearchPoint};
use crate::instances::{BitString, Instance};
use crate::num::Real;
use crate::rng::TrialRng;

/// Ceiling factor of the general variant, `75 B (j - B)^7`.
pub const GENERAL_GAMMA_FACTOR: f64 = 75.0;
/// Ceiling factor of the modified variant, `8 (j - B)^7`.
pub const MODIFIED_GAMMA_FACTOR: f64 = 8.0;
/// Drift constant of the general variant.
pub const GENERAL_DRIFT_CONSTANT: f64 = 0.025;
/// Drift constant of the modified variant.
pub const MODIFIED_DRIFT_CONSTANT: f64 = 0.055;

/// Largest `n` for which `s_min_pos` is found by enumerating all strings.
pub const BRUTE_FORCE_MAX_N: usize = 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PotentialError {
    #[error("the potential is undefined without a constraint (B = 0)")]
    Unconstrained,
    #[error("modified variant requires w_1 = w_B")]
    ModifiedPremise,
    #[error("weights must be positive")]
    ZeroWeight,
    #[error("string has {got} bits, instance has {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("state must be feasible")]
    Infeasible,
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error(transparent)]
    Heuristics(#[from] HeuristicsError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    General,
    Modified,
}

impl Variant {
    fn gamma_factor(self, bound: usize) -> f64 {
        match self {
            Variant::General => GENERAL_GAMMA_FACTOR * bound as f64,
            Variant::Modified => MODIFIED_GAMMA_FACTOR,
        }
    }
}

/// Maximal run of equal weights.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Block {
    /// Positions (0-based, half-open).
    pub range: Range<usize>,
    /// Whether the block's weight sits at its ceiling, `g_{s(i)} = gamma_{s(i)}`.
    pub capped: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PotentialProfile<T> {
    variant: Variant,
    n: usize,
    bound: usize,
    gamma: Vec<T>,
    g: Vec<T>,
    blocks: Vec<Block>,
    block_of: Vec<usize>,
    kappa: Vec<usize>,
    g_max: T,
    s_min_pos: Option<T>,
}

impl<T: Real> PotentialProfile<T> {
    pub fn build(inst: &Instance, variant: Variant) -> Result<Self, PotentialError> {
        let n = inst.n();
        let bound = inst.bound();
        let w = inst.weights();
        if bound == 0 {
            return Err(PotentialError::Unconstrained);
        }
        if w[0] == 0 {
            return Err(PotentialError::ZeroWeight);
        }
        if variant == Variant::Modified && w[0] != w[bound - 1] {
            return Err(PotentialError::ModifiedPremise);
        }

        let factor = T::lit(variant.gamma_factor(bound));
        let gamma: Vec<T> = (1..=n)
            .map(|j| {
                if j <= bound {
                    T::one()
                } else {
                    factor * T::from_count((j - bound) as u64).powi(7)
                }
            })
            .collect();

        let mut g = Vec::with_capacity(n);
        let mut blocks: Vec<Block> = Vec::new();
        let mut block_of = Vec::with_capacity(n);
        for j in 0..n {
            if j > 0 && w[j] == w[j - 1] {
                g.push(g[j - 1]);
                blocks.last_mut().expect("block open").range.end = j + 1;
            } else {
                let (value, capped) = if j == 0 {
                    (T::one(), true)
                } else {
                    let grown = g[j - 1] * (T::from_count(w[j]) / T::from_count(w[j - 1]));
                    if gamma[j] <= grown {
                        (gamma[j], true)
                    } else {
                        (grown, false)
                    }
                };
                g.push(value);
                blocks.push(Block { range: j..j + 1, capped });
            }
            block_of.push(blocks.len() - 1);
        }

        let mut kappa = Vec::with_capacity(blocks.len());
        let mut last_capped = 0;
        for (i, b) in blocks.iter().enumerate() {
            if b.capped {
                last_capped = i;
            }
            kappa.push(last_capped);
        }

        let g_max = g.iter().copied().sum();
        let mut profile = Self {
            variant,
            n,
            bound,
            gamma,
            g,
            blocks,
            block_of,
            kappa,
            g_max,
            s_min_pos: None,
        };
        profile.s_min_pos = if n <= BRUTE_FORCE_MAX_N {
            profile.min_positive_by_enumeration(inst)
        } else {
            profile.min_positive_closed_form()
        };
        Ok(profile)
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn gamma(&self) -> &[T] {
        &self.gamma
    }

    /// Per-position potential weights.
    pub fn weights(&self) -> &[T] {
        &self.g
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Index of the block containing position `j`.
    pub fn block_of(&self, j: usize) -> usize {
        self.block_of[j]
    }

    /// Most significant capped block at or below block `i`.
    pub fn kappa(&self, i: usize) -> usize {
        self.kappa[i]
    }

    /// Block indices at or above `kappa(i)`.
    pub fn left_of_kappa(&self, i: usize) -> Range<usize> {
        self.kappa[i]..self.blocks.len()
    }

    /// Block indices strictly below `kappa(i)`.
    pub fn right_of_kappa(&self, i: usize) -> Range<usize> {
        0..self.kappa[i]
    }

    /// Sum of all potential weights; an upper bound on `g(x)`.
    pub fn g_max(&self) -> T {
        self.g_max
    }

    /// Smallest positive potential over feasible strings, or `None` when every
    /// feasible string is optimal.
    pub fn s_min_pos(&self) -> Option<T> {
        self.s_min_pos
    }

    /// `g(x)` as the difference of two nonnegative sums, so the optimum gives
    /// exactly zero.
    pub fn value(&self, x: &BitString) -> T {
        debug_assert_eq!(x.len(), self.n);
        let above: T = (self.bound..self.n).filter(|&j| x.get(j)).map(|j| self.g[j]).sum();
        let below: T = (0..self.bound).filter(|&j| !x.get(j)).map(|j| self.g[j]).sum();
        above - below
    }

    /// Change `g(x') - g(x)` caused by flipping the distinct positions in `flips`.
    #[inline]
    pub fn flip_delta(&self, x: &BitString, flips: &[usize]) -> T {
        flips.iter().fold(T::zero(), |acc, &j| {
            if x.get(j) {
                acc - self.g[j]
            } else {
                acc + self.g[j]
            }
        })
    }

    /// Every feasible non-optimal string is either tight with at least one
    /// one-bit above the bound paired against a missing one-bit below it, or
    /// carries an extra one-bit above the bound. Because `g_j = 1` for
    /// `j <= B` and `g` is nondecreasing, the smallest positive value is
    /// `min{ g_j - 1 : j > B, g_j > 1 }` or `g_{B+1}`, whichever is smaller.
    pub fn min_positive_closed_form(&self) -> Option<T> {
        if self.bound >= self.n {
            return None;
        }
        let gap = self.g[self.bound..]
            .iter()
            .find(|&&gj| gj > T::one())
            .map(|&gj| gj - T::one());
        let extra = self.g[self.bound];
        Some(gap.map_or(extra, |d| d.min(extra)))
    }

    /// Minimum positive `g(x)` over all feasible strings, by enumeration.
    pub fn min_positive_by_enumeration(&self, inst: &Instance) -> Option<T> {
        assert!(self.n <= 24, "enumeration limited to small n");
        (0..1u64 << self.n)
            .map(|m| BitString::from_mask(self.n, m))
            .filter(|x| inst.is_feasible(x))
            .map(|x| self.value(&x))
            .filter(|&v| v > T::zero())
            .reduce(T::min)
    }
}

/// Builds the potential profile of `inst`.
pub fn build_profile<T: Real>(inst: &Instance, variant: Variant) -> Result<PotentialProfile<T>, PotentialError> {
    PotentialProfile::build(inst, variant)
}

/// Lower bound on the one-step drift of the potential at value `x`.
pub fn drift_lower_bound<T: Real>(variant: Variant, x: T, n: usize, bound: usize) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    let n2 = T::from_count((n * n) as u64);
    match variant {
        Variant::General => {
            let scale = T::lit(GENERAL_DRIFT_CONSTANT) / (T::E() * n2);
            let steep = x.powf(T::lit(8.0 / 7.0)) / T::from_count(bound as u64).powf(T::lit(2.0 / 7.0));
            scale * steep.min(x)
        }
        Variant::Modified => {
            let scale = T::lit(MODIFIED_DRIFT_CONSTANT) / (T::E() * n2);
            scale * x.powf(T::lit(15.0 / 14.0))
        }
    }
}

/// Exact expected decrease `E[g(x) - g(x')]` of one RLS iteration from the
/// feasible string `x`, enumerating the whole move set.
pub fn exact_rls_drift<T: Real>(
    inst: &Instance,
    profile: &PotentialProfile<T>,
    x: &BitString,
) -> Result<T, PotentialError> {
    check_state(inst, x)?;
    let point = SearchPoint::new(inst, x.clone());
    let total = point.fitness().total;
    Ok(rls_moves::<T>(inst.n())
        .iter()
        .filter(|(flips, _)| point.offspring_fitness(inst, flips).total <= total)
        .map(|(flips, p)| -profile.flip_delta(x, flips) * *p)
        .sum())
}

/// Monte Carlo estimate of the potential's one-step drift.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DriftEstimate<T> {
    pub mean: T,
    pub stderr: T,
    pub samples: u64,
}

/// Estimates `E[g(x) - g(x')]` for the (1+1) EA with rate `rate_num / n`
/// from `samples` independent mutations of `x` (rejected offspring count as
/// `x' = x`).
pub fn estimate_ea_drift<T: Real>(
    inst: &Instance,
    profile: &PotentialProfile<T>,
    x: &BitString,
    rate_num: u32,
    samples: u64,
    rng: &mut TrialRng,
) -> Result<DriftEstimate<T>, PotentialError> {
    check_state(inst, x)?;
    if samples == 0 {
        return Err(PotentialError::NoSamples);
    }
    let mut mutator = Mutator::new(Algorithm::Ea { rate_num }, inst.n())?;
    let point = SearchPoint::new(inst, x.clone());
    let total = point.fitness().total;

    // Welford's running mean and second moment.
    let mut mean = T::zero();
    let mut m2 = T::zero();
    for k in 1..=samples {
        let flips = mutator.sample(rng);
        let decrease = if point.offspring_fitness(inst, flips).total <= total {
            -profile.flip_delta(x, flips)
        } else {
            T::zero()
        };
        let d = decrease - mean;
        mean = mean + d / T::from_count(k);
        m2 = m2 + d * (decrease - mean);
    }
    let stderr = if samples > 1 {
        (m2 / T::from_count(samples - 1) / T::from_count(samples)).sqrt()
    } else {
        T::zero()
    };
    Ok(DriftEstimate { mean, stderr, samples })
}

fn check_state(inst: &Instance, x: &BitString) -> Result<(), PotentialError> {
    if x.len() != inst.n() {
        return Err(PotentialError::LengthMismatch {
            expected: inst.n(),
            got: x.len(),
        });
    }
    if !inst.is_feasible(x) {
        return Err(PotentialError::Infeasible);
    }
    Ok(())
}
