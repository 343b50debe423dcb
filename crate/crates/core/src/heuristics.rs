//! RLS and the (1+1) EA with the elitist acceptance rule `f(x') <= f(x)`.
//!
//! Both algorithms count every pass of their loop as one iteration,
//! including passes whose offspring equals the parent.

use std::fmt;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::instances::{BitString, FitnessValue, Instance};
use crate::num::Real;
use crate::rng::{rng_from_seed, TrialRng};

/// Default iteration cap for a single trial.
pub const DEFAULT_MAX_ITERS: u64 = 10_000_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HeuristicsError {
    #[error("mutation numerator must be at least 1")]
    ZeroRate,
    #[error("mutation numerator {rate_num} exceeds n = {n} (rate above 1)")]
    RateTooLarge { rate_num: u32, n: usize },
    #[error("start string has {got} bits, instance has {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("iteration cap must be at least 1")]
    ZeroCap,
}

/// Which heuristic to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Flip one uniformly chosen bit or, with probability 1/2, a uniformly
    /// chosen pair of distinct bits.
    Rls,
    /// Flip each bit independently with probability `rate_num / n`.
    Ea { rate_num: u32 },
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Rls => "rls",
            Algorithm::Ea { .. } => "ea",
        }
    }

    /// Mutation numerator `c`; 0 for RLS.
    pub fn rate_num(&self) -> u32 {
        match self {
            Algorithm::Rls => 0,
            Algorithm::Ea { rate_num } => *rate_num,
        }
    }

    pub fn validate(&self, n: usize) -> Result<(), HeuristicsError> {
        match *self {
            Algorithm::Rls => Ok(()),
            Algorithm::Ea { rate_num: 0 } => Err(HeuristicsError::ZeroRate),
            Algorithm::Ea { rate_num } if rate_num as usize > n => {
                Err(HeuristicsError::RateTooLarge { rate_num, n })
            }
            Algorithm::Ea { .. } => Ok(()),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::Rls => f.write_str("rls"),
            Algorithm::Ea { rate_num } => write!(f, "ea(c={rate_num})"),
        }
    }
}

/// Current search point with its cached fitness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchPoint {
    x: BitString,
    fitness: FitnessValue,
}

impl SearchPoint {
    pub fn new(inst: &Instance, x: BitString) -> Self {
        let fitness = inst.fitness(&x);
        Self { x, fitness }
    }

    pub fn bits(&self) -> &BitString {
        &self.x
    }

    pub fn into_bits(self) -> BitString {
        self.x
    }

    pub fn fitness(&self) -> FitnessValue {
        self.fitness
    }

    pub fn is_feasible(&self, inst: &Instance) -> bool {
        self.x.ones() >= inst.bound()
    }

    pub fn is_optimal(&self, inst: &Instance) -> bool {
        self.is_feasible(inst) && self.fitness.objective == inst.f_opt()
    }

    /// Fitness of the string obtained by flipping the distinct positions in `flips`.
    #[inline]
    pub fn offspring_fitness(&self, inst: &Instance, flips: &[usize]) -> FitnessValue {
        let mut gained = 0u64;
        let mut lost = 0u64;
        let mut ones = self.x.ones();
        for &i in flips {
            if self.x.get(i) {
                lost += inst.weight(i);
                ones -= 1;
            } else {
                gained += inst.weight(i);
                ones += 1;
            }
        }
        inst.fitness_parts(self.fitness.objective + gained - lost, ones)
    }

    /// Applies the move if the offspring is at least as good. Returns whether
    /// it was accepted.
    #[inline]
    pub fn try_move(&mut self, inst: &Instance, flips: &[usize]) -> bool {
        let child = self.offspring_fitness(inst, flips);
        if child.total <= self.fitness.total {
            for &i in flips {
                self.x.flip(i);
            }
            self.fitness = child;
            true
        } else {
            false
        }
    }
}

/// Outcome of one iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepOutcome {
    pub accepted: bool,
    pub flipped: usize,
}

/// Reusable mutation sampler for one algorithm on strings of length `n`.
#[derive(Clone, Debug)]
pub struct Mutator {
    algo: Algorithm,
    n: usize,
    /// `ln(1 - p)` for the EA; `-inf` when `p = 1`.
    ln_keep: f64,
    flips: Vec<usize>,
}

impl Mutator {
    pub fn new(algo: Algorithm, n: usize) -> Result<Self, HeuristicsError> {
        algo.validate(n)?;
        let ln_keep = match algo {
            Algorithm::Rls => 0.0,
            Algorithm::Ea { rate_num } => (-(f64::from(rate_num) / n as f64)).ln_1p(),
        };
        Ok(Self {
            algo,
            n,
            ln_keep,
            flips: Vec::with_capacity(8),
        })
    }

    /// Samples the positions flipped by one mutation.
    pub fn sample(&mut self, rng: &mut TrialRng) -> &[usize] {
        self.flips.clear();
        match self.algo {
            Algorithm::Rls => {
                if rng.random::<bool>() {
                    self.flips.push(rng.random_range(0..self.n));
                } else if self.n >= 2 {
                    let i = rng.random_range(0..self.n);
                    let mut j = rng.random_range(0..self.n - 1);
                    if j >= i {
                        j += 1;
                    }
                    self.flips.extend([i, j]);
                }
            }
            Algorithm::Ea { .. } if self.ln_keep == f64::NEG_INFINITY => {
                self.flips.extend(0..self.n);
            }
            Algorithm::Ea { .. } => {
                // Gaps between flipped positions are geometric: P(gap >= k) = (1-p)^k.
                let mut pos = 0usize;
                loop {
                    let u = 1.0 - rng.random::<f64>();
                    let skip = (u.ln() / self.ln_keep).floor();
                    if skip >= (self.n - pos) as f64 {
                        break;
                    }
                    pos += skip as usize;
                    self.flips.push(pos);
                    pos += 1;
                    if pos >= self.n {
                        break;
                    }
                }
            }
        }
        &self.flips
    }

    /// One mutation-selection iteration.
    #[inline]
    pub fn step(&mut self, inst: &Instance, point: &mut SearchPoint, rng: &mut TrialRng) -> StepOutcome {
        self.sample(rng);
        let flipped = self.flips.len();
        let accepted = point.try_move(inst, &self.flips);
        StepOutcome { accepted, flipped }
    }
}

/// One RLS iteration on `point`.
pub fn rls_step(inst: &Instance, point: &mut SearchPoint, rng: &mut TrialRng) -> StepOutcome {
    let mut m = Mutator::new(Algorithm::Rls, inst.n()).expect("rls is always valid");
    m.step(inst, point, rng)
}

/// One (1+1) EA iteration on `point` with mutation probability `rate_num / n`.
pub fn ea_step(
    inst: &Instance,
    point: &mut SearchPoint,
    rate_num: u32,
    rng: &mut TrialRng,
) -> Result<StepOutcome, HeuristicsError> {
    let mut m = Mutator::new(Algorithm::Ea { rate_num }, inst.n())?;
    Ok(m.step(inst, point, rng))
}

/// Uniformly random string: each bit is one with probability 1/2.
pub fn uniform_start(n: usize, rng: &mut TrialRng) -> BitString {
    BitString::from_bits((0..n).map(|_| rng.random::<bool>()).collect())
}

/// The RLS move set: every single flip with probability `1/(2n)` and every
/// unordered pair with probability `1/(2 C(n,2))`. For `n = 1` the pair
/// branch is an empty move with probability 1/2.
pub fn rls_moves<T: Real>(n: usize) -> Vec<(Vec<usize>, T)> {
    let half = T::lit(0.5);
    let mut moves: Vec<(Vec<usize>, T)> = (0..n).map(|i| (vec![i], half / T::from_count(n as u64))).collect();
    if n >= 2 {
        let pair = half / T::from_count((n * (n - 1) / 2) as u64);
        for i in 0..n {
            for j in i + 1..n {
                moves.push((vec![i, j], pair));
            }
        }
    } else {
        moves.push((Vec::new(), half));
    }
    moves
}

/// Probability that one RLS iteration from `x` produces an accepted offspring
/// with strictly smaller fitness.
pub fn rls_improvement_probability(inst: &Instance, x: &BitString) -> f64 {
    let point = SearchPoint::new(inst, x.clone());
    rls_moves::<f64>(inst.n())
        .iter()
        .filter(|(flips, _)| point.offspring_fitness(inst, flips).total < point.fitness.total)
        .map(|(_, p)| p)
        .sum()
}

/// When a trial stops.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum StopAt {
    /// The current point is optimal.
    #[default]
    Optimum,
    /// The current point is feasible.
    Feasible,
}

/// Record of a single run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TrialResult {
    /// Iterations until the stop condition held (or the cap).
    pub iterations: u64,
    /// First iteration at which the current point was feasible, if any.
    pub feasibility_hit: Option<u64>,
    pub seed: u64,
    pub hit_cap: bool,
}

/// Runs `algo` from `start` (uniform random when `None`) until the current
/// point is optimal or `max_iters` iterations have passed.
///
/// The trial is a pure function of its arguments.
pub fn run_trial(
    inst: &Instance,
    algo: Algorithm,
    seed: u64,
    max_iters: u64,
    start: Option<&BitString>,
) -> Result<TrialResult, HeuristicsError> {
    run_trial_until(inst, algo, seed, max_iters, start, StopAt::Optimum)
}

pub fn run_trial_until(
    inst: &Instance,
    algo: Algorithm,
    seed: u64,
    max_iters: u64,
    start: Option<&BitString>,
    stop: StopAt,
) -> Result<TrialResult, HeuristicsError> {
    if max_iters == 0 {
        return Err(HeuristicsError::ZeroCap);
    }
    let n = inst.n();
    if let Some(s) = start {
        if s.len() != n {
            return Err(HeuristicsError::LengthMismatch {
                expected: n,
                got: s.len(),
            });
        }
    }
    let mut mutator = Mutator::new(algo, n)?;
    let mut rng = rng_from_seed(seed);
    let x0 = match start {
        Some(s) => s.clone(),
        None => uniform_start(n, &mut rng),
    };
    let mut point = SearchPoint::new(inst, x0);
    let done = |p: &SearchPoint| match stop {
        StopAt::Optimum => p.is_optimal(inst),
        StopAt::Feasible => p.is_feasible(inst),
    };

    let mut feasibility_hit = point.is_feasible(inst).then_some(0);
    let mut t = 0u64;
    while !done(&point) {
        if t == max_iters {
            return Ok(TrialResult {
                iterations: t,
                feasibility_hit,
                seed,
                hit_cap: true,
            });
        }
        let before = point.fitness.total;
        mutator.step(inst, &mut point, &mut rng);
        t += 1;
        debug_assert!(point.fitness.total <= before);
        if feasibility_hit.is_none() && point.is_feasible(inst) {
            feasibility_hit = Some(t);
        }
        debug_assert!(feasibility_hit.is_none() || point.is_feasible(inst));
    }
    Ok(TrialResult {
        iterations: t,
        feasibility_hit,
        seed,
        hit_cap: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(n: usize, one_based: &[usize]) -> BitString {
        BitString::from_ones(n, one_based.iter().map(|i| i - 1))
    }

    #[test]
    fn validation() {
        assert_eq!(Algorithm::Ea { rate_num: 0 }.validate(5), Err(HeuristicsError::ZeroRate));
        assert_eq!(
            Algorithm::Ea { rate_num: 6 }.validate(5),
            Err(HeuristicsError::RateTooLarge { rate_num: 6, n: 5 })
        );
        assert!(Algorithm::Ea { rate_num: 5 }.validate(5).is_ok());
        let inst = Instance::iota(4, 2).unwrap();
        assert_eq!(
            run_trial(&inst, Algorithm::Rls, 1, 0, None),
            Err(HeuristicsError::ZeroCap)
        );
    }

    #[test]
    fn optimal_tight_point_is_stable_under_rls() {
        let inst = Instance::iota(6, 3).unwrap();
        let mut point = SearchPoint::new(&inst, inst.optimum());
        let mut rng = rng_from_seed(3);
        for _ in 0..2000 {
            let out = rls_step(&inst, &mut point, &mut rng);
            assert!(!out.accepted || out.flipped == 0);
            assert!(point.is_optimal(&inst));
        }
    }

    #[test]
    fn swap_is_accepted() {
        let inst = Instance::iota(4, 2).unwrap();
        let mut point = SearchPoint::new(&inst, ones(4, &[1, 3]));
        assert!(point.try_move(&inst, &[2, 1]));
        assert_eq!(point.fitness().objective, 3);
        assert!(point.is_optimal(&inst));
    }

    #[test]
    fn dropping_a_one_from_tight_is_rejected() {
        let inst = Instance::iota(4, 2).unwrap();
        let x = ones(4, &[1, 3]);
        let mut point = SearchPoint::new(&inst, x.clone());
        let child = point.offspring_fitness(&inst, &[0]);
        assert_eq!(child.total - point.fitness().total, inst.penalty_unit() - 1);
        assert!(!point.try_move(&inst, &[0]));
        assert_eq!(point.bits(), &x);
    }

    #[test]
    fn full_rate_flips_everything() {
        let inst = Instance::onemax_like(5, 5).unwrap();
        let all = BitString::from_ones(5, 0..5);
        let mut point = SearchPoint::new(&inst, all.clone());
        let mut rng = rng_from_seed(9);
        let out = ea_step(&inst, &mut point, 5, &mut rng).unwrap();
        assert_eq!(out.flipped, 5);
        assert!(!out.accepted);
        assert_eq!(point.bits(), &all);
    }

    #[test]
    fn ea_preserves_optimality() {
        let inst = Instance::random(12, 4, 20, 5).unwrap();
        let mut point = SearchPoint::new(&inst, inst.optimum());
        let mut rng = rng_from_seed(11);
        for _ in 0..5000 {
            ea_step(&inst, &mut point, 2, &mut rng).unwrap();
            assert!(point.is_optimal(&inst));
        }
    }

    #[test]
    fn ea_flip_count_mean() {
        let n = 100;
        let samples = 1_000_000u64;
        let mut m = Mutator::new(Algorithm::Ea { rate_num: 2 }, n).unwrap();
        let mut rng = rng_from_seed(2024);
        let mut total = 0usize;
        let mut per_position = vec![0u64; n];
        for _ in 0..samples {
            let flips = m.sample(&mut rng);
            total += flips.len();
            for &i in flips {
                per_position[i] += 1;
            }
        }
        let p = 2.0 / n as f64;
        let mean = total as f64 / samples as f64;
        let sigma = (n as f64 * p * (1.0 - p) / samples as f64).sqrt();
        assert!((mean - 2.0).abs() <= 3.0 * sigma, "mean {mean}");
        // Positions are hit uniformly.
        let sd = (samples as f64 * p * (1.0 - p)).sqrt();
        for &c in &per_position {
            assert!((c as f64 - samples as f64 * p).abs() < 5.0 * sd);
        }
    }

    #[test]
    fn uniform_start_is_fair() {
        let mut rng = rng_from_seed(77);
        let draws = 100_000;
        let hits = (0..draws).filter(|_| uniform_start(1, &mut rng).ones() == 1).count();
        let sigma = (0.25 / draws as f64).sqrt();
        assert!((hits as f64 / draws as f64 - 0.5).abs() <= 3.0 * sigma);
        let a = uniform_start(64, &mut rng_from_seed(5));
        assert_eq!(a, uniform_start(64, &mut rng_from_seed(5)));
        assert_eq!(a.ones(), a.bits().iter().filter(|&&b| b).count());
    }

    #[test]
    fn trial_from_optimum_takes_zero_iterations() {
        let inst = Instance::iota(10, 3).unwrap();
        let r = run_trial(&inst, Algorithm::Rls, 1, 100, Some(&inst.optimum())).unwrap();
        assert_eq!((r.iterations, r.feasibility_hit, r.hit_cap), (0, Some(0), false));
    }

    #[test]
    fn trials_are_deterministic() {
        let inst = Instance::iota(30, 10).unwrap();
        for algo in [Algorithm::Rls, Algorithm::Ea { rate_num: 2 }] {
            let a = run_trial(&inst, algo, 42, DEFAULT_MAX_ITERS, None).unwrap();
            let b = run_trial(&inst, algo, 42, DEFAULT_MAX_ITERS, None).unwrap();
            assert_eq!(a, b);
            assert!(!a.hit_cap);
            assert!(a.feasibility_hit.unwrap() <= a.iterations);
        }
    }

    #[test]
    fn cap_is_reported() {
        let inst = Instance::iota(40, 10).unwrap();
        let r = run_trial(&inst, Algorithm::Ea { rate_num: 1 }, 1, 3, Some(&BitString::zeros(40))).unwrap();
        assert!(r.hit_cap);
        assert_eq!(r.iterations, 3);
    }

    /// Trajectory invariants: monotone fitness, feasibility is never lost and
    /// RLS keeps the one-count fixed once tight.
    #[test]
    fn trajectory_invariants() {
        for seed in 0..20u64 {
            let inst = Instance::random(16, 1 + seed as usize % 8, 30, seed).unwrap();
            for algo in [Algorithm::Rls, Algorithm::Ea { rate_num: 1 }, Algorithm::Ea { rate_num: 3 }] {
                let mut rng = rng_from_seed(seed ^ 0xabc);
                let mut m = Mutator::new(algo, inst.n()).unwrap();
                let mut point = SearchPoint::new(&inst, uniform_start(inst.n(), &mut rng));
                let mut feasible = false;
                let mut tight = false;
                for _ in 0..20_000 {
                    let before = point.fitness().total;
                    m.step(&inst, &mut point, &mut rng);
                    assert!(point.fitness().total <= before);
                    assert_eq!(point.fitness(), inst.fitness(point.bits()));
                    if feasible {
                        assert!(point.is_feasible(&inst));
                    }
                    feasible |= point.is_feasible(&inst);
                    if algo == Algorithm::Rls {
                        if tight {
                            assert_eq!(point.bits().ones(), inst.bound());
                        }
                        tight |= inst.is_tight(point.bits());
                    }
                }
                assert!(point.is_optimal(&inst));
            }
        }
    }

    #[test]
    fn rls_moves_sum_to_one() {
        for n in 1..10 {
            let total: f64 = rls_moves::<f64>(n).iter().map(|(_, p)| p).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn improvement_probability_example() {
        // Only the swap of positions 3 and 2 improves.
        let inst = Instance::iota(4, 2).unwrap();
        let p = rls_improvement_probability(&inst, &ones(4, &[1, 3]));
        assert!((p - 1.0 / 12.0).abs() < 1e-15);
    }
}
