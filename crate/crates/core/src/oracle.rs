//! Exact expected optimisation times on small instances.
//!
//! Each heuristic induces a Markov chain on `{0,1}^n` whose absorbing states
//! are the optimal strings. Expected hitting times solve `(I - Q) t = 1` over
//! the transient states. Accepted moves never increase fitness, so ordering
//! states by fitness makes the system block lower-triangular with one block
//! per fitness level; each diagonal block is solved by Gaussian elimination
//! with partial pivoting after substituting the already-known times of
//! strictly better states.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::heuristics::{rls_moves, Algorithm, HeuristicsError};
use crate::instances::{BitString, Instance};
use crate::num::Real;

/// Largest `n` accepted for RLS (sparse kernel, `n + C(n,2)` moves per state).
pub const RLS_MAX_N: usize = 14;
/// Largest `n` accepted for the EA (dense kernel, `2^n` masks per state).
pub const EA_MAX_N: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("{algo} oracle supports n <= {max}, got {n}")]
    TooLarge { algo: &'static str, n: usize, max: usize },
    #[error("linear system is singular at a fitness level of {0} states")]
    Singular(usize),
    #[error(transparent)]
    Heuristics(#[from] HeuristicsError),
}

/// Exact expected remaining optimisation time from every state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HittingTimeReport<T> {
    pub n: usize,
    #[serde(rename = "B")]
    pub bound: usize,
    pub algorithm: String,
    /// Indexed by the state's bit mask (bit `i` = position `i`).
    pub per_state: Vec<T>,
    /// Mean over a uniformly random start.
    pub from_uniform: T,
    pub max_state_time: T,
    /// `max_s |((I - Q) t - 1)_s|` over transient states.
    pub residual: T,
}

impl<T: Real> HittingTimeReport<T> {
    pub fn time(&self, x: &BitString) -> T {
        self.per_state[x.to_mask() as usize]
    }
}

struct Chain<T> {
    /// Fitness totals by mask.
    fitness: Vec<u64>,
    absorbing: Vec<bool>,
    /// Successor lists `(state, probability)` with self-loops merged.
    kernel: Vec<Vec<(usize, T)>>,
}

fn check_size(inst: &Instance, algo: Algorithm) -> Result<(), OracleError> {
    algo.validate(inst.n())?;
    let (name, max) = match algo {
        Algorithm::Rls => ("rls", RLS_MAX_N),
        Algorithm::Ea { .. } => ("ea", EA_MAX_N),
    };
    if inst.n() > max {
        return Err(OracleError::TooLarge {
            algo: name,
            n: inst.n(),
            max,
        });
    }
    Ok(())
}

fn fitness_table(inst: &Instance) -> Vec<u64> {
    let n = inst.n();
    (0..1u64 << n)
        .map(|m| inst.fitness(&BitString::from_mask(n, m)).total)
        .collect()
}

/// Per-mask EA probabilities `p^k (1-p)^(n-k)`.
fn ea_mask_probs<T: Real>(n: usize, rate_num: u32) -> Vec<T> {
    let p = T::from_count(u64::from(rate_num)) / T::from_count(n as u64);
    let q = T::one() - p;
    let by_count: Vec<T> = (0..=n).map(|k| p.powi(k as i32) * q.powi((n - k) as i32)).collect();
    (0..1u64 << n).map(|m| by_count[m.count_ones() as usize]).collect()
}

fn successors<T: Real>(
    state: usize,
    fitness: &[u64],
    algo: Algorithm,
    rls: &[(usize, T)],
    ea: &[T],
) -> Vec<(usize, T)> {
    let mut acc: BTreeMap<usize, T> = BTreeMap::new();
    let here = fitness[state];
    let mut push = |mask: usize, p: T| {
        if p == T::zero() {
            return;
        }
        let next = state ^ mask;
        let target = if fitness[next] <= here { next } else { state };
        let e = acc.entry(target).or_insert_with(T::zero);
        *e = *e + p;
    };
    match algo {
        Algorithm::Rls => rls.iter().for_each(|&(m, p)| push(m, p)),
        Algorithm::Ea { .. } => ea.iter().enumerate().for_each(|(m, &p)| push(m, p)),
    }
    acc.into_iter().collect()
}

fn rls_masks<T: Real>(n: usize) -> Vec<(usize, T)> {
    rls_moves::<T>(n)
        .into_iter()
        .map(|(flips, p)| (flips.iter().fold(0usize, |m, &i| m | 1 << i), p))
        .collect()
}

impl<T: Real> Chain<T> {
    fn build(inst: &Instance, algo: Algorithm) -> Self {
        let n = inst.n();
        let fitness = fitness_table(inst);
        let absorbing = (0..1u64 << n)
            .map(|m| inst.is_optimal(&BitString::from_mask(n, m)))
            .collect();
        let (rls, ea) = match algo {
            Algorithm::Rls => (rls_masks::<T>(n), Vec::new()),
            Algorithm::Ea { rate_num } => (Vec::new(), ea_mask_probs::<T>(n, rate_num)),
        };
        let kernel = (0..fitness.len())
            .map(|s| successors(s, &fitness, algo, &rls, &ea))
            .collect();
        Self {
            fitness,
            absorbing,
            kernel,
        }
    }
}

/// One-step distribution from `x`, keyed by successor mask.
pub fn transition_distribution<T: Real>(
    inst: &Instance,
    algo: Algorithm,
    x: &BitString,
) -> Result<BTreeMap<u64, T>, OracleError> {
    check_size(inst, algo)?;
    let n = inst.n();
    let fitness = fitness_table(inst);
    let (rls, ea) = match algo {
        Algorithm::Rls => (rls_masks::<T>(n), Vec::new()),
        Algorithm::Ea { rate_num } => (Vec::new(), ea_mask_probs::<T>(n, rate_num)),
    };
    Ok(successors(x.to_mask() as usize, &fitness, algo, &rls, &ea)
        .into_iter()
        .map(|(s, p)| (s as u64, p))
        .collect())
}

/// Solves `a x = rhs` in place by Gaussian elimination with partial pivoting.
/// `a` is row-major `k x k`.
pub fn solve_dense<T: Real>(a: &mut [T], rhs: &mut [T], k: usize) -> Result<(), OracleError> {
    debug_assert_eq!(a.len(), k * k);
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&i, &j| a[i * k + col].abs().partial_cmp(&a[j * k + col].abs()).expect("finite"))
            .expect("nonempty");
        if a[pivot * k + col].abs() <= T::epsilon() * T::epsilon() {
            return Err(OracleError::Singular(k));
        }
        if pivot != col {
            for c in 0..k {
                a.swap(col * k + c, pivot * k + c);
            }
            rhs.swap(col, pivot);
        }
        let d = a[col * k + col];
        for r in col + 1..k {
            let factor = a[r * k + col] / d;
            if factor == T::zero() {
                continue;
            }
            for c in col..k {
                a[r * k + c] = a[r * k + c] - factor * a[col * k + c];
            }
            rhs[r] = rhs[r] - factor * rhs[col];
        }
    }
    for r in (0..k).rev() {
        let s = (r + 1..k).fold(rhs[r], |s, c| s - a[r * k + c] * rhs[c]);
        rhs[r] = s / a[r * k + r];
    }
    Ok(())
}

/// Exact expected optimisation time of `algo` on `inst` from every state.
pub fn exact_expected_time<T: Real>(inst: &Instance, algo: Algorithm) -> Result<HittingTimeReport<T>, OracleError> {
    check_size(inst, algo)?;
    let chain = Chain::<T>::build(inst, algo);
    let states = chain.fitness.len();
    let mut times = vec![T::zero(); states];

    let mut transient: Vec<usize> = (0..states).filter(|&s| !chain.absorbing[s]).collect();
    transient.sort_by_key(|&s| (chain.fitness[s], s));

    let mut local = vec![usize::MAX; states];
    for level in transient.chunk_by(|&a, &b| chain.fitness[a] == chain.fitness[b]) {
        let k = level.len();
        for (i, &s) in level.iter().enumerate() {
            local[s] = i;
        }
        let mut a = vec![T::zero(); k * k];
        let mut rhs = vec![T::one(); k];
        for (i, &s) in level.iter().enumerate() {
            a[i * k + i] = T::one();
            for &(u, p) in &chain.kernel[s] {
                if chain.fitness[u] == chain.fitness[s] && !chain.absorbing[u] {
                    let j = local[u];
                    a[i * k + j] = a[i * k + j] - p;
                } else {
                    debug_assert!(chain.fitness[u] < chain.fitness[s] || chain.absorbing[u]);
                    rhs[i] = rhs[i] + p * times[u];
                }
            }
        }
        solve_dense(&mut a, &mut rhs, k)?;
        for (i, &s) in level.iter().enumerate() {
            times[s] = rhs[i];
        }
    }

    let residual = transient
        .iter()
        .map(|&s| {
            let qt: T = chain.kernel[s].iter().map(|&(u, p)| p * times[u]).sum();
            (times[s] - qt - T::one()).abs()
        })
        .fold(T::zero(), T::max);
    let from_uniform = times.iter().copied().sum::<T>() / T::from_count(states as u64);
    let max_state_time = times.iter().copied().fold(T::zero(), T::max);
    Ok(HittingTimeReport {
        n: inst.n(),
        bound: inst.bound(),
        algorithm: algo.to_string(),
        per_state: times,
        from_uniform,
        max_state_time,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heuristics::{run_trial, DEFAULT_MAX_ITERS};
    use crate::rng::{rng_from_seed, trial_seed};
    use approx::assert_relative_eq;
    use rand::Rng;

    #[test]
    fn single_bit_chains() {
        let inst = Instance::new(vec![1], 1).unwrap();
        let rls = exact_expected_time::<f64>(&inst, Algorithm::Rls).unwrap();
        assert_relative_eq!(rls.from_uniform, 1.0, max_relative = 1e-12);
        assert_eq!(rls.per_state, vec![2.0, 0.0]);
        let ea = exact_expected_time::<f64>(&inst, Algorithm::Ea { rate_num: 1 }).unwrap();
        assert_relative_eq!(ea.from_uniform, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn size_caps() {
        let big = Instance::iota(11, 3).unwrap();
        assert!(matches!(
            exact_expected_time::<f64>(&big, Algorithm::Ea { rate_num: 1 }),
            Err(OracleError::TooLarge { .. })
        ));
        let huge = Instance::iota(15, 3).unwrap();
        assert!(matches!(
            exact_expected_time::<f64>(&huge, Algorithm::Rls),
            Err(OracleError::TooLarge { .. })
        ));
    }

    #[test]
    fn optimal_states_have_zero_time() {
        let inst = Instance::random(8, 3, 5, 4).unwrap();
        for algo in [Algorithm::Rls, Algorithm::Ea { rate_num: 2 }] {
            let r = exact_expected_time::<f64>(&inst, algo).unwrap();
            for m in 0..1u64 << 8 {
                let x = BitString::from_mask(8, m);
                let t = r.time(&x);
                assert_eq!(t == 0.0, inst.is_optimal(&x));
                assert!(t.is_finite() && t >= 0.0);
            }
            assert!(r.residual <= 1e-8);
        }
    }

    #[test]
    fn distributions_sum_to_one() {
        let mut rng = rng_from_seed(99);
        for k in 0..100u64 {
            let n = 1 + (k % 8) as usize;
            let inst = Instance::random(n, k as usize % (n + 1), 20, k).unwrap();
            let algo = if k % 2 == 0 {
                Algorithm::Rls
            } else {
                Algorithm::Ea { rate_num: 1 + (k % n as u64) as u32 }
            };
            let x = BitString::from_mask(n, rng.random_range(0..1u64 << n));
            let d = transition_distribution::<f64>(&inst, algo, &x).unwrap();
            let total: f64 = d.values().sum();
            assert!((total - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn rls_self_loop_is_complement() {
        let inst = Instance::iota(5, 2).unwrap();
        let x = BitString::from_ones(5, [0, 3]);
        let d = transition_distribution::<f64>(&inst, Algorithm::Rls, &x).unwrap();
        let moved: f64 = d.iter().filter(|(&s, _)| s != x.to_mask()).map(|(_, p)| p).sum();
        assert_relative_eq!(d[&x.to_mask()], 1.0 - moved, max_relative = 1e-12);
    }

    #[test]
    fn full_rate_has_single_move() {
        let inst = Instance::iota(4, 2).unwrap();
        let x = BitString::from_ones(4, [0, 1, 2]);
        let d = transition_distribution::<f64>(&inst, Algorithm::Ea { rate_num: 4 }, &x).unwrap();
        // Complement 1000 is infeasible, so the only outcome is staying put.
        assert_eq!(d.len(), 1);
        assert_relative_eq!(d[&x.to_mask()], 1.0);
    }

    #[test]
    fn solver_on_known_system() {
        let mut a = vec![0.0, 2.0, 1.0, 1.0];
        let mut b = vec![4.0, 3.0];
        solve_dense(&mut a, &mut b, 2).unwrap();
        assert_relative_eq!(b[0], 1.0);
        assert_relative_eq!(b[1], 2.0);
        let mut singular = vec![1.0, 2.0, 2.0, 4.0];
        assert_eq!(solve_dense(&mut singular, &mut [1.0, 1.0], 2), Err(OracleError::Singular(2)));
    }

    #[test]
    fn single_precision_oracle_agrees() {
        let inst = Instance::iota(6, 2).unwrap();
        let a = exact_expected_time::<f64>(&inst, Algorithm::Rls).unwrap();
        let b = exact_expected_time::<f32>(&inst, Algorithm::Rls).unwrap();
        assert_relative_eq!(a.from_uniform, f64::from(b.from_uniform), max_relative = 1e-4);
    }

    #[test]
    fn monte_carlo_agreement_small() {
        let inst = Instance::iota(5, 2).unwrap();
        for algo in [Algorithm::Rls, Algorithm::Ea { rate_num: 1 }] {
            let exact = exact_expected_time::<f64>(&inst, algo).unwrap().from_uniform;
            let runs = 20_000;
            let xs: Vec<f64> = (0..runs)
                .map(|t| run_trial(&inst, algo, trial_seed(5, 5, 2, algo.rate_num(), t), DEFAULT_MAX_ITERS, None).unwrap().iterations as f64)
                .collect();
            let mean = xs.iter().sum::<f64>() / runs as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
            let se = (var / runs as f64).sqrt();
            assert!((mean - exact).abs() <= 3.0 * se, "{algo}: {mean} vs {exact}");
        }
    }
}
