//! Numeric evaluators for drift theorems.
//!
//! Variable drift: if a process on `{0} ∪ [s_min, s_max]` has drift at least
//! `h(X_t)` for a positive nondecreasing `h`, the expected time to hit 0 from
//! `x0` is at most `s_min / h(s_min) + ∫_{s_min}^{x0} 1/h(s) ds`.
//!
//! Multiplicative drift: drift at least `delta * X_t` gives expected time at
//! most `(ln(x0 / s_min) + 1) / delta`, and the time exceeds
//! `(ln(x0 / s_min) + r) / delta` with probability at most `e^{-r}`.

use serde::Serialize;
use thiserror::Error;

use crate::num::Real;
use crate::potential::{PotentialProfile, Variant, GENERAL_DRIFT_CONSTANT, MODIFIED_DRIFT_CONSTANT};

/// Relative tolerance of the adaptive quadrature.
pub const QUADRATURE_REL_TOL: f64 = 1e-6;
/// Maximum number of Simpson panels.
pub const QUADRATURE_MAX_PANELS: usize = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum BoundsError {
    #[error("need 0 < s_min <= x0, got s_min = {s_min}, x0 = {x0}")]
    InvalidRange { s_min: f64, x0: f64 },
    #[error("drift function must be positive, got h({at}) = {value}")]
    NonPositive { at: f64, value: f64 },
    #[error("tabulated drift function must be nondecreasing in h and strictly increasing in state")]
    NotMonotone,
    #[error("state {0} lies outside the tabulated domain")]
    OutOfDomain(f64),
    #[error("delta must be positive")]
    NonPositiveDelta,
    #[error("quadrature did not converge within {QUADRATURE_MAX_PANELS} panels")]
    QuadratureDiverged,
}

/// Lower bound `h` on the drift as a function of the current state.
#[derive(Clone, Debug, PartialEq)]
pub enum DriftFunction<T> {
    /// `0.025/(e n^2) * min{s^(8/7) / B^(2/7), s}`.
    GeneralLemma { n: usize, bound: usize },
    /// `0.055/(e n^2) * s^(15/14)`.
    ModifiedLemma { n: usize },
    /// `h(s) = delta`.
    ConstantDelta(T),
    /// Piecewise-linear interpolation through `(state, h)` points sorted by state.
    Tabulated(Vec<(T, T)>),
}

impl<T: Real> DriftFunction<T> {
    pub fn for_variant(variant: Variant, n: usize, bound: usize) -> Self {
        match variant {
            Variant::General => DriftFunction::GeneralLemma { n, bound },
            Variant::Modified => DriftFunction::ModifiedLemma { n },
        }
    }

    /// Checks the table (if any) for positivity and monotonicity.
    pub fn validate(&self) -> Result<(), BoundsError> {
        match self {
            DriftFunction::ConstantDelta(d) if *d <= T::zero() => Err(BoundsError::NonPositive {
                at: f64::NAN,
                value: d.to_f64_lossy(),
            }),
            DriftFunction::Tabulated(table) => {
                if table.is_empty() {
                    return Err(BoundsError::NotMonotone);
                }
                if let Some(&(s, h)) = table.iter().find(|(_, h)| *h <= T::zero()) {
                    return Err(BoundsError::NonPositive {
                        at: s.to_f64_lossy(),
                        value: h.to_f64_lossy(),
                    });
                }
                let monotone = table.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1);
                if monotone {
                    Ok(())
                } else {
                    Err(BoundsError::NotMonotone)
                }
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, s: T) -> Result<T, BoundsError> {
        Ok(match self {
            DriftFunction::GeneralLemma { n, bound } => general_h(s, *n, *bound),
            DriftFunction::ModifiedLemma { n } => modified_h(s, *n),
            DriftFunction::ConstantDelta(d) => *d,
            DriftFunction::Tabulated(table) => {
                let (first, last) = (table[0], table[table.len() - 1]);
                if s < first.0 || s > last.0 {
                    return Err(BoundsError::OutOfDomain(s.to_f64_lossy()));
                }
                let k = table.partition_point(|(x, _)| *x <= s);
                if k == table.len() {
                    last.1
                } else {
                    let (x0, h0) = table[k - 1];
                    let (x1, h1) = table[k];
                    h0 + (h1 - h0) * (s - x0) / (x1 - x0)
                }
            }
        })
    }

    /// `∫_a^b 1/h(s) ds` in closed form, where one exists.
    fn inverse_integral_closed(&self, a: T, b: T) -> Option<T> {
        match self {
            DriftFunction::GeneralLemma { n, bound } => {
                // Below s = B^2 the power-law branch is the minimum, above it the linear one.
                let c = general_scale::<T>(*n);
                let b_sq = T::from_count((*bound * *bound) as u64);
                let b27 = T::from_count(*bound as u64).powf(T::lit(2.0 / 7.0));
                let seventh = T::lit(1.0 / 7.0);
                let mut total = T::zero();
                let hi = b.min(b_sq);
                if hi > a {
                    total = total + b27 * T::lit(7.0) * (a.powf(-seventh) - hi.powf(-seventh));
                }
                let lo = a.max(b_sq);
                if b > lo {
                    total = total + (b / lo).ln();
                }
                Some(total / c)
            }
            DriftFunction::ModifiedLemma { n } => {
                let c = modified_scale::<T>(*n);
                let e = T::lit(1.0 / 14.0);
                Some(T::lit(14.0) * (a.powf(-e) - b.powf(-e)) / c)
            }
            DriftFunction::ConstantDelta(d) => Some((b - a) / *d),
            DriftFunction::Tabulated(_) => None,
        }
    }

    /// `∫_a^b 1/h(s) ds` by adaptive Simpson quadrature.
    pub fn inverse_integral_quadrature(&self, a: T, b: T) -> Result<T, BoundsError> {
        let f = |s: T| -> Result<T, BoundsError> {
            let h = self.eval(s)?;
            if h <= T::zero() {
                return Err(BoundsError::NonPositive {
                    at: s.to_f64_lossy(),
                    value: h.to_f64_lossy(),
                });
            }
            Ok(h.recip())
        };
        adaptive_simpson(f, a, b)
    }
}

fn general_scale<T: Real>(n: usize) -> T {
    T::lit(GENERAL_DRIFT_CONSTANT) / (T::E() * T::from_count((n * n) as u64))
}

fn modified_scale<T: Real>(n: usize) -> T {
    T::lit(MODIFIED_DRIFT_CONSTANT) / (T::E() * T::from_count((n * n) as u64))
}

fn general_h<T: Real>(s: T, n: usize, bound: usize) -> T {
    let steep = s.powf(T::lit(8.0 / 7.0)) / T::from_count(bound as u64).powf(T::lit(2.0 / 7.0));
    general_scale::<T>(n) * steep.min(s)
}

fn modified_h<T: Real>(s: T, n: usize) -> T {
    modified_scale::<T>(n) * s.powf(T::lit(15.0 / 14.0))
}

/// Adaptive Simpson integration with interval bisection.
///
/// A first pass at a loose tolerance estimates the integral's magnitude; the
/// second pass then splits panels until each panel's error estimate is within
/// its width share of `QUADRATURE_REL_TOL` times that magnitude.
pub fn adaptive_simpson<T, F>(f: F, a: T, b: T) -> Result<T, BoundsError>
where
    T: Real,
    F: Fn(T) -> Result<T, BoundsError>,
{
    if a == b {
        return Ok(T::zero());
    }
    let m = (a + b) / T::lit(2.0);
    let (fa, fm, fb) = (f(a)?, f(m)?, f(b)?);
    let crude = simpson(a, fa, m, fm, b, fb).abs().max(T::min_positive_value());
    let rough = simpson_pass(&f, (a, fa), (b, fb), crude, T::lit(1e-3))?;
    simpson_pass(&f, (a, fa), (b, fb), rough.abs().max(T::min_positive_value()), T::lit(QUADRATURE_REL_TOL))
}

fn simpson<T: Real>(a: T, fa: T, _m: T, fm: T, b: T, fb: T) -> T {
    (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb)
}

fn simpson_pass<T, F>(f: &F, (a, fa): (T, T), (b, fb): (T, T), scale: T, rel_tol: T) -> Result<T, BoundsError>
where
    T: Real,
    F: Fn(T) -> Result<T, BoundsError>,
{
    let two = T::lit(2.0);
    let fifteen = T::lit(15.0);
    let m = (a + b) / two;
    let fm = f(m)?;
    let width = b - a;
    // Pending panels: (a, fa, m, fm, b, fb, estimate, depth).
    let mut stack = vec![(a, fa, m, fm, b, fb, simpson(a, fa, m, fm, b, fb), 0u32)];
    let mut total = T::zero();
    let mut panels = 1usize;
    while let Some((a, fa, m, fm, b, fb, est, depth)) = stack.pop() {
        let lm = (a + m) / two;
        let rm = (m + b) / two;
        let (flm, frm) = (f(lm)?, f(rm)?);
        let left = simpson(a, fa, lm, flm, m, fm);
        let right = simpson(m, fm, rm, frm, b, fb);
        let diff = left + right - est;
        let tol = rel_tol * scale * (b - a) / width;
        if diff.abs() <= fifteen * tol || depth >= 60 {
            total = total + left + right + diff / fifteen;
        } else {
            panels += 1;
            if panels > QUADRATURE_MAX_PANELS {
                return Err(BoundsError::QuadratureDiverged);
            }
            stack.push((a, fa, lm, flm, m, fm, left, depth + 1));
            stack.push((m, fm, rm, frm, b, fb, right, depth + 1));
        }
    }
    Ok(total)
}

fn check_range<T: Real>(s_min: T, x0: T) -> Result<(), BoundsError> {
    if !(s_min > T::zero() && s_min <= x0) || !x0.is_finite() {
        return Err(BoundsError::InvalidRange {
            s_min: s_min.to_f64_lossy(),
            x0: x0.to_f64_lossy(),
        });
    }
    Ok(())
}

/// Variable drift bound `s_min/h(s_min) + ∫_{s_min}^{x0} 1/h`, using closed
/// forms where available.
pub fn variable_drift_bound<T: Real>(spec: &DriftFunction<T>, s_min: T, x0: T) -> Result<T, BoundsError> {
    check_range(s_min, x0)?;
    spec.validate()?;
    let h0 = spec.eval(s_min)?;
    if h0 <= T::zero() {
        return Err(BoundsError::NonPositive {
            at: s_min.to_f64_lossy(),
            value: h0.to_f64_lossy(),
        });
    }
    let integral = match spec.inverse_integral_closed(s_min, x0) {
        Some(v) => v,
        None => spec.inverse_integral_quadrature(s_min, x0)?,
    };
    Ok(s_min / h0 + integral)
}

/// Same as [`variable_drift_bound`] but always integrating numerically.
pub fn variable_drift_bound_quadrature<T: Real>(
    spec: &DriftFunction<T>,
    s_min: T,
    x0: T,
) -> Result<T, BoundsError> {
    check_range(s_min, x0)?;
    spec.validate()?;
    let h0 = spec.eval(s_min)?;
    Ok(s_min / h0 + spec.inverse_integral_quadrature(s_min, x0)?)
}

/// Result of the multiplicative drift theorem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MultiplicativeBound<T> {
    pub expected: T,
    pub delta: T,
    /// `ln(x0 / s_min)`.
    pub log_ratio: T,
}

impl<T: Real> MultiplicativeBound<T> {
    /// `(time, probability)`: the hitting time exceeds `time` with probability
    /// at most `probability = e^{-r}`.
    pub fn tail(&self, r: T) -> (T, T) {
        ((self.log_ratio + r) / self.delta, (-r).exp())
    }
}

pub fn multiplicative_drift_bound<T: Real>(delta: T, x0: T, s_min: T) -> Result<MultiplicativeBound<T>, BoundsError> {
    if delta <= T::zero() {
        return Err(BoundsError::NonPositiveDelta);
    }
    check_range(s_min, x0)?;
    let log_ratio = (x0 / s_min).ln();
    Ok(MultiplicativeBound {
        expected: (log_ratio + T::one()) / delta,
        delta,
        log_ratio,
    })
}

/// Expected time to first feasibility from any start:
/// `e n (ln(n / (n - B + 1)) + 1)`, from multiplicative drift with
/// `delta = 1/(e n)`, `x0 = n`, `s_min = n - B + 1` on the count of zero-bits.
/// Valid for both RLS and the (1+1) EA with rate `1/n`.
pub fn feasibility_time_bound<T: Real>(n: usize, bound: usize) -> T {
    assert!(bound >= 1 && bound <= n, "need 1 <= B <= n");
    let nn = T::from_count(n as u64);
    let s_min = T::from_count((n - bound + 1) as u64);
    T::E() * nn * ((nn / s_min).ln() + T::one())
}

/// `log^+(x) = max{1, ln x}`.
pub fn log_plus<T: Real>(x: T) -> T {
    x.ln().max(T::one())
}

/// Expected optimisation time bound of the (1+1) EA from the potential's
/// drift lemma, integrated over `[s_min_pos, g_max]` with the profile's
/// concrete extremes.
///
/// When every feasible string is optimal there is no positive potential; the
/// bound then degenerates to `g_max / h(g_max)`.
pub fn ea_runtime_bound<T: Real>(profile: &PotentialProfile<T>) -> Result<T, BoundsError> {
    let spec = DriftFunction::for_variant(profile.variant(), profile.n(), profile.bound());
    let x0 = profile.g_max();
    let s_min = profile.s_min_pos().unwrap_or(x0);
    variable_drift_bound(&spec, s_min, x0.max(s_min))
}
