//! Aggregation and scaling-law fits.

use serde::Serialize;

use super::HarnessError;
use crate::num::Real;

/// Mean, standard error and order statistics of a sample of iteration counts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(len)`; 0 for a single value.
    pub stderr: f64,
    /// Lower middle element for even lengths.
    pub median: u64,
    pub min: u64,
    pub max: u64,
}

/// Panics on an empty sample.
pub fn moments(values: &[u64]) -> Moments {
    assert!(!values.is_empty(), "moments of an empty sample");
    let len = values.len() as f64;
    let mean = values.iter().map(|&v| v as f64).sum::<f64>() / len;
    let stderr = if values.len() > 1 {
        let ss: f64 = values.iter().map(|&v| (v as f64 - mean).powi(2)).sum();
        (ss / (len - 1.0)).sqrt() / len.sqrt()
    } else {
        0.0
    };
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    Moments {
        mean,
        stderr,
        median: sorted[(sorted.len() - 1) / 2],
        min: sorted[0],
        max: sorted[sorted.len() - 1],
    }
}

/// Least-squares fit of `ln(mean) = exponent * ln(n) + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalingFit<T> {
    pub exponent: T,
    pub intercept: T,
    pub r_squared: T,
}

/// Fits a power law to `(n, mean)` points. Needs at least three points with
/// positive coordinates and at least two distinct `n`.
pub fn fit_scaling<T: Real>(points: &[(T, T)]) -> Result<ScalingFit<T>, HarnessError> {
    if points.len() < 3 {
        return Err(HarnessError::Fit(format!("need at least 3 points, got {}", points.len())));
    }
    if points.iter().any(|&(x, y)| !(x > T::zero() && y > T::zero())) {
        return Err(HarnessError::Fit("all coordinates must be positive".into()));
    }
    let logs: Vec<(T, T)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = T::from_count(logs.len() as u64);
    let mx = logs.iter().map(|p| p.0).sum::<T>() / k;
    let my = logs.iter().map(|p| p.1).sum::<T>() / k;
    let sxx: T = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: T = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: T = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == T::zero() {
        return Err(HarnessError::Fit("all n values coincide".into()));
    }
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let r_squared = if syy == T::zero() {
        T::one()
    } else {
        let sse: T = logs
            .iter()
            .map(|p| (p.1 - (intercept + exponent * p.0)).powi(2))
            .sum();
        T::one() - sse / syy
    };
    Ok(ScalingFit {
        exponent,
        intercept,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = [10.0, 20.0, 40.0, 80.0].iter().map(|&n| (n, 7.0 * n * n)).collect();
        let fit = fit_scaling(&pts).unwrap();
        assert!((fit.exponent - 2.0).abs() <= 1e-9);
        assert_relative_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
        assert_relative_eq!(fit.intercept.exp(), 7.0, max_relative = 1e-9);
    }

    #[test]
    fn n_log_n_slope() {
        let pts: Vec<(f64, f64)> = [100.0, 200.0, 400.0, 800.0, 1600.0]
            .iter()
            .map(|&n: &f64| (n, 3.0 * n * n.ln()))
            .collect();
        let fit = fit_scaling(&pts).unwrap();
        assert!(fit.exponent > 1.0 && fit.exponent < 1.4, "{}", fit.exponent);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_scaling(&[(1.0, 1.0), (2.0, 4.0)]).is_err());
        assert!(fit_scaling(&[(1.0, 1.0), (2.0, 0.0), (3.0, 9.0)]).is_err());
        assert!(fit_scaling(&[(2.0, 1.0), (2.0, 2.0), (2.0, 3.0)]).is_err());
    }

    #[test]
    fn moments_of_small_samples() {
        let m = moments(&[4, 1, 3, 2]);
        assert_eq!((m.median, m.min, m.max), (2, 1, 4));
        assert_relative_eq!(m.mean, 2.5);
        assert_relative_eq!(m.stderr, (5.0f64 / 3.0).sqrt() / 2.0, max_relative = 1e-12);
        let one = moments(&[9]);
        assert_eq!((one.mean, one.stderr, one.median), (9.0, 0.0, 9));
    }
}
