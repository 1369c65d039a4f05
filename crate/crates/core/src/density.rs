//! k-NN density estimate and settings for the pruning parameter.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::KnnIndex;

/// Volume of the unit ball in `d` dimensions, `pi^(d/2) / Gamma(d/2 + 1)`.
///
/// Evaluated through the recurrence `v_d = 2 pi / d * v_{d-2}` seeded with
/// `v_0 = 1` and `v_1 = 2`, which never leaves rational multiples of powers
/// of pi and so avoids gamma-function approximation error.
pub fn unit_ball_volume(d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::parameter("dimension must be at least 1"));
    }
    let mut v = if d.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut m = if d.is_multiple_of(2) { 2 } else { 3 };
    while m <= d {
        v *= 2.0 * PI / m as f64;
        m += 2;
    }
    Ok(v)
}

/// `f_n(X_i) = k / (n v_d r_{k,n}(X_i)^d)` at every sample point.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityEstimate {
    k: usize,
    values: Vec<f64>,
    f_max: f64,
}

impl DensityEstimate {
    /// Evaluates the estimate from precomputed radii in dimension `dim`.
    pub fn from_index(index: &KnnIndex, dim: usize) -> Result<Self> {
        let n = index.len();
        let volume = unit_ball_volume(dim)?;
        let k = index.k();
        let exponent = i32::try_from(dim).map_err(|_| Error::parameter("dimension too large"))?;
        let values: Vec<f64> = index
            .radii()
            .iter()
            .map(|&r| k as f64 / (n as f64 * volume * r.powi(exponent)))
            .collect();
        if let Some(i) = values.iter().position(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::parameter(format!(
                "density at point {i} is not a positive finite number (radius {})",
                index.radius(i)
            )));
        }
        let f_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self { k, values, f_max })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest estimated density, used as the surrogate for the density bound `F`.
    pub fn f_max(&self) -> f64 {
        self.f_max
    }
}

/// Density-estimation error scale `11 F sqrt(ln(2n/delta) / k)`.
pub fn epsilon_k(f_bound: f64, k: usize, n: usize, delta: f64) -> Result<f64> {
    if !(f_bound > 0.0 && f_bound.is_finite()) {
        return Err(Error::parameter("density bound F must be positive and finite"));
    }
    if k == 0 || n == 0 {
        return Err(Error::parameter("k and n must be at least 1"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::parameter("delta must lie in (0, 1)"));
    }
    Ok(11.0 * f_bound * ((2.0 * n as f64 / delta).ln() / k as f64).sqrt())
}

/// How the pruning parameter is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EpsilonMode {
    /// Use the given value as-is.
    Fixed(f64),
    /// `F / sqrt(k)`.
    FOverSqrtK,
    /// `F / (4 sqrt(k))`.
    FOverFourSqrtK,
    /// `3 * epsilon_k(F, k, n, delta)`, the regime where spurious branches are
    /// guaranteed to be removed.
    Theory { delta: f64 },
}

impl EpsilonMode {
    pub const DEFAULT_DELTA: f64 = 0.05;
}

impl std::str::FromStr for EpsilonMode {
    type Err = Error;

    /// Parses `fixed:V`, `fsqrtk`, `f4sqrtk`, `theory` or `theory:DELTA`.
    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let number = |a: &str| {
            a.trim()
                .parse::<f64>()
                .map_err(|_| Error::parameter(format!("not a number in epsilon mode: {a:?}")))
        };
        match (head, arg) {
            ("fixed", Some(v)) => Ok(EpsilonMode::Fixed(number(v)?)),
            ("fsqrtk", None) => Ok(EpsilonMode::FOverSqrtK),
            ("f4sqrtk", None) => Ok(EpsilonMode::FOverFourSqrtK),
            ("theory", None) => Ok(EpsilonMode::Theory {
                delta: Self::DEFAULT_DELTA,
            }),
            ("theory", Some(d)) => Ok(EpsilonMode::Theory { delta: number(d)? }),
            _ => Err(Error::parameter(format!(
                "unknown epsilon mode {s:?} (expected fixed:V, fsqrtk, f4sqrtk or theory:DELTA)"
            ))),
        }
    }
}

/// Resolves a pruning parameter from its mode and the run's `F`, `k`, `n`.
pub fn suggest_epsilon_tilde(mode: EpsilonMode, f_bound: f64, k: usize, n: usize) -> Result<f64> {
    let check_f = || {
        if f_bound > 0.0 && f_bound.is_finite() {
            Ok(())
        } else {
            Err(Error::parameter("density bound F must be positive and finite"))
        }
    };
    let check_k = || {
        if k >= 1 {
            Ok(())
        } else {
            Err(Error::parameter("k must be at least 1"))
        }
    };
    match mode {
        EpsilonMode::Fixed(v) => {
            if v >= 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(Error::parameter(format!(
                    "fixed pruning parameter must be finite and nonnegative, got {v}"
                )))
            }
        }
        EpsilonMode::FOverSqrtK => {
            check_f()?;
            check_k()?;
            Ok(f_bound / (k as f64).sqrt())
        }
        EpsilonMode::FOverFourSqrtK => {
            check_f()?;
            check_k()?;
            Ok(f_bound / (4.0 * (k as f64).sqrt()))
        }
        EpsilonMode::Theory { delta } => Ok(3.0 * epsilon_k(f_bound, k, n, delta)?),
    }
}
