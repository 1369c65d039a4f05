//! Seeded isotropic Gaussian mixtures with known densities.
//!
//! Streams come from xoshiro256++ seeded through SplitMix64
//! (`Xoshiro256PlusPlus::seed_from_u64`). Uniforms take the top 53 bits of
//! each 64-bit output. For every point one uniform picks the component by
//! inverse CDF over the weights, then coordinates are filled two at a time by
//! Box-Muller (`sqrt(-2 ln(1-u1)) * (cos, sin)(2 pi u2)`); the spare value of
//! an odd dimension is dropped. No rejection step is used, so the stream is
//! a fixed function of the seed.

use std::f64::consts::PI;

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{sq_euclidean, PointSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: Vec<f64>,
    /// Per-coordinate variance; the covariance is `variance * I`.
    pub variance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub d: usize,
    pub components: Vec<MixtureComponent>,
}

const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

impl MixtureSpec {
    pub fn new(d: usize, components: Vec<MixtureComponent>) -> Result<Self> {
        let spec = Self { d, components };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::parameter("mixture dimension must be at least 1"));
        }
        if self.components.is_empty() {
            return Err(Error::parameter("mixture needs at least one component"));
        }
        let mut total = 0.0;
        for (c, comp) in self.components.iter().enumerate() {
            if !(comp.weight > 0.0 && comp.weight.is_finite()) {
                return Err(Error::parameter(format!("component {c}: weight must be positive")));
            }
            if !(comp.variance > 0.0 && comp.variance.is_finite()) {
                return Err(Error::parameter(format!("component {c}: variance must be positive")));
            }
            if comp.mean.len() != self.d {
                return Err(Error::parameter(format!(
                    "component {c}: mean has {} coordinates, expected {}",
                    comp.mean.len(),
                    self.d
                )));
            }
            if comp.mean.iter().any(|m| !m.is_finite()) {
                return Err(Error::parameter(format!("component {c}: mean must be finite")));
            }
            total += comp.weight;
        }
        if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::parameter(format!("weights sum to {total}, expected 1")));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Standard normal in `d` dimensions.
    pub fn standard_normal(d: usize) -> Self {
        Self {
            d,
            components: vec![MixtureComponent {
                weight: 1.0,
                mean: vec![0.0; d],
                variance: 1.0,
            }],
        }
    }

    /// `0.5 N([0,0], I) + 0.5 N([1,4], I)`.
    pub fn two_modes() -> Self {
        Self {
            d: 2,
            components: vec![
                MixtureComponent {
                    weight: 0.5,
                    mean: vec![0.0, 0.0],
                    variance: 1.0,
                },
                MixtureComponent {
                    weight: 0.5,
                    mean: vec![1.0, 4.0],
                    variance: 1.0,
                },
            ],
        }
    }

    /// `sum_{i<5} 0.2 N(2 sqrt(d) e_i, I_d)` for `d >= 5`.
    pub fn five_modes(d: usize) -> Result<Self> {
        if d < 5 {
            return Err(Error::parameter("the five-mode mixture needs d >= 5"));
        }
        let offset = 2.0 * (d as f64).sqrt();
        let components = (0..5)
            .map(|i| {
                let mut mean = vec![0.0; d];
                mean[i] = offset;
                MixtureComponent {
                    weight: 0.2,
                    mean,
                    variance: 1.0,
                }
            })
            .collect();
        Ok(Self { d, components })
    }

    /// Exact mixture density at `x`.
    pub fn density(&self, x: &[f64]) -> f64 {
        let d = self.d as f64;
        self.components
            .iter()
            .map(|c| {
                let norm = (2.0 * PI * c.variance).powf(-d / 2.0);
                c.weight * norm * (-sq_euclidean(x, &c.mean) / (2.0 * c.variance)).exp()
            })
            .sum()
    }

    /// Draws `n` points and the component each came from.
    pub fn sample_labeled(&self, n: usize, seed: u64) -> Result<(PointSet, Vec<usize>)> {
        self.validate()?;
        if n == 0 {
            return Err(Error::parameter("sample size must be at least 1"));
        }
        let mut stream = UniformStream::new(seed);
        let mut rows = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        let last = self.components.len() - 1;
        for _ in 0..n {
            let u = stream.next();
            let mut acc = 0.0;
            let mut choice = last;
            for (c, comp) in self.components.iter().enumerate() {
                acc += comp.weight;
                if u < acc {
                    choice = c;
                    break;
                }
            }
            let comp = &self.components[choice];
            let sd = comp.variance.sqrt();
            let mut row = Vec::with_capacity(self.d);
            while row.len() < self.d {
                let (z0, z1) = stream.normal_pair();
                row.push(comp.mean[row.len()] + sd * z0);
                if row.len() < self.d {
                    row.push(comp.mean[row.len()] + sd * z1);
                }
            }
            rows.push(row);
            labels.push(choice);
        }
        Ok((PointSet::from_rows(&rows)?, labels))
    }

    pub fn sample(&self, n: usize, seed: u64) -> Result<PointSet> {
        Ok(self.sample_labeled(n, seed)?.0)
    }
}

struct UniformStream(Xoshiro256PlusPlus);

impl UniformStream {
    fn new(seed: u64) -> Self {
        Self(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    fn next(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn normal_pair(&mut self) -> (f64, f64) {
        let u1 = 1.0 - self.next();
        let u2 = self.next();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * PI * u2;
        (radius * angle.cos(), radius * angle.sin())
    }
}
