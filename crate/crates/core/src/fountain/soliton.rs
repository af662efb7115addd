use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolitonParams {
    pub k: usize,
    pub c: f64,
    pub delta: f64,
}

impl SolitonParams {
    pub fn new(k: usize, c: f64, delta: f64) -> Result<Self> {
        let params = SolitonParams { k, c, delta };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("k", self.k, "must be >= 1"));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::invalid("c", self.c, "must be finite and > 0"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid("delta", self.delta, "must lie in (0,1)"));
        }
        Ok(())
    }

    /// `R = c ln(k / delta) sqrt(k)`.
    pub fn ripple(&self) -> f64 {
        let k = self.k as f64;
        self.c * (k / self.delta).ln() * k.sqrt()
    }

    /// Degree carrying the spike, `floor(k / R)` clamped into `[1, k]`.
    pub fn spike_degree(&self) -> usize {
        let raw = (self.k as f64 / self.ripple()).floor();
        if raw.is_finite() {
            (raw as usize).clamp(1, self.k)
        } else {
            self.k
        }
    }
}

/// Ideal soliton `rho` over degrees `1..=k` (index 0 holds degree 1):
/// `rho(1) = 1/k`, `rho(d) = 1/(d(d-1))`.
pub fn ideal_soliton(k: usize) -> Vec<f64> {
    (1..=k)
        .map(|d| if d == 1 { 1.0 / k as f64 } else { 1.0 / (d as f64 * (d as f64 - 1.0)) })
        .collect()
}

/// Robust Soliton `mu = (rho + tau) / Z` over degrees `1..=k` (index 0 holds
/// degree 1).
///
/// `tau(d) = R/(d k)` below the spike degree and `R ln(R/delta) / k` at it;
/// the spike mass is floored at zero when `R < delta`. For `k = 1` this is the
/// point mass at degree 1.
pub fn robust_soliton(params: &SolitonParams) -> Result<Vec<f64>> {
    params.validate()?;
    let k = params.k;
    if k == 1 {
        return Ok(vec![1.0]);
    }
    let r = params.ripple();
    let spike = params.spike_degree();
    let kf = k as f64;
    let mut mu = ideal_soliton(k);
    for (i, m) in mu.iter_mut().enumerate() {
        let d = i + 1;
        if d < spike {
            *m += r / (d as f64 * kf);
        } else if d == spike {
            *m += (r * (r / params.delta).ln() / kf).max(0.0);
        }
    }
    let z: f64 = mu.iter().sum();
    mu.iter_mut().for_each(|m| *m /= z);
    Ok(mu)
}

/// Inverse-CDF sampler over degrees `1..=k`.
#[derive(Debug, Clone)]
pub struct DegreeSampler {
    cdf: Vec<f64>,
}

impl DegreeSampler {
    pub fn new(masses: &[f64]) -> Self {
        let mut acc = 0.0;
        let cdf = masses
            .iter()
            .map(|m| {
                acc += m;
                acc
            })
            .collect();
        DegreeSampler { cdf }
    }

    pub fn max_degree(&self) -> usize {
        self.cdf.len()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.random::<f64>() * self.cdf.last().copied().unwrap_or(1.0);
        let i = self.cdf.partition_point(|&c| c <= u);
        i.min(self.cdf.len() - 1) + 1
    }
}
