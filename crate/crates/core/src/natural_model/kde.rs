//! Univariate Epanechnikov kernel density estimation.

use crate::error::{Error, Result};

/// `K(u) = 0.75 (1 - u^2)` on `|u| <= 1`, zero elsewhere.
#[inline]
pub fn epanechnikov_kernel(u: f64) -> f64 {
    if u.abs() <= 1.0 {
        0.75 * (1.0 - u * u)
    } else {
        0.0
    }
}

/// Silverman-style bandwidth `h = factor * sigma * n^(-1/5)`, with the
/// robust scale `sigma = min(std, IQR / 1.349)`, floored at `floor`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandwidthRule {
    /// 2.345 is Silverman's constant rescaled for the Epanechnikov kernel.
    pub factor: f64,
    pub floor: f64,
}

impl Default for BandwidthRule {
    fn default() -> Self {
        BandwidthRule {
            factor: 2.345,
            floor: 1e-6,
        }
    }
}

impl BandwidthRule {
    /// Bandwidth for `observations`; needs at least two values.
    pub fn bandwidth(&self, observations: &[f64]) -> Result<f64> {
        let n = observations.len();
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "bandwidth needs at least 2 observations, got {n}"
            )));
        }
        let mut sorted = observations.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mean = sorted.iter().sum::<f64>() / n as f64;
        let var = sorted.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
        // Constant data must give exactly zero spread despite rounding in the mean.
        let std = if sorted[0] == sorted[n - 1] { 0.0 } else { var.sqrt() };
        let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
        // A zero IQR with non-zero spread (heavy ties) falls back to the std.
        let sigma = if iqr > 0.0 { std.min(iqr / 1.349) } else { std };
        let h = self.factor * sigma * (n as f64).powf(-0.2);
        if h > self.floor {
            Ok(h)
        } else if self.floor > 0.0 {
            Ok(self.floor)
        } else {
            Err(Error::InvalidArgument(
                "observations have zero spread and the bandwidth floor is zero".into(),
            ))
        }
    }
}

/// Linear-interpolation quantile of sorted data.
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// How a [`ChannelKde`] picks its bandwidth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bandwidth {
    Rule(BandwidthRule),
    Fixed(f64),
}

/// Kernel density estimate of one bottleneck channel.
///
/// Observations are kept sorted so evaluation only visits the ones inside
/// the kernel window.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelKde {
    observations: Vec<f64>,
    bandwidth: f64,
}

impl ChannelKde {
    pub fn fit(observations: &[f64], bandwidth: Bandwidth) -> Result<Self> {
        let h = match bandwidth {
            Bandwidth::Rule(rule) => rule.bandwidth(observations)?,
            Bandwidth::Fixed(h) => h,
        };
        Self::from_parts(observations.to_vec(), h)
    }

    /// Rebuilds an estimate from stored observations and bandwidth.
    pub fn from_parts(mut observations: Vec<f64>, bandwidth: f64) -> Result<Self> {
        if observations.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "a density estimate needs at least 2 observations, got {}",
                observations.len()
            )));
        }
        if observations.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite observation".into()));
        }
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        observations.sort_by(f64::total_cmp);
        Ok(ChannelKde {
            observations,
            bandwidth,
        })
    }

    pub fn observations(&self) -> &[f64] {
        &self.observations
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.observations[0]
    }

    pub fn max(&self) -> f64 {
        self.observations[self.observations.len() - 1]
    }

    /// Interval outside which the density is exactly zero.
    pub fn support(&self) -> (f64, f64) {
        (self.min() - self.bandwidth, self.max() + self.bandwidth)
    }

    /// `f(x) = 1 / (n h) * sum_i K((X_i - x) / h)`.
    pub fn evaluate(&self, x: f64) -> f64 {
        let h = self.bandwidth;
        let lo = self.observations.partition_point(|&v| v < x - h);
        let hi = self.observations.partition_point(|&v| v <= x + h);
        let sum: f64 = self.observations[lo..hi]
            .iter()
            .map(|&xi| epanechnikov_kernel((xi - x) / h))
            .sum();
        sum / (self.observations.len() as f64 * h)
    }
}
