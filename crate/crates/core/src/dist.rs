//! Component lifetime laws.
//!
//! Time is measured in hours and rates in failures per hour throughout the
//! crate. Only the exponential law is provided; [`FailureDistribution::cdf`]
//! and [`FailureDistribution::pdf`] are the points every other module goes
//! through, so further laws only need to extend this file.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistributionKind {
    Exponential,
}

/// Lifetime law of a single component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FailureDistribution {
    kind: DistributionKind,
    rate: f64,
}

impl FailureDistribution {
    /// Exponential lifetime with the given failure rate (per hour).
    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::Domain(format!(
                "failure rate must be positive and finite, got {rate}"
            )));
        }
        Ok(Self {
            kind: DistributionKind::Exponential,
            rate,
        })
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Same law with its rate multiplied by `factor`; used to derive the
    /// dormant law of a spare from its active law.
    pub fn scaled(&self, factor: DormancyFactor) -> Self {
        Self {
            kind: self.kind,
            rate: self.rate * factor.alpha(),
        }
    }

    /// Probability that the component has failed by time `t`.
    pub fn cdf(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.cdf_unchecked(t))
    }

    /// Probability that the component still works at time `t`.
    pub fn survival(&self, t: f64) -> Result<f64> {
        Ok(1.0 - self.cdf(t)?)
    }

    pub fn pdf(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.pdf_unchecked(t))
    }

    pub(crate) fn cdf_unchecked(&self, t: f64) -> f64 {
        match self.kind {
            DistributionKind::Exponential => -(-self.rate * t).exp_m1(),
        }
    }

    pub(crate) fn pdf_unchecked(&self, t: f64) -> f64 {
        match self.kind {
            DistributionKind::Exponential => self.rate * (-self.rate * t).exp(),
        }
    }

    /// Draws one lifetime by inverse transform. The uniform variate comes
    /// from the open interval (0, 1), so the result is strictly positive and
    /// finite.
    pub fn sample_lifetime<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        match self.kind {
            DistributionKind::Exponential => -u.ln() / self.rate,
        }
    }
}

/// Ratio of a spare's dormant failure rate to its active failure rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DormancyFactor(f64);

impl DormancyFactor {
    pub const HOT: DormancyFactor = DormancyFactor(1.0);

    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Domain(format!(
                "dormancy factor must lie in (0, 1], got {alpha}"
            )));
        }
        Ok(Self(alpha))
    }

    pub fn alpha(&self) -> f64 {
        self.0
    }
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
    }
    Ok(())
}

/// Deterministic random stream identified by `(seed, index)`.
///
/// Streams with the same seed and different indices are independent
/// ChaCha8 streams, so work can be split across threads without the
/// results depending on how it was split.
pub fn random_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
