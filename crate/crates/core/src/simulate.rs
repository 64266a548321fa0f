//! Synthetic populations with known ground truth.
//!
//! True WTP comes from a truncated normal. Open-ended answers inflate it
//! additively, `stated = true + alpha + eps`. Dichotomous-choice answers
//! anchor on the cue, `stated = theta * (cue - true) + true`, and the
//! respondent accepts when the anchored value reaches the cue.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::model::{DcDataset, DcRecord, Elicitation, ThetaDistribution, WtpSample};
use crate::rng::seeded;

/// Below this truncation mass, rejection sampling switches to inverse CDF.
const REJECTION_MIN_ACCEPTANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedNormalSpec {
    pub mean: f64,
    pub sd: f64,
    pub low: f64,
    pub high: f64,
}

impl TruncatedNormalSpec {
    pub fn new(mean: f64, sd: f64, low: f64, high: f64) -> Result<Self> {
        let spec = Self {
            mean,
            sd,
            low,
            high,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.mean, self.sd, self.low, self.high]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::InvalidConfig(
                "truncated normal parameters must be finite".into(),
            ));
        }
        if self.sd < 0.0 {
            return Err(Error::InvalidConfig("sd must be non-negative".into()));
        }
        if self.low >= self.high {
            return Err(Error::InvalidConfig("low must be below high".into()));
        }
        if self.sd == 0.0 {
            if self.mean < self.low || self.mean > self.high {
                return Err(Error::DegenerateSpec(
                    "point mass lies outside the truncation bounds".into(),
                ));
            }
        } else if self.mass() <= 1e-12 {
            return Err(Error::DegenerateSpec(format!(
                "truncation region [{}, {}] has negligible probability",
                self.low, self.high
            )));
        }
        Ok(())
    }

    fn standard(&self) -> Normal {
        Normal::standard()
    }

    fn z(&self, x: f64) -> f64 {
        (x - self.mean) / self.sd
    }

    /// Probability of the untruncated normal falling inside [low, high].
    pub fn mass(&self) -> f64 {
        if self.sd == 0.0 {
            return 1.0;
        }
        let n = self.standard();
        n.cdf(self.z(self.high)) - n.cdf(self.z(self.low))
    }

    /// Closed-form mean, mu + sd * (phi(a) - phi(b)) / Z.
    pub fn analytic_mean(&self) -> f64 {
        if self.sd == 0.0 {
            return self.mean;
        }
        let n = self.standard();
        let (a, b) = (self.z(self.low), self.z(self.high));
        self.mean + self.sd * (n.pdf(a) - n.pdf(b)) / self.mass()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x < self.low {
            return 0.0;
        }
        if x >= self.high {
            return 1.0;
        }
        if self.sd == 0.0 {
            return if x >= self.mean { 1.0 } else { 0.0 };
        }
        let n = self.standard();
        (n.cdf(self.z(x)) - n.cdf(self.z(self.low))) / self.mass()
    }

    /// Pr(WTP ≥ x); equals 1 − cdf for a continuous distribution.
    pub fn survival(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        if self.sd == 0.0 {
            return vec![self.mean; n];
        }
        if self.mass() >= REJECTION_MIN_ACCEPTANCE {
            (0..n)
                .map(|_| loop {
                    let z: f64 = StandardNormal.sample(rng);
                    let x = self.mean + self.sd * z;
                    if x >= self.low && x <= self.high {
                        break x;
                    }
                })
                .collect()
        } else {
            let n01 = self.standard();
            let lo = n01.cdf(self.z(self.low));
            let hi = n01.cdf(self.z(self.high));
            (0..n)
                .map(|_| {
                    let u: f64 = rng.random();
                    let x = self.mean + self.sd * n01.inverse_cdf(lo + u * (hi - lo));
                    x.clamp(self.low, self.high)
                })
                .collect()
        }
    }
}

/// Draws `n` true WTP values. Deterministic for a given seed.
pub fn sample_true_wtp(spec: &TruncatedNormalSpec, n: usize, seed: u64) -> Result<WtpSample> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if spec.low < 0.0 {
        return Err(Error::InvalidConfig(
            "true WTP must be non-negative; lower truncation bound is below zero".into(),
        ));
    }
    let mut rng = seeded(seed);
    WtpSample::new(Elicitation::SimulatedTrue, spec.sample(n, &mut rng))
}

/// Open-ended inflation: category-level `alpha` plus per-respondent Normal noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OeBiasSpec {
    pub alpha: f64,
    pub epsilon_sd: f64,
}

/// Stated OE answers `true + alpha + eps`, one independent eps per respondent.
///
/// Fails with `NEGATIVE_VALUE` if a negative `alpha` pushes an answer below zero.
pub fn apply_oe_bias(true_wtp: &WtpSample, spec: &OeBiasSpec, seed: u64) -> Result<WtpSample> {
    if !spec.alpha.is_finite() || !spec.epsilon_sd.is_finite() || spec.epsilon_sd < 0.0 {
        return Err(Error::InvalidConfig(
            "alpha must be finite and epsilon_sd finite and non-negative".into(),
        ));
    }
    let mut rng = seeded(seed);
    let stated = true_wtp
        .values()
        .iter()
        .map(|&p| {
            let z: f64 = StandardNormal.sample(&mut rng);
            p + spec.alpha + spec.epsilon_sd * z
        })
        .collect();
    true_wtp.relabeled(Elicitation::Oe, stated)
}

pub fn sample_theta(dist: &ThetaDistribution, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded(seed);
    (0..n).map(|_| dist.quantile(rng.random())).collect()
}

/// Anchored DC valuation for one respondent.
pub fn anchored_value(theta: f64, cue: f64, true_wtp: f64) -> f64 {
    theta * (cue - true_wtp) + true_wtp
}

/// The unobservable side of one simulated DC answer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatentDcResponse {
    pub true_wtp: f64,
    pub cue: f64,
    pub theta: f64,
    pub stated: f64,
    pub accept: bool,
}

/// Assigns each respondent a uniformly random cue from `grid` and an
/// independent theta draw, then records accept ⇔ anchored value ≥ cue.
pub fn simulate_dc_responses(
    true_wtp: &WtpSample,
    grid: &[f64],
    theta_dist: &ThetaDistribution,
    seed: u64,
) -> Result<(DcDataset, Vec<LatentDcResponse>)> {
    crate::model::validate_grid(grid)?;
    let mut rng = seeded(seed);
    let latent: Vec<LatentDcResponse> = true_wtp
        .values()
        .iter()
        .map(|&p| {
            let cue = grid[rng.random_range(0..grid.len())];
            let theta = theta_dist.quantile(rng.random());
            let stated = anchored_value(theta, cue, p);
            LatentDcResponse {
                true_wtp: p,
                cue,
                theta,
                stated,
                accept: stated >= cue,
            }
        })
        .collect();
    let ids = true_wtp.ids();
    let records = latent
        .iter()
        .enumerate()
        .map(|(i, l)| DcRecord {
            id: ids.map(|ids| ids[i].clone()),
            price_cue: l.cue,
            accept: l.accept,
        })
        .collect();
    Ok((DcDataset::new(records, grid.to_vec())?, latent))
}
