//! Bias correction of open-ended WTP statements.
//!
//! Each stated value is shifted so the series mean lands on the DC mean
//! (optionally plus cov(θ, p)), and a fresh noise draw can be subtracted to
//! mimic the individual-level error in OE answers:
//!
//! ```text
//! p_i = p̃_i − p̃ + p̂ + cov − ε_i
//! ```
//!
//! BASIC uses cov = 0 and ε = 0, EPSILON adds ε ~ N(0, σ²), FULL adds both.
//! The draw is symmetric about zero, so subtracting or adding it gives the
//! same distribution; it is subtracted here to follow the formula literally.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::demand::fit_sample_logistic;
use crate::error::{Error, Result};
use crate::model::{Elicitation, MarketConfig, WtpSample};
use crate::pricing::{default_search_bound, optimize_price};
use crate::rng::seeded;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Procedure {
    #[serde(alias = "basic")]
    Basic,
    #[serde(alias = "epsilon")]
    Epsilon,
    #[serde(alias = "full")]
    Full,
}

impl Procedure {
    pub const ALL: [Procedure; 3] = [Procedure::Basic, Procedure::Epsilon, Procedure::Full];

    pub fn label(self) -> Elicitation {
        match self {
            Procedure::Basic => Elicitation::DebiasedBasic,
            Procedure::Epsilon => Elicitation::DebiasedEpsilon,
            Procedure::Full => Elicitation::DebiasedFull,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Procedure::Basic => "BASIC",
            Procedure::Epsilon => "EPSILON",
            Procedure::Full => "FULL",
        }
    }
}

impl std::str::FromStr for Procedure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "basic" => Ok(Procedure::Basic),
            "epsilon" => Ok(Procedure::Epsilon),
            "full" => Ok(Procedure::Full),
            other => Err(Error::InvalidConfig(format!("unknown procedure '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DebiasConfig {
    pub procedure: Procedure,
    /// cov(θ, p); only FULL uses it.
    pub cov: f64,
    /// σ of the simulated ε; `None` means the SD of the OE series.
    pub epsilon_sd: Option<f64>,
    pub seed: u64,
    pub clamp_at_zero: bool,
}

impl DebiasConfig {
    pub fn new(procedure: Procedure) -> Self {
        Self {
            procedure,
            cov: 0.0,
            epsilon_sd: None,
            seed: 0,
            clamp_at_zero: false,
        }
    }

    pub fn with_cov(mut self, cov: f64) -> Self {
        self.cov = cov;
        self
    }

    pub fn with_epsilon_sd(mut self, sd: f64) -> Self {
        self.epsilon_sd = Some(sd);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn effective_cov(&self) -> f64 {
        match self.procedure {
            Procedure::Full => self.cov,
            _ => 0.0,
        }
    }

    fn effective_sd(&self, oe: &WtpSample) -> f64 {
        match self.procedure {
            Procedure::Basic => 0.0,
            _ => self.epsilon_sd.unwrap_or_else(|| oe.sd()),
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.cov.is_finite() {
            return Err(Error::InvalidConfig("cov must be finite".into()));
        }
        if let Some(sd) = self.epsilon_sd {
            if !(sd.is_finite() && sd >= 0.0) {
                return Err(Error::InvalidConfig(
                    "epsilon_sd must be finite and non-negative".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DebiasEstimate {
    pub procedure: Procedure,
    /// Implied inflator: oe_mean − dc_mean − cov_used.
    pub alpha_hat: f64,
    pub oe_mean: f64,
    pub dc_mean: f64,
    pub cov_used: f64,
    pub epsilon_sd_used: f64,
    pub seed: u64,
    pub clamp_at_zero: bool,
    #[serde(skip)]
    pub debiased: WtpSample,
}

/// `n` standard-normal draws, one per respondent in input order.
fn unit_noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

pub fn debias(oe: &WtpSample, dc_mean: f64, cfg: &DebiasConfig) -> Result<DebiasEstimate> {
    cfg.validate()?;
    if !dc_mean.is_finite() {
        return Err(Error::InvalidConfig("DC mean must be finite".into()));
    }
    let oe_mean = oe.mean();
    let cov = cfg.effective_cov();
    let sd = cfg.effective_sd(oe);
    let shift = dc_mean - oe_mean + cov;
    let mut values: Vec<f64> = oe.values().iter().map(|v| v + shift).collect();
    if cfg.procedure != Procedure::Basic {
        for (v, z) in values.iter_mut().zip(unit_noise(oe.len(), cfg.seed)) {
            *v -= sd * z;
        }
    }
    if cfg.clamp_at_zero {
        for v in &mut values {
            *v = v.max(0.0);
        }
    }
    Ok(DebiasEstimate {
        procedure: cfg.procedure,
        alpha_hat: oe_mean - dc_mean - cov,
        oe_mean,
        dc_mean,
        cov_used: cov,
        epsilon_sd_used: sd,
        seed: cfg.seed,
        clamp_at_zero: cfg.clamp_at_zero,
        debiased: oe.relabeled(cfg.procedure.label(), values)?,
    })
}

/// Best calibration value for cov(θ, p): BDM mean minus DC mean.
pub fn theoretical_cov(bdm_mean: f64, dc_mean: f64) -> f64 {
    bdm_mean - dc_mean
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub cov: f64,
    pub optimal_price: f64,
    pub optimal_profit: f64,
    pub profit_difference: f64,
}

/// `steps` evenly spaced values from `lo` to `hi`, both included.
pub fn cov_grid(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) || steps < 2 {
        return Err(Error::InvalidConfig(
            "cov sweep needs finite lo < hi and at least 2 steps".into(),
        ));
    }
    let h = (hi - lo) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            if i == steps - 1 {
                hi
            } else {
                lo + i as f64 * h
            }
        })
        .collect())
}

/// Runs FULL de-biasing at each cov on a uniform grid, fits logistic demand to
/// the corrected series (expanded on `grid`), optimizes price, and records
/// profit minus `benchmark_profit`. The same noise seed is used at every
/// point, so only cov changes along the sweep.
#[allow(clippy::too_many_arguments)]
pub fn cov_sensitivity_sweep(
    oe: &WtpSample,
    dc_mean: f64,
    cov_lo: f64,
    cov_hi: f64,
    steps: usize,
    cfg: &DebiasConfig,
    grid: &[f64],
    market: MarketConfig,
    benchmark_profit: f64,
) -> Result<Vec<SweepPoint>> {
    let covs = cov_grid(cov_lo, cov_hi, steps)?;
    covs.par_iter()
        .map(|&cov| {
            let point_cfg = DebiasConfig {
                procedure: Procedure::Full,
                cov,
                ..*cfg
            };
            let est = debias(oe, dc_mean, &point_cfg)?;
            let m = fit_sample_logistic(&est.debiased, grid)?;
            let top = grid.iter().copied().fold(est.debiased.max(), f64::max);
            let o = optimize_price(&m, &market, default_search_bound(top, &market))?;
            Ok(SweepPoint {
                cov,
                optimal_price: o.price,
                optimal_profit: o.profit,
                profit_difference: o.profit - benchmark_profit,
            })
        })
        .collect()
}
