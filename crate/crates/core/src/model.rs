//! Shared domain types and input validation.
//!
//! Money is a finite `f64` in currency units. Adjusted series produce
//! non-integral values, so comparisons are tolerance based.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, IssueKind, Result, RowIssue};

/// Where a WTP series came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Elicitation {
    /// Open-ended stated WTP.
    Oe,
    /// Incentive-aligned (BDM) WTP, treated as actual WTP.
    Bdm,
    DebiasedBasic,
    DebiasedEpsilon,
    DebiasedFull,
    /// Ground-truth draws from a simulation.
    SimulatedTrue,
}

impl Elicitation {
    /// De-biased series may legitimately dip below zero.
    pub fn allows_negative(self) -> bool {
        matches!(
            self,
            Elicitation::DebiasedBasic | Elicitation::DebiasedEpsilon | Elicitation::DebiasedFull
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Elicitation::Oe => "OE",
            Elicitation::Bdm => "BDM",
            Elicitation::DebiasedBasic => "DEBIASED_BASIC",
            Elicitation::DebiasedEpsilon => "DEBIASED_EPSILON",
            Elicitation::DebiasedFull => "DEBIASED_FULL",
            Elicitation::SimulatedTrue => "SIMULATED_TRUE",
        }
    }
}

/// A labeled, validated series of individual WTP amounts.
///
/// Construction guarantees: non-empty, all values finite, non-negative unless
/// the label is a de-biased one, and ids (when present) aligned and unique.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WtpSample {
    label: Elicitation,
    values: Vec<f64>,
    ids: Option<Vec<String>>,
}

impl WtpSample {
    pub fn new(label: Elicitation, values: Vec<f64>) -> Result<Self> {
        check_values(label, &values, None)?;
        Ok(Self {
            label,
            values,
            ids: None,
        })
    }

    pub fn with_ids(label: Elicitation, ids: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if ids.len() != values.len() {
            return Err(Error::InvalidConfig(format!(
                "{} ids for {} values",
                ids.len(),
                values.len()
            )));
        }
        check_values(label, &values, Some(&ids))?;
        Ok(Self {
            label,
            values,
            ids: Some(ids),
        })
    }

    pub fn label(&self) -> Elicitation {
        self.label
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn ids(&self) -> Option<&[String]> {
        self.ids.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        mean_unchecked(&self.values)
    }

    /// Sample standard deviation (n − 1 denominator); zero for a single value.
    pub fn sd(&self) -> f64 {
        sample_sd(&self.values).unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Same ids, new values and label. Used by transforms that keep respondents aligned.
    pub(crate) fn relabeled(&self, label: Elicitation, values: Vec<f64>) -> Result<Self> {
        match &self.ids {
            Some(ids) => Self::with_ids(label, ids.clone(), values),
            None => Self::new(label, values),
        }
    }
}

fn check_values(label: Elicitation, values: &[f64], ids: Option<&[String]>) -> Result<()> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut issues = Vec::new();
    let mut seen = HashSet::new();
    for (row, &v) in values.iter().enumerate() {
        let id = ids.map(|ids| ids[row].clone());
        if !v.is_finite() {
            issues.push(RowIssue {
                row,
                id: id.clone(),
                kind: IssueKind::NonFiniteValue,
            });
        } else if v < 0.0 && !label.allows_negative() {
            issues.push(RowIssue {
                row,
                id: id.clone(),
                kind: IssueKind::NegativeValue,
            });
        }
        if let Some(id) = id {
            if !seen.insert(id.clone()) {
                issues.push(RowIssue {
                    row,
                    id: Some(id),
                    kind: IssueKind::DuplicateId,
                });
            }
        }
    }
    if issues.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidRows(issues))
    }
}

/// Validates raw `(id, value)` rows into a sample, reporting every offending row.
pub fn validate_sample(label: Elicitation, rows: &[(String, f64)]) -> Result<WtpSample> {
    let (ids, values): (Vec<String>, Vec<f64>) = rows.iter().cloned().unzip();
    WtpSample::with_ids(label, ids, values)
}

pub fn sample_mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(mean_unchecked(values))
}

fn mean_unchecked(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample variance with the n − 1 denominator.
pub fn sample_variance(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::InsufficientData(
            "variance needs at least two values".into(),
        ));
    }
    let m = mean_unchecked(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    Ok(ss / (values.len() - 1) as f64)
}

pub fn sample_sd(values: &[f64]) -> Result<f64> {
    sample_variance(values).map(f64::sqrt)
}

/// One dichotomous-choice answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcRecord {
    pub id: Option<String>,
    pub price_cue: f64,
    pub accept: bool,
}

impl DcRecord {
    pub fn new(price_cue: f64, accept: bool) -> Self {
        Self {
            id: None,
            price_cue,
            accept,
        }
    }
}

/// Dichotomous-choice records plus the designed price grid.
///
/// Every cue must be one of the grid levels exactly; off-grid cues are
/// rejected, never snapped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DcDataset {
    records: Vec<DcRecord>,
    grid: Vec<f64>,
}

impl DcDataset {
    pub fn new(records: Vec<DcRecord>, grid: Vec<f64>) -> Result<Self> {
        validate_grid(&grid)?;
        if records.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut issues = Vec::new();
        let mut seen = HashSet::new();
        for (row, r) in records.iter().enumerate() {
            if !r.price_cue.is_finite() {
                issues.push(RowIssue {
                    row,
                    id: r.id.clone(),
                    kind: IssueKind::NonFiniteValue,
                });
            } else if grid
                .binary_search_by(|g| g.total_cmp(&r.price_cue))
                .is_err()
            {
                issues.push(RowIssue {
                    row,
                    id: r.id.clone(),
                    kind: IssueKind::OffGridCue,
                });
            }
            if let Some(id) = &r.id {
                if !seen.insert(id.clone()) {
                    issues.push(RowIssue {
                        row,
                        id: Some(id.clone()),
                        kind: IssueKind::DuplicateId,
                    });
                }
            }
        }
        if !issues.is_empty() {
            return Err(Error::InvalidRows(issues));
        }
        Ok(Self { records, grid })
    }

    /// Builds a dataset whose grid is the set of distinct cues observed.
    pub fn with_observed_grid(records: Vec<DcRecord>) -> Result<Self> {
        let mut grid: Vec<f64> = records
            .iter()
            .map(|r| r.price_cue)
            .filter(|p| p.is_finite())
            .collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        Self::new(records, grid)
    }

    pub fn records(&self) -> &[DcRecord] {
        &self.records
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn observations(&self) -> Vec<(f64, bool)> {
        self.records
            .iter()
            .map(|r| (r.price_cue, r.accept))
            .collect()
    }

    /// Grid levels that received no records.
    pub fn empty_levels(&self) -> Vec<f64> {
        self.grid
            .iter()
            .copied()
            .filter(|g| !self.records.iter().any(|r| r.price_cue == *g))
            .collect()
    }

    pub fn accept_rate(&self) -> f64 {
        self.records.iter().filter(|r| r.accept).count() as f64 / self.records.len() as f64
    }
}

/// A grid must be non-empty, finite, non-negative, and strictly increasing.
pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("price grid is empty".into()));
    }
    if grid.iter().any(|g| !g.is_finite() || *g < 0.0) {
        return Err(Error::InvalidConfig(
            "price grid levels must be finite and non-negative".into(),
        ));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig(
            "price grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CurveKind {
    NonparametricSurvival,
    DcChoiceShares,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub price: f64,
    pub share: f64,
    /// Observations behind the point (sample size for survival curves).
    pub count: usize,
}

/// Share of the market buying at each price.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandCurve {
    pub kind: CurveKind,
    pub points: Vec<CurvePoint>,
}

impl DemandCurve {
    /// Step-function lookup: the share at the first tabulated price ≥ `price`,
    /// zero beyond the last point.
    pub fn share_at(&self, price: f64) -> f64 {
        self.points
            .iter()
            .find(|pt| pt.price >= price)
            .map_or(0.0, |pt| pt.share)
    }

    pub fn prices(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.price).collect()
    }

    pub fn shares(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.share).collect()
    }
}

/// Logistic demand q(p) = e^(a+bp) / (1 + e^(a+bp)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticDemand {
    pub intercept: f64,
    pub slope: f64,
    /// Inverse observed information at the MLE, ordered (intercept, slope).
    pub coef_covariance: [[f64; 2]; 2],
    pub n_obs: usize,
    pub log_likelihood: f64,
    /// False when the observations are not independent (e.g. a respondent
    /// expanded over a price grid); such covariances must not feed inference.
    pub covariance_valid: bool,
}

impl LogisticDemand {
    pub fn from_coefficients(intercept: f64, slope: f64) -> Self {
        Self {
            intercept,
            slope,
            coef_covariance: [[0.0; 2]; 2],
            n_obs: 0,
            log_likelihood: f64::NAN,
            covariance_valid: false,
        }
    }

    pub fn share(&self, price: f64) -> f64 {
        logistic(self.intercept + self.slope * price)
    }

    /// Only downward-sloping demand is admitted to mean and pricing operations.
    pub fn is_downward(&self) -> bool {
        self.slope < 0.0
    }

    pub(crate) fn require_downward(&self) -> Result<()> {
        if self.is_downward() {
            Ok(())
        } else {
            Err(Error::NonNegativeSlope { slope: self.slope })
        }
    }
}

pub(crate) fn logistic(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^x) without overflow.
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Zero-mean piecewise-uniform anchoring distribution: density `neg_density`
/// on [−neg_width, 0) and `pos_density` on [0, pos_width].
///
/// The mean is zero yet the shape can be strongly asymmetric, so respondents
/// can be biased toward high cues more often than toward low ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaDistribution {
    neg_width: f64,
    pos_width: f64,
    neg_density: f64,
    pos_density: f64,
}

const THETA_TOL: f64 = 1e-12;

impl ThetaDistribution {
    pub fn new(neg_width: f64, pos_width: f64, neg_density: f64, pos_density: f64) -> Result<Self> {
        let parts = [neg_width, pos_width, neg_density, pos_density];
        if parts.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidConfig(
                "theta widths and densities must be finite and non-negative".into(),
            ));
        }
        let mass = neg_width * neg_density + pos_width * pos_density;
        if (mass - 1.0).abs() > THETA_TOL {
            return Err(Error::InvalidConfig(format!(
                "theta distribution has total mass {mass}, expected 1"
            )));
        }
        let neg_moment = neg_density * neg_width * neg_width / 2.0;
        let pos_moment = pos_density * pos_width * pos_width / 2.0;
        let scale = neg_moment.abs().max(pos_moment.abs()).max(1.0);
        if (neg_moment - pos_moment).abs() > THETA_TOL * scale {
            return Err(Error::InvalidConfig(format!(
                "theta distribution has mean {}, expected 0",
                pos_moment - neg_moment
            )));
        }
        Ok(Self {
            neg_width,
            pos_width,
            neg_density,
            pos_density,
        })
    }

    /// The unique zero-mean piecewise-uniform distribution on [−neg_width, pos_width].
    pub fn zero_mean_on(neg_width: f64, pos_width: f64) -> Result<Self> {
        if !(neg_width > 0.0 && pos_width > 0.0) {
            return Err(Error::InvalidConfig(
                "both support widths must be positive".into(),
            ));
        }
        let total = neg_width + pos_width;
        Self::new(
            neg_width,
            pos_width,
            pos_width / (neg_width * total),
            neg_width / (pos_width * total),
        )
    }

    pub fn neg_width(&self) -> f64 {
        self.neg_width
    }

    pub fn pos_width(&self) -> f64 {
        self.pos_width
    }

    pub fn neg_density(&self) -> f64 {
        self.neg_density
    }

    pub fn pos_density(&self) -> f64 {
        self.pos_density
    }

    pub fn mass_below_zero(&self) -> f64 {
        self.neg_width * self.neg_density
    }

    pub fn mean(&self) -> f64 {
        self.pos_density * self.pos_width * self.pos_width / 2.0
            - self.neg_density * self.neg_width * self.neg_width / 2.0
    }

    /// Inverse CDF for u in [0, 1).
    pub fn quantile(&self, u: f64) -> f64 {
        let below = self.mass_below_zero();
        if u < below {
            -self.neg_width + u / self.neg_density
        } else if self.pos_density > 0.0 {
            ((u - below) / self.pos_density).min(self.pos_width)
        } else {
            0.0
        }
    }
}

/// Marginal cost and target market size for profit computations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketConfig {
    pub marginal_cost: f64,
    pub market_size: f64,
}

impl MarketConfig {
    pub fn new(marginal_cost: f64, market_size: f64) -> Result<Self> {
        if !marginal_cost.is_finite() || marginal_cost < 0.0 {
            return Err(Error::InvalidConfig(
                "marginal cost must be finite and non-negative".into(),
            ));
        }
        if !market_size.is_finite() || market_size < 1.0 {
            return Err(Error::InvalidConfig(
                "market size must be at least 1".into(),
            ));
        }
        Ok(Self {
            marginal_cost,
            market_size,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TestKind {
    WelchT,
    KsTwoSample,
    LikelihoodRatio,
    BootstrapDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub kind: TestKind,
    pub statistic: f64,
    pub df: Option<f64>,
    pub p_value: f64,
}

impl TestResult {
    pub fn significant(&self, level: f64) -> bool {
        self.p_value < level
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lower <= other.upper && other.lower <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Optimal price, quantity, and profit with percentile bootstrap intervals.
///
/// The point estimate comes from the full sample, so it is not guaranteed to
/// lie inside its own percentile interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimumReport {
    pub optimal_price: f64,
    pub optimal_quantity: f64,
    pub optimal_profit: f64,
    pub ci_price: Interval,
    pub ci_quantity: Interval,
    pub ci_profit: Interval,
    /// Fractional difference to the benchmark profit, in percent.
    pub profit_pct_diff_vs_benchmark: Option<f64>,
    pub profit_difference_test: Option<TestResult>,
    /// False when the search bound was binding for the point estimate.
    pub interior: bool,
    pub reps: usize,
    pub failed_replicates: usize,
    /// Per-replicate (price, quantity, profit); kept for paired difference tests.
    #[serde(default, skip_serializing)]
    pub replicates: Vec<[f64; 3]>,
}
