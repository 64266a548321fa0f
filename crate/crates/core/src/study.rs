//! Monte-Carlo study with known ground truth.
//!
//! Each replicate draws three independent groups from the true WTP
//! distribution: an OE group (inflated by α plus optional noise), a DC group
//! (answers anchored on a random cue from the current grid set), and a BDM
//! group (truthful). The DC mean feeds the three de-biasing procedures, and
//! each corrected series yields a mean WTP and an optimal price, quantity, and
//! profit. Repeating this over progressively narrower DC grids shows how far
//! the price range can shrink before the DC mean, and with it the correction,
//! goes wrong.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::debias::{debias, theoretical_cov, DebiasConfig, Procedure};
use crate::demand::{
    dc_choice_shares, dc_groups, fit_logistic_grouped, fit_sample_logistic, nonparametric_dc_mean,
    parametric_dc_mean,
};
use crate::error::{Error, Result};
use crate::inference::percentile_interval;
use crate::model::{
    validate_grid, DcDataset, Interval, MarketConfig, ThetaDistribution, WtpSample,
};
use crate::pricing::{default_search_bound, optimize_price, PriceOptimum};
use crate::rng::derive_seed;
use crate::simulate::{
    apply_oe_bias, sample_true_wtp, simulate_dc_responses, OeBiasSpec, TruncatedNormalSpec,
};

/// Share of failed replicates above which a study cell is flagged.
pub const FLAG_FAILED_FRACTION: f64 = 0.2;
/// Step of the brute-force search for the optimum under the true distribution.
pub const TRUTH_PRICE_STEP: f64 = 0.001;

/// Grid sets obtained by removing the lowest and highest level pairwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridNarrowingPlan {
    pub full_grid: Vec<f64>,
    pub n_sets: usize,
}

impl GridNarrowingPlan {
    pub fn new(full_grid: Vec<f64>, n_sets: usize) -> Result<Self> {
        let plan = Self { full_grid, n_sets };
        plan.validate()?;
        Ok(plan)
    }

    /// Evenly spaced levels from `min` to `max` inclusive.
    pub fn evenly_spaced(min: f64, max: f64, step: f64, n_sets: usize) -> Result<Self> {
        Self::new(
            crate::io::GridSpec::Range { min, max, step }.levels()?,
            n_sets,
        )
    }

    pub fn validate(&self) -> Result<()> {
        validate_grid(&self.full_grid)?;
        if self.n_sets == 0 {
            return Err(Error::InvalidConfig(
                "a plan needs at least one grid set".into(),
            ));
        }
        let narrowest = self.full_grid.len() as i64 - 2 * (self.n_sets as i64 - 1);
        if narrowest < 3 {
            return Err(Error::InvalidConfig(format!(
                "{} levels cannot be narrowed into {} sets of at least 3 levels",
                self.full_grid.len(),
                self.n_sets
            )));
        }
        Ok(())
    }
}

impl Default for GridNarrowingPlan {
    fn default() -> Self {
        Self {
            full_grid: (0..=20).map(|i| 5.0 * i as f64).collect(),
            n_sets: 10,
        }
    }
}

/// Set k drops the k lowest and k highest levels; widest first.
pub fn build_grid_sets(plan: &GridNarrowingPlan) -> Result<Vec<Vec<f64>>> {
    plan.validate()?;
    let n = plan.full_grid.len();
    Ok((0..plan.n_sets)
        .map(|k| plan.full_grid[k..n - k].to_vec())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DcMeanMode {
    #[serde(alias = "parametric")]
    Parametric,
    #[serde(alias = "nonparametric")]
    Nonparametric,
}

impl DcMeanMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DcMeanMode::Parametric => "PARAMETRIC",
            DcMeanMode::Nonparametric => "NONPARAMETRIC",
        }
    }

    /// Mean WTP from DC answers under this estimator.
    pub fn dc_mean(self, d: &DcDataset) -> Result<f64> {
        match self {
            DcMeanMode::Parametric => parametric_dc_mean(&fit_logistic_grouped(&dc_groups(d))?),
            DcMeanMode::Nonparametric => nonparametric_dc_mean(&dc_choice_shares(d)),
        }
    }
}

impl std::str::FromStr for DcMeanMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "parametric" => Ok(DcMeanMode::Parametric),
            "nonparametric" => Ok(DcMeanMode::Nonparametric),
            other => Err(Error::InvalidConfig(format!(
                "unknown DC mean mode '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub truth: TruncatedNormalSpec,
    pub n_per_group: usize,
    pub n_samples: usize,
    pub oe_alpha: f64,
    /// σ of ε in simulated OE answers.
    pub oe_epsilon_sd: f64,
    pub theta: ThetaDistribution,
    pub plan: GridNarrowingPlan,
    pub dc_mean_modes: Vec<DcMeanMode>,
    pub market: MarketConfig,
    pub confidence: f64,
    pub seed: u64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            truth: TruncatedNormalSpec {
                mean: 50.0,
                sd: 10.0,
                low: 15.0,
                high: 85.0,
            },
            n_per_group: 250,
            n_samples: 1000,
            // half of an OE mean of 45.758
            oe_alpha: 22.879,
            oe_epsilon_sd: 0.0,
            theta: ThetaDistribution::zero_mean_on(1.0, 2.0).expect("valid support"),
            plan: GridNarrowingPlan::default(),
            dc_mean_modes: vec![DcMeanMode::Parametric, DcMeanMode::Nonparametric],
            market: MarketConfig {
                marginal_cost: 15.0,
                market_size: 1000.0,
            },
            confidence: 0.95,
            seed: 2024,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        self.truth.validate()?;
        self.plan.validate()?;
        if self.truth.low < 0.0 {
            return Err(Error::InvalidConfig("true WTP must be non-negative".into()));
        }
        if self.n_per_group < 2 || self.n_samples == 0 {
            return Err(Error::InvalidConfig(
                "need at least 2 respondents per group and 1 replicate".into(),
            ));
        }
        if !(self.oe_alpha.is_finite()
            && self.oe_epsilon_sd.is_finite()
            && self.oe_epsilon_sd >= 0.0)
        {
            return Err(Error::InvalidConfig("invalid OE bias parameters".into()));
        }
        if self.dc_mean_modes.is_empty() {
            return Err(Error::InvalidConfig("no DC mean mode selected".into()));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::InvalidConfig("confidence must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Rows of the study table besides the three procedures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Series {
    Basic,
    Epsilon,
    Full,
    /// The DC mean itself.
    Dc,
    /// The truthful comparison group.
    Bdm,
}

impl Series {
    pub fn as_str(self) -> &'static str {
        match self {
            Series::Basic => "BASIC",
            Series::Epsilon => "EPSILON",
            Series::Full => "FULL",
            Series::Dc => "DC",
            Series::Bdm => "BDM",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    MeanWtp,
    OptimalPrice,
    OptimalQuantity,
    OptimalProfit,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::MeanWtp,
        Metric::OptimalPrice,
        Metric::OptimalQuantity,
        Metric::OptimalProfit,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::MeanWtp => "mean_wtp",
            Metric::OptimalPrice => "optimal_price",
            Metric::OptimalQuantity => "optimal_quantity",
            Metric::OptimalProfit => "optimal_profit",
        }
    }
}

/// Aggregate of one (grid set, series, mode, metric) over all replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyCell {
    pub grid_set: usize,
    pub levels: usize,
    pub series: Series,
    pub mode: DcMeanMode,
    pub metric: Metric,
    pub true_value: f64,
    /// Mean across successful replicates.
    pub estimate: f64,
    pub interval: Interval,
    pub failed: usize,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub config: StudyConfig,
    pub grid_sets: Vec<Vec<f64>>,
    pub true_mean: f64,
    pub true_optimum: PriceOptimum,
    pub cells: Vec<StudyCell>,
}

impl StudyResult {
    pub fn cell(
        &self,
        grid_set: usize,
        series: Series,
        mode: DcMeanMode,
        metric: Metric,
    ) -> Option<&StudyCell> {
        self.cells.iter().find(|c| {
            c.grid_set == grid_set && c.series == series && c.mode == mode && c.metric == metric
        })
    }
}

/// Profit-maximizing price under the true WTP distribution, by brute force.
pub fn true_optimum(truth: &TruncatedNormalSpec, market: &MarketConfig) -> PriceOptimum {
    let c = market.marginal_cost;
    let top = truth.high.max(c);
    let steps = ((top - c) / TRUTH_PRICE_STEP).ceil() as usize;
    let mut best = PriceOptimum {
        price: c,
        quantity: truth.survival(c),
        profit: 0.0,
        interior: true,
    };
    for k in 0..=steps {
        let p = (c + k as f64 * TRUTH_PRICE_STEP).min(top);
        let q = truth.survival(p);
        let v = (p - c) * q * market.market_size;
        if v > best.profit {
            best = PriceOptimum {
                price: p,
                quantity: q,
                profit: v,
                interior: true,
            };
        }
    }
    best
}

/// Values per (mode, series) with metrics in `Metric::ALL` order; NaN marks failure.
type ReplicateRow = Vec<[f64; 4]>;

const SERIES_ORDER: [Series; 5] = [
    Series::Basic,
    Series::Epsilon,
    Series::Full,
    Series::Dc,
    Series::Bdm,
];

fn run_replicate(cfg: &StudyConfig, grid: &[f64], seed: u64) -> Result<ReplicateRow> {
    let n = cfg.n_per_group;
    let oe_truth = sample_true_wtp(&cfg.truth, n, derive_seed(seed, 1))?;
    let oe = apply_oe_bias(
        &oe_truth,
        &OeBiasSpec {
            alpha: cfg.oe_alpha,
            epsilon_sd: cfg.oe_epsilon_sd,
        },
        derive_seed(seed, 2),
    )?;
    let dc_truth = sample_true_wtp(&cfg.truth, n, derive_seed(seed, 3))?;
    let (dc, _) = simulate_dc_responses(&dc_truth, grid, &cfg.theta, derive_seed(seed, 4))?;
    let bdm = sample_true_wtp(&cfg.truth, n, derive_seed(seed, 5))?;
    let noise_seed = derive_seed(seed, 6);

    let full_grid = &cfg.plan.full_grid;
    let nan = [f64::NAN; 4];
    let mut row = Vec::with_capacity(cfg.dc_mean_modes.len() * SERIES_ORDER.len());
    for mode in &cfg.dc_mean_modes {
        let dc_mean = match mode.dc_mean(&dc) {
            Ok(m) => m,
            Err(_) => {
                row.extend(std::iter::repeat_n(nan, SERIES_ORDER.len() - 1));
                row.push([bdm.mean(), f64::NAN, f64::NAN, f64::NAN]);
                continue;
            }
        };
        for proc in Procedure::ALL {
            let dcfg = DebiasConfig::new(proc)
                .with_cov(theoretical_cov(bdm.mean(), dc_mean))
                .with_seed(noise_seed);
            let est = debias(&oe, dc_mean, &dcfg)?;
            row.push(with_optimum(&est.debiased, full_grid, &cfg.market));
        }
        row.push([dc_mean, f64::NAN, f64::NAN, f64::NAN]);
        row.push([bdm.mean(), f64::NAN, f64::NAN, f64::NAN]);
    }
    Ok(row)
}

fn with_optimum(s: &WtpSample, grid: &[f64], market: &MarketConfig) -> [f64; 4] {
    let top = grid.iter().copied().fold(s.max(), f64::max);
    let opt = fit_sample_logistic(s, grid)
        .and_then(|m| optimize_price(&m, market, default_search_bound(top, market)));
    match opt {
        Ok(o) => [s.mean(), o.price, o.quantity, o.profit],
        Err(_) => [s.mean(), f64::NAN, f64::NAN, f64::NAN],
    }
}

/// Runs every grid set × replicate and aggregates each cell to its mean and
/// percentile interval across replicates. Replicate r of set k uses a seed
/// derived from (seed, k, r), so results do not depend on scheduling.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyResult> {
    cfg.validate()?;
    let sets = build_grid_sets(&cfg.plan)?;
    let jobs: Vec<(usize, usize)> = (0..sets.len())
        .flat_map(|k| (0..cfg.n_samples).map(move |r| (k, r)))
        .collect();
    let rows: Vec<Result<ReplicateRow>> = jobs
        .par_iter()
        .map(|&(k, r)| {
            let seed = derive_seed(derive_seed(cfg.seed, k as u64), r as u64);
            run_replicate(cfg, &sets[k], seed)
        })
        .collect();

    let true_mean = cfg.truth.analytic_mean();
    let truth_opt = true_optimum(&cfg.truth, &cfg.market);
    let truth_of = |m: Metric| match m {
        Metric::MeanWtp => true_mean,
        Metric::OptimalPrice => truth_opt.price,
        Metric::OptimalQuantity => truth_opt.quantity,
        Metric::OptimalProfit => truth_opt.profit,
    };

    let mut cells = Vec::new();
    for (k, grid) in sets.iter().enumerate() {
        let set_rows = &rows[k * cfg.n_samples..(k + 1) * cfg.n_samples];
        for (mi, mode) in cfg.dc_mean_modes.iter().enumerate() {
            for (si, series) in SERIES_ORDER.iter().enumerate() {
                let col = mi * SERIES_ORDER.len() + si;
                let metrics: &[Metric] = match series {
                    Series::Dc | Series::Bdm => &Metric::ALL[..1],
                    _ => &Metric::ALL,
                };
                for (j, metric) in metrics.iter().enumerate() {
                    let mut vals: Vec<f64> = set_rows
                        .iter()
                        .filter_map(|r| r.as_ref().ok())
                        .map(|r| r[col][j])
                        .filter(|v| !v.is_nan())
                        .collect();
                    let failed = cfg.n_samples - vals.len();
                    vals.sort_by(f64::total_cmp);
                    let estimate = if vals.is_empty() {
                        f64::NAN
                    } else {
                        vals.iter().sum::<f64>() / vals.len() as f64
                    };
                    cells.push(StudyCell {
                        grid_set: k,
                        levels: grid.len(),
                        series: *series,
                        mode: *mode,
                        metric: *metric,
                        true_value: truth_of(*metric),
                        estimate,
                        interval: percentile_interval(&vals, cfg.confidence),
                        failed,
                        flagged: failed as f64 > FLAG_FAILED_FRACTION * cfg.n_samples as f64,
                    });
                }
            }
        }
    }
    Ok(StudyResult {
        config: cfg.clone(),
        grid_sets: sets,
        true_mean,
        true_optimum: truth_opt,
        cells,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEntry {
    pub series: Series,
    pub mode: DcMeanMode,
    /// First grid set (widest first) whose mean-WTP interval excludes the truth.
    pub breakdown_set: Option<usize>,
    pub levels: Option<usize>,
    /// How much narrower that set's price range is than the true WTP range, in percent.
    pub narrowing_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NarrowingReport {
    pub insufficient_sets: bool,
    pub true_range: Interval,
    pub entries: Vec<ThresholdEntry>,
}

impl NarrowingReport {
    pub fn entry(&self, series: Series, mode: DcMeanMode) -> Option<&ThresholdEntry> {
        self.entries
            .iter()
            .find(|e| e.series == series && e.mode == mode)
    }
}

pub fn narrowing_threshold_report(result: &StudyResult) -> NarrowingReport {
    let truth = &result.config.truth;
    let true_range = Interval::new(truth.low, truth.high);
    if result.grid_sets.len() < 2 {
        return NarrowingReport {
            insufficient_sets: true,
            true_range,
            entries: Vec::new(),
        };
    }
    let mut entries = Vec::new();
    for mode in &result.config.dc_mean_modes {
        for series in [Series::Basic, Series::Epsilon, Series::Full, Series::Dc] {
            let hit = (0..result.grid_sets.len()).find(|&k| {
                result
                    .cell(k, series, *mode, Metric::MeanWtp)
                    .is_some_and(|c| !c.interval.contains(c.true_value))
            });
            let levels = hit.map(|k| result.grid_sets[k].len());
            let narrowing_pct = hit.map(|k| {
                let g = &result.grid_sets[k];
                100.0 * (1.0 - (g[g.len() - 1] - g[0]) / true_range.width())
            });
            entries.push(ThresholdEntry {
                series,
                mode: *mode,
                breakdown_set: hit,
                levels,
                narrowing_pct,
            });
        }
    }
    NarrowingReport {
        insufficient_sets: false,
        true_range,
        entries,
    }
}
