//! Monopoly profit under logistic demand and the profit-maximizing price.
//!
//! Profit is π(p) = (p − c)·q(p)·ms with fixed costs left out (they do not move
//! the argmax). The optimizer scans [c, p_max] on a coarse grid and refines the
//! bracketing cell by golden-section search.

use serde::{Deserialize, Serialize};

use crate::demand::{expand_values_grouped, fit_logistic, fit_logistic_grouped};
use crate::error::{Error, Result};
use crate::inference::{
    canonical_records, canonical_values, check_failures, difference_test_from_replicates,
    percentile_interval, resample_replicates, BootData, BootstrapSettings,
};
use crate::model::{Interval, LogisticDemand, MarketConfig, OptimumReport};

pub const SCAN_INTERVALS: usize = 2000;
pub const PRICE_TOLERANCE: f64 = 1e-6;

pub fn profit(p: f64, m: &LogisticDemand, mkt: &MarketConfig) -> f64 {
    (p - mkt.marginal_cost) * m.share(p) * mkt.market_size
}

/// Residual of the first-order condition 1 + (p − c)·b·(1 − q(p)) = 0.
pub fn foc_residual(p: f64, m: &LogisticDemand, mkt: &MarketConfig) -> f64 {
    1.0 + (p - mkt.marginal_cost) * m.slope * (1.0 - m.share(p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceOptimum {
    pub price: f64,
    pub quantity: f64,
    pub profit: f64,
    /// False when the maximum sits on the upper search bound.
    pub interior: bool,
}

pub fn optimize_price(m: &LogisticDemand, mkt: &MarketConfig, p_max: f64) -> Result<PriceOptimum> {
    m.require_downward()?;
    let c = mkt.marginal_cost;
    if !(p_max.is_finite() && p_max > c) {
        return Err(Error::InvalidConfig(format!(
            "search bound {p_max} must exceed marginal cost {c}"
        )));
    }
    let f = |p: f64| profit(p, m, mkt);
    let step = (p_max - c) / SCAN_INTERVALS as f64;
    let at = |k: usize| {
        if k == SCAN_INTERVALS {
            p_max
        } else {
            c + k as f64 * step
        }
    };
    let mut best = 0;
    let mut best_val = f(c);
    for k in 1..=SCAN_INTERVALS {
        let v = f(at(k));
        if v > best_val {
            best = k;
            best_val = v;
        }
    }
    if best == SCAN_INTERVALS {
        return Ok(PriceOptimum {
            price: p_max,
            quantity: m.share(p_max),
            profit: best_val,
            interior: false,
        });
    }
    let (mut lo, mut hi) = (at(best.saturating_sub(1)), at(best + 1));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > PRICE_TOLERANCE {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    let mut price = 0.5 * (lo + hi);
    if f(price) < best_val {
        price = at(best);
    }
    Ok(PriceOptimum {
        price,
        quantity: m.share(price),
        profit: f(price),
        interior: true,
    })
}

/// What is needed to turn raw data into an optimum: the grid used to expand
/// WTP samples, the market, and the upper search bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricingSetup {
    pub grid: Vec<f64>,
    pub market: MarketConfig,
    pub p_max: f64,
}

impl PricingSetup {
    /// Upper bound defaults to twice the largest observed value or grid level.
    pub fn for_data(data: BootData<'_>, grid: &[f64], market: MarketConfig) -> Self {
        let top = match data {
            BootData::Wtp(s) => s.max(),
            BootData::Dc(d) => d.grid().last().copied().unwrap_or(0.0),
        };
        let top = grid.iter().copied().fold(top, f64::max);
        Self {
            grid: grid.to_vec(),
            market,
            p_max: default_search_bound(top, &market),
        }
    }
}

pub fn default_search_bound(top: f64, market: &MarketConfig) -> f64 {
    let bound = 2.0 * top;
    if bound > market.marginal_cost {
        bound
    } else {
        // nothing observed above cost: still search a non-empty range
        market.marginal_cost + 1.0 + market.marginal_cost.abs()
    }
}

pub(crate) fn optimum_of_values(values: &[f64], s: &PricingSetup) -> Result<PriceOptimum> {
    let m = fit_logistic_grouped(&expand_values_grouped(values, &s.grid))?;
    optimize_price(&m, &s.market, s.p_max)
}

pub(crate) fn optimum_of_records(obs: &[(f64, bool)], s: &PricingSetup) -> Result<PriceOptimum> {
    optimize_price(&fit_logistic(obs)?, &s.market, s.p_max)
}

fn optimum_of(data: BootData<'_>, s: &PricingSetup) -> Result<PriceOptimum> {
    match data {
        BootData::Wtp(w) => optimum_of_values(w.values(), s),
        BootData::Dc(d) => optimum_of_records(&d.observations(), s),
    }
}

/// Point optimum from the full data (WTP samples are expanded onto `grid`).
pub fn optimum_point(
    data: BootData<'_>,
    grid: &[f64],
    market: MarketConfig,
) -> Result<PriceOptimum> {
    optimum_of(data, &PricingSetup::for_data(data, grid, market))
}

/// Full-sample optimum plus percentile intervals from refitting and
/// re-optimizing every bootstrap resample. With a benchmark, the percentage
/// profit difference and a bootstrap test on the profit gap are attached;
/// the test pairs replicate r of both reports.
pub fn optimum_with_ci(
    data: BootData<'_>,
    grid: &[f64],
    market: MarketConfig,
    cfg: &BootstrapSettings,
    benchmark: Option<&OptimumReport>,
) -> Result<OptimumReport> {
    cfg.validate()?;
    let setup = PricingSetup::for_data(data, grid, market);
    let point = optimum_of(data, &setup)?;
    let results = match data {
        BootData::Wtp(w) => resample_replicates(&canonical_values(w), cfg.reps, cfg.seed, |v| {
            optimum_of_values(v, &setup)
        }),
        BootData::Dc(d) => resample_replicates(&canonical_records(d), cfg.reps, cfg.seed, |r| {
            let obs: Vec<(f64, bool)> = r.iter().map(|x| (x.price_cue, x.accept)).collect();
            optimum_of_records(&obs, &setup)
        }),
    };
    let replicates: Vec<[f64; 3]> = results
        .into_iter()
        .map(|r| match r {
            Ok(o) => [o.price, o.quantity, o.profit],
            Err(_) => [f64::NAN; 3],
        })
        .collect();
    let failed = replicates.iter().filter(|r| r[0].is_nan()).count();
    check_failures(failed, cfg.reps)?;
    let interval = |j: usize| -> Interval {
        let mut v: Vec<f64> = replicates
            .iter()
            .map(|r| r[j])
            .filter(|x| !x.is_nan())
            .collect();
        v.sort_by(f64::total_cmp);
        percentile_interval(&v, cfg.confidence)
    };
    let mut report = OptimumReport {
        optimal_price: point.price,
        optimal_quantity: point.quantity,
        optimal_profit: point.profit,
        ci_price: interval(0),
        ci_quantity: interval(1),
        ci_profit: interval(2),
        profit_pct_diff_vs_benchmark: None,
        profit_difference_test: None,
        interior: point.interior,
        reps: cfg.reps,
        failed_replicates: failed,
        replicates,
    };
    if let Some(b) = benchmark {
        report.profit_pct_diff_vs_benchmark =
            profit_pct_diff(report.optimal_profit, b.optimal_profit);
        report.profit_difference_test = Some(profit_difference(&report, b, cfg.confidence)?.test);
    }
    Ok(report)
}

/// (profit − benchmark)/benchmark in percent; absent when the benchmark is zero.
pub fn profit_pct_diff(profit: f64, benchmark: f64) -> Option<f64> {
    (benchmark != 0.0).then(|| 100.0 * (profit - benchmark) / benchmark)
}

/// Bootstrap test on the profit gap between two reports, pairing replicates by index.
pub fn profit_difference(
    a: &OptimumReport,
    b: &OptimumReport,
    confidence: f64,
) -> Result<crate::inference::DifferenceTest> {
    component_difference(a, b, 2, confidence)
}

/// Paired replicate test for one component: 0 price, 1 quantity, 2 profit.
pub fn component_difference(
    a: &OptimumReport,
    b: &OptimumReport,
    component: usize,
    confidence: f64,
) -> Result<crate::inference::DifferenceTest> {
    if component > 2 {
        return Err(Error::InvalidConfig(format!(
            "no optimum component {component}"
        )));
    }
    if a.replicates.is_empty() || a.replicates.len() != b.replicates.len() {
        return Err(Error::InvalidConfig(
            "difference test needs reports with the same number of stored replicates".into(),
        ));
    }
    let diffs: Vec<f64> = a
        .replicates
        .iter()
        .zip(&b.replicates)
        .map(|(x, y)| x[component] - y[component])
        .filter(|d| !d.is_nan())
        .collect();
    let reps = a.replicates.len();
    check_failures(reps - diffs.len(), reps)?;
    let point =
        |r: &OptimumReport| [r.optimal_price, r.optimal_quantity, r.optimal_profit][component];
    Ok(difference_test_from_replicates(
        point(a) - point(b),
        diffs,
        reps,
        confidence,
    ))
}
