//! Statistical comparisons: Welch t-test, two-sample Kolmogorov-Smirnov,
//! pooled-vs-separate likelihood-ratio test for logistic demand, and a seeded
//! case-resampling bootstrap with percentile intervals.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};

use crate::demand::{
    dc_choice_shares, fit_logistic, fit_logistic_grouped, group_observations,
    nonparametric_dc_mean, parametric_dc_mean, BinomialObs,
};
use crate::error::{Error, Result};
use crate::model::{
    sample_variance, DcDataset, DcRecord, Interval, TestKind, TestResult, WtpSample,
};
use crate::pricing::{self, PricingSetup};
use crate::rng::{derive_seed, substream};

pub const DEFAULT_REPS: usize = 1000;
pub const MIN_REPORTED_REPS: usize = 100;
/// Share of failed replicates above which a bootstrap is abandoned.
pub const MAX_FAILED_FRACTION: f64 = 0.2;

/// Percentile interval from sorted replicates: order statistics at 1-based
/// ranks ⌈n·α/2⌉ and ⌈n·(1 − α/2)⌉ with α = 1 − confidence.
pub fn percentile_interval(sorted: &[f64], confidence: f64) -> Interval {
    let n = sorted.len();
    if n == 0 {
        return Interval::new(f64::NAN, f64::NAN);
    }
    let alpha = 1.0 - confidence;
    let rank = |q: f64| -> usize {
        let r = (n as f64 * q - 1e-9).ceil() as usize;
        r.clamp(1, n) - 1
    };
    Interval::new(sorted[rank(alpha / 2.0)], sorted[rank(1.0 - alpha / 2.0)])
}

pub fn welch_t_test(a: &WtpSample, b: &WtpSample) -> Result<TestResult> {
    welch_t_test_values(a.values(), b.values())
}

pub fn welch_t_test_values(a: &[f64], b: &[f64]) -> Result<TestResult> {
    let (va, vb) = (sample_variance(a)?, sample_variance(b)?);
    if va == 0.0 || vb == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
    let (sa, sb) = (va / na, vb / nb);
    let t = (mean(a) - mean(b)) / (sa + sb).sqrt();
    let df = (sa + sb).powi(2) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let p = (2.0 * dist.sf(t.abs())).min(1.0);
    Ok(TestResult {
        kind: TestKind::WelchT,
        statistic: t,
        df: Some(df),
        p_value: p,
    })
}

/// Largest gap between the two empirical CDFs, evaluated at every pooled point.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let x = xs[i].min(ys[j]);
        // advance past every tie at x in both samples before comparing
        while i < xs.len() && xs[i] <= x {
            i += 1;
        }
        while j < ys.len() && ys[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Kolmogorov survival function Q(λ) = 2 Σ (−1)^(k−1) exp(−2k²λ²).
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi theta form converges fast for small λ.
        let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * lambda * lambda);
        let mut sum = 0.0;
        for k in 1..=20 {
            let m = (2 * k - 1) as f64;
            sum += (-m * m * c).exp();
        }
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * sum).clamp(0.0, 1.0)
    } else {
        let mut sum = 0.0;
        for k in 1..=100 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * lambda * lambda).exp();
            sum += if k % 2 == 1 { term } else { -term };
            if term < 1e-300 {
                break;
            }
        }
        (2.0 * sum).clamp(0.0, 1.0)
    }
}

pub fn ks_two_sample(a: &WtpSample, b: &WtpSample) -> TestResult {
    ks_two_sample_values(a.values(), b.values())
}

/// Two-sample KS test; p from the asymptotic distribution with the
/// effective-n correction λ = (√nₑ + 0.12 + 0.11/√nₑ)·D.
pub fn ks_two_sample_values(a: &[f64], b: &[f64]) -> TestResult {
    let d = ks_statistic(a, b);
    let ne = (a.len() * b.len()) as f64 / (a.len() + b.len()) as f64;
    let sq = ne.sqrt();
    let lambda = (sq + 0.12 + 0.11 / sq) * d;
    TestResult {
        kind: TestKind::KsTwoSample,
        statistic: d,
        df: None,
        p_value: kolmogorov_sf(lambda),
    }
}

/// Likelihood-ratio test of one common logistic demand against separate ones
/// for each dataset: 2·(ℓ₁ + ℓ₂ − ℓ_pooled) against χ² with 2 df.
pub fn lr_test(first: &[BinomialObs], second: &[BinomialObs]) -> Result<TestResult> {
    let m1 = fit_logistic_grouped(first)?;
    let m2 = fit_logistic_grouped(second)?;
    let pooled: Vec<BinomialObs> = first.iter().chain(second).copied().collect();
    let mp = fit_logistic_grouped(&pooled)?;
    // Nested models: the statistic is non-negative up to rounding.
    let stat = (2.0 * (m1.log_likelihood + m2.log_likelihood - mp.log_likelihood)).max(0.0);
    let chi = ChiSquared::new(2.0).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok(TestResult {
        kind: TestKind::LikelihoodRatio,
        statistic: stat,
        df: Some(2.0),
        p_value: chi.sf(stat),
    })
}

pub fn lr_test_dc(d1: &DcDataset, d2: &DcDataset) -> Result<TestResult> {
    lr_test(
        &group_observations(&d1.observations()),
        &group_observations(&d2.observations()),
    )
}

/// DC data against a WTP sample expanded onto the DC grid.
pub fn lr_test_dc_vs_sample(d: &DcDataset, s: &WtpSample) -> Result<TestResult> {
    lr_test(
        &group_observations(&d.observations()),
        &crate::demand::expand_sample_grouped(s, d.grid()),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSettings {
    pub reps: usize,
    pub confidence: f64,
    pub seed: u64,
}

impl Default for BootstrapSettings {
    fn default() -> Self {
        Self {
            reps: DEFAULT_REPS,
            confidence: 0.95,
            seed: 0,
        }
    }
}

impl BootstrapSettings {
    pub fn validate(&self) -> Result<()> {
        if self.reps < MIN_REPORTED_REPS {
            return Err(Error::InvalidConfig(format!(
                "at least {MIN_REPORTED_REPS} bootstrap replicates are required, got {}",
                self.reps
            )));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::InvalidConfig("confidence must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Data a bootstrap statistic can be evaluated on.
#[derive(Debug, Clone, Copy)]
pub enum BootData<'a> {
    Wtp(&'a WtpSample),
    Dc(&'a DcDataset),
}

/// Named estimators the bootstrap engine knows how to recompute.
#[derive(Debug, Clone, PartialEq)]
pub enum Statistic {
    Mean,
    ParametricDcMean,
    NonparametricDcMean,
    OptimalPrice(PricingSetup),
    OptimalQuantity(PricingSetup),
    OptimalProfit(PricingSetup),
}

impl Statistic {
    fn evaluate_values(&self, values: &[f64]) -> Result<f64> {
        match self {
            Statistic::Mean => crate::model::sample_mean(values),
            Statistic::ParametricDcMean | Statistic::NonparametricDcMean => Err(
                Error::InvalidConfig("DC mean statistics need dichotomous-choice data".into()),
            ),
            Statistic::OptimalPrice(s) => Ok(pricing::optimum_of_values(values, s)?.price),
            Statistic::OptimalQuantity(s) => Ok(pricing::optimum_of_values(values, s)?.quantity),
            Statistic::OptimalProfit(s) => Ok(pricing::optimum_of_values(values, s)?.profit),
        }
    }

    fn evaluate_records(&self, records: &[DcRecord], grid: &[f64]) -> Result<f64> {
        let obs: Vec<(f64, bool)> = records.iter().map(|r| (r.price_cue, r.accept)).collect();
        match self {
            Statistic::Mean => Err(Error::InvalidConfig(
                "the mean is not defined on dichotomous-choice answers".into(),
            )),
            Statistic::ParametricDcMean => parametric_dc_mean(&fit_logistic(&obs)?),
            Statistic::NonparametricDcMean => {
                let d = DcDataset::new(records.to_vec(), grid.to_vec())?;
                nonparametric_dc_mean(&dc_choice_shares(&d))
            }
            Statistic::OptimalPrice(s) => Ok(pricing::optimum_of_records(&obs, s)?.price),
            Statistic::OptimalQuantity(s) => Ok(pricing::optimum_of_records(&obs, s)?.quantity),
            Statistic::OptimalProfit(s) => Ok(pricing::optimum_of_records(&obs, s)?.profit),
        }
    }

    pub fn evaluate(&self, data: BootData<'_>) -> Result<f64> {
        match data {
            BootData::Wtp(s) => self.evaluate_values(s.values()),
            BootData::Dc(d) => self.evaluate_records(d.records(), d.grid()),
        }
    }
}

/// Rows in canonical order (by id, then value) so that input permutations
/// do not change which rows a seeded resample picks.
pub(crate) fn canonical_values(s: &WtpSample) -> Vec<f64> {
    let mut rows: Vec<(Option<&str>, f64)> = match s.ids() {
        Some(ids) => ids
            .iter()
            .map(String::as_str)
            .map(Some)
            .zip(s.values().iter().copied())
            .collect(),
        None => s.values().iter().map(|v| (None, *v)).collect(),
    };
    rows.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
    rows.into_iter().map(|r| r.1).collect()
}

pub(crate) fn canonical_records(d: &DcDataset) -> Vec<DcRecord> {
    let mut recs = d.records().to_vec();
    recs.sort_by(|x, y| {
        x.id.cmp(&y.id)
            .then(x.price_cue.total_cmp(&y.price_cue))
            .then(x.accept.cmp(&y.accept))
    });
    recs
}

/// Evaluates `f` on `reps` resamples (with replacement) of `units`.
/// Replicate `r` draws its indices from substream `r` of `seed`.
pub fn resample_replicates<T, R, F>(units: &[T], reps: usize, seed: u64, f: F) -> Vec<Result<R>>
where
    T: Clone + Sync,
    R: Send,
    F: Fn(&[T]) -> Result<R> + Sync,
{
    let n = units.len();
    (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(seed, r as u64);
            let draw: Vec<T> = (0..n)
                .map(|_| units[rng.random_range(0..n)].clone())
                .collect();
            f(&draw)
        })
        .collect()
}

fn replicate_values(
    data: BootData<'_>,
    statistic: &Statistic,
    reps: usize,
    seed: u64,
) -> Vec<Result<f64>> {
    match data {
        BootData::Wtp(s) => resample_replicates(&canonical_values(s), reps, seed, |v| {
            statistic.evaluate_values(v)
        }),
        BootData::Dc(d) => resample_replicates(&canonical_records(d), reps, seed, |r| {
            statistic.evaluate_records(r, d.grid())
        }),
    }
}

fn data_len(data: BootData<'_>) -> usize {
    match data {
        BootData::Wtp(s) => s.len(),
        BootData::Dc(d) => d.len(),
    }
}

pub(crate) fn check_failures(failed: usize, total: usize) -> Result<()> {
    if failed as f64 > MAX_FAILED_FRACTION * total as f64 {
        Err(Error::TooManyFailedReplicates { failed, total })
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapOutcome {
    pub point: f64,
    pub interval: Interval,
    /// Successful replicate values, sorted ascending.
    pub replicates: Vec<f64>,
    pub failed: usize,
}

/// Percentile bootstrap interval for a statistic. Failed replicates (e.g. a
/// resample that separates perfectly) are excluded and counted.
pub fn bootstrap_ci(
    data: BootData<'_>,
    statistic: &Statistic,
    cfg: &BootstrapSettings,
) -> Result<BootstrapOutcome> {
    cfg.validate()?;
    if data_len(data) < 2 {
        return Err(Error::InsufficientData(
            "bootstrap needs at least two observations".into(),
        ));
    }
    let point = statistic.evaluate(data)?;
    let results = replicate_values(data, statistic, cfg.reps, cfg.seed);
    let mut replicates: Vec<f64> = results.into_iter().filter_map(Result::ok).collect();
    let failed = cfg.reps - replicates.len();
    check_failures(failed, cfg.reps)?;
    replicates.sort_by(f64::total_cmp);
    Ok(BootstrapOutcome {
        point,
        interval: percentile_interval(&replicates, cfg.confidence),
        replicates,
        failed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferenceTest {
    pub test: TestResult,
    /// Percentile interval of the replicate differences.
    pub interval: Interval,
    pub failed: usize,
}

impl DifferenceTest {
    /// Significant at 1 − confidence ⇔ the difference interval excludes zero.
    pub fn significant(&self) -> bool {
        !self.interval.contains(0.0)
    }
}

/// Two-sided bootstrap p-value 2·min(P(d ≤ 0), P(d ≥ 0)), floored at 1/reps.
pub fn difference_p_value(diffs: &[f64], reps: usize) -> f64 {
    if diffs.is_empty() {
        return 1.0;
    }
    let n = diffs.len() as f64;
    let le = diffs.iter().filter(|&&d| d <= 0.0).count() as f64;
    let ge = diffs.iter().filter(|&&d| d >= 0.0).count() as f64;
    (2.0 * (le / n).min(ge / n)).clamp(1.0 / reps as f64, 1.0)
}

/// Builds a difference test from paired replicate values (a_r − b_r).
pub fn difference_test_from_replicates(
    point_difference: f64,
    diffs: Vec<f64>,
    reps: usize,
    confidence: f64,
) -> DifferenceTest {
    let failed = reps.saturating_sub(diffs.len());
    let mut sorted = diffs;
    sorted.sort_by(f64::total_cmp);
    DifferenceTest {
        test: TestResult {
            kind: TestKind::BootstrapDifference,
            statistic: point_difference,
            df: None,
            p_value: difference_p_value(&sorted, reps),
        },
        interval: percentile_interval(&sorted, confidence),
        failed,
    }
}

/// Resamples `a` and `b` independently each replicate and tests whether the
/// difference in the statistic is zero.
pub fn bootstrap_difference_test(
    a: BootData<'_>,
    b: BootData<'_>,
    statistic: &Statistic,
    cfg: &BootstrapSettings,
) -> Result<DifferenceTest> {
    cfg.validate()?;
    let point = statistic.evaluate(a)? - statistic.evaluate(b)?;
    let ra = replicate_values(a, statistic, cfg.reps, derive_seed(cfg.seed, 1));
    let rb = replicate_values(b, statistic, cfg.reps, derive_seed(cfg.seed, 2));
    let diffs: Vec<f64> = ra
        .into_iter()
        .zip(rb)
        .filter_map(|(x, y)| Some(x.ok()? - y.ok()?))
        .collect();
    check_failures(cfg.reps - diffs.len(), cfg.reps)?;
    Ok(difference_test_from_replicates(
        point,
        diffs,
        cfg.reps,
        cfg.confidence,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Elicitation;

    fn s(v: &[f64]) -> WtpSample {
        WtpSample::new(Elicitation::Bdm, v.to_vec()).unwrap()
    }

    #[test]
    fn percentile_ranks() {
        let v: Vec<f64> = (1..=1000).map(f64::from).collect();
        let i = percentile_interval(&v, 0.95);
        assert_eq!(i.lower, 25.0);
        assert_eq!(i.upper, 975.0);
        let one = percentile_interval(&[3.0], 0.95);
        assert_eq!((one.lower, one.upper), (3.0, 3.0));
    }

    #[test]
    fn welch_identical_samples() {
        let a = s(&[1.0, 2.0, 4.0]);
        let r = welch_t_test(&a, &a).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn welch_hand_value() {
        // means 3 and 4, both variances 2.5, n = 5: t = -1/sqrt(1) = -1, df = 8
        let r = welch_t_test(
            &s(&[1.0, 2.0, 3.0, 4.0, 5.0]),
            &s(&[2.0, 3.0, 4.0, 5.0, 6.0]),
        )
        .unwrap();
        assert!((r.statistic + 1.0).abs() < 1e-12);
        assert!((r.df.unwrap() - 8.0).abs() < 1e-12);
        // two-sided p for t = 1 with 8 df
        assert!((r.p_value - 0.346_593_507_087_8).abs() < 1e-9);
    }

    #[test]
    fn welch_zero_variance() {
        assert!(matches!(
            welch_t_test(&s(&[2.0, 2.0]), &s(&[1.0, 3.0])),
            Err(Error::ZeroVariance)
        ));
    }

    #[test]
    fn ks_identical_and_disjoint() {
        let a = s(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(ks_two_sample(&a, &a).statistic, 0.0);
        assert_eq!(ks_two_sample(&a, &a).p_value, 1.0);
        let b = s(&[5.0, 6.0, 7.0, 8.0]);
        assert_eq!(ks_two_sample(&a, &b).statistic, 1.0);
    }

    #[test]
    fn ks_handles_ties() {
        // F_a jumps to 1 at 1; F_b is 0.5 there
        assert_eq!(ks_statistic(&[1.0, 1.0], &[1.0, 2.0]), 0.5);
        assert_eq!(
            ks_statistic(&[5.0, 5.0, 10.0], &[5.0, 10.0, 10.0]),
            1.0 / 3.0
        );
    }

    #[test]
    fn kolmogorov_tail_values() {
        // Q(1.36) ≈ 0.05 and Q(1.63) ≈ 0.01 are the classical critical points
        assert!((kolmogorov_sf(1.358) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_sf(1.628) - 0.01).abs() < 1e-3);
        // both series agree at the switch point
        let lo = kolmogorov_sf(1.18 - 1e-12);
        let hi = kolmogorov_sf(1.18);
        assert!((lo - hi).abs() < 1e-10);
    }

    #[test]
    fn bootstrap_of_constant_series() {
        let c = s(&[4.0; 30]);
        let out = bootstrap_ci(
            BootData::Wtp(&c),
            &Statistic::Mean,
            &BootstrapSettings::default(),
        )
        .unwrap();
        assert_eq!(out.interval, Interval::new(4.0, 4.0));
        assert_eq!(out.failed, 0);
    }

    #[test]
    fn bootstrap_rejects_too_few_reps() {
        let c = s(&[1.0, 2.0]);
        let cfg = BootstrapSettings {
            reps: 50,
            ..Default::default()
        };
        assert!(bootstrap_ci(BootData::Wtp(&c), &Statistic::Mean, &cfg).is_err());
    }

    #[test]
    fn difference_of_series_with_itself() {
        let a = s(&(0..50).map(|i| (i * 7 % 13) as f64).collect::<Vec<_>>());
        let t = bootstrap_difference_test(
            BootData::Wtp(&a),
            BootData::Wtp(&a),
            &Statistic::Mean,
            &BootstrapSettings::default(),
        )
        .unwrap();
        assert_eq!(t.test.statistic, 0.0);
        assert!(t.test.p_value > 0.5);
        assert!(!t.significant());
    }

    #[test]
    fn p_value_floor() {
        assert_eq!(difference_p_value(&[1.0, 2.0, 3.0], 1000), 1.0 / 1000.0);
        assert_eq!(difference_p_value(&[0.0, 0.0], 100), 1.0);
    }
}
