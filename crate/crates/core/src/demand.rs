//! Demand curves and mean WTP from each kind of data.
//!
//! WTP samples give a nonparametric survival curve q(p) = Pr(WTP ≥ p).
//! Dichotomous-choice data give per-level acceptance shares and a logistic
//! demand fitted by maximum likelihood. Mean WTP from DC data is available
//! both parametrically (closed form under the logistic) and nonparametrically
//! (area under the interpolated share curve).

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::percentile_interval;
use crate::model::{
    logistic, softplus, CurveKind, CurvePoint, DcDataset, DemandCurve, Interval, LogisticDemand,
    WtpSample,
};
use crate::rng::seeded;

pub const MAX_ITERATIONS: usize = 100;
pub const SCORE_TOLERANCE: f64 = 1e-8;
pub const STEP_TOLERANCE: f64 = 1e-10;

/// Survival curve at 0 and at every distinct sample value.
pub fn empirical_survival(s: &WtpSample) -> DemandCurve {
    let mut sorted = s.values().to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut prices = sorted.clone();
    prices.push(0.0);
    prices.sort_by(f64::total_cmp);
    prices.dedup();
    let points = prices
        .into_iter()
        .map(|p| {
            let below = sorted.partition_point(|v| *v < p);
            CurvePoint {
                price: p,
                share: (n - below) as f64 / n as f64,
                count: n,
            }
        })
        .collect();
    DemandCurve {
        kind: CurveKind::NonparametricSurvival,
        points,
    }
}

/// Area under a survival step curve from 0 to its last price.
///
/// For a non-negative sample this equals the sample mean, which makes it a
/// cheap self-check on `empirical_survival`.
pub fn survival_area(curve: &DemandCurve) -> f64 {
    let mut prev = 0.0;
    let mut area = 0.0;
    for pt in curve.points.iter().filter(|pt| pt.price >= 0.0) {
        area += pt.share * (pt.price - prev);
        prev = pt.price;
    }
    area
}

/// Acceptance share per grid level. Levels without records are omitted;
/// see [`DcDataset::empty_levels`].
pub fn dc_choice_shares(d: &DcDataset) -> DemandCurve {
    let points = d
        .grid()
        .iter()
        .filter_map(|&level| {
            let (yes, total) = d
                .records()
                .iter()
                .filter(|r| r.price_cue == level)
                .fold((0usize, 0usize), |(y, t), r| (y + r.accept as usize, t + 1));
            (total > 0).then(|| CurvePoint {
                price: level,
                share: yes as f64 / total as f64,
                count: total,
            })
        })
        .collect();
    DemandCurve {
        kind: CurveKind::DcChoiceShares,
        points,
    }
}

/// Binomial observations at one price: `successes` accepts out of `trials`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinomialObs {
    pub price: f64,
    pub successes: f64,
    pub trials: f64,
}

/// Collapses individual (price, accept) answers to one binomial group per price.
pub fn group_observations(obs: &[(f64, bool)]) -> Vec<BinomialObs> {
    let mut sorted = obs.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut groups: Vec<BinomialObs> = Vec::new();
    for (price, accept) in sorted {
        match groups.last_mut() {
            Some(g) if g.price == price => {
                g.trials += 1.0;
                g.successes += accept as u8 as f64;
            }
            _ => groups.push(BinomialObs {
                price,
                successes: accept as u8 as f64,
                trials: 1.0,
            }),
        }
    }
    groups
}

pub fn dc_groups(d: &DcDataset) -> Vec<BinomialObs> {
    group_observations(&d.observations())
}

/// One answer per respondent and grid level: accept ⇔ value ≥ level.
pub fn expand_sample_to_bernoulli(s: &WtpSample, grid: &[f64]) -> Vec<(f64, bool)> {
    s.values()
        .iter()
        .flat_map(|&v| grid.iter().map(move |&level| (level, v >= level)))
        .collect()
}

/// Grouped form of [`expand_sample_to_bernoulli`]; same likelihood, O(levels) size.
pub fn expand_sample_grouped(s: &WtpSample, grid: &[f64]) -> Vec<BinomialObs> {
    expand_values_grouped(s.values(), grid)
}

pub(crate) fn expand_values_grouped(values: &[f64], grid: &[f64]) -> Vec<BinomialObs> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    grid.iter()
        .map(|&level| {
            let below = sorted.partition_point(|v| *v < level) as f64;
            BinomialObs {
                price: level,
                successes: n - below,
                trials: n,
            }
        })
        .collect()
}

/// Binomial log-likelihood of logistic demand (a, b), dropping the constant
/// binomial-coefficient term.
pub fn log_likelihood(groups: &[BinomialObs], intercept: f64, slope: f64) -> f64 {
    groups
        .iter()
        .map(|g| {
            let eta = intercept + slope * g.price;
            g.successes * eta - g.trials * softplus(eta)
        })
        .sum()
}

/// Gradient of [`log_likelihood`] with respect to (intercept, slope).
pub fn score(groups: &[BinomialObs], intercept: f64, slope: f64) -> [f64; 2] {
    groups.iter().fold([0.0; 2], |acc, g| {
        let r = g.successes - g.trials * logistic(intercept + slope * g.price);
        [acc[0] + r, acc[1] + r * g.price]
    })
}

/// Observed (= expected, canonical link) information matrix.
fn information(groups: &[BinomialObs], intercept: f64, slope: f64) -> [[f64; 2]; 2] {
    let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for g in groups {
        let q = logistic(intercept + slope * g.price);
        let w = g.trials * q * (1.0 - q);
        s0 += w;
        s1 += w * g.price;
        s2 += w * g.price * g.price;
    }
    [[s0, s1], [s1, s2]]
}

fn invert2(m: [[f64; 2]; 2]) -> Option<[[f64; 2]; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if !(det.is_finite() && det > 0.0) {
        return None;
    }
    Some([
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ])
}

fn check_groups(groups: &[BinomialObs]) -> Result<()> {
    if groups.is_empty() {
        return Err(Error::EmptyInput);
    }
    for g in groups {
        if !g.price.is_finite()
            || !g.trials.is_finite()
            || !g.successes.is_finite()
            || g.trials < 0.0
            || g.successes < 0.0
            || g.successes > g.trials
        {
            return Err(Error::InvalidConfig(format!(
                "malformed binomial group at price {}",
                g.price
            )));
        }
    }
    let successes: f64 = groups.iter().map(|g| g.successes).sum();
    let trials: f64 = groups.iter().map(|g| g.trials).sum();
    if trials == 0.0 {
        return Err(Error::EmptyInput);
    }
    if successes == 0.0 || successes == trials {
        return Err(Error::NoVariation);
    }
    let mut prices: Vec<f64> = groups
        .iter()
        .filter(|g| g.trials > 0.0)
        .map(|g| g.price)
        .collect();
    prices.sort_by(f64::total_cmp);
    prices.dedup();
    if prices.len() < 2 {
        return Err(Error::InsufficientData(
            "logistic demand needs at least two distinct prices".into(),
        ));
    }
    let with_yes = groups.iter().filter(|g| g.successes > 0.0).map(|g| g.price);
    let with_no = groups
        .iter()
        .filter(|g| g.trials - g.successes > 0.0)
        .map(|g| g.price);
    let (yes_min, yes_max) = min_max(with_yes);
    let (no_min, no_max) = min_max(with_no);
    // Either every accept sits at or below every reject, or the reverse.
    if yes_max <= no_min || no_max <= yes_min {
        return Err(Error::CompleteSeparation);
    }
    Ok(())
}

fn min_max(it: impl Iterator<Item = f64>) -> (f64, f64) {
    it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
        (lo.min(x), hi.max(x))
    })
}

/// Logistic demand by maximum likelihood over individual answers.
///
/// Each answer counts once, so the coefficient covariance is valid for
/// inference (Krinsky-Robb).
pub fn fit_logistic(obs: &[(f64, bool)]) -> Result<LogisticDemand> {
    fit_logistic_grouped(&group_observations(obs))
}

/// Newton-Raphson (IRLS for the canonical link) with step halving.
///
/// Converged when the largest score component drops below 1e-8 or the
/// Newton step below 1e-10; fails after 100 iterations.
pub fn fit_logistic_grouped(groups: &[BinomialObs]) -> Result<LogisticDemand> {
    check_groups(groups)?;
    let successes: f64 = groups.iter().map(|g| g.successes).sum();
    let trials: f64 = groups.iter().map(|g| g.trials).sum();
    let ybar = successes / trials;
    let (mut a, mut b) = ((ybar / (1.0 - ybar)).ln(), 0.0);
    let mut ll = log_likelihood(groups, a, b);

    for _ in 0..MAX_ITERATIONS {
        let g = score(groups, a, b);
        if g[0].abs().max(g[1].abs()) < SCORE_TOLERANCE {
            return Ok(finish(groups, a, b, ll, trials));
        }
        let cov = invert2(information(groups, a, b)).ok_or(Error::CompleteSeparation)?;
        let step = [
            cov[0][0] * g[0] + cov[0][1] * g[1],
            cov[1][0] * g[0] + cov[1][1] * g[1],
        ];
        let mut t = 1.0;
        let (mut na, mut nb, mut nll);
        loop {
            na = a + t * step[0];
            nb = b + t * step[1];
            nll = log_likelihood(groups, na, nb);
            if nll >= ll - 1e-12 * ll.abs() || t < 1e-8 {
                break;
            }
            t *= 0.5;
        }
        a = na;
        b = nb;
        ll = nll;
        if (t * step[0]).abs().max((t * step[1]).abs()) < STEP_TOLERANCE {
            return Ok(finish(groups, a, b, ll, trials));
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_ITERATIONS,
    })
}

fn finish(groups: &[BinomialObs], a: f64, b: f64, ll: f64, trials: f64) -> LogisticDemand {
    let cov =
        invert2(information(groups, a, b)).unwrap_or([[f64::INFINITY, 0.0], [0.0, f64::INFINITY]]);
    // Symmetrize against rounding in the off-diagonal terms.
    let off = 0.5 * (cov[0][1] + cov[1][0]);
    LogisticDemand {
        intercept: a,
        slope: b,
        coef_covariance: [[cov[0][0], off], [off, cov[1][1]]],
        n_obs: trials.round() as usize,
        log_likelihood: ll,
        covariance_valid: true,
    }
}

/// Logistic demand for a WTP sample via its respondent × grid expansion.
///
/// Expanded answers are dependent within a respondent, so the returned
/// covariance is flagged as not valid for inference.
pub fn fit_sample_logistic(s: &WtpSample, grid: &[f64]) -> Result<LogisticDemand> {
    let mut m = fit_logistic_grouped(&expand_sample_grouped(s, grid))?;
    m.covariance_valid = false;
    Ok(m)
}

/// Mean WTP under logistic demand, (1/−b)·ln(1 + e^a).
pub fn parametric_dc_mean(m: &LogisticDemand) -> Result<f64> {
    m.require_downward()?;
    Ok(softplus(m.intercept) / -m.slope)
}

/// Area under the acceptance-share curve from price 0 to the top level.
///
/// The curve is anchored at share 1 at price 0 (nobody has negative WTP),
/// interpolated linearly between levels, and stops at the highest level:
/// mass above the top of the grid is not observed and does not count.
pub fn nonparametric_dc_mean(shares: &DemandCurve) -> Result<f64> {
    let pts = &shares.points;
    if pts.is_empty() {
        return Err(Error::EmptyInput);
    }
    if pts.iter().any(|p| p.price < 0.0 || !p.price.is_finite()) {
        return Err(Error::InvalidConfig(
            "share curve prices must be finite and non-negative".into(),
        ));
    }
    let (mut prev_price, mut prev_share) = if pts[0].price > 0.0 {
        (0.0, 1.0)
    } else {
        (pts[0].price, pts[0].share)
    };
    let mut area = 0.0;
    for pt in pts.iter().skip_while(|p| p.price == 0.0) {
        area += 0.5 * (prev_share + pt.share) * (pt.price - prev_price);
        prev_price = pt.price;
        prev_share = pt.share;
    }
    Ok(area)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KrinskyRobb {
    pub interval: Interval,
    pub draws: usize,
    pub discarded: usize,
}

fn cholesky2(c: [[f64; 2]; 2]) -> Result<[[f64; 2]; 2]> {
    let tol = 1e-12 * c[0][0].abs().max(c[1][1].abs()).max(1e-300);
    if !c.iter().flatten().all(|v| v.is_finite())
        || (c[0][1] - c[1][0]).abs() > tol.max(1e-12 * c[0][1].abs())
        || c[0][0] < 0.0
        || c[1][1] < 0.0
        || c[0][0] * c[1][1] - c[0][1] * c[1][0] < -tol
    {
        return Err(Error::InvalidConfig(
            "coefficient covariance is not symmetric positive semi-definite".into(),
        ));
    }
    let l11 = c[0][0].sqrt();
    let l21 = if l11 > 0.0 { c[1][0] / l11 } else { 0.0 };
    let l22 = (c[1][1] - l21 * l21).max(0.0).sqrt();
    Ok([[l11, 0.0], [l21, l22]])
}

/// Simulation interval for the parametric mean: draw coefficients from their
/// asymptotic normal distribution, evaluate the mean per draw, and take the
/// percentile interval. Draws with slope ≥ 0 are discarded and counted.
pub fn krinsky_robb_ci(
    m: &LogisticDemand,
    reps: usize,
    level: f64,
    seed: u64,
) -> Result<KrinskyRobb> {
    m.require_downward()?;
    if reps == 0 || !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidConfig(
            "reps must be positive and level in (0, 1)".into(),
        ));
    }
    let l = cholesky2(m.coef_covariance)?;
    let mut rng = seeded(seed);
    let mut means = Vec::with_capacity(reps);
    let mut discarded = 0;
    for _ in 0..reps {
        let z0: f64 = StandardNormal.sample(&mut rng);
        let z1: f64 = StandardNormal.sample(&mut rng);
        let a = m.intercept + l[0][0] * z0;
        let b = m.slope + l[1][0] * z0 + l[1][1] * z1;
        if b >= 0.0 {
            discarded += 1;
            continue;
        }
        means.push(softplus(a) / -b);
    }
    if 2 * discarded > reps {
        return Err(Error::TooManyDiscards {
            discarded,
            total: reps,
        });
    }
    means.sort_by(f64::total_cmp);
    Ok(KrinskyRobb {
        interval: percentile_interval(&means, level),
        draws: reps,
        discarded,
    })
}
