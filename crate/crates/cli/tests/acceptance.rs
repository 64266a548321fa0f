//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so every criterion reports even when an
//! earlier one fails. The process exits nonzero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wtp_core::debias::{debias, theoretical_cov, DebiasConfig, Procedure};
use wtp_core::demand::{fit_logistic, group_observations, parametric_dc_mean, score};
use wtp_core::inference::{
    bootstrap_ci, ks_two_sample_values, lr_test_dc, welch_t_test_values, BootData,
    BootstrapSettings, Statistic,
};
use wtp_core::model::{
    sample_mean, DcDataset, DcRecord, Elicitation, LogisticDemand, MarketConfig, ThetaDistribution,
    WtpSample,
};
use wtp_core::pricing::{foc_residual, optimize_price, profit};
use wtp_core::report::fmt3;
use wtp_core::simulate::{sample_theta, sample_true_wtp, TruncatedNormalSpec};
use wtp_core::study::{
    narrowing_threshold_report, run_study, DcMeanMode, Metric, Series, StudyConfig, StudyResult,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(start: Instant, limit: Duration) -> Result<(), String> {
    let e = start.elapsed();
    check(e <= limit, || {
        format!("took {:.2?}, limit {:.0?}", e, limit)
    })
}

// ---------------------------------------------------------------- oracles

/// Simpson panel on [a, b] with the endpoint and midpoint values cached.
#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
}

impl Panel {
    fn new(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Self {
        Self {
            a,
            b,
            fa: f(a),
            fm: f(0.5 * (a + b)),
            fb: f(b),
        }
    }

    fn rule(&self) -> f64 {
        (self.b - self.a) / 6.0 * (self.fa + 4.0 * self.fm + self.fb)
    }
}

fn simpson(f: &dyn Fn(f64) -> f64, p: Panel, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (p.a + p.b);
    let left = Panel {
        a: p.a,
        b: m,
        fa: p.fa,
        fm: f(0.5 * (p.a + m)),
        fb: p.fm,
    };
    let right = Panel {
        a: m,
        b: p.b,
        fa: p.fm,
        fm: f(0.5 * (m + p.b)),
        fb: p.fb,
    };
    let (l, r) = (left.rule(), right.rule());
    let err = l + r - p.rule();
    if depth == 0 || err.abs() <= 15.0 * tol {
        return l + r + err / 15.0;
    }
    simpson(f, left, tol / 2.0, depth - 1) + simpson(f, right, tol / 2.0, depth - 1)
}

fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    simpson(f, Panel::new(f, a, b), tol, 60)
}

/// ∫₀^∞ of the logistic survival curve, split into unit-slope pieces.
fn survival_integral(a: f64, b: f64) -> f64 {
    let q = |p: f64| 1.0 / (1.0 + (-(a + b * p)).exp());
    let scale = 1.0 / -b;
    let top = (a.max(0.0) + 45.0) * scale;
    let pieces = 200;
    let h = top / pieces as f64;
    (0..pieces)
        .map(|i| integrate(&q, i as f64 * h, (i + 1) as f64 * h, 1e-13))
        .sum()
}

fn logistic_obs(a: f64, b: f64, n: usize, top: f64, rng: &mut ChaCha8Rng) -> Vec<(f64, bool)> {
    (0..n)
        .map(|_| {
            let p = rng.random_range(0.0..top);
            (p, rng.random::<f64>() < 1.0 / (1.0 + (-(a + b * p)).exp()))
        })
        .collect()
}

fn bernoulli_ll(obs: &[(f64, bool)], a: f64, b: f64) -> f64 {
    obs.iter()
        .map(|&(p, y)| {
            let q = 1.0 / (1.0 + (-(a + b * p)).exp());
            if y {
                q.ln()
            } else {
                (1.0 - q).ln()
            }
        })
        .sum()
}

// ------------------------------------------------------------- criteria

fn c1_basic_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let n = rng.random_range(2..400);
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..200.0)).collect();
        let oe = WtpSample::new(Elicitation::Oe, values).map_err(|e| e.to_string())?;
        let dc_mean = rng.random_range(0.0..120.0);
        let basic = debias(&oe, dc_mean, &DebiasConfig::new(Procedure::Basic))
            .map_err(|e| e.to_string())?;
        worst = worst.max((basic.debiased.mean() - dc_mean).abs());
        let eps = debias(
            &oe,
            dc_mean,
            &DebiasConfig::new(Procedure::Epsilon).with_seed(i),
        )
        .map_err(|e| e.to_string())?;
        let full0 = debias(
            &oe,
            dc_mean,
            &DebiasConfig::new(Procedure::Full)
                .with_cov(0.0)
                .with_seed(i),
        )
        .map_err(|e| e.to_string())?;
        check(eps.debiased.values() == full0.debiased.values(), || {
            format!("sample {i}: FULL(cov=0) differs from EPSILON")
        })?;
        let eps0 = debias(
            &oe,
            dc_mean,
            &DebiasConfig::new(Procedure::Epsilon)
                .with_epsilon_sd(0.0)
                .with_seed(i),
        )
        .map_err(|e| e.to_string())?;
        check(eps0.debiased.values() == basic.debiased.values(), || {
            format!("sample {i}: EPSILON(sd=0) differs from BASIC")
        })?;
    }
    check(worst <= 1e-9, || {
        format!("max |mean(BASIC) - dc_mean| = {worst:e}")
    })?;
    within_time(start, Duration::from_secs(1))?;
    Ok(format!(
        "max mean error {worst:.1e} over 100 samples; degeneracies exact"
    ))
}

fn c2_theoretical_cov() -> Outcome {
    let first = theoretical_cov(13.041, 10.954);
    let second = theoretical_cov(37.120, 40.324);
    check((first - 2.08).abs() <= 0.02, || format!("{first} vs 2.08"))?;
    check((second + 3.20).abs() <= 0.02, || {
        format!("{second} vs -3.20")
    })?;
    Ok(format!("{first:.3} vs 2.08, {second:.3} vs -3.20"))
}

fn theta_moments(d: &ThetaDistribution) -> (f64, f64) {
    let mass = d.neg_width() * d.neg_density() + d.pos_width() * d.pos_density();
    let mean = d.pos_density() * d.pos_width().powi(2) / 2.0
        - d.neg_density() * d.neg_width().powi(2) / 2.0;
    (mass, mean)
}

fn c3_theta() -> Outcome {
    let start = Instant::now();
    let worked =
        ThetaDistribution::new(3.0, 7.0, 0.7 / 3.0, 0.3 / 7.0).map_err(|e| e.to_string())?;
    let (mass, mean) = theta_moments(&worked);
    check((mass - 1.0).abs() <= 1e-12 && mean.abs() <= 1e-12, || {
        format!("worked example mass {mass}, mean {mean}")
    })?;
    let derived = ThetaDistribution::zero_mean_on(1.0, 2.0).map_err(|e| e.to_string())?;
    check(
        (derived.neg_density() - 2.0 / 3.0).abs() <= 1e-12
            && (derived.pos_density() - 1.0 / 6.0).abs() <= 1e-12,
        || {
            format!(
                "densities {} {}",
                derived.neg_density(),
                derived.pos_density()
            )
        },
    )?;
    let (mass, mean) = theta_moments(&derived);
    check((mass - 1.0).abs() <= 1e-12 && mean.abs() <= 1e-12, || {
        format!("[-1, 2] mass {mass}, mean {mean}")
    })?;
    let draws = sample_theta(&derived, 1_000_000, 303);
    let m = sample_mean(&draws).map_err(|e| e.to_string())?;
    check(m.abs() < 0.005, || format!("empirical mean {m}"))?;
    within_time(start, Duration::from_secs(5))?;
    Ok(format!("invariants hold; 10^6 draws mean {m:.5}"))
}

fn c4_covariance_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(10..1_000);
        let p: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..100.0)).collect();
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..2.0)).collect();
        let tbar = raw.iter().sum::<f64>() / n as f64;
        let theta: Vec<f64> = raw.iter().map(|t| t - tbar).collect();
        let pbar = p.iter().sum::<f64>() / n as f64;
        let moment = theta.iter().zip(&p).map(|(t, v)| t * v).sum::<f64>() / n as f64;
        let cov = theta
            .iter()
            .zip(&p)
            .map(|(t, v)| t * (v - pbar))
            .sum::<f64>()
            / n as f64;
        worst = worst.max((moment - cov).abs());
    }
    check(worst <= 1e-12, || format!("identity error {worst:e}"))?;

    let n = 100_000;
    let truth = TruncatedNormalSpec::new(50.0, 10.0, 15.0, 85.0).map_err(|e| e.to_string())?;
    let t = sample_true_wtp(&truth, n, 405).map_err(|e| e.to_string())?;
    let dist = ThetaDistribution::zero_mean_on(1.0, 2.0).map_err(|e| e.to_string())?;
    // theta depends on the true value so that cov(θ, p) is not zero
    let raw: Vec<f64> = sample_theta(&dist, n, 406)
        .iter()
        .zip(t.values())
        .map(|(b, p)| b + 0.01 * (p - 50.0))
        .collect();
    let tbar = sample_mean(&raw).map_err(|e| e.to_string())?;
    let theta: Vec<f64> = raw.iter().map(|x| x - tbar).collect();
    let grid: Vec<f64> = (0..=20).map(|i| 5.0 * i as f64).collect();
    let cues: Vec<f64> = (0..n)
        .map(|_| grid[rng.random_range(0..grid.len())])
        .collect();
    let pv = t.values();
    let stated: Vec<f64> = (0..n)
        .map(|i| theta[i] * (cues[i] - pv[i]) + pv[i])
        .collect();
    let pbar = t.mean();
    let cov = theta
        .iter()
        .zip(pv)
        .map(|(th, p)| th * (p - pbar))
        .sum::<f64>()
        / n as f64;
    let p_hat = sample_mean(&stated).map_err(|e| e.to_string())?;
    let cue_term: Vec<f64> = theta.iter().zip(&cues).map(|(th, c)| th * c).collect();
    let cm = sample_mean(&cue_term).map_err(|e| e.to_string())?;
    let sd = (cue_term.iter().map(|x| (x - cm).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let se = sd / (n as f64).sqrt();
    let gap = pbar - (p_hat + cov);
    check(gap.abs() <= 3.0 * se, || {
        format!("p̄ − (p̂ + cov) = {gap}, 3 SE = {}", 3.0 * se)
    })?;
    within_time(start, Duration::from_secs(10))?;
    Ok(format!(
        "identity error {worst:.1e}; p̄ − (p̂ + cov) = {gap:.4} (3 SE {:.4}, cov {cov:.3})",
        3.0 * se
    ))
}

fn c5_parametric_mean() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst = 0.0f64;
    for _ in 0..60 {
        let a = rng.random_range(-5.0..10.0);
        let b = rng.random_range(-5.0..-0.01);
        let got = parametric_dc_mean(&LogisticDemand::from_coefficients(a, b))
            .map_err(|e| e.to_string())?;
        let want = survival_integral(a, b);
        worst = worst.max((got - want).abs());
    }
    check(worst <= 1e-6, || format!("max quadrature gap {worst:e}"))?;
    let ln2 = parametric_dc_mean(&LogisticDemand::from_coefficients(0.0, -1.0))
        .map_err(|e| e.to_string())?;
    check((ln2 - 2f64.ln()).abs() <= 1e-12, || {
        format!("a=0, b=-1 gives {ln2}")
    })?;
    within_time(start, Duration::from_secs(5))?;
    Ok(format!("max quadrature gap {worst:.1e}; ln 2 case exact"))
}

fn c6_logistic_mle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let obs = logistic_obs(5.0, -0.5, 100_000, 30.0, &mut rng);
    let m = fit_logistic(&obs).map_err(|e| e.to_string())?;
    check(
        (m.intercept - 5.0).abs() <= 0.1 && (m.slope + 0.5).abs() <= 0.1,
        || format!("fit ({}, {})", m.intercept, m.slope),
    )?;
    let groups = group_observations(&obs);
    let g = score(&groups, m.intercept, m.slope);
    let g_norm = g[0].abs().max(g[1].abs());
    check(g_norm < 1e-6, || format!("score at optimum {g:?}"))?;
    let small = logistic_obs(2.0, -0.2, 500, 25.0, &mut rng);
    let small_groups = group_observations(&small);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let a = rng.random_range(-2.0..4.0);
        let b = rng.random_range(-0.6..0.0);
        let h = 1e-5;
        let fd = [
            (bernoulli_ll(&small, a + h, b) - bernoulli_ll(&small, a - h, b)) / (2.0 * h),
            (bernoulli_ll(&small, a, b + h) - bernoulli_ll(&small, a, b - h)) / (2.0 * h),
        ];
        let g = score(&small_groups, a, b);
        for k in 0..2 {
            worst = worst.max((g[k] - fd[k]).abs() / g[k].abs().max(1.0));
        }
    }
    check(worst <= 1e-6, || {
        format!("gradient vs finite differences {worst:e}")
    })?;
    within_time(start, Duration::from_secs(30))?;
    Ok(format!(
        "fit ({:.4}, {:.4}); |score| {g_norm:.1e}; gradient rel err {worst:.1e}",
        m.intercept, m.slope
    ))
}

fn c7_optimizer() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let (mut dp, mut dv, mut foc) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..50 {
        let a = rng.random_range(0.5..8.0);
        let b = rng.random_range(-1.0..-0.1);
        let c = rng.random_range(0.0..10.0);
        let m = LogisticDemand::from_coefficients(a, b);
        let mkt = MarketConfig::new(c, 1000.0).map_err(|e| e.to_string())?;
        let p_max = c + (a.abs() + 30.0) / -b;
        let o = optimize_price(&m, &mkt, p_max).map_err(|e| e.to_string())?;
        let steps = ((p_max - c) / 0.001).ceil() as usize;
        let (mut bp, mut bv) = (c, f64::NEG_INFINITY);
        for k in 0..=steps {
            let p = (c + k as f64 * 0.001).min(p_max);
            let v = profit(p, &m, &mkt);
            if v > bv {
                bp = p;
                bv = v;
            }
        }
        dp = dp.max((o.price - bp).abs());
        dv = dv.max((o.profit - bv).abs() / bv.abs());
        foc = foc.max(foc_residual(o.price, &m, &mkt).abs());
        check(profit(c, &m, &mkt) == 0.0, || {
            format!("config {i}: profit at p = c is not 0")
        })?;
        let big = MarketConfig::new(c, 4000.0).map_err(|e| e.to_string())?;
        let o4 = optimize_price(&m, &big, p_max).map_err(|e| e.to_string())?;
        check(
            o4.price == o.price && o4.quantity == o.quantity && o4.profit == 4.0 * o.profit,
            || format!("config {i}: market size scaling is not exact"),
        )?;
    }
    check(dp <= 1e-3, || format!("price gap {dp}"))?;
    check(dv <= 1e-6, || format!("profit rel gap {dv:e}"))?;
    check(foc < 1e-4, || format!("FOC residual {foc:e}"))?;
    within_time(start, Duration::from_secs(30))?;
    Ok(format!(
        "price gap {dp:.1e}, profit rel gap {dv:.1e}, FOC {foc:.1e}; invariants exact"
    ))
}

const PROCS: [Series; 3] = [Series::Basic, Series::Epsilon, Series::Full];

fn mean_cell(
    r: &StudyResult,
    k: usize,
    s: Series,
    mode: DcMeanMode,
) -> Result<(f64, f64, f64), String> {
    let c = r
        .cell(k, s, mode, Metric::MeanWtp)
        .ok_or_else(|| format!("missing cell {k} {} {}", s.as_str(), mode.as_str()))?;
    Ok((c.estimate, c.interval.lower, c.interval.upper))
}

/// (a)–(c) on one study result; returns notes for the report line.
fn study_mean_checks(r: &StudyResult) -> Result<Vec<String>, String> {
    let truth = r.true_mean;
    let mut notes = Vec::new();
    for s in PROCS {
        let (est, lo, hi) = mean_cell(r, 0, s, DcMeanMode::Parametric)?;
        check(lo <= truth && truth <= hi, || {
            format!(
                "(a) {} full grid {est:.3} [{lo:.3}, {hi:.3}] misses {truth:.3}",
                s.as_str()
            )
        })?;
    }
    notes.push("(a) ok".into());
    for k in 0..r.grid_sets.len() {
        for s in [Series::Basic, Series::Epsilon, Series::Full, Series::Dc] {
            let (est, lo, hi) = mean_cell(r, k, s, DcMeanMode::Parametric)?;
            check(lo <= truth && truth <= hi, || {
                format!(
                    "(b) {} at {} levels: {est:.3} [{lo:.3}, {hi:.3}]",
                    s.as_str(),
                    r.grid_sets[k].len()
                )
            })?;
        }
    }
    notes.push("(b) ok".into());
    let report = narrowing_threshold_report(r);
    for s in [Series::Basic, Series::Epsilon, Series::Dc] {
        let e = report
            .entry(s, DcMeanMode::Nonparametric)
            .ok_or_else(|| format!("(c) no nonparametric entry for {}", s.as_str()))?;
        check(matches!(e.levels, Some(7) | Some(5)), || {
            format!(
                "(c) {} first breakdown at {:?} levels",
                s.as_str(),
                e.levels
            )
        })?;
    }
    let first = report
        .entry(Series::Basic, DcMeanMode::Nonparametric)
        .and_then(|e| e.narrowing_pct)
        .unwrap_or(f64::NAN);
    let full = report
        .entry(Series::Full, DcMeanMode::Nonparametric)
        .and_then(|e| e.levels);
    notes.push(format!(
        "(c) breakdown at {first:.1}% narrowing; FULL breakdown: {}",
        full.map_or("none (cov calibrated on BDM)".to_string(), |l| format!(
            "{l} levels"
        ))
    ));
    Ok(notes)
}

fn study_optimum_checks(r: &StudyResult) -> Vec<String> {
    let mut misses = Vec::new();
    for s in PROCS {
        for metric in [
            Metric::OptimalPrice,
            Metric::OptimalQuantity,
            Metric::OptimalProfit,
        ] {
            match r.cell(0, s, DcMeanMode::Parametric, metric) {
                Some(c) if c.interval.contains(c.true_value) => {}
                Some(c) => misses.push(format!(
                    "{} {}: truth {:.4} outside [{:.4}, {:.4}]",
                    s.as_str(),
                    metric.as_str(),
                    c.true_value,
                    c.interval.lower,
                    c.interval.upper
                )),
                None => misses.push(format!("{} {}: missing", s.as_str(), metric.as_str())),
            }
        }
    }
    misses
}

fn c8_study() -> Outcome {
    let start = Instant::now();
    let full = run_study(&StudyConfig::default()).map_err(|e| e.to_string())?;
    let full_time = start.elapsed();
    let mut notes = study_mean_checks(&full)?;
    let misses = study_optimum_checks(&full);
    check(full_time <= Duration::from_secs(600), || {
        format!("full scale took {full_time:.2?}")
    })?;

    let reduced_start = Instant::now();
    let reduced = run_study(&StudyConfig {
        n_samples: 100,
        ..StudyConfig::default()
    })
    .map_err(|e| e.to_string())?;
    let reduced_time = reduced_start.elapsed();
    study_mean_checks(&reduced).map_err(|e| format!("reduced profile: {e}"))?;
    check(reduced_time <= Duration::from_secs(60), || {
        format!("reduced profile took {reduced_time:.2?}")
    })?;
    check(misses.is_empty(), || format!("(d) {}", misses.join("; ")))?;
    notes.push("(d) ok".into());
    Ok(format!(
        "{}; full {:.1?}, reduced {:.1?}",
        notes.join(", "),
        full_time,
        reduced_time
    ))
}

fn dc_records(a: f64, b: f64, grid: &[f64], n: usize, rng: &mut ChaCha8Rng) -> Vec<DcRecord> {
    (0..n)
        .map(|_| {
            let p = grid[rng.random_range(0..grid.len())];
            DcRecord::new(p, rng.random::<f64>() < 1.0 / (1.0 + (-(a + b * p)).exp()))
        })
        .collect()
}

fn normal_pair(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| 50.0 + 10.0 * std_normal(rng)).collect()
}

/// Standard normal by Box-Muller.
fn std_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn c9_inference() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let runs = 400;
    let ks_rej = (0..runs)
        .filter(|_| {
            let a = normal_pair(&mut rng, 500);
            let b = normal_pair(&mut rng, 500);
            ks_two_sample_values(&a, &b).p_value < 0.05
        })
        .count() as f64
        / runs as f64;
    check((ks_rej - 0.05).abs() <= 0.03, || {
        format!("KS size {ks_rej}")
    })?;

    let grid: Vec<f64> = (0..=20).map(|i| 5.0 * i as f64).collect();
    let mut lr_rej = 0usize;
    for _ in 0..runs {
        let mut recs = dc_records(4.0, -0.08, &grid, 1_000, &mut rng);
        recs.shuffle(&mut rng);
        let second = recs.split_off(500);
        let d1 = DcDataset::new(recs, grid.clone()).map_err(|e| e.to_string())?;
        let d2 = DcDataset::new(second, grid.clone()).map_err(|e| e.to_string())?;
        lr_rej += (lr_test_dc(&d1, &d2).map_err(|e| e.to_string())?.p_value < 0.05) as usize;
    }
    let lr_rej = lr_rej as f64 / runs as f64;
    check((lr_rej - 0.05).abs() <= 0.03, || {
        format!("LR size {lr_rej}")
    })?;

    let spec = TruncatedNormalSpec::new(50.0, 10.0, 15.0, 85.0).map_err(|e| e.to_string())?;
    let truth = spec.analytic_mean();
    let mut covered = 0usize;
    for r in 0..200u64 {
        let s = sample_true_wtp(&spec, 250, 9_000 + r).map_err(|e| e.to_string())?;
        let cfg = BootstrapSettings {
            reps: 1000,
            confidence: 0.95,
            seed: r,
        };
        let out =
            bootstrap_ci(BootData::Wtp(&s), &Statistic::Mean, &cfg).map_err(|e| e.to_string())?;
        covered += out.interval.contains(truth) as usize;
    }
    let coverage = covered as f64 / 200.0;
    check((coverage - 0.95).abs() <= 0.05, || {
        format!("bootstrap coverage {coverage}")
    })?;

    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n1 = rng.random_range(2..300);
        let n2 = rng.random_range(2..300);
        let shift = rng.random_range(-5.0..5.0);
        let a: Vec<f64> = (0..n1).map(|_| rng.random_range(0.0..100.0)).collect();
        let b: Vec<f64> = (0..n2)
            .map(|_| shift + rng.random_range(0.0..60.0))
            .collect();
        let t = welch_t_test_values(&a, &b).map_err(|e| e.to_string())?;
        let (m1, m2) = (
            a.iter().sum::<f64>() / n1 as f64,
            b.iter().sum::<f64>() / n2 as f64,
        );
        let v1 = a.iter().map(|x| (x - m1).powi(2)).sum::<f64>() / (n1 - 1) as f64;
        let v2 = b.iter().map(|x| (x - m2).powi(2)).sum::<f64>() / (n2 - 1) as f64;
        let se2 = v1 / n1 as f64 + v2 / n2 as f64;
        let stat = (m1 - m2) / se2.sqrt();
        let df = se2 * se2
            / ((v1 / n1 as f64).powi(2) / (n1 - 1) as f64
                + (v2 / n2 as f64).powi(2) / (n2 - 1) as f64);
        worst = worst
            .max((t.statistic - stat).abs())
            .max((t.df.unwrap_or(f64::NAN) - df).abs() / df.max(1.0));
    }
    check(worst <= 1e-9, || {
        format!("Welch recomputation gap {worst:e}")
    })?;
    within_time(start, Duration::from_secs(180))?;
    Ok(format!(
        "KS size {ks_rej:.3}, LR size {lr_rej:.3}, coverage {coverage:.3}, Welch gap {worst:.1e}"
    ))
}

// ------------------------------------------------------------- CLI smoke

fn wtp(cwd: &Path, args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_wtp"))
        .args(args)
        .current_dir(cwd)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "wtp {} exited with {}: {}",
            args.join(" "),
            out.status,
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

const PIPELINE: [&[&str]; 4] = [
    &["simulate", "--seed", "11", "--cost", "5", "--out", "sim"],
    &[
        "debias",
        "--oe",
        "sim/oe.csv",
        "--dc",
        "sim/dc.csv",
        "--bdm",
        "sim/bdm.csv",
        "--procedure",
        "full",
        "--seed",
        "11",
        "--out",
        "debias",
    ],
    &[
        "estimate",
        "--oe",
        "sim/oe.csv",
        "--dc",
        "sim/dc.csv",
        "--bdm",
        "sim/bdm.csv",
        "--wtp",
        "debias/debiased_full.csv",
        "--reps",
        "200",
        "--seed",
        "11",
        "--out",
        "estimate",
    ],
    &[
        "optimize",
        "--oe",
        "sim/oe.csv",
        "--dc",
        "sim/dc.csv",
        "--bdm",
        "sim/bdm.csv",
        "--cost",
        "5",
        "--market-size",
        "1000",
        "--reps",
        "200",
        "--seed",
        "11",
        "--out",
        "optimize",
    ],
];

fn run_pipeline(root: &Path) -> Result<(), String> {
    for step in PIPELINE {
        wtp(root, step)?;
    }
    Ok(())
}

fn files_under(root: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        if let Ok(rd) = std::fs::read_dir(&dir) {
            for e in rd.flatten() {
                let p = e.path();
                if p.is_dir() {
                    stack.push(p);
                } else {
                    out.push(p.strip_prefix(root).unwrap().to_path_buf());
                }
            }
        }
    }
    out.sort();
    out
}

/// `12.345^a,b [1.000, 2.000]` with exactly three decimals everywhere.
fn estimate_cell_ok(cell: &str) -> bool {
    let three = |s: &str| {
        let s = s.strip_prefix('-').unwrap_or(s);
        matches!(s.split_once('.'), Some((i, f)) if !i.is_empty() && i.bytes().all(|b| b.is_ascii_digit()) && f.len() == 3 && f.bytes().all(|b| b.is_ascii_digit()))
    };
    let Some((head, rest)) = cell.split_once(" [") else {
        return false;
    };
    let Some(inner) = rest.strip_suffix(']') else {
        return false;
    };
    let Some((lo, hi)) = inner.split_once(", ") else {
        return false;
    };
    let value = match head.split_once('^') {
        Some((v, m)) => {
            if !m.split(',').all(|x| matches!(x, "a" | "b" | "c" | "d")) {
                return false;
            }
            v
        }
        None => head,
    };
    three(value) && three(lo) && three(hi)
}

fn c10_cli_smoke() -> Outcome {
    let start = Instant::now();
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    run_pipeline(a.path())?;
    run_pipeline(b.path())?;
    let files = files_under(a.path());
    check(files == files_under(b.path()), || {
        "runs wrote different file sets".into()
    })?;
    for f in &files {
        let x = std::fs::read(a.path().join(f)).map_err(|e| e.to_string())?;
        let y = std::fs::read(b.path().join(f)).map_err(|e| e.to_string())?;
        check(x == y, || {
            format!("{} differs between identical runs", f.display())
        })?;
    }
    // rerun from the manifest alone
    wtp(
        a.path(),
        &[
            "optimize",
            "--config",
            "optimize/manifest.json",
            "--out",
            "rerun",
        ],
    )?;
    for f in ["optimize.json", "optimize.txt"] {
        let x = std::fs::read(a.path().join("optimize").join(f)).map_err(|e| e.to_string())?;
        let y = std::fs::read(a.path().join("rerun").join(f)).map_err(|e| e.to_string())?;
        check(x == y, || {
            format!("{f} differs when rerun from the manifest")
        })?;
    }

    let text = std::fs::read_to_string(a.path().join("optimize/optimize.txt"))
        .map_err(|e| e.to_string())?;
    let json: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(a.path().join("optimize/optimize.json"))
            .map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let lines: Vec<&str> = text.lines().collect();
    check(
        lines.first().is_some_and(|h| h.starts_with("Data Source")),
        || "missing table header".into(),
    )?;
    let rows = json["rows"].as_array().ok_or("optimize.json has no rows")?;
    for (i, row) in rows.iter().enumerate() {
        let line = lines.get(2 + i).ok_or("table shorter than JSON")?;
        let cells: Vec<&str> = line.split(" | ").map(str::trim).collect();
        check(cells.len() == 5, || {
            format!("row '{line}' does not have 5 columns")
        })?;
        for (j, key) in ["optimal_price", "optimal_quantity", "optimal_profit"]
            .iter()
            .enumerate()
        {
            let cell = cells[j + 1];
            check(estimate_cell_ok(cell), || {
                format!("cell '{cell}' is not 'value [lower, upper]'")
            })?;
            let v = row["report"][key]
                .as_f64()
                .ok_or("non-numeric JSON value")?;
            check(cell.starts_with(&fmt3(v)), || {
                format!("text '{cell}' disagrees with JSON {v}")
            })?;
        }
        let pct = cells[4];
        check(
            pct.starts_with("N.A.")
                || pct
                    .split('%')
                    .next()
                    .is_some_and(|p| p.parse::<f64>().is_ok()),
            || format!("bad percentage cell '{pct}'"),
        )?;
    }
    let est = std::fs::read_to_string(a.path().join("estimate/estimate.txt"))
        .map_err(|e| e.to_string())?;
    for line in est.lines().skip(2).take_while(|l| l.contains(" | ")) {
        let cell = line.split(" | ").nth(1).unwrap_or("").trim();
        check(estimate_cell_ok(cell), || {
            format!("mean cell '{cell}' has the wrong layout")
        })?;
    }
    within_time(start, Duration::from_secs(60))?;
    Ok(format!(
        "{} files bit-identical across reruns; {} table rows in layout",
        files.len(),
        rows.len()
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("BASIC identity and procedure nesting", c1_basic_identity),
        ("theoretical cov from group means", c2_theoretical_cov),
        ("anchoring distribution invariants", c3_theta),
        ("anchoring covariance identity", c4_covariance_identity),
        ("parametric DC mean vs quadrature", c5_parametric_mean),
        ("logistic maximum likelihood", c6_logistic_mle),
        ("price optimizer vs brute force", c7_optimizer),
        ("grid-narrowing study replication", c8_study),
        ("inference calibration", c9_inference),
        ("CLI end-to-end smoke", c10_cli_smoke),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name} ({detail}) [{secs:.2}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name} ({why}) [{secs:.2}s]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
