//! One function per subcommand.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use wtp_core::debias::{DebiasEstimate, Procedure};
use wtp_core::demand::{
    dc_choice_shares, empirical_survival, fit_logistic, fit_sample_logistic, krinsky_robb_ci,
    nonparametric_dc_mean, parametric_dc_mean, KrinskyRobb,
};
use wtp_core::inference::{
    bootstrap_ci, bootstrap_difference_test, ks_two_sample, lr_test_dc_vs_sample, welch_t_test,
    BootData, BootstrapSettings, Statistic,
};
use wtp_core::io::{save_curve_csv, save_dc_csv, save_study_csv, save_wtp_csv};
use wtp_core::model::{Interval, LogisticDemand, MarketConfig, TestResult, ThetaDistribution};
use wtp_core::pricing::{component_difference, optimum_with_ci, PriceOptimum};
use wtp_core::report::{
    fmt3, render_mean_table, render_optimum_table, Markers, MeanRow, OptimumRow,
};
use wtp_core::rng::derive_seed;
use wtp_core::simulate::{
    apply_oe_bias, sample_true_wtp, simulate_dc_responses, OeBiasSpec, TruncatedNormalSpec,
};
use wtp_core::study::{
    narrowing_threshold_report, run_study, true_optimum, DcMeanMode, GridNarrowingPlan,
    NarrowingReport, StudyConfig,
};
use wtp_core::WtpSample;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::run::{slug, Run, SEED_BOOTSTRAP, SEED_DEBIAS, SEED_SIMULATE};
use crate::series::{
    assemble, dc_mean, debias_config, load_inputs, missing_cov_error, pricing_grid, resolve_cov,
    CovSource, NamedSeries, SeriesData,
};
use crate::ReportFormat;

const DEFAULT_GRID: (f64, f64, f64) = (0.0, 100.0, 5.0);

fn default_grid() -> Vec<f64> {
    let (min, max, step) = DEFAULT_GRID;
    let n = ((max - min) / step).round() as usize;
    (0..=n).map(|i| min + i as f64 * step).collect()
}

fn market(cfg: &RunConfig) -> Result<MarketConfig, CliError> {
    Ok(MarketConfig::new(
        cfg.market.marginal_cost.value(),
        cfg.market.market_size.value(),
    )?)
}

fn truth_spec(cfg: &RunConfig) -> Result<TruncatedNormalSpec, CliError> {
    let t = &cfg.scenario.truth;
    Ok(TruncatedNormalSpec::new(
        t.mean.value(),
        t.sd.value(),
        t.low.value(),
        t.high.value(),
    )?)
}

fn theta(cfg: &RunConfig) -> Result<ThetaDistribution, CliError> {
    let t = &cfg.scenario.theta;
    Ok(ThetaDistribution::zero_mean_on(
        t.neg_width.value(),
        t.pos_width.value(),
    )?)
}

fn bootstrap(cfg: &RunConfig, seed: u64) -> Result<BootstrapSettings, CliError> {
    let s = BootstrapSettings {
        reps: cfg.reps,
        confidence: cfg.confidence.value(),
        seed,
    };
    s.validate()?;
    Ok(s)
}

#[derive(Serialize)]
struct SimulationSummary {
    true_mean: f64,
    n_per_group: usize,
    alpha: f64,
    epsilon_sd: f64,
    theta: ThetaDistribution,
    grid: Vec<f64>,
    oe_true_mean: f64,
    dc_true_mean: f64,
    bdm_mean: f64,
    market: MarketConfig,
    true_optimum: PriceOptimum,
}

pub fn simulate(cfg: RunConfig) -> Result<(), CliError> {
    let mut run = Run::start("simulate", cfg)?;
    let spec = truth_spec(&run.cfg)?;
    let theta = theta(&run.cfg)?;
    let grid = run.cfg.grid_levels()?.unwrap_or_else(default_grid);
    let mkt = market(&run.cfg)?;
    let n = run.cfg.scenario.n_per_group;
    let base = run.seed_for("simulate", SEED_SIMULATE);
    let bias = OeBiasSpec {
        alpha: run.cfg.scenario.alpha.value(),
        epsilon_sd: run.cfg.scenario.epsilon_sd.value(),
    };
    let oe_truth = sample_true_wtp(&spec, n, derive_seed(base, 1))?;
    let oe = apply_oe_bias(&oe_truth, &bias, derive_seed(base, 2))?;
    let dc_truth = sample_true_wtp(&spec, n, derive_seed(base, 3))?;
    let (dc, _) = simulate_dc_responses(&dc_truth, &grid, &theta, derive_seed(base, 4))?;
    let bdm = sample_true_wtp(&spec, n, derive_seed(base, 5))?;
    save_wtp_csv(run.path("oe.csv"), &oe)?;
    save_dc_csv(run.path("dc.csv"), &dc)?;
    save_wtp_csv(run.path("bdm.csv"), &bdm)?;
    for f in ["oe.csv", "dc.csv", "bdm.csv"] {
        run.record(f);
    }
    let summary = SimulationSummary {
        true_mean: spec.analytic_mean(),
        n_per_group: n,
        alpha: bias.alpha,
        epsilon_sd: bias.epsilon_sd,
        theta,
        grid,
        oe_true_mean: oe_truth.mean(),
        dc_true_mean: dc_truth.mean(),
        bdm_mean: bdm.mean(),
        market: mkt,
        true_optimum: true_optimum(&spec, &mkt),
    };
    println!(
        "simulated {n} respondents per group; true mean {}, OE mean {}, BDM mean {}",
        fmt3(summary.true_mean),
        fmt3(oe.mean()),
        fmt3(summary.bdm_mean)
    );
    run.write_json("simulation.json", &summary)?;
    run.finish()
}

#[derive(Serialize)]
struct DebiasReport<'a> {
    estimate: &'a DebiasEstimate,
    debiased_mean: f64,
    n: usize,
    dc_mean_source: &'static str,
    dc_mean_mode: Option<DcMeanMode>,
    cov_source: Option<CovSource>,
    bdm_mean: Option<f64>,
    theoretical_cov: Option<f64>,
    output: String,
}

pub fn debias(cfg: RunConfig) -> Result<(), CliError> {
    let mut run = Run::start("debias", cfg)?;
    let inputs = load_inputs(&mut run)?;
    let oe = inputs
        .oe
        .as_ref()
        .ok_or_else(|| CliError::usage("debias needs an OE sample (--oe)"))?;
    let from_flag = run.cfg.dc_mean.is_some();
    let m = dc_mean(&run.cfg, inputs.dc.as_ref())?.ok_or_else(|| {
        CliError::usage("debias needs DC data (--dc) or a known DC mean (--dc-mean)")
    })?;
    let procedure = run.cfg.procedure;
    let cov = resolve_cov(&run.cfg, inputs.bdm.as_ref(), m);
    let cov_value = match (procedure, cov) {
        (Procedure::Full, None) => return Err(missing_cov_error()),
        (Procedure::Full, Some((c, _))) => c,
        _ => 0.0,
    };
    let seed = run.seed_for("debias", SEED_DEBIAS);
    let est =
        wtp_core::debias::debias(oe, m, &debias_config(&run.cfg, procedure, cov_value, seed))?;
    let name = format!("debiased_{}.csv", slug(procedure.as_str()));
    save_wtp_csv(run.path(&name), &est.debiased)?;
    run.record(&name);
    let bdm_mean = inputs.bdm.as_ref().map(WtpSample::mean);
    let report = DebiasReport {
        estimate: &est,
        debiased_mean: est.debiased.mean(),
        n: est.debiased.len(),
        dc_mean_source: if from_flag { "flag" } else { "dc_data" },
        dc_mean_mode: (!from_flag).then_some(run.cfg.dc_mean_mode),
        cov_source: (procedure == Procedure::Full)
            .then(|| cov.map(|c| c.1))
            .flatten(),
        bdm_mean,
        theoretical_cov: bdm_mean.map(|b| b - m),
        output: name,
    };
    println!(
        "{}: OE mean {}, DC mean {}, cov {}, alpha_hat {}, de-biased mean {}",
        procedure.as_str(),
        fmt3(est.oe_mean),
        fmt3(est.dc_mean),
        fmt3(est.cov_used),
        fmt3(est.alpha_hat),
        fmt3(report.debiased_mean)
    );
    run.write_json("debias.json", &report)?;
    run.finish()
}

/// Report files carry their kind so `report` can re-render them.
#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum TableFile {
    MeanTable {
        benchmark: Option<String>,
        significance: f64,
        rows: Vec<MeanRow>,
    },
    OptimumTable {
        benchmark: Option<String>,
        significance: f64,
        rows: Vec<OptimumRow>,
    },
}

#[derive(Serialize)]
struct NamedTest {
    name: &'static str,
    #[serde(flatten)]
    result: TestResult,
}

#[derive(Serialize)]
struct MeanDetail {
    label: String,
    n: usize,
    mean: f64,
    interval: Interval,
    bootstrap_seed: u64,
    failed_replicates: usize,
    tests: Vec<NamedTest>,
    logistic: Option<LogisticDemand>,
    parametric_mean: Option<f64>,
    nonparametric_mean: Option<f64>,
    krinsky_robb: Option<KrinskyRobb>,
    curve: String,
}

const MEAN_LEGEND: &str =
    "markers vs the benchmark: a mean (Welch t-test), b distribution (KS test; \
likelihood-ratio test for DC data), c interval does not overlap, d bootstrap difference test";

const OPTIMUM_LEGEND: &str = "markers vs the benchmark: c interval does not overlap, d bootstrap \
difference test on paired replicates";

fn mean_statistic(s: &NamedSeries, mode: DcMeanMode) -> Statistic {
    match (&s.data, mode) {
        (SeriesData::Wtp(_), _) => Statistic::Mean,
        (SeriesData::Dc(_), DcMeanMode::Parametric) => Statistic::ParametricDcMean,
        (SeriesData::Dc(_), DcMeanMode::Nonparametric) => Statistic::NonparametricDcMean,
    }
}

fn estimate_one(
    s: &NamedSeries,
    bench: Option<(&WtpSample, &Interval)>,
    run: &Run,
    grid: Option<&[f64]>,
    seed: u64,
) -> Result<(MeanRow, MeanDetail), CliError> {
    let cfg = &run.cfg;
    let boot = bootstrap(cfg, seed)?;
    let alpha = 1.0 - boot.confidence;
    let out = bootstrap_ci(s.boot(), &mean_statistic(s, cfg.dc_mean_mode), &boot)?;
    let mut markers = Markers::default();
    let mut tests = Vec::new();
    let curve = format!("curve_{}.csv", slug(&s.label));
    let mut detail = MeanDetail {
        label: s.label.clone(),
        n: 0,
        mean: out.point,
        interval: out.interval,
        bootstrap_seed: seed,
        failed_replicates: out.failed,
        tests: Vec::new(),
        logistic: None,
        parametric_mean: None,
        nonparametric_mean: None,
        krinsky_robb: None,
        curve: curve.clone(),
    };
    match &s.data {
        SeriesData::Wtp(w) => {
            detail.n = w.len();
            save_curve_csv(run.path(&curve), &empirical_survival(w))?;
            if let Some(g) = grid {
                if let Ok(m) = fit_sample_logistic(w, g) {
                    detail.parametric_mean = parametric_dc_mean(&m).ok();
                    detail.logistic = Some(m);
                }
            }
            if let Some((b, b_ci)) = bench {
                let t = welch_t_test(w, b)?;
                markers.a = t.significant(alpha);
                tests.push(NamedTest {
                    name: "welch_t",
                    result: t,
                });
                let ks = ks_two_sample(w, b);
                markers.b = ks.significant(alpha);
                tests.push(NamedTest {
                    name: "ks",
                    result: ks,
                });
                markers.c = !out.interval.overlaps(b_ci);
                let d = bootstrap_difference_test(
                    BootData::Wtp(w),
                    BootData::Wtp(b),
                    &Statistic::Mean,
                    &boot,
                )?;
                markers.d = d.significant();
                tests.push(NamedTest {
                    name: "bootstrap_difference",
                    result: d.test,
                });
            }
        }
        SeriesData::Dc(d) => {
            detail.n = d.len();
            let shares = dc_choice_shares(d);
            save_curve_csv(run.path(&curve), &shares)?;
            detail.nonparametric_mean = nonparametric_dc_mean(&shares).ok();
            if let Ok(m) = fit_logistic(&d.observations()) {
                detail.parametric_mean = parametric_dc_mean(&m).ok();
                detail.krinsky_robb = krinsky_robb_ci(&m, cfg.reps, boot.confidence, seed).ok();
                detail.logistic = Some(m);
            }
            if let Some((b, b_ci)) = bench {
                if let Ok(t) = lr_test_dc_vs_sample(d, b) {
                    markers.b = t.significant(alpha);
                    tests.push(NamedTest {
                        name: "likelihood_ratio",
                        result: t,
                    });
                }
                markers.c = !out.interval.overlaps(b_ci);
            }
        }
    }
    detail.tests = tests;
    Ok((
        MeanRow {
            label: s.label.clone(),
            mean: out.point,
            interval: out.interval,
            markers,
        },
        detail,
    ))
}

fn table_text(table: &str, legend: &str, run: &Run) -> String {
    format!(
        "{table}\n{legend}\nbootstrap replicates: {}, confidence: {}, seed: {}\n",
        run.cfg.reps,
        run.cfg.confidence.value(),
        run.cfg.seed
    )
}

#[derive(Serialize)]
struct EstimateDetails<'a> {
    dc_mean_mode: DcMeanMode,
    grid: Option<&'a [f64]>,
    debias: &'a [DebiasEstimate],
    series: Vec<MeanDetail>,
}

pub fn estimate(cfg: RunConfig) -> Result<(), CliError> {
    let mut run = Run::start("estimate", cfg)?;
    let inputs = load_inputs(&mut run)?;
    let grid = pricing_grid(&run.cfg, inputs.dc.as_ref())?;
    let a = assemble(&mut run, inputs)?;
    let boot_seed = run.seed_for("bootstrap", SEED_BOOTSTRAP);
    let mut rows = Vec::new();
    let mut details = Vec::new();
    let mut bench_ref = None;
    if let Some(b) = &a.benchmark {
        let (row, detail) =
            estimate_one(b, None, &run, grid.as_deref(), derive_seed(boot_seed, 0))?;
        bench_ref = Some(row.interval);
        rows.push(row);
        details.push(detail);
    }
    let bench_sample = a.benchmark.as_ref().and_then(|b| match &b.data {
        SeriesData::Wtp(w) => Some(w),
        SeriesData::Dc(_) => None,
    });
    for (i, s) in a.rows.iter().enumerate() {
        let bench = bench_sample.zip(bench_ref.as_ref());
        let (row, detail) = estimate_one(
            s,
            bench,
            &run,
            grid.as_deref(),
            derive_seed(boot_seed, i as u64 + 1),
        )?;
        rows.push(row);
        details.push(detail);
    }
    for d in &details {
        run.record(&d.curve);
    }
    let table = render_mean_table(&rows);
    print!("{table}");
    let text = table_text(&table, MEAN_LEGEND, &run);
    run.write_text("estimate.txt", &text)?;
    let file = TableFile::MeanTable {
        benchmark: a.benchmark.as_ref().map(|b| b.label.clone()),
        significance: 1.0 - run.cfg.confidence.value(),
        rows,
    };
    run.write_json("estimate.json", &file)?;
    let extra = EstimateDetails {
        dc_mean_mode: run.cfg.dc_mean_mode,
        grid: grid.as_deref(),
        debias: &a.estimates,
        series: details,
    };
    run.write_json("estimate_details.json", &extra)?;
    run.finish()
}

fn optimize_one(
    s: &NamedSeries,
    grid: &[f64],
    run: &Run,
    seed: u64,
    bench: Option<&wtp_core::OptimumReport>,
) -> Result<wtp_core::OptimumReport, CliError> {
    let boot = bootstrap(&run.cfg, seed)?;
    let g: &[f64] = match &s.data {
        SeriesData::Dc(d) => d.grid(),
        SeriesData::Wtp(_) => grid,
    };
    Ok(optimum_with_ci(
        s.boot(),
        g,
        market(&run.cfg)?,
        &boot,
        bench,
    )?)
}

fn optimum_markers(
    r: &wtp_core::OptimumReport,
    b: &wtp_core::OptimumReport,
    confidence: f64,
) -> Result<[Markers; 4], CliError> {
    let mut m = [Markers::default(); 4];
    let cis = [
        (&r.ci_price, &b.ci_price),
        (&r.ci_quantity, &b.ci_quantity),
        (&r.ci_profit, &b.ci_profit),
    ];
    for (j, (x, y)) in cis.iter().enumerate() {
        m[j].c = !x.overlaps(y);
        m[j].d = component_difference(r, b, j, confidence)?.significant();
    }
    m[3].d = r
        .profit_difference_test
        .is_some_and(|t| t.significant(1.0 - confidence));
    Ok(m)
}

#[derive(Serialize)]
struct OptimizeDetails<'a> {
    market: MarketConfig,
    grid: &'a [f64],
    bootstrap_seeds: Vec<(String, u64)>,
    debias: &'a [DebiasEstimate],
}

pub fn optimize(cfg: RunConfig) -> Result<(), CliError> {
    let mut run = Run::start("optimize", cfg)?;
    let inputs = load_inputs(&mut run)?;
    let grid = pricing_grid(&run.cfg, inputs.dc.as_ref())?.ok_or_else(|| {
        CliError::usage("optimize needs a price grid: pass --grid-min/--grid-max/--grid-step, --grid-levels, or --dc")
    })?;
    let a = assemble(&mut run, inputs)?;
    let boot_seed = run.seed_for("bootstrap", SEED_BOOTSTRAP);
    let confidence = run.cfg.confidence.value();
    let mut rows = Vec::new();
    let mut seeds = Vec::new();
    let bench = match &a.benchmark {
        Some(b) => {
            let seed = derive_seed(boot_seed, 0);
            seeds.push((b.label.clone(), seed));
            Some(optimize_one(b, &grid, &run, seed, None)?)
        }
        None => None,
    };
    if let (Some(b), Some(r)) = (&a.benchmark, &bench) {
        rows.push(OptimumRow {
            label: b.label.clone(),
            report: r.clone(),
            markers: [Markers::default(); 4],
            is_benchmark: true,
        });
    }
    for (i, s) in a.rows.iter().enumerate() {
        let seed = derive_seed(boot_seed, i as u64 + 1);
        seeds.push((s.label.clone(), seed));
        let r = optimize_one(s, &grid, &run, seed, bench.as_ref())?;
        let markers = match &bench {
            Some(b) => optimum_markers(&r, b, confidence)?,
            None => [Markers::default(); 4],
        };
        if !r.interior {
            run.warn(format!("{}: optimal price hit the search bound", s.label));
        }
        rows.push(OptimumRow {
            label: s.label.clone(),
            report: r,
            markers,
            is_benchmark: false,
        });
    }
    let table = render_optimum_table(&rows);
    print!("{table}");
    let text = table_text(&table, OPTIMUM_LEGEND, &run);
    run.write_text("optimize.txt", &text)?;
    let file = TableFile::OptimumTable {
        benchmark: a.benchmark.as_ref().map(|b| b.label.clone()),
        significance: 1.0 - confidence,
        rows,
    };
    run.write_json("optimize.json", &file)?;
    let details = OptimizeDetails {
        market: market(&run.cfg)?,
        grid: &grid,
        bootstrap_seeds: seeds,
        debias: &a.estimates,
    };
    run.write_json("optimize_details.json", &details)?;
    run.finish()
}

fn narrowing_text(r: &NarrowingReport) -> String {
    let mut out = String::new();
    if r.insufficient_sets {
        out.push_str("fewer than two grid sets: no narrowing threshold\n");
        return out;
    }
    for e in &r.entries {
        let line = match (e.breakdown_set, e.levels, e.narrowing_pct) {
            (Some(k), Some(l), Some(p)) => format!(
                "{} ({}): first excludes the true mean at grid set {k} ({l} levels, {p:.1}% narrower than the true range)",
                e.series.as_str(),
                e.mode.as_str()
            ),
            _ => format!(
                "{} ({}): covers the true mean at every grid set",
                e.series.as_str(),
                e.mode.as_str()
            ),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct StudySummary<'a> {
    true_mean: f64,
    true_optimum: PriceOptimum,
    grid_sets: &'a [Vec<f64>],
    flagged_cells: usize,
    narrowing: &'a NarrowingReport,
    csv: Vec<String>,
}

pub fn study(cfg: RunConfig) -> Result<(), CliError> {
    let mut run = Run::start("study", cfg)?;
    let c = &run.cfg;
    let full_grid = c.grid_levels()?.unwrap_or_else(default_grid);
    let sc = StudyConfig {
        truth: truth_spec(c)?,
        n_per_group: c.scenario.n_per_group,
        n_samples: c.study.n_samples,
        oe_alpha: c.scenario.alpha.value(),
        oe_epsilon_sd: c.scenario.epsilon_sd.value(),
        theta: theta(c)?,
        plan: GridNarrowingPlan::new(full_grid, c.study.n_sets)?,
        dc_mean_modes: c.study_mode.modes(),
        market: market(c)?,
        confidence: c.confidence.value(),
        seed: c.seed,
    };
    sc.validate()?;
    let result = run_study(&sc)?;
    let mut csv = Vec::new();
    for mode in &sc.dc_mean_modes {
        let name = format!("study_{}.csv", mode.as_str().to_ascii_lowercase());
        save_study_csv(run.path(&name), &result, *mode)?;
        run.record(&name);
        csv.push(name);
    }
    let report = narrowing_threshold_report(&result);
    let text = narrowing_text(&report);
    print!("{text}");
    run.write_text("narrowing.txt", &text)?;
    let summary = StudySummary {
        true_mean: result.true_mean,
        true_optimum: result.true_optimum,
        grid_sets: &result.grid_sets,
        flagged_cells: result.cells.iter().filter(|c| c.flagged).count(),
        narrowing: &report,
        csv,
    };
    run.write_json("study.json", &summary)?;
    run.finish()
}

fn csv_line(fields: &[String]) -> String {
    fields.join(",") + "\n"
}

fn render_csv(file: &TableFile) -> String {
    let mut out = String::new();
    match file {
        TableFile::MeanTable { rows, .. } => {
            out.push_str("label,mean,ci_lower,ci_upper,markers\n");
            for r in rows {
                out.push_str(&csv_line(&[
                    r.label.clone(),
                    r.mean.to_string(),
                    r.interval.lower.to_string(),
                    r.interval.upper.to_string(),
                    r.markers.render().trim_start_matches('^').replace(',', ""),
                ]));
            }
        }
        TableFile::OptimumTable { rows, .. } => {
            out.push_str(
                "label,price,price_lower,price_upper,quantity,quantity_lower,quantity_upper,\
profit,profit_lower,profit_upper,profit_pct_diff\n",
            );
            for r in rows {
                let o = &r.report;
                out.push_str(&csv_line(&[
                    r.label.clone(),
                    o.optimal_price.to_string(),
                    o.ci_price.lower.to_string(),
                    o.ci_price.upper.to_string(),
                    o.optimal_quantity.to_string(),
                    o.ci_quantity.lower.to_string(),
                    o.ci_quantity.upper.to_string(),
                    o.optimal_profit.to_string(),
                    o.ci_profit.lower.to_string(),
                    o.ci_profit.upper.to_string(),
                    o.profit_pct_diff_vs_benchmark
                        .filter(|_| !r.is_benchmark)
                        .map(|p| p.to_string())
                        .unwrap_or_default(),
                ]));
            }
        }
    }
    out
}

pub fn report(input: &Path, format: ReportFormat, out: Option<&Path>) -> Result<(), CliError> {
    let text = fs::read_to_string(input)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", input.display())))?;
    let file: TableFile = serde_json::from_str(&text).map_err(|e| {
        CliError::usage(format!(
            "{} is not an estimate or optimize report: {e}",
            input.display()
        ))
    })?;
    let rendered = match format {
        ReportFormat::Text => match &file {
            TableFile::MeanTable { rows, .. } => render_mean_table(rows),
            TableFile::OptimumTable { rows, .. } => render_optimum_table(rows),
        },
        ReportFormat::Csv => render_csv(&file),
    };
    match out {
        Some(p) => fs::write(p, rendered).map_err(|e| CliError::Output {
            path: p.display().to_string(),
            source: e,
        }),
        None => std::io::stdout()
            .write_all(rendered.as_bytes())
            .map_err(|e| CliError::Output {
                path: "stdout".into(),
                source: e,
            }),
    }
}
