//! Loading inputs and assembling the rows of the estimate/optimize tables.

use wtp_core::debias::{debias, theoretical_cov, DebiasConfig, DebiasEstimate, Procedure};
use wtp_core::inference::BootData;
use wtp_core::io::{load_dc_csv, load_wtp_csv};
use wtp_core::model::{DcDataset, Elicitation, WtpSample};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::run::{file_stem, Run, SEED_DEBIAS};

/// Smallest BDM sample considered enough to pin down mean WTP.
pub const MIN_BDM: usize = 50;

pub enum SeriesData {
    Wtp(WtpSample),
    Dc(DcDataset),
}

pub struct NamedSeries {
    pub label: String,
    pub data: SeriesData,
}

impl NamedSeries {
    pub fn boot(&self) -> BootData<'_> {
        match &self.data {
            SeriesData::Wtp(w) => BootData::Wtp(w),
            SeriesData::Dc(d) => BootData::Dc(d),
        }
    }
}

pub struct Inputs {
    pub oe: Option<WtpSample>,
    pub dc: Option<DcDataset>,
    pub bdm: Option<WtpSample>,
    pub extra: Vec<(String, WtpSample)>,
}

pub fn load_inputs(run: &mut Run) -> Result<Inputs, CliError> {
    let cfg = &run.cfg;
    let grid = cfg.grid_levels()?;
    let oe = cfg
        .oe
        .as_ref()
        .map(|p| load_wtp_csv(p, Elicitation::Oe))
        .transpose()?;
    let dc = cfg
        .dc
        .as_ref()
        .map(|p| load_dc_csv(p, grid.as_deref()))
        .transpose()?;
    let bdm = cfg
        .bdm
        .as_ref()
        .map(|p| load_wtp_csv(p, Elicitation::Bdm))
        .transpose()?;
    let extra = cfg
        .wtp
        .iter()
        .map(|p| Ok((file_stem(p), load_wtp_csv(p, Elicitation::DebiasedBasic)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    if let Some(b) = &bdm {
        if b.len() < MIN_BDM {
            run.warn(format!(
                "BDM sample has {} respondents; at least {MIN_BDM} are recommended",
                b.len()
            ));
        }
    }
    if let Some(d) = &dc {
        let empty = d.empty_levels();
        if !empty.is_empty() {
            run.warn(format!("DC grid levels without answers: {empty:?}"));
        }
    }
    Ok(Inputs { oe, dc, bdm, extra })
}

/// Where the cov(θ, p) used by FULL came from.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CovSource {
    Flag,
    Bdm,
}

pub fn resolve_cov(
    cfg: &RunConfig,
    bdm: Option<&WtpSample>,
    dc_mean: f64,
) -> Option<(f64, CovSource)> {
    cfg.cov
        .map(|c| (c.value(), CovSource::Flag))
        .or_else(|| bdm.map(|b| (theoretical_cov(b.mean(), dc_mean), CovSource::Bdm)))
}

pub fn missing_cov_error() -> CliError {
    CliError::usage(
        "FULL de-biasing needs cov(theta, p): pass --cov, or supply a BDM sample with --bdm \
         (at least 50 respondents recommended)",
    )
}

/// DC mean from `--dc-mean` or estimated from the DC data in the configured mode.
pub fn dc_mean(cfg: &RunConfig, dc: Option<&DcDataset>) -> Result<Option<f64>, CliError> {
    if let Some(m) = cfg.dc_mean {
        return Ok(Some(m.value()));
    }
    dc.map(|d| cfg.dc_mean_mode.dc_mean(d).map_err(CliError::from))
        .transpose()
}

pub fn debias_config(cfg: &RunConfig, procedure: Procedure, cov: f64, seed: u64) -> DebiasConfig {
    DebiasConfig {
        procedure,
        cov,
        epsilon_sd: cfg.epsilon_sd.map(|d| d.value()),
        seed,
        clamp_at_zero: cfg.clamp_at_zero,
    }
}

pub struct Assembled {
    pub benchmark: Option<NamedSeries>,
    pub rows: Vec<NamedSeries>,
    pub estimates: Vec<DebiasEstimate>,
}

/// Benchmark (BDM), then OE, DC, the de-biased series that can be formed,
/// and any extra WTP series.
pub fn assemble(run: &mut Run, inputs: Inputs) -> Result<Assembled, CliError> {
    let Inputs { oe, dc, bdm, extra } = inputs;
    let mut rows = Vec::new();
    let mut estimates = Vec::new();
    let dc_mean = dc_mean(&run.cfg, dc.as_ref())?;
    if let (Some(oe), Some(m)) = (&oe, dc_mean) {
        let seed = run.seed_for("debias", SEED_DEBIAS);
        let cov = resolve_cov(&run.cfg, bdm.as_ref(), m);
        for p in Procedure::ALL {
            let c = match (p, cov) {
                (Procedure::Full, None) => {
                    run.warn("FULL skipped: no --cov and no BDM sample".into());
                    continue;
                }
                (Procedure::Full, Some((c, _))) => c,
                _ => 0.0,
            };
            estimates.push(debias(oe, m, &debias_config(&run.cfg, p, c, seed))?);
        }
    }
    if let Some(oe) = oe {
        rows.push(NamedSeries {
            label: "OE".into(),
            data: SeriesData::Wtp(oe),
        });
    }
    if let Some(dc) = dc {
        rows.push(NamedSeries {
            label: "DC".into(),
            data: SeriesData::Dc(dc),
        });
    }
    for e in &estimates {
        rows.push(NamedSeries {
            label: e.procedure.as_str().into(),
            data: SeriesData::Wtp(e.debiased.clone()),
        });
    }
    for (label, s) in extra {
        rows.push(NamedSeries {
            label,
            data: SeriesData::Wtp(s),
        });
    }
    let benchmark = bdm.map(|b| NamedSeries {
        label: "BDM".into(),
        data: SeriesData::Wtp(b),
    });
    if benchmark.is_none() && rows.is_empty() {
        return Err(CliError::usage(
            "no input data: pass at least one of --oe, --dc, --bdm, --wtp",
        ));
    }
    Ok(Assembled {
        benchmark,
        rows,
        estimates,
    })
}

/// Grid used to expand WTP series for logistic fits: the configured grid,
/// otherwise the DC grid.
pub fn pricing_grid(cfg: &RunConfig, dc: Option<&DcDataset>) -> Result<Option<Vec<f64>>, CliError> {
    Ok(cfg.grid_levels()?.or_else(|| dc.map(|d| d.grid().to_vec())))
}
