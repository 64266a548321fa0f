//! Run configuration: a JSON file merged with command-line flags.
//!
//! Monetary and other real-valued fields are written as decimal strings in
//! the file (`"marginal_cost": "5.00"`) and parsed here, so the file never
//! depends on how a JSON library formats floats.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use wtp_core::debias::Procedure;
use wtp_core::io::GridSpec;
use wtp_core::study::DcMeanMode;

use crate::error::CliError;

/// A real number carried as a decimal string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decimal(pub f64);

impl Decimal {
    pub fn value(self) -> f64 {
        self.0
    }
}

fn is_decimal_literal(s: &str) -> bool {
    let body = s.strip_prefix(['-', '+']).unwrap_or(s);
    let (int, frac) = match body.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (body, None),
    };
    let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
    match frac {
        Some(f) => (int.is_empty() || digits(int)) && digits(f),
        None => digits(int),
    }
}

impl FromStr for Decimal {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let t = s.trim();
        if !is_decimal_literal(t) {
            return Err(format!("'{s}' is not a decimal number"));
        }
        t.parse::<f64>()
            .map(Decimal)
            .map_err(|e| format!("'{s}': {e}"))
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // shortest representation that round-trips
        write!(f, "{}", self.0)
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d).map_err(|_| {
            de::Error::custom("real-valued fields must be decimal strings, e.g. \"12.50\"")
        })?;
        raw.parse().map_err(de::Error::custom)
    }
}

/// DC price grid: an evenly spaced range or explicit levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridDecl {
    Range {
        min: Decimal,
        max: Decimal,
        step: Decimal,
    },
    Levels(Vec<Decimal>),
}

impl GridDecl {
    pub fn levels(&self) -> Result<Vec<f64>, CliError> {
        let spec = match self {
            GridDecl::Range { min, max, step } => GridSpec::Range {
                min: min.0,
                max: max.0,
                step: step.0,
            },
            GridDecl::Levels(v) => GridSpec::Levels(v.iter().map(|d| d.0).collect()),
        };
        Ok(spec.levels()?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketDecl {
    pub marginal_cost: Decimal,
    pub market_size: Decimal,
}

impl Default for MarketDecl {
    fn default() -> Self {
        Self {
            marginal_cost: Decimal(0.0),
            market_size: Decimal(1000.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthDecl {
    pub mean: Decimal,
    pub sd: Decimal,
    pub low: Decimal,
    pub high: Decimal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaDecl {
    pub neg_width: Decimal,
    pub pos_width: Decimal,
}

/// Synthetic scenario for `simulate` and `study`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioDecl {
    pub truth: TruthDecl,
    pub n_per_group: usize,
    pub alpha: Decimal,
    pub epsilon_sd: Decimal,
    pub theta: ThetaDecl,
}

impl Default for ScenarioDecl {
    fn default() -> Self {
        Self {
            truth: TruthDecl {
                mean: Decimal(50.0),
                sd: Decimal(10.0),
                low: Decimal(15.0),
                high: Decimal(85.0),
            },
            n_per_group: 250,
            alpha: Decimal(22.879),
            epsilon_sd: Decimal(0.0),
            theta: ThetaDecl {
                neg_width: Decimal(1.0),
                pos_width: Decimal(2.0),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudyDecl {
    pub n_samples: usize,
    pub n_sets: usize,
}

impl Default for StudyDecl {
    fn default() -> Self {
        Self {
            n_samples: 1000,
            n_sets: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StudyMode {
    Parametric,
    Nonparametric,
    Both,
}

impl StudyMode {
    pub fn modes(self) -> Vec<DcMeanMode> {
        match self {
            StudyMode::Parametric => vec![DcMeanMode::Parametric],
            StudyMode::Nonparametric => vec![DcMeanMode::Nonparametric],
            StudyMode::Both => vec![DcMeanMode::Parametric, DcMeanMode::Nonparametric],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub oe: Option<PathBuf>,
    pub dc: Option<PathBuf>,
    pub bdm: Option<PathBuf>,
    /// Further WTP series, e.g. the output of an earlier `debias` run.
    pub wtp: Vec<PathBuf>,
    pub grid: Option<GridDecl>,
    pub procedure: Procedure,
    pub cov: Option<Decimal>,
    pub epsilon_sd: Option<Decimal>,
    pub clamp_at_zero: bool,
    /// Known DC mean, used by `debias` instead of a DC file.
    pub dc_mean: Option<Decimal>,
    pub dc_mean_mode: DcMeanMode,
    pub market: MarketDecl,
    pub reps: usize,
    pub confidence: Decimal,
    pub seed: u64,
    pub out: PathBuf,
    pub scenario: ScenarioDecl,
    pub study: StudyDecl,
    pub study_mode: StudyMode,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            oe: None,
            dc: None,
            bdm: None,
            wtp: Vec::new(),
            grid: None,
            procedure: Procedure::Basic,
            cov: None,
            epsilon_sd: None,
            clamp_at_zero: false,
            dc_mean: None,
            dc_mean_mode: DcMeanMode::Parametric,
            market: MarketDecl::default(),
            reps: 1000,
            confidence: Decimal(0.95),
            seed: 2024,
            out: PathBuf::from("wtp-out"),
            scenario: ScenarioDecl::default(),
            study: StudyDecl::default(),
            study_mode: StudyMode::Both,
        }
    }
}

impl RunConfig {
    /// Reads a config file. A manifest written by an earlier run is accepted
    /// too; its `config` member is used.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))?;
        let body = match value.get("manifest_version") {
            Some(_) => value
                .get("config")
                .cloned()
                .ok_or_else(|| CliError::usage("manifest has no config member"))?,
            None => value,
        };
        serde_json::from_value(body)
            .map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))
    }

    pub fn grid_levels(&self) -> Result<Option<Vec<f64>>, CliError> {
        self.grid.as_ref().map(GridDecl::levels).transpose()
    }
}
