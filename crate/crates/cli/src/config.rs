//! Scenario files (TOML). See `docs/config.md` for the grammar.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use longperm::design::Effect;
use longperm::distributions::ErrorDistribution;
use longperm::inference::Method;
use longperm::linalg::Matrix;
use longperm_sim::study::{default_increments, trend, DEFAULT_DELTAS};
use longperm_sim::{CovSetting, HypothesisSpec, KqsPooling, ScenarioConfig};

use crate::error::{CliError, CliResult};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    scenario: RawScenario,
    #[serde(default)]
    methods: RawMethods,
    #[serde(default)]
    study: RawStudy,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    #[serde(default = "default_distribution")]
    distribution: String,
    #[serde(default = "default_covariance")]
    covariance: String,
    rho: Option<Vec<f64>>,
    covariance_matrices: Option<Vec<Vec<Vec<f64>>>>,
    n: Vec<usize>,
    t: usize,
    hypothesis: Option<String>,
    hypothesis_matrix: Option<Vec<Vec<f64>>>,
    mu: Option<Vec<f64>>,
    block_variance: Option<Vec<f64>>,
}

fn default_distribution() -> String {
    "normal".into()
}

fn default_covariance() -> String {
    "S1".into()
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMethods {
    #[serde(rename = "use")]
    names: Option<Vec<String>>,
    n_sim: Option<usize>,
    n_resample: Option<usize>,
    alpha: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStudy {
    kind: Option<String>,
    deltas: Option<Vec<f64>>,
    trend: Option<Vec<f64>>,
    increments: Option<Vec<usize>>,
    kqs_pooling: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    report: Option<PathBuf>,
    plot: Option<PathBuf>,
}

/// What to run on a scenario.
#[derive(Clone, Debug, PartialEq)]
pub enum StudyKind {
    Type1,
    Kqs,
    Power { deltas: Vec<f64>, trend: Vec<f64> },
    LargeSample { increments: Vec<usize> },
}

impl StudyKind {
    pub fn name(&self) -> &'static str {
        match self {
            StudyKind::Type1 => "type1",
            StudyKind::Kqs => "kqs",
            StudyKind::Power { .. } => "power",
            StudyKind::LargeSample { .. } => "large-sample",
        }
    }
}

/// A parsed scenario file. Output paths are resolved against the file's directory.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioFile {
    pub scenario: ScenarioConfig,
    pub study: StudyKind,
    pub report: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    /// Power and large-sample parameters, kept so the kind can be overridden.
    deltas: Vec<f64>,
    trend: Option<Vec<f64>>,
    increments: Vec<usize>,
}

fn cfg_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ScenarioFile {
    /// Re-targets the file at another study kind.
    pub fn with_kind(mut self, kind: &str) -> CliResult<Self> {
        self.study = match kind {
            "type1" => StudyKind::Type1,
            "kqs" => StudyKind::Kqs,
            "power" => StudyKind::Power {
                deltas: self.deltas.clone(),
                trend: self.trend.clone().unwrap_or_else(|| trend(self.scenario.t)),
            },
            "large-sample" => StudyKind::LargeSample { increments: self.increments.clone() },
            other => return Err(cfg_err(format!("study.kind '{other}' is not one of type1, kqs, power, large-sample"))),
        };
        Ok(self)
    }

    pub fn full_scale(mut self) -> Self {
        self.scenario = self.scenario.full_scale();
        self
    }
}

fn matrix(rows: &[Vec<f64>], what: &str) -> CliResult<Matrix<f64>> {
    let r: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    Matrix::from_rows(&r).map_err(|e| cfg_err(format!("{what}: {e}")))
}

pub fn load_scenario(path: &Path) -> CliResult<ScenarioFile> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new(""));
    parse_scenario(&text, base).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Parses scenario text; relative output paths are joined to `base`.
pub fn parse_scenario(text: &str, base: &Path) -> CliResult<ScenarioFile> {
    let raw: RawFile = toml::from_str(text).map_err(|e| cfg_err(e.to_string().trim_end().to_owned()))?;
    let s = raw.scenario;

    let distribution: ErrorDistribution =
        s.distribution.parse().map_err(|_| cfg_err(format!("unknown distribution '{}'", s.distribution)))?;
    let cov_setting = match (s.covariance.to_ascii_uppercase().as_str(), s.covariance_matrices) {
        (_, Some(ms)) => CovSetting::Explicit(
            ms.iter().enumerate().map(|(i, m)| matrix(m, &format!("covariance_matrices[{i}]"))).collect::<CliResult<_>>()?,
        ),
        ("S1", None) => CovSetting::S1,
        ("S2", None) => CovSetting::S2,
        ("S3", None) => CovSetting::S3 { rho: s.rho.clone() },
        (other, None) => return Err(cfg_err(format!("unknown covariance setting '{other}'"))),
    };
    if s.rho.is_some() && !matches!(cov_setting, CovSetting::S3 { .. }) {
        return Err(cfg_err("rho is only used with covariance = \"S3\""));
    }
    let hypothesis = match (s.hypothesis, s.hypothesis_matrix) {
        (Some(_), Some(_)) => return Err(cfg_err("give either hypothesis or hypothesis_matrix, not both")),
        (None, None) => return Err(cfg_err("missing hypothesis")),
        (Some(e), None) => HypothesisSpec::Effect(e.parse::<Effect>().map_err(|_| cfg_err(format!("unknown effect '{e}'")))?),
        (None, Some(m)) => HypothesisSpec::Matrix(matrix(&m, "hypothesis_matrix")?),
    };

    let mut cfg = ScenarioConfig::new(s.name, distribution, cov_setting, s.n, s.t, hypothesis);
    cfg.mu = s.mu.unwrap_or_default();
    cfg.block_sd2 = s.block_variance.unwrap_or_default();

    let m = raw.methods;
    if let Some(names) = m.names {
        cfg.methods = names
            .iter()
            .map(|n| n.parse::<Method>().map_err(|_| cfg_err(format!("unknown method '{n}'"))))
            .collect::<CliResult<_>>()?;
    }
    cfg.n_sim = m.n_sim.unwrap_or(cfg.n_sim);
    cfg.n_resample = m.n_resample.unwrap_or(cfg.n_resample);
    cfg.alpha = m.alpha.unwrap_or(cfg.alpha);
    cfg.seed = m.seed.unwrap_or(cfg.seed);

    let st = raw.study;
    if let Some(p) = st.kqs_pooling {
        cfg.kqs_pooling = match p.to_ascii_lowercase().as_str() {
            "pooled" => KqsPooling::Pooled,
            "averaged" => KqsPooling::Averaged,
            other => return Err(cfg_err(format!("kqs_pooling '{other}' is not pooled or averaged"))),
        };
    }
    cfg.validate()?;

    let resolve = |p: Option<PathBuf>| p.map(|p| if p.is_absolute() { p } else { base.join(p) });
    let file = ScenarioFile {
        study: StudyKind::Type1,
        report: resolve(raw.output.report),
        plot: resolve(raw.output.plot),
        deltas: st.deltas.unwrap_or_else(|| DEFAULT_DELTAS.to_vec()),
        trend: st.trend,
        increments: st.increments.unwrap_or_else(default_increments),
        scenario: cfg,
    };
    let kind = st.kind.unwrap_or_else(|| "type1".into());
    file.with_kind(&kind)
}
