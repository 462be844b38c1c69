//! Analysis of a long-format data file.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use longperm::design::{custom_hypothesis, hyp_three_factor, hyp_two_factor, Effect, HypothesisMatrix};
use longperm::distributions::RngStream;
use longperm::inference::{ats_f_test, ats_from_summaries, wts, wts_from_summaries, Dataset, GroupSummary, Method, TestOutcome};
use longperm::linalg::Matrix;
use longperm::resampling::{npbs, pbs, wtps, ResamplePlan, ResampleResult, StatisticKind, DEFAULT_RESAMPLES};
use longperm_sim::presets;

use crate::data::{assemble, parse_long_csv};
use crate::error::{CliError, CliResult};
use crate::report::{ReportRow, ReportTable, Source};

#[derive(Clone, Debug, PartialEq)]
pub enum EffectRequest {
    Named(Effect),
    /// Contrast matrix with one column per occasion of every group.
    Matrix { label: String, matrix: Matrix<f64> },
}

impl EffectRequest {
    pub fn label(&self) -> String {
        match self {
            EffectRequest::Named(e) => e.to_string(),
            EffectRequest::Matrix { label, .. } => label.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DataSource {
    File(PathBuf),
    /// The leukocyte `O₂` example: asymptotic tests from the reported
    /// summaries, resampling tests on a seeded normal surrogate.
    O2Example,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisRequest {
    pub data: DataSource,
    pub effects: Vec<EffectRequest>,
    pub methods: Vec<Method>,
    pub n_resample: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl AnalysisRequest {
    pub fn new(data: DataSource, effects: Vec<EffectRequest>, methods: Vec<Method>) -> Self {
        AnalysisRequest { data, effects, methods, n_resample: DEFAULT_RESAMPLES, alpha: 0.05, seed: 1 }
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.effects.is_empty() {
            return Err(CliError::Usage("at least one effect is required".into()));
        }
        if self.methods.is_empty() {
            return Err(CliError::Usage("at least one method is required".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(CliError::Usage(format!("alpha = {} is not in (0, 1)", self.alpha)));
        }
        if self.n_resample == 0 && self.methods.iter().any(|m| m.is_resampling()) {
            return Err(CliError::Usage("resampling methods need at least one resample".into()));
        }
        Ok(())
    }
}

/// Reads a headerless numeric CSV.
pub fn read_matrix(path: &Path) -> CliResult<Matrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::io(path, std::io::Error::other(e)))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Parse { row: i + 1, message: e.to_string() })?;
        let row = rec
            .iter()
            .map(|c| c.parse::<f64>().map_err(|_| CliError::Parse { row: i + 1, message: format!("'{c}' is not a number") }))
            .collect::<CliResult<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Schema(format!("{}: empty matrix file", path.display())));
    }
    let r: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    Ok(Matrix::from_rows(&r)?)
}

/// Named effects for `a` groups and the given within-subject level counts.
fn build_hypothesis(req: &EffectRequest, a: usize, within: &[usize]) -> CliResult<HypothesisMatrix<f64>> {
    match req {
        EffectRequest::Matrix { matrix, .. } => Ok(custom_hypothesis(matrix.clone(), a * within.iter().product::<usize>())?),
        EffectRequest::Named(e) => match within {
            [t] => Ok(hyp_two_factor(*e, a, *t)?),
            [b, t] => Ok(hyp_three_factor(*e, a, *b, *t)?),
            _ => Err(CliError::Usage(format!(
                "named effects need one or two within-subject factors, the data has {}; use a hypothesis matrix",
                within.len()
            ))),
        },
    }
}

fn resample(data: &Dataset<f64>, h: &HypothesisMatrix<f64>, method: Method, b: usize, stream: RngStream) -> CliResult<ResampleResult<f64>> {
    Ok(match method {
        Method::Wtps => wtps(data, h, &ResamplePlan::permutation(b, stream)?)?,
        Method::NpbsWts => npbs(data, h, &ResamplePlan::npbs(b, stream)?, StatisticKind::Wts)?,
        Method::NpbsAts => npbs(data, h, &ResamplePlan::npbs(b, stream)?, StatisticKind::Ats)?,
        Method::PbsWts => pbs(data, h, &ResamplePlan::pbs(b, stream)?, StatisticKind::Wts)?,
        Method::PbsAts => pbs(data, h, &ResamplePlan::pbs(b, stream)?, StatisticKind::Ats)?,
        Method::WtsAsym | Method::AtsF => unreachable!("asymptotic method"),
    })
}

fn row(effect: String, source: Source, o: TestOutcome<f64>, b: usize, degenerate: usize) -> ReportRow {
    ReportRow {
        effect,
        method: o.method,
        source,
        statistic: o.statistic,
        df: o.df,
        p_value: o.p_value,
        reference: o.reference.to_string(),
        b,
        degenerate,
    }
}

enum Input {
    Raw(Dataset<f64>),
    Summaries { summaries: Vec<GroupSummary<f64>>, surrogate: Dataset<f64> },
}

/// One row per (effect, method), effects outer. Resampling for effect `e`
/// and method `m` draws from `RngStream::new(seed).derive(e).derive(m)`.
pub fn run_analyze(req: &AnalysisRequest) -> CliResult<ReportTable> {
    req.validate()?;
    let (input, a, within) = match &req.data {
        DataSource::File(path) => {
            let table = parse_long_csv(path)?;
            let asm = assemble(&table, None)?;
            let within: Vec<usize> = asm.factors.iter().map(|f| f.levels.len()).collect();
            let a = asm.groups.len();
            (Input::Raw(asm.dataset), a, within)
        }
        DataSource::O2Example => {
            let surrogate = presets::o2_surrogate(RngStream::new(req.seed).derive(u64::MAX))?;
            (Input::Summaries { summaries: presets::o2_summaries()?, surrogate }, 2, vec![2, 3])
        }
    };
    let base = RngStream::new(req.seed);
    let mut rows = Vec::new();
    for (ei, effect) in req.effects.iter().enumerate() {
        let h = build_hypothesis(effect, a, &within)?;
        let label = effect.label();
        for (mi, &method) in req.methods.iter().enumerate() {
            let stream = base.derive(ei as u64).derive(mi as u64);
            let r = match (&input, method) {
                (Input::Raw(d), Method::WtsAsym) => row(label.clone(), Source::Data, wts(d, &h)?, 0, 0),
                (Input::Raw(d), Method::AtsF) => row(label.clone(), Source::Data, ats_f_test(d, &h)?, 0, 0),
                (Input::Summaries { summaries, .. }, Method::WtsAsym) => {
                    row(label.clone(), Source::Summary, wts_from_summaries(summaries, &h)?, 0, 0)
                }
                (Input::Summaries { summaries, .. }, Method::AtsF) => {
                    row(label.clone(), Source::Summary, ats_from_summaries(summaries, &h)?, 0, 0)
                }
                (Input::Raw(d), m) => {
                    let res = resample(d, &h, m, req.n_resample, stream)?;
                    row(label.clone(), Source::Data, res.outcome(), res.b(), res.degenerate)
                }
                (Input::Summaries { surrogate, .. }, m) => {
                    let res = resample(surrogate, &h, m, req.n_resample, stream)?;
                    row(label.clone(), Source::Surrogate, res.outcome(), res.b(), res.degenerate)
                }
            };
            rows.push(r);
        }
    }
    let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    Ok(ReportTable { rows, alpha: req.alpha, seed: req.seed, b: req.n_resample, created })
}
