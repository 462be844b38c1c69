//! Rejection-rate, quantile-distance, power and large-sample studies.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use longperm::design::HypothesisMatrix;
use longperm::distributions::{chi2_quantile, RngStream};
use longperm::inference::{ats_f_test, wts, Dataset, Method};
use longperm::resampling::{npbs, pbs, wtps, ResamplePlan, StatisticKind};

use crate::config::{KqsPooling, ScenarioConfig};
use crate::error::{SimError, SimResult};
use crate::generate::Generator;
use crate::quantile::{empirical_quantile, kqs_grid, sort_sample, sup_distance};

#[derive(Clone, Debug, PartialEq)]
pub struct MethodRate {
    pub method: Method,
    pub rejections: usize,
    pub rate: f64,
    /// `√(r(1 − r)/n_sim)`.
    pub se: f64,
    /// Resamples with a degenerate covariance, summed over data sets.
    pub degenerate_resamples: usize,
    /// Data sets on which the observed statistic could not be computed (counted as not rejected).
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationReport {
    pub scenario: String,
    pub n_sim: usize,
    pub n_resample: usize,
    pub alpha: f64,
    pub seed: u64,
    pub rates: Vec<MethodRate>,
    pub duration: Duration,
}

impl SimulationReport {
    pub fn get(&self, method: Method) -> Option<&MethodRate> {
        self.rates.iter().find(|r| r.method == method)
    }

    pub fn rate(&self, method: Method) -> Option<f64> {
        self.get(method).map(|r| r.rate)
    }
}

pub fn binomial_se(rate: f64, n: usize) -> f64 {
    (rate * (1.0 - rate) / n as f64).sqrt()
}

#[derive(Clone, Copy, Debug, Default)]
struct Tally {
    reject: bool,
    degenerate: usize,
    failed: bool,
}

fn apply(method: Method, data: &Dataset<f64>, h: &HypothesisMatrix<f64>, cfg: &ScenarioConfig, stream: RngStream) -> Tally {
    let alpha = cfg.alpha;
    let resample = |plan: Result<ResamplePlan, longperm::Error>, run: &dyn Fn(&ResamplePlan) -> longperm::Result<longperm::ResampleResult64>| {
        match plan.and_then(|p| run(&p.sequential())) {
            Ok(r) => Tally { reject: r.rejects(alpha), degenerate: r.degenerate, failed: false },
            Err(_) => Tally { failed: true, ..Tally::default() },
        }
    };
    let b = cfg.n_resample;
    match method {
        Method::WtsAsym => match wts(data, h) {
            Ok(o) => Tally { reject: o.rejects(alpha), ..Tally::default() },
            Err(_) => Tally { failed: true, ..Tally::default() },
        },
        Method::AtsF => match ats_f_test(data, h) {
            Ok(o) => Tally { reject: o.rejects(alpha), ..Tally::default() },
            Err(_) => Tally { failed: true, ..Tally::default() },
        },
        Method::Wtps => resample(ResamplePlan::permutation(b, stream), &|p| wtps(data, h, p)),
        Method::NpbsWts => resample(ResamplePlan::npbs(b, stream), &|p| npbs(data, h, p, StatisticKind::Wts)),
        Method::NpbsAts => resample(ResamplePlan::npbs(b, stream), &|p| npbs(data, h, p, StatisticKind::Ats)),
        Method::PbsWts => resample(ResamplePlan::pbs(b, stream), &|p| pbs(data, h, p, StatisticKind::Wts)),
        Method::PbsAts => resample(ResamplePlan::pbs(b, stream), &|p| pbs(data, h, p, StatisticKind::Ats)),
    }
}

/// Replicate `r` uses `RngStream::new(seed).derive(r)`: substream 0 for the
/// data and `1 + j` for the `j`-th method's resamples.
fn replicate_stream(cfg: &ScenarioConfig, r: usize) -> RngStream {
    RngStream::new(cfg.seed).derive(r as u64)
}

/// Rejection rates of every configured method, without checking the null.
pub fn run_rejection_rates(cfg: &ScenarioConfig) -> SimResult<SimulationReport> {
    cfg.validate()?;
    let start = Instant::now();
    let h = cfg.hypothesis.build(cfg.a(), cfg.t)?;
    let gen = Generator::new(cfg)?;
    let tallies: Vec<Vec<Tally>> = (0..cfg.n_sim)
        .into_par_iter()
        .map(|r| {
            let s = replicate_stream(cfg, r);
            let data = gen.sample(s.derive(0));
            cfg.methods
                .iter()
                .enumerate()
                .map(|(j, &m)| apply(m, &data, &h, cfg, s.derive(1 + j as u64)))
                .collect()
        })
        .collect();
    let rates = cfg
        .methods
        .iter()
        .enumerate()
        .map(|(j, &method)| {
            let rejections = tallies.iter().filter(|t| t[j].reject).count();
            let rate = rejections as f64 / cfg.n_sim as f64;
            MethodRate {
                method,
                rejections,
                rate,
                se: binomial_se(rate, cfg.n_sim),
                degenerate_resamples: tallies.iter().map(|t| t[j].degenerate).sum(),
                failed: tallies.iter().filter(|t| t[j].failed).count(),
            }
        })
        .collect();
    Ok(SimulationReport {
        scenario: cfg.name.clone(),
        n_sim: cfg.n_sim,
        n_resample: cfg.n_resample,
        alpha: cfg.alpha,
        seed: cfg.seed,
        rates,
        duration: start.elapsed(),
    })
}

fn check_null(cfg: &ScenarioConfig) -> SimResult<()> {
    let h = cfg.hypothesis.build(cfg.a(), cfg.t)?;
    let hmu = h.h().matvec(&cfg.mean_vector());
    if hmu.iter().any(|x| x.abs() > 1e-10) {
        return Err(SimError::Config(format!("scenario '{}': mu does not satisfy the null hypothesis", cfg.name)));
    }
    Ok(())
}

/// Type-I error rates; `mu` must satisfy `Hμ = 0`.
pub fn run_type1(cfg: &ScenarioConfig) -> SimResult<SimulationReport> {
    cfg.validate()?;
    check_null(cfg)?;
    run_rejection_rates(cfg)
}

#[derive(Clone, Debug, PartialEq)]
pub struct KqsReport {
    pub scenario: String,
    /// `sup |F̂_N⁻¹ − χ²_f⁻¹|`.
    pub kqs: f64,
    /// `sup |F̂_N⁻¹ − F̂_π⁻¹|` under the configured pooling.
    pub kqs_pi: f64,
    /// The same distance under the other pooling scheme.
    pub kqs_pi_alt: f64,
    pub pooling: KqsPooling,
    pub grid: Vec<f64>,
    /// Quantile functions on the grid, for plotting.
    pub quantiles: Vec<QuantileRow>,
    pub df: f64,
    pub n_sim: usize,
    pub n_resample: usize,
    pub seed: u64,
    pub failed: usize,
    pub degenerate_resamples: usize,
    pub duration: Duration,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantileRow {
    pub level: f64,
    pub statistic: f64,
    pub chi2: f64,
    /// Under the configured pooling.
    pub permutation: f64,
}

/// Quantile distances of the WTS to its χ² limit and to the permutation distribution.
pub fn run_kqs(cfg: &ScenarioConfig) -> SimResult<KqsReport> {
    run_kqs_on_grid(cfg, &kqs_grid())
}

pub fn run_kqs_on_grid(cfg: &ScenarioConfig, grid: &[f64]) -> SimResult<KqsReport> {
    cfg.validate()?;
    check_null(cfg)?;
    if cfg.n_resample == 0 {
        return Err(SimError::Config("n_resample must be at least 1".into()));
    }
    if grid.is_empty() || grid.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
        return Err(SimError::Config("quantile grid must be non-empty with levels in (0, 1)".into()));
    }
    let start = Instant::now();
    let h = cfg.hypothesis.build(cfg.a(), cfg.t)?;
    let gen = Generator::new(cfg)?;
    let runs: Vec<Option<(f64, Vec<f64>, usize)>> = (0..cfg.n_sim)
        .into_par_iter()
        .map(|r| {
            let s = replicate_stream(cfg, r);
            let data = gen.sample(s.derive(0));
            let plan = ResamplePlan::permutation(cfg.n_resample, s.derive(1)).ok()?.sequential();
            wtps(&data, &h, &plan).ok().map(|res| (res.observed, sort_sample(res.resampled), res.degenerate))
        })
        .collect();
    let failed = runs.iter().filter(|r| r.is_none()).count();
    let ok: Vec<(f64, Vec<f64>, usize)> = runs.into_iter().flatten().collect();
    if ok.is_empty() {
        return Err(SimError::Config(format!("scenario '{}': no data set gave a finite statistic", cfg.name)));
    }
    let degenerate_resamples = ok.iter().map(|r| r.2).sum();
    let observed = sort_sample(ok.iter().map(|r| r.0).collect());
    let df = h.rank() as f64;
    let chi2: Vec<f64> = grid.iter().map(|&p| chi2_quantile(p, df)).collect::<Result<_, _>>()?;
    let stat_q: Vec<f64> = grid.iter().map(|&p| empirical_quantile(&observed, p)).collect();
    let kqs = sup_distance_idx(&stat_q, &chi2);

    let pooled = sort_sample(ok.iter().flat_map(|r| r.1.iter().copied()).collect());
    let pooled_q: Vec<f64> = grid.iter().map(|&p| empirical_quantile(&pooled, p)).collect();
    let averaged_q: Vec<f64> = grid
        .iter()
        .map(|&p| ok.iter().map(|r| empirical_quantile(&r.1, p)).sum::<f64>() / ok.len() as f64)
        .collect();
    let d_pooled = sup_distance_idx(&stat_q, &pooled_q);
    let d_avg = sup_distance_idx(&stat_q, &averaged_q);
    let (kqs_pi, kqs_pi_alt, perm_q) = match cfg.kqs_pooling {
        KqsPooling::Pooled => (d_pooled, d_avg, &pooled_q),
        KqsPooling::Averaged => (d_avg, d_pooled, &averaged_q),
    };
    let quantiles = (0..grid.len())
        .map(|i| QuantileRow { level: grid[i], statistic: stat_q[i], chi2: chi2[i], permutation: perm_q[i] })
        .collect();
    Ok(KqsReport {
        scenario: cfg.name.clone(),
        kqs,
        kqs_pi,
        kqs_pi_alt,
        pooling: cfg.kqs_pooling,
        grid: grid.to_vec(),
        quantiles,
        df,
        n_sim: cfg.n_sim,
        n_resample: cfg.n_resample,
        seed: cfg.seed,
        failed,
        degenerate_resamples,
        duration: start.elapsed(),
    })
}

fn sup_distance_idx(a: &[f64], b: &[f64]) -> f64 {
    let idx: Vec<f64> = (0..a.len()).map(|i| i as f64).collect();
    sup_distance(&idx, |i| a[i as usize], |i| b[i as usize])
}

/// One point of a rejection-rate curve.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint {
    pub x: f64,
    pub method: Method,
    pub rate: f64,
    pub se: f64,
    pub n_sim: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub scenario: String,
    /// Meaning of `x`: `delta` or `increment`.
    pub x_name: String,
    pub points: Vec<CurvePoint>,
    pub n_resample: usize,
    pub seed: u64,
    pub duration: Duration,
}

impl Curve {
    pub fn series(&self, method: Method) -> Vec<&CurvePoint> {
        self.points.iter().filter(|p| p.method == method).collect()
    }

    pub fn rate(&self, method: Method, x: f64) -> Option<f64> {
        self.points.iter().find(|p| p.method == method && p.x == x).map(|p| p.rate)
    }
}

fn append(points: &mut Vec<CurvePoint>, x: f64, rep: &SimulationReport) {
    points.extend(rep.rates.iter().map(|r| CurvePoint { x, method: r.method, rate: r.rate, se: r.se, n_sim: rep.n_sim }));
}

/// `c_s = s/t`.
pub fn trend(t: usize) -> Vec<f64> {
    (1..=t).map(|s| s as f64 / t as f64).collect()
}

/// Two groups with `μ₁ = δ·c` and `μ₂ = 0`. Every δ reuses the scenario seed,
/// so the curves are built from common random numbers.
pub fn run_power(cfg: &ScenarioConfig, deltas: &[f64], trend: &[f64]) -> SimResult<Curve> {
    cfg.validate()?;
    if cfg.a() != 2 {
        return Err(SimError::Config(format!("power study needs 2 groups, got {}", cfg.a())));
    }
    if trend.len() != cfg.t {
        return Err(SimError::Config(format!("trend has length {}, expected {}", trend.len(), cfg.t)));
    }
    let start = Instant::now();
    let mut points = Vec::new();
    for &delta in deltas {
        let mut c = cfg.clone();
        c.mu = trend.iter().map(|v| delta * v).chain(std::iter::repeat(0.0).take(cfg.t)).collect();
        append(&mut points, delta, &run_rejection_rates(&c)?);
    }
    Ok(Curve {
        scenario: cfg.name.clone(),
        x_name: "delta".into(),
        points,
        n_resample: cfg.n_resample,
        seed: cfg.seed,
        duration: start.elapsed(),
    })
}

/// Type-I error with every group size increased by `b`.
pub fn run_large_sample(cfg: &ScenarioConfig, increments: &[usize]) -> SimResult<Curve> {
    cfg.validate()?;
    check_null(cfg)?;
    let start = Instant::now();
    let mut points = Vec::new();
    for &b in increments {
        let mut c = cfg.clone();
        c.n_vec = cfg.n_vec.iter().map(|n| n + b).collect();
        append(&mut points, b as f64, &run_rejection_rates(&c)?);
    }
    Ok(Curve {
        scenario: cfg.name.clone(),
        x_name: "increment".into(),
        points,
        n_resample: cfg.n_resample,
        seed: cfg.seed,
        duration: start.elapsed(),
    })
}

/// `0, 20, …, 200`.
pub fn default_increments() -> Vec<usize> {
    (0..=10).map(|k| 20 * k).collect()
}

/// `0, 0.5, 1, 1.5, 2, 3`.
pub const DEFAULT_DELTAS: [f64; 6] = [0.0, 0.5, 1.0, 1.5, 2.0, 3.0];
