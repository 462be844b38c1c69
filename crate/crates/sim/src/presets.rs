//! Ready-made scenarios from the simulation study.

use longperm::design::Effect;
use longperm::distributions::ErrorDistribution::{self, Exponential, LogNormal, Normal};
use longperm::distributions::{MvNormal, RngStream};
use longperm::inference::{Dataset, GroupSummary, Method};
use longperm::linalg::{centering, Matrix};

use crate::config::{profile_difference, CovSetting, HypothesisSpec, ScenarioConfig, N1, N2, N3};
use crate::error::SimResult;

/// One group of 10 subjects, `t = 4`, `H = P_4`, log-normal errors.
pub fn one_sample_lognormal() -> SimResult<ScenarioConfig> {
    Ok(ScenarioConfig::new(
        "one-sample lognormal n=10 t=4",
        LogNormal,
        CovSetting::S1,
        vec![10],
        4,
        HypothesisSpec::Matrix(centering(4)?),
    )
    .with_methods(&[Method::WtsAsym, Method::AtsF]))
}

/// Normal errors, `V_i = I`, `n = (15, 15, 15)`, `t = 4`, no time effect.
pub fn time_effect_normal() -> ScenarioConfig {
    ScenarioConfig::new("normal S1 n3 t=4 T", Normal, CovSetting::S1, N3.to_vec(), 4, HypothesisSpec::Effect(Effect::T))
}

/// Normal errors, `V_i = I`, `n = (15, 15, 15)`, `t = 8`, no interaction.
pub fn interaction_normal_t8() -> ScenarioConfig {
    ScenarioConfig::new("normal S1 n3 t=8 GT", Normal, CovSetting::S1, N3.to_vec(), 8, HypothesisSpec::Effect(Effect::GT))
        .with_methods(&[Method::WtsAsym, Method::Wtps])
}

/// As [`time_effect_normal`], with the two bootstrap WTS tests.
pub fn time_effect_bootstrap() -> ScenarioConfig {
    time_effect_normal().with_methods(&[Method::PbsWts, Method::NpbsWts])
}

fn kqs_scenario(dist: ErrorDistribution, cov: CovSetting, cov_tag: &str, n: &[usize], n_tag: &str, t: usize) -> ScenarioConfig {
    let effect = if t == 4 { Effect::T } else { Effect::GT };
    let name = format!("{dist} {cov_tag} {n_tag} t={t} {effect}");
    ScenarioConfig::new(name, dist, cov, n.to_vec(), t, HypothesisSpec::Effect(effect)).with_methods(&[Method::Wtps])
}

/// Six null scenarios covering all error laws, covariance settings and
/// sample-size vectors: no time effect at `t = 4`, no interaction at `t = 8`.
pub fn kqs_suite() -> Vec<ScenarioConfig> {
    let s3 = || CovSetting::S3 { rho: None };
    vec![
        kqs_scenario(Normal, CovSetting::S1, "S1", &N3, "n3", 4),
        kqs_scenario(LogNormal, CovSetting::S2, "S2", &N1, "n1", 4),
        kqs_scenario(Exponential, s3(), "S3", &N2, "n2", 4),
        kqs_scenario(Normal, CovSetting::S2, "S2", &N2, "n2", 8),
        kqs_scenario(LogNormal, s3(), "S3", &N3, "n3", 8),
        kqs_scenario(Exponential, CovSetting::S1, "S1", &N1, "n1", 8),
    ]
}

/// Two groups of 15, `V_i = I`, `H = P_t(I_t ⋮ −I_t)`, WTPS and ATS.
pub fn power_scenario(dist: ErrorDistribution, t: usize) -> SimResult<ScenarioConfig> {
    Ok(ScenarioConfig::new(
        format!("power {dist} t={t}"),
        dist,
        CovSetting::S1,
        vec![15, 15],
        t,
        HypothesisSpec::Matrix(profile_difference(t)?),
    )
    .with_methods(&[Method::Wtps, Method::AtsF]))
}

/// Normal errors, setting S2, no interaction; WTS and WTPS.
pub fn large_sample(n: &[usize], t: usize) -> ScenarioConfig {
    ScenarioConfig::new(
        format!("large-sample normal S2 n={n:?} t={t} GT"),
        Normal,
        CovSetting::S2,
        n.to_vec(),
        t,
        HypothesisSpec::Effect(Effect::GT),
    )
    .with_methods(&[Method::WtsAsym, Method::Wtps])
}

/// Mean `O₂` consumption per group, ordered (with staphylococci: 6, 12, 18 min;
/// without: 6, 12, 18 min).
pub const O2_MEANS: [[f64; 6]; 2] = [
    [1.618, 2.434, 3.527, 1.322, 2.430, 3.425],
    [1.656, 2.799, 4.029, 1.394, 2.57, 3.677],
];

/// Empirical covariance matrices of the two treatment groups, rounded to three digits.
pub const O2_COVS: [[[f64; 6]; 6]; 2] = [
    [
        [0.025, -0.022, -0.004, 0.009, 0.015, 0.025],
        [-0.022, 0.092, -0.005, -0.001, -0.024, -0.035],
        [-0.004, -0.005, 0.081, -0.013, -0.010, -0.004],
        [0.009, -0.001, -0.013, 0.037, 0.044, 0.038],
        [0.015, -0.024, -0.010, 0.044, 0.069, 0.063],
        [0.025, -0.035, -0.004, 0.038, 0.063, 0.115],
    ],
    [
        [0.043, 0.012, 0.046, 0.033, 0.014, 0.055],
        [0.012, 0.113, 0.008, 0.009, 0.060, 0.032],
        [0.046, 0.008, 0.065, 0.041, 0.005, 0.066],
        [0.033, 0.009, 0.041, 0.047, 0.016, 0.059],
        [0.014, 0.060, 0.005, 0.016, 0.058, 0.047],
        [0.055, 0.032, 0.066, 0.059, 0.047, 0.116],
    ],
];

/// Subjects per treatment group.
pub const O2_N: usize = 12;

fn o2_cov(i: usize) -> Matrix<f64> {
    Matrix::from_fn(6, 6, |r, c| O2_COVS[i][r][c])
}

/// Placebo and verum summaries of the leukocyte `O₂` data (a = 2, b = 2, t = 3).
pub fn o2_summaries() -> SimResult<Vec<GroupSummary<f64>>> {
    (0..2).map(|i| Ok(GroupSummary::new(O2_MEANS[i].to_vec(), o2_cov(i), O2_N)?)).collect()
}

/// Normal surrogate raw data with the reported means and covariances, `n_i = 12`.
pub fn o2_surrogate(stream: RngStream) -> SimResult<Dataset<f64>> {
    let mut rng = stream.rng();
    let groups = (0..2)
        .map(|i| {
            let mvn = MvNormal::new(O2_MEANS[i].to_vec(), &o2_cov(i))?;
            let rows: Vec<f64> = (0..O2_N).flat_map(|_| mvn.sample(&mut rng)).collect();
            Ok(Matrix::from_row_major(O2_N, 6, rows)?)
        })
        .collect::<SimResult<Vec<_>>>()?;
    Ok(Dataset::new(groups)?)
}
