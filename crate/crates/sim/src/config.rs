//! Declarative description of one Monte Carlo experiment.

use longperm::design::{custom_hypothesis, hyp_two_factor, Effect, HypothesisMatrix};
use longperm::distributions::ErrorDistribution;
use longperm::inference::Method;
use longperm::linalg::{centering, Matrix};

use crate::error::{SimError, SimResult};

/// Group sizes `(30, 20, 10)`.
pub const N1: [usize; 3] = [30, 20, 10];
/// Group sizes `(10, 20, 30)`.
pub const N2: [usize; 3] = [10, 20, 30];
/// Group sizes `(15, 15, 15)`.
pub const N3: [usize; 3] = [15, 15, 15];

/// Replication counts used by default.
pub const DESK_SCALE: (usize, usize) = (5000, 500);
/// The larger counts, `10000` data sets with `1000` resamples each.
pub const FULL_SCALE: (usize, usize) = (10_000, 1000);

/// Group covariance matrices `V_i`.
#[derive(Clone, Debug, PartialEq)]
pub enum CovSetting {
    /// `I_t`.
    S1,
    /// `diag(σ_s²)` with `σ_s² = s` for `t = 4` and `σ_s² = √s` for `t = 8`.
    S2,
    /// `(ρ_i^{|l−j|})`, by default `ρ = (0.6, 0.5, 0.4)`.
    S3 { rho: Option<Vec<f64>> },
    /// One matrix per group.
    Explicit(Vec<Matrix<f64>>),
}

pub const DEFAULT_RHO: [f64; 3] = [0.6, 0.5, 0.4];

/// Hypothesis of a scenario: a two-factor effect on `(a, t)` or an explicit matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum HypothesisSpec {
    Effect(Effect),
    Matrix(Matrix<f64>),
}

impl HypothesisSpec {
    pub fn build(&self, a: usize, t: usize) -> SimResult<HypothesisMatrix<f64>> {
        Ok(match self {
            HypothesisSpec::Effect(e) => hyp_two_factor(*e, a, t)?,
            HypothesisSpec::Matrix(h) => custom_hypothesis(h.clone(), a * t)?,
        })
    }

    pub fn label(&self) -> String {
        match self {
            HypothesisSpec::Effect(e) => e.to_string(),
            HypothesisSpec::Matrix(_) => Effect::Custom.to_string(),
        }
    }
}

/// `P_t·(I_t ⋮ −I_t)`: parallel mean profiles in two groups.
pub fn profile_difference(t: usize) -> SimResult<Matrix<f64>> {
    let p = centering::<f64>(t)?;
    Ok(Matrix::from_fn(t, 2 * t, |r, c| if c < t { p[(r, c)] } else { -p[(r, c - t)] }))
}

/// How permutation quantiles are aggregated over simulated data sets for `KQS^π`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KqsPooling {
    /// One quantile function from all permutation statistics together.
    Pooled,
    /// Per-data-set quantiles, averaged level by level.
    Averaged,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub distribution: ErrorDistribution,
    pub cov_setting: CovSetting,
    pub n_vec: Vec<usize>,
    pub t: usize,
    /// Variance `σ_i²` of the subject effect `B_ik`; empty means all zero.
    pub block_sd2: Vec<f64>,
    pub hypothesis: HypothesisSpec,
    pub methods: Vec<Method>,
    pub n_sim: usize,
    pub n_resample: usize,
    pub alpha: f64,
    pub seed: u64,
    /// Stacked mean vector of length `a·t`; empty means zero.
    pub mu: Vec<f64>,
    pub kqs_pooling: KqsPooling,
}

impl ScenarioConfig {
    /// Null scenario at desk scale with the asymptotic tests and the WTPS.
    pub fn new(
        name: impl Into<String>,
        distribution: ErrorDistribution,
        cov_setting: CovSetting,
        n_vec: Vec<usize>,
        t: usize,
        hypothesis: HypothesisSpec,
    ) -> Self {
        ScenarioConfig {
            name: name.into(),
            distribution,
            cov_setting,
            n_vec,
            t,
            block_sd2: Vec::new(),
            hypothesis,
            methods: vec![Method::AtsF, Method::WtsAsym, Method::Wtps],
            n_sim: DESK_SCALE.0,
            n_resample: DESK_SCALE.1,
            alpha: 0.05,
            seed: 1,
            mu: Vec::new(),
            kqs_pooling: KqsPooling::Pooled,
        }
    }

    pub fn with_methods(mut self, methods: &[Method]) -> Self {
        self.methods = methods.to_vec();
        self
    }

    pub fn with_counts(mut self, n_sim: usize, n_resample: usize) -> Self {
        self.n_sim = n_sim;
        self.n_resample = n_resample;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn full_scale(self) -> Self {
        self.with_counts(FULL_SCALE.0, FULL_SCALE.1)
    }

    pub fn a(&self) -> usize {
        self.n_vec.len()
    }

    pub fn dim(&self) -> usize {
        self.a() * self.t
    }

    /// Mean vector with the empty default expanded to zeros.
    pub fn mean_vector(&self) -> Vec<f64> {
        if self.mu.is_empty() {
            vec![0.0; self.dim()]
        } else {
            self.mu.clone()
        }
    }

    pub fn block_variances(&self) -> Vec<f64> {
        if self.block_sd2.is_empty() {
            vec![0.0; self.a()]
        } else {
            self.block_sd2.clone()
        }
    }

    /// Checks everything that can be checked before simulating.
    pub fn validate(&self) -> SimResult<()> {
        let bad = |m: String| Err(SimError::Config(m));
        if self.n_vec.is_empty() {
            return bad("n_vec is empty".into());
        }
        if let Some(n) = self.n_vec.iter().find(|&&n| n < 2) {
            return bad(format!("group size {n} is below 2"));
        }
        if self.t == 0 {
            return bad("t must be positive".into());
        }
        if self.n_sim == 0 {
            return bad("n_sim must be at least 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha = {} is not in (0, 1)", self.alpha));
        }
        if self.methods.is_empty() {
            return bad("no methods selected".into());
        }
        if self.methods.iter().any(|m| m.is_resampling()) && self.n_resample == 0 {
            return bad("n_resample must be at least 1 for resampling methods".into());
        }
        if !self.mu.is_empty() && self.mu.len() != self.dim() {
            return bad(format!("mu has length {}, expected a·t = {}", self.mu.len(), self.dim()));
        }
        if self.mu.iter().any(|x| !x.is_finite()) {
            return bad("mu has non-finite entries".into());
        }
        if !self.block_sd2.is_empty() && self.block_sd2.len() != self.a() {
            return bad(format!("block_sd2 has length {}, expected {}", self.block_sd2.len(), self.a()));
        }
        if self.block_sd2.iter().any(|&s| !(s >= 0.0 && s.is_finite())) {
            return bad("block_sd2 entries must be finite and non-negative".into());
        }
        for i in 0..self.a() {
            crate::generate::gen_cov(&self.cov_setting, self.t, i)?;
        }
        self.hypothesis.build(self.a(), self.t)?;
        Ok(())
    }
}
