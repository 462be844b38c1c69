//! Resampling tests built on the WTS (and, for the bootstraps, the ATS).
//!
//! * WTPS: all `Ñ` observations are pooled, permuted and poured back into the
//!   original layout; means and covariances are recomputed each time.
//! * NPBS: `Ñ` values drawn with replacement from the pooled observations.
//! * PBS: `n_i` vectors per group drawn from `N(0, V̂_i)`.
//!
//! The p-value is `(1 + #{resampled ≥ observed}) / (b + 1)`. A resample whose
//! covariance is degenerate is stored as `+∞` and counted in
//! [`ResampleResult::degenerate`].
//!
//! Resamples are generated in chunks of [`CHUNK_SIZE`]; chunk `c` draws from
//! `plan.seed.derive(c)`, so results do not depend on the number of threads.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::design::HypothesisMatrix;
use crate::distributions::{MvNormal, RngStream};
use crate::inference::{fill_moments, summarize, Dataset, Kernel, Layout, Method, Reference, TestOutcome};
use crate::linalg::{direct_sum, Matrix};
use crate::{Error, Result, Scalar};

pub const DEFAULT_RESAMPLES: usize = 1000;
pub const CHUNK_SIZE: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    Permutation,
    Npbs,
    Pbs,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Permutation => "permutation",
            Scheme::Npbs => "npbs",
            Scheme::Pbs => "pbs",
        })
    }
}

/// Which statistic is resampled: `Q_N` or `F_N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StatisticKind {
    Wts,
    Ats,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResamplePlan {
    pub scheme: Scheme,
    pub b: usize,
    pub seed: RngStream,
    /// Spread chunks over the rayon pool. Does not change the result.
    pub parallel: bool,
}

impl ResamplePlan {
    pub fn new(scheme: Scheme, b: usize, seed: RngStream) -> Result<Self> {
        if b == 0 {
            return Err(Error::Argument("number of resamples must be at least 1".into()));
        }
        Ok(ResamplePlan { scheme, b, seed, parallel: true })
    }

    pub fn permutation(b: usize, seed: RngStream) -> Result<Self> {
        Self::new(Scheme::Permutation, b, seed)
    }

    pub fn npbs(b: usize, seed: RngStream) -> Result<Self> {
        Self::new(Scheme::Npbs, b, seed)
    }

    pub fn pbs(b: usize, seed: RngStream) -> Result<Self> {
        Self::new(Scheme::Pbs, b, seed)
    }

    pub fn sequential(mut self) -> Self {
        self.parallel = false;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResampleResult<T> {
    pub observed: T,
    /// One entry per resample, `+∞` for degenerate ones.
    pub resampled: Vec<T>,
    pub p_value: f64,
    pub scheme: Scheme,
    pub statistic: StatisticKind,
    /// `f = rank(H)` for the WTS, the observed `ν̂` for the ATS.
    pub df: f64,
    pub degenerate: usize,
}

/// `(1 + #{resampled ≥ observed}) / (b + 1)`.
pub fn resampling_p_value<T: Scalar>(observed: T, resampled: &[T]) -> f64 {
    let count = resampled.iter().filter(|&&x| x >= observed).count();
    (1 + count) as f64 / (resampled.len() + 1) as f64
}

impl<T: Scalar> ResampleResult<T> {
    pub fn b(&self) -> usize {
        self.resampled.len()
    }

    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value <= alpha
    }

    /// Empirical `(1 − α)`-quantile of the resampled statistics (order statistic).
    pub fn critical_value(&self, alpha: f64) -> T {
        let mut s = self.resampled.clone();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let k = ((1.0 - alpha) * s.len() as f64).ceil() as usize;
        s[k.clamp(1, s.len()) - 1]
    }

    pub fn method(&self) -> Method {
        match (self.scheme, self.statistic) {
            (Scheme::Permutation, _) => Method::Wtps,
            (Scheme::Npbs, StatisticKind::Wts) => Method::NpbsWts,
            (Scheme::Npbs, StatisticKind::Ats) => Method::NpbsAts,
            (Scheme::Pbs, StatisticKind::Wts) => Method::PbsWts,
            (Scheme::Pbs, StatisticKind::Ats) => Method::PbsAts,
        }
    }

    pub fn outcome(&self) -> TestOutcome<T> {
        TestOutcome {
            method: self.method(),
            statistic: self.observed,
            reference: Reference::Empirical { b: self.b() },
            p_value: self.p_value,
            df: self.df,
        }
    }
}

fn evaluate<T: Scalar>(k: &Kernel<T>, kind: StatisticKind, w: &mut crate::inference::Work<T>) -> Result<T> {
    match kind {
        StatisticKind::Wts => k.wts(w),
        StatisticKind::Ats => k.ats(w).map(|p| p.f_stat()),
    }
}

/// Shared driver: `fill` writes one resampled data set (pooled order) into the buffer.
fn run<T, F>(
    data: &Dataset<T>,
    h: &HypothesisMatrix<T>,
    plan: &ResamplePlan,
    kind: StatisticKind,
    fill: F,
) -> Result<ResampleResult<T>>
where
    T: Scalar,
    F: Fn(&mut ChaCha8Rng, &mut [T]) + Sync,
{
    if plan.b == 0 {
        return Err(Error::Argument("number of resamples must be at least 1".into()));
    }
    let kernel = Kernel::new(data.layout(), h)?;
    let mut w = kernel.work();
    kernel.load_values(&data.pooled(), &mut w);
    let (observed, df) = match kind {
        StatisticKind::Wts => (kernel.wts(&mut w)?, kernel.df() as f64),
        StatisticKind::Ats => {
            let parts = kernel.ats(&mut w)?;
            (parts.f_stat(), parts.nu().as_f64())
        }
    };

    let n_values = data.n_values();
    let n_chunks = plan.b.div_ceil(CHUNK_SIZE);
    let chunk = |c: usize| -> (Vec<T>, usize) {
        let len = CHUNK_SIZE.min(plan.b - c * CHUNK_SIZE);
        let mut rng = plan.seed.derive(c as u64).rng();
        let mut w = kernel.work();
        let mut buf = vec![T::zero(); n_values];
        let mut out = Vec::with_capacity(len);
        let mut degenerate = 0;
        for _ in 0..len {
            fill(&mut rng, &mut buf);
            kernel.load_values(&buf, &mut w);
            match evaluate(&kernel, kind, &mut w) {
                Ok(v) => out.push(v),
                Err(_) => {
                    degenerate += 1;
                    out.push(T::infinity());
                }
            }
        }
        (out, degenerate)
    };
    let parts: Vec<(Vec<T>, usize)> = if plan.parallel {
        (0..n_chunks).into_par_iter().map(chunk).collect()
    } else {
        (0..n_chunks).map(chunk).collect()
    };
    let degenerate = parts.iter().map(|p| p.1).sum();
    let resampled: Vec<T> = parts.into_iter().flat_map(|p| p.0).collect();
    let p_value = resampling_p_value(observed, &resampled);
    Ok(ResampleResult { observed, resampled, p_value, scheme: plan.scheme, statistic: kind, df, degenerate })
}

fn expect_scheme(plan: &ResamplePlan, scheme: Scheme) -> Result<()> {
    if plan.scheme != scheme {
        return Err(Error::Argument(format!("plan is for {} resampling, expected {scheme}", plan.scheme)));
    }
    Ok(())
}

/// Pools all values, permutes them uniformly and reshapes into the original layout.
pub fn permute_pooled<T: Scalar, R: Rng + ?Sized>(data: &Dataset<T>, rng: &mut R) -> Dataset<T> {
    let mut values = data.pooled();
    values.shuffle(rng);
    Dataset::from_flat(&data.layout(), &values)
}

/// Studentized permutation test of the WTS.
pub fn wtps<T: Scalar>(data: &Dataset<T>, h: &HypothesisMatrix<T>, plan: &ResamplePlan) -> Result<ResampleResult<T>> {
    expect_scheme(plan, Scheme::Permutation)?;
    let pooled = data.pooled();
    run(data, h, plan, StatisticKind::Wts, |rng, buf| {
        buf.copy_from_slice(&pooled);
        buf.shuffle(rng);
    })
}

/// Nonparametric bootstrap from the pooled observations.
pub fn npbs<T: Scalar>(
    data: &Dataset<T>,
    h: &HypothesisMatrix<T>,
    plan: &ResamplePlan,
    statistic: StatisticKind,
) -> Result<ResampleResult<T>> {
    expect_scheme(plan, Scheme::Npbs)?;
    let pooled = data.pooled();
    let n = pooled.len();
    run(data, h, plan, statistic, |rng, buf| {
        for x in buf.iter_mut() {
            *x = pooled[rng.random_range(0..n)];
        }
    })
}

/// Parametric bootstrap: `Y★_ik ~ N(0, V̂_i)`.
pub fn pbs<T: Scalar>(
    data: &Dataset<T>,
    h: &HypothesisMatrix<T>,
    plan: &ResamplePlan,
    statistic: StatisticKind,
) -> Result<ResampleResult<T>> {
    expect_scheme(plan, Scheme::Pbs)?;
    let laws = summarize(data)?
        .into_iter()
        .map(|s| MvNormal::new(vec![T::zero(); s.dim()], &s.cov))
        .collect::<Result<Vec<_>>>()?;
    let layout = data.layout();
    let tmax = layout.dims.iter().copied().max().unwrap_or(0);
    run(data, h, plan, statistic, |rng, buf| {
        let mut z = vec![T::zero(); tmax];
        let mut off = 0;
        for (law, &n) in laws.iter().zip(&layout.sizes) {
            let t = law.dim();
            for _ in 0..n {
                law.sample_into(rng, &mut z, &mut buf[off..off + t]);
                off += t;
            }
        }
    })
}

/// Plug-in quantities of the permutation limit: `σ̂²` is the variance of the
/// pooled values (divisor `Ñ`), `Γ̂ = ⊕ (N/n_i)·I_{t_i} − (N/Ñ)·J`.
#[derive(Clone, Debug, PartialEq)]
pub struct PermutationLimitCheck<T> {
    pub sigma2_hat: T,
    pub gamma: Matrix<T>,
}

/// Empirical moments over `m` permutations next to their limits.
#[derive(Clone, Debug, PartialEq)]
pub struct PermutationLimitReport<T> {
    pub check: PermutationLimitCheck<T>,
    /// Covariance of `√N(Ȳ^π − Ȳ··1)` over the permutations.
    pub mean_cov: Matrix<T>,
    /// `σ̂²·Γ̂`.
    pub expected_mean_cov: Matrix<T>,
    /// Average of `Σ̂^π`.
    pub avg_sigma_pi: Matrix<T>,
    /// `σ̂²·⊕ (N/n_i)·I_{t_i}`.
    pub expected_sigma_pi: Matrix<T>,
    pub m: usize,
}

pub fn permutation_limit_diagnostics<T: Scalar>(
    data: &Dataset<T>,
    m: usize,
    rng: RngStream,
) -> Result<PermutationLimitReport<T>> {
    if m < 100 {
        return Err(Error::Argument(format!("at least 100 permutations are needed, got {m}")));
    }
    let layout: Layout = data.layout();
    let mut values = data.pooled();
    let nt = T::from_count(values.len());
    let n = T::from_count(layout.n_total());
    let grand = values.iter().copied().sum::<T>() / nt;
    let sigma2 = values.iter().map(|&x| (x - grand) * (x - grand)).sum::<T>() / nt;
    let d = layout.total_dim();

    let diag_blocks: Vec<Matrix<T>> = layout
        .sizes
        .iter()
        .zip(&layout.dims)
        .map(|(&ni, &ti)| Matrix::identity(ti).scale(n / T::from_count(ni)))
        .collect();
    let block_id = direct_sum(&diag_blocks)?;
    let gamma = &block_id - &Matrix::ones(d, d).scale(n / nt);

    let mut means = vec![T::zero(); d];
    let mut covs: Vec<Vec<T>> = layout.dims.iter().map(|&t| vec![T::zero(); t * t]).collect();
    let mut z_sum = vec![T::zero(); d];
    let mut zz = Matrix::<T>::zeros(d, d);
    let mut sigma_sum = Matrix::<T>::zeros(d, d);
    let mut r = rng.rng();
    let root_n = n.sqrt();
    for _ in 0..m {
        values.shuffle(&mut r);
        fill_moments(&layout, &values, &mut means, &mut covs);
        let z: Vec<T> = means.iter().map(|&y| root_n * (y - grand)).collect();
        for i in 0..d {
            z_sum[i] = z_sum[i] + z[i];
            for j in 0..d {
                zz[(i, j)] = zz[(i, j)] + z[i] * z[j];
            }
        }
        let mut c0 = 0;
        for (g, (&ni, &ti)) in layout.sizes.iter().zip(&layout.dims).enumerate() {
            let wgt = n / T::from_count(ni);
            for j in 0..ti {
                for k in 0..ti {
                    sigma_sum[(c0 + j, c0 + k)] = sigma_sum[(c0 + j, c0 + k)] + wgt * covs[g][j * ti + k];
                }
            }
            c0 += ti;
        }
    }
    let mf = T::from_count(m);
    let zbar: Vec<T> = z_sum.iter().map(|&s| s / mf).collect();
    let mean_cov = Matrix::from_fn(d, d, |i, j| zz[(i, j)] / mf - zbar[i] * zbar[j]);
    let avg_sigma_pi = sigma_sum.scale(T::one() / mf);
    Ok(PermutationLimitReport {
        expected_mean_cov: gamma.scale(sigma2),
        expected_sigma_pi: block_id.scale(sigma2),
        check: PermutationLimitCheck { sigma2_hat: sigma2, gamma },
        mean_cov,
        avg_sigma_pi,
        m,
    })
}
