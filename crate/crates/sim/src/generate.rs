//! Data generator: `Y_ik = μ_i + B_ik·1_t + V_i^{1/2}·ε_ik` with
//! `B_ik ~ N(0, σ_i²)` and standardized i.i.d. components of `ε_ik`.

use longperm::distributions::{ErrorDistribution, RngStream};
use longperm::inference::Dataset;
use longperm::linalg::{psd_sqrt, Matrix};

use crate::config::{CovSetting, ScenarioConfig, DEFAULT_RHO};
use crate::error::{SimError, SimResult};

/// `V_i` for group `group_index` (0-based).
pub fn gen_cov(setting: &CovSetting, t: usize, group_index: usize) -> SimResult<Matrix<f64>> {
    match setting {
        CovSetting::S1 => Ok(Matrix::identity(t)),
        CovSetting::S2 => {
            let d: Vec<f64> = match t {
                4 => (1..=4).map(|s| s as f64).collect(),
                8 => (1..=8).map(|s| (s as f64).sqrt()).collect(),
                _ => return Err(SimError::Config(format!("setting S2 is defined for t = 4 or 8, not {t}"))),
            };
            Ok(Matrix::diag(&d))
        }
        CovSetting::S3 { rho } => {
            let rho = rho.as_deref().unwrap_or(&DEFAULT_RHO);
            let r = *rho.get(group_index).ok_or_else(|| {
                SimError::Config(format!(
                    "setting S3 has {} correlation(s) but group {} was requested; give rho explicitly",
                    rho.len(),
                    group_index + 1
                ))
            })?;
            if !(r.abs() < 1.0) {
                return Err(SimError::Config(format!("rho = {r} is not in (-1, 1)")));
            }
            Ok(Matrix::from_fn(t, t, |l, j| r.powi((l as i32 - j as i32).abs())))
        }
        CovSetting::Explicit(ms) => {
            let m = ms.get(group_index).ok_or_else(|| {
                SimError::Config(format!("{} explicit covariance(s) for group {}", ms.len(), group_index + 1))
            })?;
            if m.shape() != (t, t) {
                return Err(SimError::Config(format!(
                    "explicit covariance {} is {}x{}, expected {t}x{t}",
                    group_index + 1,
                    m.rows(),
                    m.cols()
                )));
            }
            Ok(m.clone())
        }
    }
}

/// Precomputed generator for one scenario.
#[derive(Clone, Debug)]
pub struct Generator {
    distribution: ErrorDistribution,
    sizes: Vec<usize>,
    t: usize,
    means: Vec<Vec<f64>>,
    roots: Vec<Matrix<f64>>,
    block_sd: Vec<f64>,
}

impl Generator {
    pub fn new(cfg: &ScenarioConfig) -> SimResult<Self> {
        let t = cfg.t;
        let mu = cfg.mean_vector();
        if mu.len() != cfg.dim() {
            return Err(SimError::Config(format!("mu has length {}, expected {}", mu.len(), cfg.dim())));
        }
        let roots = (0..cfg.a())
            .map(|i| Ok(psd_sqrt(&gen_cov(&cfg.cov_setting, t, i)?)?))
            .collect::<SimResult<Vec<_>>>()?;
        Ok(Generator {
            distribution: cfg.distribution,
            sizes: cfg.n_vec.clone(),
            t,
            means: mu.chunks(t).map(<[f64]>::to_vec).collect(),
            roots,
            block_sd: cfg.block_variances().iter().map(|v| v.sqrt()).collect(),
        })
    }

    pub fn sample(&self, stream: RngStream) -> Dataset<f64> {
        let mut rng = stream.rng();
        let t = self.t;
        let mut eps = vec![0.0; t];
        let groups = self
            .sizes
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let root = &self.roots[i];
                let mut data = Vec::with_capacity(n * t);
                for _ in 0..n {
                    for e in eps.iter_mut() {
                        *e = self.distribution.draw(&mut rng);
                    }
                    let b = if self.block_sd[i] > 0.0 {
                        self.block_sd[i] * ErrorDistribution::Normal.draw(&mut rng)
                    } else {
                        0.0
                    };
                    for s in 0..t {
                        let r = root.row(s);
                        let v: f64 = r.iter().zip(&eps).map(|(a, e)| a * e).sum();
                        data.push(self.means[i][s] + b + v);
                    }
                }
                Matrix::from_row_major(n, t, data).expect("finite generated values")
            })
            .collect();
        Dataset::new(groups).expect("group sizes validated")
    }
}

/// One simulated data set.
pub fn gen_dataset(cfg: &ScenarioConfig, stream: RngStream) -> SimResult<Dataset<f64>> {
    Ok(Generator::new(cfg)?.sample(stream))
}
