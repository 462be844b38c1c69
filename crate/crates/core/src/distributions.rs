//! Reference distributions and random generation.
//!
//! The χ² functions take real-valued degrees of freedom so they serve both the
//! WTS (`f = rank(H)`) and Box's approximation (non-integer `ν̂`).

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::linalg::{psd_sqrt, Matrix};
use crate::{Error, Result, Scalar};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn lgamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - lgamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + k as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

fn gamma_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..10_000 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * f64::EPSILON {
            break;
        }
    }
    (sum.ln() - x + a * x.ln() - lgamma(a)).exp()
}

fn gamma_cf(a: f64, x: f64) -> f64 {
    // Modified Lentz for the continued fraction of Q(a, x).
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < f64::EPSILON {
            break;
        }
    }
    (h.ln() - x + a * x.ln() - lgamma(a)).exp()
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        1.0 - gamma_cf(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 − P(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x < a + 1.0 {
        1.0 - gamma_series(a, x)
    } else {
        gamma_cf(a, x)
    }
}

fn check_df(f: f64) -> Result<()> {
    if f > 0.0 && f.is_finite() {
        Ok(())
    } else {
        Err(Error::Argument(format!("degrees of freedom must be positive, got {f}")))
    }
}

/// CDF of χ²_f at `x`.
pub fn chi2_cdf(x: f64, f: f64) -> Result<f64> {
    check_df(f)?;
    Ok(gamma_p(f / 2.0, x / 2.0))
}

/// Survival function `1 − chi2_cdf(x, f)`, accurate in the upper tail.
pub fn chi2_sf(x: f64, f: f64) -> Result<f64> {
    check_df(f)?;
    if x.is_infinite() && x > 0.0 {
        return Ok(0.0);
    }
    Ok(gamma_q(f / 2.0, x / 2.0))
}

fn chi2_pdf(x: f64, f: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let h = f / 2.0;
    ((h - 1.0) * x.ln() - x / 2.0 - h * std::f64::consts::LN_2 - lgamma(h)).exp()
}

/// Solves `cdf(x) = p` (or `sf(x) = p` when `upper`) by Newton steps kept
/// inside a bisection bracket.
fn chi2_invert(p: f64, f: f64, upper: bool) -> Result<f64> {
    check_df(f)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Argument(format!("probability must lie in (0, 1), got {p}")));
    }
    // g is increasing in x.
    let g = |x: f64| {
        if upper {
            p - gamma_q(f / 2.0, x / 2.0)
        } else {
            gamma_p(f / 2.0, x / 2.0) - p
        }
    };
    let mut lo = 0.0;
    let mut hi = f.max(1.0);
    while g(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Argument("χ² quantile out of range".into()));
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..500 {
        let gx = g(x);
        if gx == 0.0 {
            return Ok(x);
        }
        if gx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = chi2_pdf(x, f);
        let newton = x - gx / d;
        let next = if d > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs() || hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// `p`-quantile of χ²_f.
pub fn chi2_quantile(p: f64, f: f64) -> Result<f64> {
    chi2_invert(p, f, false)
}

/// Upper quantile: `x` with `chi2_sf(x, f) = q`. Keeps full precision for tiny `q`.
pub fn chi2_quantile_upper(q: f64, f: f64) -> Result<f64> {
    chi2_invert(q, f, true)
}

/// `p`-quantile of F(ν, ∞), i.e. of χ²_ν/ν.
pub fn f_inf_quantile(p: f64, nu: f64) -> Result<f64> {
    Ok(chi2_quantile(p, nu)? / nu)
}

/// Seed and stream id for a ChaCha8 generator.
///
/// Substreams obtained with [`RngStream::derive`] depend only on the parent
/// and the index, so work can be split across threads reproducibly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream { seed, stream: 0 }
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        RngStream { seed, stream }
    }

    /// Child stream number `index`.
    pub fn derive(&self, index: u64) -> Self {
        RngStream { seed: self.seed, stream: splitmix64(self.stream ^ splitmix64(index)) }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Error laws of the data generator, all standardized to mean 0 and variance 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ErrorDistribution {
    Normal,
    /// Rate-1 exponential, `E − 1`.
    Exponential,
    /// `exp(Z)` with standard normal `Z`, centered by `e^{1/2}` and scaled by `√(e(e−1))`.
    LogNormal,
}

impl ErrorDistribution {
    pub fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            ErrorDistribution::Normal => rng.sample(StandardNormal),
            ErrorDistribution::Exponential => {
                let e: f64 = rng.sample(Exp1);
                e - 1.0
            }
            ErrorDistribution::LogNormal => {
                let z: f64 = rng.sample(StandardNormal);
                let e = std::f64::consts::E;
                (z.exp() - e.sqrt()) / (e * (e - 1.0)).sqrt()
            }
        }
    }
}

impl fmt::Display for ErrorDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorDistribution::Normal => "normal",
            ErrorDistribution::Exponential => "exponential",
            ErrorDistribution::LogNormal => "lognormal",
        })
    }
}

impl FromStr for ErrorDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "normal" => Ok(ErrorDistribution::Normal),
            "exponential" | "exp" => Ok(ErrorDistribution::Exponential),
            "lognormal" | "log-normal" => Ok(ErrorDistribution::LogNormal),
            other => Err(Error::Argument(format!("unknown distribution '{other}'"))),
        }
    }
}

/// `n` i.i.d. standardized draws.
pub fn sample_standardized<T: Scalar, R: Rng + ?Sized>(dist: ErrorDistribution, n: usize, rng: &mut R) -> Vec<T> {
    (0..n).map(|_| T::lit(dist.draw(rng))).collect()
}

/// Multivariate normal with a precomputed symmetric square root of the covariance.
#[derive(Clone, Debug)]
pub struct MvNormal<T> {
    mean: Vec<T>,
    root: Matrix<T>,
}

impl<T: Scalar> MvNormal<T> {
    pub fn new(mean: Vec<T>, cov: &Matrix<T>) -> Result<Self> {
        if !cov.is_square() || cov.rows() != mean.len() {
            return Err(Error::Dimension(format!(
                "mean of length {} with a {}x{} covariance",
                mean.len(),
                cov.rows(),
                cov.cols()
            )));
        }
        Ok(MvNormal { mean, root: psd_sqrt(cov)? })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Writes one draw into `out`, using `z` as scratch space.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, z: &mut [T], out: &mut [T]) {
        let t = self.dim();
        for zi in z.iter_mut().take(t) {
            *zi = T::lit(rng.sample(StandardNormal));
        }
        for (i, o) in out.iter_mut().enumerate().take(t) {
            let row = self.root.row(i);
            *o = self.mean[i] + row.iter().zip(z.iter()).map(|(&a, &b)| a * b).sum::<T>();
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        let mut z = vec![T::zero(); self.dim()];
        let mut out = vec![T::zero(); self.dim()];
        self.sample_into(rng, &mut z, &mut out);
        out
    }
}

/// One draw of `mean + psd_sqrt(cov)·z`.
pub fn sample_mvnormal<T: Scalar, R: Rng + ?Sized>(mean: &[T], cov: &Matrix<T>, rng: &mut R) -> Result<Vec<T>> {
    Ok(MvNormal::new(mean.to_vec(), cov)?.sample(rng))
}

/// Uniform random permutation of `0..n` (Fisher–Yates).
pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Law of `Σ λ_s X_s` with independent χ²₁ terms.
///
/// A nonzero noncentrality `δ` is carried entirely by the first term, which
/// is then drawn as `(Z + √δ)²`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedChiSq {
    weights: Vec<f64>,
    noncentrality: f64,
}

impl WeightedChiSq {
    pub fn new(weights: Vec<f64>, noncentrality: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Argument("weighted χ² needs at least one weight".into()));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Argument("weights must be finite".into()));
        }
        if !(noncentrality >= 0.0 && noncentrality.is_finite()) {
            return Err(Error::Argument(format!("noncentrality must be ≥ 0, got {noncentrality}")));
        }
        Ok(WeightedChiSq { weights, noncentrality })
    }

    pub fn central(weights: Vec<f64>) -> Result<Self> {
        Self::new(weights, 0.0)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn noncentrality(&self) -> f64 {
        self.noncentrality
    }

    pub fn mean(&self) -> f64 {
        self.weights.iter().sum::<f64>() + self.weights[0] * self.noncentrality
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let shift = self.noncentrality.sqrt();
        self.weights
            .iter()
            .enumerate()
            .map(|(s, &w)| {
                let z: f64 = rng.sample(StandardNormal);
                let z = if s == 0 { z + shift } else { z };
                w * z * z
            })
            .sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Vec<f64> {
        (0..m).map(|_| self.draw(rng)).collect()
    }
}
