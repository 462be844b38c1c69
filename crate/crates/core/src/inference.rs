//! Estimators, the Wald-type and ANOVA-type statistics and their asymptotic tests.
//!
//! With group means `Ȳ` stacked into one vector and
//! `Σ̂ = N·⊕ V̂_i/n_i` (unbiased `V̂_i`):
//!
//! * WTS: `Q_N = N·Ȳ'H'(HΣ̂H')⁺HȲ`, compared with χ²_f, `f = rank(H)`;
//! * ATS: `F_N = N·Ȳ'TȲ / tr(TΣ̂)`, compared with F(ν̂, ∞) where
//!   `ν̂ = tr(TΣ̂)² / tr((TΣ̂)²)`.
//!
//! Internally both work with an orthonormal basis `R` of the row space of `H`
//! (`R'R = T`). When `RΣ̂R'` is nonsingular,
//! `H'(HΣ̂H')⁺H = R'(RΣ̂R')⁻¹R`, so the WTS reduces to a small Cholesky solve;
//! otherwise the pseudoinverse of `HΣ̂H'` is formed as written.

use std::fmt;
use std::str::FromStr;

use crate::design::HypothesisMatrix;
use crate::distributions::{chi2_sf, RngStream, WeightedChiSq};
use crate::linalg::{direct_sum, moore_penrose, psd_sqrt, sym_eigen, symmetry_tol, Matrix};
use crate::{Error, Result, Scalar};

/// Observations of `a` independent groups; group `i` is an `n_i × t_i`
/// matrix with one row per subject.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T> {
    groups: Vec<Matrix<T>>,
}

/// Group sizes and occasion counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Layout {
    pub sizes: Vec<usize>,
    pub dims: Vec<usize>,
}

impl Layout {
    pub fn n_total(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }
}

impl<T: Scalar> Dataset<T> {
    pub fn new(groups: Vec<Matrix<T>>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::InsufficientData("no groups".into()));
        }
        for (i, g) in groups.iter().enumerate() {
            if g.rows() < 2 {
                return Err(Error::InsufficientData(format!(
                    "group {} has {} subject(s); at least 2 are needed",
                    i + 1,
                    g.rows()
                )));
            }
            if g.as_slice().iter().any(|x| !x.is_finite()) {
                return Err(Error::Argument(format!("group {} has non-finite values", i + 1)));
            }
        }
        Ok(Dataset { groups })
    }

    /// Rebuilds groups from values in the order of [`Dataset::pooled`].
    pub(crate) fn from_flat(layout: &Layout, values: &[T]) -> Self {
        let mut off = 0;
        let groups = layout
            .sizes
            .iter()
            .zip(&layout.dims)
            .map(|(&n, &t)| {
                let g = Matrix::from_parts(n, t, values[off..off + n * t].to_vec());
                off += n * t;
                g
            })
            .collect();
        Dataset { groups }
    }

    pub(crate) fn layout(&self) -> Layout {
        Layout { sizes: self.sizes(), dims: self.dims() }
    }

    pub fn groups(&self) -> &[Matrix<T>] {
        &self.groups
    }

    pub fn group(&self, i: usize) -> &Matrix<T> {
        &self.groups[i]
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    /// `n_i` per group.
    pub fn sizes(&self) -> Vec<usize> {
        self.groups.iter().map(Matrix::rows).collect()
    }

    /// `t_i` per group.
    pub fn dims(&self) -> Vec<usize> {
        self.groups.iter().map(Matrix::cols).collect()
    }

    /// `N = Σ n_i`.
    pub fn n_total(&self) -> usize {
        self.groups.iter().map(Matrix::rows).sum()
    }

    /// Length of the stacked mean vector, `Σ t_i`.
    pub fn total_dim(&self) -> usize {
        self.groups.iter().map(Matrix::cols).sum()
    }

    /// `Ñ = Σ n_i·t_i`.
    pub fn n_values(&self) -> usize {
        self.groups.iter().map(|g| g.rows() * g.cols()).sum()
    }

    /// All values, group by group, subject by subject, occasion fastest.
    pub fn pooled(&self) -> Vec<T> {
        self.groups.iter().flat_map(|g| g.as_slice().iter().copied()).collect()
    }

    /// Every observation multiplied by `c`.
    pub fn scaled(&self, c: T) -> Self {
        Dataset { groups: self.groups.iter().map(|g| g.scale(c)).collect() }
    }
}

/// Mean vector, unbiased covariance and size of one group.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupSummary<T> {
    pub mean: Vec<T>,
    pub cov: Matrix<T>,
    pub n: usize,
}

impl<T: Scalar> GroupSummary<T> {
    /// Checked constructor for externally supplied summaries: `n ≥ 2`,
    /// dimensions agree, `cov` symmetric and PSD within tolerance.
    pub fn new(mean: Vec<T>, cov: Matrix<T>, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InsufficientData(format!("group size {n}; at least 2 are needed")));
        }
        if !cov.is_square() || cov.rows() != mean.len() {
            return Err(Error::Dimension(format!(
                "mean of length {} with a {}x{} covariance",
                mean.len(),
                cov.rows(),
                cov.cols()
            )));
        }
        if mean.iter().any(|x| !x.is_finite()) {
            return Err(Error::Argument("non-finite mean".into()));
        }
        let eig = sym_eigen(&cov)?;
        let tol = symmetry_tol(cov.frobenius_norm());
        if let Some(&min) = eig.values.last() {
            if min < -tol {
                return Err(Error::NotPsd(min.as_f64()));
            }
        }
        Ok(GroupSummary { mean, cov: cov.symmetrize(), n })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// `Σ̂ = N·⊕ V̂_i/n_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledCovariance<T> {
    pub sigma_hat: Matrix<T>,
    pub n_total: usize,
}

/// Test procedure tags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    WtsAsym,
    AtsF,
    Wtps,
    NpbsWts,
    NpbsAts,
    PbsWts,
    PbsAts,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::WtsAsym,
        Method::AtsF,
        Method::Wtps,
        Method::NpbsWts,
        Method::NpbsAts,
        Method::PbsWts,
        Method::PbsAts,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::WtsAsym => "WTS-asym",
            Method::AtsF => "ATS-F",
            Method::Wtps => "WTPS",
            Method::NpbsWts => "NPBS-WTS",
            Method::NpbsAts => "NPBS-ATS",
            Method::PbsWts => "PBS-WTS",
            Method::PbsAts => "PBS-ATS",
        }
    }

    pub fn is_resampling(self) -> bool {
        !matches!(self, Method::WtsAsym | Method::AtsF)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_uppercase();
        let m = match key.as_str() {
            "WTS-ASYM" | "WTS" => Method::WtsAsym,
            "ATS-F" | "ATS" => Method::AtsF,
            "WTPS" => Method::Wtps,
            "NPBS-WTS" | "NPBS" => Method::NpbsWts,
            "NPBS-ATS" => Method::NpbsAts,
            "PBS-WTS" | "PBS" => Method::PbsWts,
            "PBS-ATS" => Method::PbsAts,
            _ => return Err(Error::Argument(format!("unknown method '{s}'"))),
        };
        Ok(m)
    }
}

/// Reference distribution of a test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Reference {
    ChiSquare { df: f64 },
    FInf { df: f64 },
    Empirical { b: usize },
}

impl fmt::Display for Reference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reference::ChiSquare { df } => write!(f, "chi2({df})"),
            Reference::FInf { df } => write!(f, "F({df:.4},inf)"),
            Reference::Empirical { b } => write!(f, "empirical(b={b})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestOutcome<T> {
    pub method: Method,
    pub statistic: T,
    pub reference: Reference,
    pub p_value: f64,
    /// `f` for the WTS, `ν̂` for the ATS.
    pub df: f64,
}

impl<T> TestOutcome<T> {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value <= alpha
    }
}

/// Scratch space for [`Kernel`]: per-group means and covariances plus the
/// reduced quantities `v = RȲ` and `M = RΣ̂R'`.
#[derive(Clone, Debug)]
pub(crate) struct Work<T> {
    means: Vec<T>,
    covs: Vec<Vec<T>>,
    v: Vec<T>,
    m: Vec<T>,
    tmp: Vec<T>,
    l: Vec<T>,
}

/// Precomputed pieces of `H` for a fixed layout; evaluates the statistics
/// from raw values or from summaries.
#[derive(Clone, Debug)]
pub(crate) struct Kernel<T> {
    layout: Layout,
    col_off: Vec<usize>,
    weights: Vec<T>,
    r_blocks: Vec<Matrix<T>>,
    h: Matrix<T>,
    f: usize,
    n_total: T,
    degenerate_rel: T,
}

/// `Q̃_N`, `tr(TΣ̂)` and `tr((TΣ̂)²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct AtsParts<T> {
    pub q_tilde: T,
    pub trace: T,
    pub trace_sq: T,
}

impl<T: Scalar> AtsParts<T> {
    pub fn f_stat(&self) -> T {
        self.q_tilde / self.trace
    }

    pub fn nu(&self) -> T {
        self.trace * self.trace / self.trace_sq
    }
}

impl<T: Scalar> Kernel<T> {
    pub fn new(layout: Layout, h: &HypothesisMatrix<T>) -> Result<Self> {
        let total = layout.total_dim();
        if h.dim() != total {
            return Err(Error::Design(format!(
                "hypothesis matrix has {} columns but the data have {} occasions in total",
                h.dim(),
                total
            )));
        }
        let n = layout.n_total();
        let mut col_off = Vec::with_capacity(layout.dims.len());
        let mut c = 0;
        for &ti in &layout.dims {
            col_off.push(c);
            c += ti;
        }
        let r = h.row_basis();
        let f = r.rows();
        let r_blocks = col_off
            .iter()
            .zip(&layout.dims)
            .map(|(&c0, &ti)| r.block(0, f, c0, c0 + ti))
            .collect();
        let weights = layout.sizes.iter().map(|&ni| T::from_count(n) / T::from_count(ni)).collect();
        let k = T::lit(1e4) * T::epsilon();
        Ok(Kernel {
            layout,
            col_off,
            weights,
            r_blocks,
            h: h.h().clone(),
            f,
            n_total: T::from_count(n),
            degenerate_rel: k * k,
        })
    }

    pub fn df(&self) -> usize {
        self.f
    }

    pub fn work(&self) -> Work<T> {
        let tmax = self.layout.dims.iter().copied().max().unwrap_or(0);
        Work {
            means: vec![T::zero(); self.layout.total_dim()],
            covs: self.layout.dims.iter().map(|&t| vec![T::zero(); t * t]).collect(),
            v: vec![T::zero(); self.f],
            m: vec![T::zero(); self.f * self.f],
            tmp: vec![T::zero(); self.f * tmax],
            l: vec![T::zero(); self.f * self.f],
        }
    }

    /// Means and unbiased covariances from values in pooled order.
    pub fn load_values(&self, values: &[T], w: &mut Work<T>) {
        fill_moments(&self.layout, values, &mut w.means, &mut w.covs);
    }

    pub fn load_summaries(&self, summaries: &[GroupSummary<T>], w: &mut Work<T>) {
        for (g, s) in summaries.iter().enumerate() {
            let c0 = self.col_off[g];
            w.means[c0..c0 + s.dim()].copy_from_slice(&s.mean);
            w.covs[g].copy_from_slice(s.cov.as_slice());
        }
    }

    /// Fills `v = RȲ` and `M = RΣ̂R'`; fails when `tr(M)` is negligible
    /// relative to the magnitude of the data.
    fn reduce(&self, w: &mut Work<T>) -> Result<()> {
        let f = self.f;
        w.v.iter_mut().for_each(|x| *x = T::zero());
        w.m.iter_mut().for_each(|x| *x = T::zero());
        let mut scale2 = T::zero();
        let mut wmax = T::zero();
        for g in 0..self.layout.dims.len() {
            let t = self.layout.dims[g];
            let c0 = self.col_off[g];
            let rb = &self.r_blocks[g];
            let mean = &w.means[c0..c0 + t];
            let cov = &w.covs[g];
            for &x in mean {
                scale2 = scale2.max(x * x);
            }
            for j in 0..t {
                scale2 = scale2.max(cov[j * t + j].abs());
            }
            wmax = wmax.max(self.weights[g]);
            for i in 0..f {
                let ri = rb.row(i);
                let mut acc = T::zero();
                for j in 0..t {
                    acc = acc + ri[j] * mean[j];
                }
                w.v[i] = w.v[i] + acc;
                // tmp = R_g V_g, f × t.
                for k in 0..t {
                    let mut s = T::zero();
                    for j in 0..t {
                        s = s + ri[j] * cov[j * t + k];
                    }
                    w.tmp[i * t + k] = s;
                }
            }
            let wg = self.weights[g];
            for i in 0..f {
                for j in i..f {
                    let rj = rb.row(j);
                    let mut s = T::zero();
                    for k in 0..t {
                        s = s + w.tmp[i * t + k] * rj[k];
                    }
                    w.m[i * f + j] = w.m[i * f + j] + wg * s;
                }
            }
        }
        for i in 0..f {
            for j in 0..i {
                w.m[i * f + j] = w.m[j * f + i];
            }
        }
        let trace: T = (0..f).map(|i| w.m[i * f + i]).sum();
        let thr = self.degenerate_rel * T::from_count(f) * wmax * scale2;
        if !(trace > thr) || !trace.is_finite() {
            return Err(Error::DegenerateCovariance(format!(
                "tr(HΣ̂H') is numerically zero ({})",
                trace.as_f64()
            )));
        }
        Ok(())
    }

    /// `Q_N` from loaded moments.
    pub fn wts(&self, w: &mut Work<T>) -> Result<T> {
        self.reduce(w)?;
        let f = self.f;
        if chol_in_place(&w.m, &mut w.l, f) {
            // Forward substitution L z = v, Q = N‖z‖².
            let mut q = T::zero();
            for i in 0..f {
                let mut s = w.v[i];
                for k in 0..i {
                    s = s - w.l[i * f + k] * w.tmp[k];
                }
                let z = s / w.l[i * f + i];
                w.tmp[i] = z;
                q = q + z * z;
            }
            Ok(self.n_total * q)
        } else {
            Ok(self.wts_pinv(w))
        }
    }

    fn wts_pinv(&self, w: &Work<T>) -> T {
        let blocks: Vec<Matrix<T>> = self
            .layout
            .dims
            .iter()
            .enumerate()
            .map(|(g, &t)| Matrix::from_parts(t, t, w.covs[g].clone()).scale(self.weights[g]))
            .collect();
        let sigma = direct_sum(&blocks).expect("at least one group");
        let hs = self.h.matmul(&sigma).matmul(&self.h.transpose()).symmetrize();
        let hy = self.h.matvec(&w.means);
        let q = moore_penrose(&hs).quad_form(&hy);
        (self.n_total * q).max(T::zero())
    }

    /// `Q̃_N`, `tr(TΣ̂)`, `tr((TΣ̂)²)` from loaded moments.
    pub fn ats(&self, w: &mut Work<T>) -> Result<AtsParts<T>> {
        self.reduce(w)?;
        let q_tilde = self.n_total * w.v.iter().map(|&x| x * x).sum::<T>();
        let f = self.f;
        let trace = (0..f).map(|i| w.m[i * f + i]).sum();
        let trace_sq = w.m.iter().map(|&x| x * x).sum();
        Ok(AtsParts { q_tilde, trace, trace_sq })
    }
}

/// Per-group means (stacked) and unbiased covariances (row-major `t_i × t_i`)
/// from values in pooled order.
pub(crate) fn fill_moments<T: Scalar>(layout: &Layout, values: &[T], means: &mut [T], covs: &mut [Vec<T>]) {
    let (mut c0, mut v0) = (0, 0);
    for g in 0..layout.sizes.len() {
        let n = layout.sizes[g];
        let t = layout.dims[g];
        let y = &values[v0..v0 + n * t];
        let mean = &mut means[c0..c0 + t];
        mean.iter_mut().for_each(|m| *m = T::zero());
        for row in y.chunks_exact(t) {
            for (m, &x) in mean.iter_mut().zip(row) {
                *m = *m + x;
            }
        }
        let nf = T::from_count(n);
        mean.iter_mut().for_each(|m| *m = *m / nf);
        let cov = &mut covs[g];
        cov.iter_mut().for_each(|c| *c = T::zero());
        for row in y.chunks_exact(t) {
            for j in 0..t {
                let dj = row[j] - mean[j];
                for k in j..t {
                    cov[j * t + k] = cov[j * t + k] + dj * (row[k] - mean[k]);
                }
            }
        }
        let denom = T::from_count(n - 1);
        for j in 0..t {
            for k in j..t {
                let c = cov[j * t + k] / denom;
                cov[j * t + k] = c;
                cov[k * t + j] = c;
            }
        }
        c0 += t;
        v0 += n * t;
    }
}

/// Cholesky of the packed `f × f` matrix `a` into `l`; `false` when a pivot
/// drops below `f·ε·max(diag)`.
fn chol_in_place<T: Scalar>(a: &[T], l: &mut [T], f: usize) -> bool {
    let dmax = (0..f).fold(T::zero(), |m, i| m.max(a[i * f + i]));
    let floor = T::from_count(f) * T::epsilon() * dmax;
    for j in 0..f {
        let mut d = a[j * f + j];
        for k in 0..j {
            d = d - l[j * f + k] * l[j * f + k];
        }
        if !(d > floor) {
            return false;
        }
        let ljj = d.sqrt();
        l[j * f + j] = ljj;
        for i in (j + 1)..f {
            let mut s = a[i * f + j];
            for k in 0..j {
                s = s - l[i * f + k] * l[j * f + k];
            }
            l[i * f + j] = s / ljj;
        }
    }
    true
}

/// Per-group mean and unbiased covariance (divisor `n_i − 1`).
pub fn summarize<T: Scalar>(data: &Dataset<T>) -> Result<Vec<GroupSummary<T>>> {
    data.groups
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let (n, t) = g.shape();
            if n < 2 {
                return Err(Error::InsufficientData(format!("group {} has fewer than 2 subjects", i + 1)));
            }
            let nf = T::from_count(n);
            let mean: Vec<T> = (0..t).map(|j| (0..n).map(|k| g[(k, j)]).sum::<T>() / nf).collect();
            let denom = T::from_count(n - 1);
            let cov = Matrix::from_fn(t, t, |j, l| {
                (0..n).map(|k| (g[(k, j)] - mean[j]) * (g[(k, l)] - mean[l])).sum::<T>() / denom
            });
            Ok(GroupSummary { mean, cov, n })
        })
        .collect()
}

/// Block-diagonal `Σ̂` with blocks `(N/n_i)·V̂_i`.
pub fn scaled_cov<T: Scalar>(summaries: &[GroupSummary<T>]) -> Result<ScaledCovariance<T>> {
    if summaries.is_empty() {
        return Err(Error::InsufficientData("no groups".into()));
    }
    let n: usize = summaries.iter().map(|s| s.n).sum();
    let blocks: Vec<Matrix<T>> =
        summaries.iter().map(|s| s.cov.scale(T::from_count(n) / T::from_count(s.n))).collect();
    Ok(ScaledCovariance { sigma_hat: direct_sum(&blocks)?, n_total: n })
}

fn summaries_layout<T: Scalar>(summaries: &[GroupSummary<T>]) -> Result<Layout> {
    if summaries.is_empty() {
        return Err(Error::InsufficientData("no groups".into()));
    }
    Ok(Layout { sizes: summaries.iter().map(|s| s.n).collect(), dims: summaries.iter().map(|s| s.dim()).collect() })
}

fn wts_outcome<T: Scalar>(q: T, f: usize) -> Result<TestOutcome<T>> {
    let df = f as f64;
    Ok(TestOutcome {
        method: Method::WtsAsym,
        statistic: q,
        reference: Reference::ChiSquare { df },
        p_value: chi2_sf(q.as_f64(), df)?,
        df,
    })
}

fn ats_outcome<T: Scalar>(parts: AtsParts<T>) -> Result<TestOutcome<T>> {
    if !(parts.trace_sq > T::zero()) {
        return Err(Error::DegenerateCovariance("tr((TΣ̂)²) is zero".into()));
    }
    let f = parts.f_stat();
    let nu = parts.nu().as_f64();
    Ok(TestOutcome {
        method: Method::AtsF,
        statistic: f,
        reference: Reference::FInf { df: nu },
        p_value: chi2_sf(nu * f.as_f64(), nu)?,
        df: nu,
    })
}

/// Wald-type test with the χ²_{rank(H)} reference.
pub fn wts<T: Scalar>(data: &Dataset<T>, h: &HypothesisMatrix<T>) -> Result<TestOutcome<T>> {
    let k = Kernel::new(data.layout(), h)?;
    let mut w = k.work();
    k.load_values(&data.pooled(), &mut w);
    wts_outcome(k.wts(&mut w)?, k.df())
}

/// WTS from group means, covariances and sizes.
pub fn wts_from_summaries<T: Scalar>(summaries: &[GroupSummary<T>], h: &HypothesisMatrix<T>) -> Result<TestOutcome<T>> {
    let k = Kernel::new(summaries_layout(summaries)?, h)?;
    let mut w = k.work();
    k.load_summaries(summaries, &mut w);
    wts_outcome(k.wts(&mut w)?, k.df())
}

/// `Q̃_N = N·Ȳ'TȲ`.
pub fn ats_tilde<T: Scalar>(data: &Dataset<T>, h: &HypothesisMatrix<T>) -> Result<T> {
    if h.dim() != data.total_dim() {
        return Err(Error::Design(format!(
            "hypothesis matrix has {} columns but the data have {} occasions in total",
            h.dim(),
            data.total_dim()
        )));
    }
    let means: Vec<T> = summarize(data)?.into_iter().flat_map(|s| s.mean).collect();
    Ok(T::from_count(data.n_total()) * h.projector().quad_form(&means).max(T::zero()))
}

/// Box's `ν̂ = tr(TΣ̂)² / tr((TΣ̂)²)`.
pub fn box_df<T: Scalar>(sc: &ScaledCovariance<T>, t_proj: &Matrix<T>) -> Result<T> {
    if t_proj.shape() != sc.sigma_hat.shape() {
        return Err(Error::Dimension(format!(
            "projector {:?} and Σ̂ {:?} differ in shape",
            t_proj.shape(),
            sc.sigma_hat.shape()
        )));
    }
    let ts = t_proj.matmul(&sc.sigma_hat);
    let tr = ts.trace();
    let tr2 = ts.matmul(&ts).trace();
    if !(tr2 > T::zero()) {
        return Err(Error::DegenerateCovariance("tr((TΣ̂)²) is zero".into()));
    }
    Ok(tr * tr / tr2)
}

/// ANOVA-type test: `F_N` against F(ν̂, ∞).
pub fn ats_f_test<T: Scalar>(data: &Dataset<T>, h: &HypothesisMatrix<T>) -> Result<TestOutcome<T>> {
    let k = Kernel::new(data.layout(), h)?;
    let mut w = k.work();
    k.load_values(&data.pooled(), &mut w);
    ats_outcome(k.ats(&mut w)?)
}

/// ATS from group means, covariances and sizes.
pub fn ats_from_summaries<T: Scalar>(summaries: &[GroupSummary<T>], h: &HypothesisMatrix<T>) -> Result<TestOutcome<T>> {
    let k = Kernel::new(summaries_layout(summaries)?, h)?;
    let mut w = k.work();
    k.load_summaries(summaries, &mut w);
    ats_outcome(k.ats(&mut w)?)
}

/// The weighted-χ² law `Σ λ_s χ²₁` with `λ_s` the eigenvalues of `TΣ̂`
/// (taken from the symmetric `Σ̂^{1/2}TΣ̂^{1/2}`).
pub fn ats_null_law<T: Scalar>(sc: &ScaledCovariance<T>, t_proj: &Matrix<T>) -> Result<WeightedChiSq> {
    if t_proj.shape() != sc.sigma_hat.shape() {
        return Err(Error::Dimension("projector and Σ̂ differ in shape".into()));
    }
    let root = psd_sqrt(&sc.sigma_hat)?;
    let sym = root.matmul(t_proj).matmul(&root).symmetrize();
    let eig = sym_eigen(&sym)?;
    let weights: Vec<f64> = eig.values.iter().map(|l| l.as_f64().max(0.0)).collect();
    WeightedChiSq::central(weights)
}

/// `m` draws from the limiting null law of `Q̃_N` (see [`ats_null_law`]).
pub fn ats_eigen_null_oracle<T: Scalar>(
    sc: &ScaledCovariance<T>,
    t_proj: &Matrix<T>,
    m: usize,
    rng: RngStream,
) -> Result<Vec<f64>> {
    Ok(ats_null_law(sc, t_proj)?.sample(m, &mut rng.rng()))
}
