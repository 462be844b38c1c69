use super::Matrix;
use crate::{Error, Result, Scalar};

const MAX_SWEEPS: usize = 100;

/// Symmetric eigendecomposition `A = V Λ V'`, eigenvalues sorted descending.
#[derive(Clone, Debug)]
pub struct SymEigen<T> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
}

impl<T: Scalar> SymEigen<T> {
    /// `V f(Λ) V'`.
    pub fn reconstruct_with(&self, f: impl Fn(T) -> T) -> Matrix<T> {
        let n = self.values.len();
        let v = &self.vectors;
        let fv: Vec<T> = self.values.iter().map(|&l| f(l)).collect();
        Matrix::from_fn(n, n, |i, j| (0..n).map(|k| v[(i, k)] * fv[k] * v[(j, k)]).sum())
    }

    pub fn reconstruct(&self) -> Matrix<T> {
        self.reconstruct_with(|l| l)
    }
}

/// Thin singular value decomposition `A = U diag(σ) V'` with `σ` descending.
#[derive(Clone, Debug)]
pub struct Svd<T> {
    pub u: Matrix<T>,
    pub singular_values: Vec<T>,
    pub v: Matrix<T>,
}

/// Symmetry tolerance `atol = c·(1 + ‖A‖_F)`, `c = 1e-8` in double precision.
pub fn symmetry_tol<T: Scalar>(norm: T) -> T {
    let c = T::lit(1e-8).max(T::epsilon() * T::lit(64.0));
    c * (T::one() + norm)
}

/// Singular values below this are treated as zero: `max(rows, cols)·ε·σ_max`.
pub fn pinv_cutoff<T: Scalar>(rows: usize, cols: usize, sigma_max: T) -> T {
    T::from_count(rows.max(cols)) * T::epsilon() * sigma_max
}

/// Cyclic Jacobi on a symmetric matrix (no symmetry check).
fn jacobi_eigen<T: Scalar>(a: &Matrix<T>) -> SymEigen<T> {
    let n = a.rows();
    let mut m = a.clone();
    let mut v = Matrix::<T>::identity(n);
    let norm = m.frobenius_norm();
    let two = T::lit(2.0);
    if norm > T::zero() {
        for _ in 0..MAX_SWEEPS {
            let mut off = T::zero();
            for p in 0..n {
                for q in (p + 1)..n {
                    off = off + m[(p, q)] * m[(p, q)];
                }
            }
            if off.sqrt() <= T::epsilon() * norm * T::lit(0.01) {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = m[(p, q)];
                    if apq == T::zero() {
                        continue;
                    }
                    let theta = (m[(q, q)] - m[(p, p)]) / (two * apq);
                    let t = theta.signum() / (theta.abs() + theta.hypot(T::one()));
                    let c = T::one() / t.hypot(T::one());
                    let s = t * c;
                    for k in 0..n {
                        let mkp = m[(k, p)];
                        let mkq = m[(k, q)];
                        m[(k, p)] = c * mkp - s * mkq;
                        m[(k, q)] = s * mkp + c * mkq;
                    }
                    for k in 0..n {
                        let mpk = m[(p, k)];
                        let mqk = m[(q, k)];
                        m[(p, k)] = c * mpk - s * mqk;
                        m[(q, k)] = s * mpk + c * mqk;
                    }
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].partial_cmp(&m[(i, i)]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    SymEigen { values, vectors }
}

/// Eigendecomposition of a symmetric matrix. The input is symmetrized as
/// `(A + A')/2` after the check `‖A − A'‖_F ≤ atol`.
pub fn sym_eigen<T: Scalar>(a: &Matrix<T>) -> Result<SymEigen<T>> {
    if !a.is_square() {
        return Err(Error::Argument(format!("eigendecomposition of a {}x{} matrix", a.rows(), a.cols())));
    }
    let tol = symmetry_tol(a.frobenius_norm());
    let asym = a.asymmetry();
    if asym > tol {
        return Err(Error::Argument(format!("matrix is not symmetric (‖A−A'‖_F = {:e})", asym.as_f64())));
    }
    Ok(jacobi_eigen(&a.symmetrize()))
}

/// Symmetric square root `S` with `S·S = A`; eigenvalues in `[−atol, 0)` are clamped.
pub fn psd_sqrt<T: Scalar>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let eig = sym_eigen(a)?;
    let tol = symmetry_tol(a.frobenius_norm());
    if let Some(&min) = eig.values.last() {
        if min < -tol {
            return Err(Error::NotPsd(min.as_f64()));
        }
    }
    Ok(eig.reconstruct_with(|l| l.max(T::zero()).sqrt()).symmetrize())
}

/// One-sided (Hestenes) Jacobi SVD for `rows >= cols`.
fn hestenes<T: Scalar>(a: &Matrix<T>) -> Svd<T> {
    let (m, n) = a.shape();
    debug_assert!(m >= n);
    let mut u = a.clone();
    let mut v = Matrix::<T>::identity(n);
    let two = T::lit(2.0);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), T::zero());
                for k in 0..m {
                    let up = u[(k, p)];
                    let uq = u[(k, q)];
                    alpha = alpha + up * up;
                    beta = beta + uq * uq;
                    gamma = gamma + up * uq;
                }
                if gamma == T::zero() || gamma.abs() <= T::epsilon() * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (two * gamma);
                let t = zeta.signum() / (zeta.abs() + zeta.hypot(T::one()));
                let c = T::one() / t.hypot(T::one());
                let s = c * t;
                for k in 0..m {
                    let up = u[(k, p)];
                    let uq = u[(k, q)];
                    u[(k, p)] = c * up - s * uq;
                    u[(k, q)] = s * up + c * uq;
                }
                for k in 0..n {
                    let vp = v[(k, p)];
                    let vq = v[(k, q)];
                    v[(k, p)] = c * vp - s * vq;
                    v[(k, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma: Vec<T> = (0..n).map(|j| (0..m).map(|k| u[(k, j)] * u[(k, j)]).sum::<T>().sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap_or(std::cmp::Ordering::Equal));
    let singular_values: Vec<T> = order.iter().map(|&j| sigma[j]).collect();
    let u = Matrix::from_fn(m, n, |i, j| {
        let s = sigma[order[j]];
        if s > T::zero() {
            u[(i, order[j])] / s
        } else {
            T::zero()
        }
    });
    let v = Matrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Svd { u, singular_values, v }
}

/// Thin SVD; `u` is `rows × k`, `v` is `cols × k` with `k = min(rows, cols)`.
pub fn svd<T: Scalar>(a: &Matrix<T>) -> Svd<T> {
    if a.rows() >= a.cols() {
        hestenes(a)
    } else {
        let Svd { u, singular_values, v } = hestenes(&a.transpose());
        Svd { u: v, singular_values, v: u }
    }
}

/// Moore–Penrose inverse via SVD; the zero matrix maps to the zero matrix.
pub fn moore_penrose<T: Scalar>(a: &Matrix<T>) -> Matrix<T> {
    let (m, n) = a.shape();
    let Svd { u, singular_values, v } = svd(a);
    let cut = pinv_cutoff(m, n, singular_values.first().copied().unwrap_or(T::zero()));
    let inv: Vec<T> = singular_values
        .iter()
        .map(|&s| if s > cut && s > T::zero() { T::one() / s } else { T::zero() })
        .collect();
    let k = inv.len();
    Matrix::from_fn(n, m, |i, j| (0..k).map(|l| v[(i, l)] * inv[l] * u[(j, l)]).sum())
}

/// Pseudoinverse of a symmetric matrix through its eigendecomposition,
/// with the same relative cutoff as [`moore_penrose`].
pub fn sym_pinv<T: Scalar>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let eig = sym_eigen(a)?;
    let smax = eig.values.iter().fold(T::zero(), |m, &l| m.max(l.abs()));
    let cut = pinv_cutoff(a.rows(), a.cols(), smax);
    Ok(eig
        .reconstruct_with(|l| if l.abs() > cut && l != T::zero() { T::one() / l } else { T::zero() })
        .symmetrize())
}

/// Numerical rank with the pseudoinverse cutoff.
pub fn rank<T: Scalar>(a: &Matrix<T>) -> usize {
    let s = svd(a).singular_values;
    let cut = pinv_cutoff(a.rows(), a.cols(), s.first().copied().unwrap_or(T::zero()));
    s.iter().filter(|&&x| x > cut && x > T::zero()).count()
}

/// Lower Cholesky factor, or `None` when a pivot falls below
/// `n·ε·max(diag)` (numerically not positive definite).
pub fn cholesky<T: Scalar>(a: &Matrix<T>) -> Option<Matrix<T>> {
    if !a.is_square() {
        return None;
    }
    let n = a.rows();
    let dmax = a.diagonal().into_iter().fold(T::zero(), T::max);
    let floor = T::from_count(n) * T::epsilon() * dmax;
    let mut l = Matrix::<T>::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d = d - l[(j, k)] * l[(j, k)];
        }
        if !(d > floor) {
            return None;
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s = s - l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Some(l)
}
