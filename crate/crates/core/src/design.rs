//! Hypothesis matrices for factorial repeated-measures layouts.
//!
//! Column order: the whole-plot factor (group) varies slowest and the last
//! sub-plot factor (usually time) fastest. For a group × B × time layout the
//! column of cell `(i, j, s)` is `(i·b + j)·t + s`.
//!
//! Effects are built as Kronecker products with `P_l` in the slot of every
//! factor the effect involves and the averaging row `(1/l)·1_l'` elsewhere.

use std::fmt;
use std::str::FromStr;

use crate::linalg::{centering, kronecker, mean_row, moore_penrose, pinv_cutoff, svd, Matrix};
use crate::{Error, Result, Scalar};

/// Effect tags, as accepted on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Effect {
    A,
    B,
    T,
    AB,
    AT,
    BT,
    ABT,
    G,
    GT,
    Custom,
}

impl Effect {
    pub const THREE_FACTOR: [Effect; 7] =
        [Effect::A, Effect::B, Effect::T, Effect::AB, Effect::AT, Effect::BT, Effect::ABT];
    pub const TWO_FACTOR: [Effect; 3] = [Effect::G, Effect::T, Effect::GT];

    pub fn as_str(self) -> &'static str {
        match self {
            Effect::A => "A",
            Effect::B => "B",
            Effect::T => "T",
            Effect::AB => "AB",
            Effect::AT => "AT",
            Effect::BT => "BT",
            Effect::ABT => "ABT",
            Effect::G => "G",
            Effect::GT => "GT",
            Effect::Custom => "custom",
        }
    }
}

impl fmt::Display for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Effect {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let e = match s.trim().to_ascii_uppercase().as_str() {
            "A" => Effect::A,
            "B" => Effect::B,
            "T" => Effect::T,
            "AB" => Effect::AB,
            "AT" => Effect::AT,
            "BT" => Effect::BT,
            "ABT" => Effect::ABT,
            "G" => Effect::G,
            "GT" => Effect::GT,
            "CUSTOM" => Effect::Custom,
            other => return Err(Error::Design(format!("unknown effect '{other}'"))),
        };
        Ok(e)
    }
}

/// Whole-plot levels `a` and the sub-plot factor levels (their product is `t`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorialLayout {
    whole_plot_levels: usize,
    sub_plot_levels: Vec<usize>,
}

impl FactorialLayout {
    pub fn new(whole_plot_levels: usize, sub_plot_levels: Vec<usize>) -> Result<Self> {
        if whole_plot_levels == 0 || sub_plot_levels.is_empty() || sub_plot_levels.contains(&0) {
            return Err(Error::Design(format!(
                "level counts must be positive: a = {whole_plot_levels}, sub-plot = {sub_plot_levels:?}"
            )));
        }
        Ok(FactorialLayout { whole_plot_levels, sub_plot_levels })
    }

    pub fn whole_plot_levels(&self) -> usize {
        self.whole_plot_levels
    }

    pub fn sub_plot_levels(&self) -> &[usize] {
        &self.sub_plot_levels
    }

    /// Occasions per subject.
    pub fn t(&self) -> usize {
        self.sub_plot_levels.iter().product()
    }

    /// Length of the stacked mean vector, `a·t`.
    pub fn dim(&self) -> usize {
        self.whole_plot_levels * self.t()
    }

    /// Levels of all factors, whole-plot first.
    pub fn factors(&self) -> Vec<usize> {
        std::iter::once(self.whole_plot_levels).chain(self.sub_plot_levels.iter().copied()).collect()
    }

    /// `⊗_k (P_{l_k} if active[k] else (1/l_k)·1')`.
    pub fn hypothesis<T: Scalar>(&self, active: &[bool], label: Effect) -> Result<HypothesisMatrix<T>> {
        let factors = self.factors();
        if active.len() != factors.len() {
            return Err(Error::Design(format!(
                "{} activity flags for {} factors",
                active.len(),
                factors.len()
            )));
        }
        if !active.iter().any(|&a| a) {
            return Err(Error::Design("effect involves no factor".into()));
        }
        let mut h = Matrix::<T>::identity(1);
        for (&l, &on) in factors.iter().zip(active) {
            let part = if on {
                if l < 2 {
                    return Err(Error::Design(format!("effect {label} needs at least 2 levels, got {l}")));
                }
                centering(l)?
            } else {
                mean_row(l)?
            };
            h = kronecker(&h, &part);
        }
        HypothesisMatrix::build(h, label)
    }
}

/// Contrast matrix `H` with its projector `T = H'(HH')⁺H`.
#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisMatrix<T> {
    h: Matrix<T>,
    label: Effect,
    projector: Matrix<T>,
    row_basis: Matrix<T>,
}

impl<T: Scalar> HypothesisMatrix<T> {
    fn build(h: Matrix<T>, label: Effect) -> Result<Self> {
        let dec = svd(&h);
        let cut = pinv_cutoff(h.rows(), h.cols(), dec.singular_values.first().copied().unwrap_or(T::zero()));
        let rank = dec.singular_values.iter().filter(|&&s| s > cut && s > T::zero()).count();
        if rank == 0 {
            return Err(Error::Rank);
        }
        let d = h.cols();
        let row_basis = Matrix::from_fn(rank, d, |i, j| dec.v[(j, i)]);
        let hh = h.matmul(&h.transpose());
        let projector = h.transpose().matmul(&moore_penrose(&hh)).matmul(&h).symmetrize();
        Ok(HypothesisMatrix { h, label, projector, row_basis })
    }

    pub fn h(&self) -> &Matrix<T> {
        &self.h
    }

    pub fn label(&self) -> Effect {
        self.label
    }

    pub fn projector(&self) -> &Matrix<T> {
        &self.projector
    }

    /// `rank(H)`, the WTS degrees of freedom.
    pub fn rank(&self) -> usize {
        self.row_basis.rows()
    }

    /// Orthonormal basis of the row space of `H` (`rank × dim`); `R'R = T`.
    pub fn row_basis(&self) -> &Matrix<T> {
        &self.row_basis
    }

    /// Number of columns, i.e. the length of the stacked mean vector.
    pub fn dim(&self) -> usize {
        self.h.cols()
    }
}

/// `T = H'(HH')⁺H`.
pub fn projector<T: Scalar>(h: &HypothesisMatrix<T>) -> Matrix<T> {
    h.projector().clone()
}

/// Two-factor effects `G`, `T`, `GT` for `a` groups and `t` occasions.
pub fn hyp_two_factor<T: Scalar>(effect: Effect, a: usize, t: usize) -> Result<HypothesisMatrix<T>> {
    let active = match effect {
        Effect::G => [true, false],
        Effect::T => [false, true],
        Effect::GT => [true, true],
        other => return Err(Error::Design(format!("effect {other} is not a two-factor effect"))),
    };
    FactorialLayout::new(a, vec![t])?.hypothesis(&active, effect)
}

/// Three-factor effects for `a` groups, a `b`-level sub-plot factor and `t` occasions.
pub fn hyp_three_factor<T: Scalar>(effect: Effect, a: usize, b: usize, t: usize) -> Result<HypothesisMatrix<T>> {
    let active = match effect {
        Effect::A => [true, false, false],
        Effect::B => [false, true, false],
        Effect::T => [false, false, true],
        Effect::AB => [true, true, false],
        Effect::AT => [true, false, true],
        Effect::BT => [false, true, true],
        Effect::ABT => [true, true, true],
        other => return Err(Error::Design(format!("effect {other} is not a three-factor effect"))),
    };
    FactorialLayout::new(a, vec![b, t])?.hypothesis(&active, effect)
}

/// Validates a user-supplied contrast matrix with `total_dim` columns.
pub fn custom_hypothesis<T: Scalar>(h: Matrix<T>, total_dim: usize) -> Result<HypothesisMatrix<T>> {
    if h.cols() != total_dim {
        return Err(Error::Design(format!("hypothesis has {} columns, data has {total_dim}", h.cols())));
    }
    let tol = T::lit(1e-8);
    for i in 0..h.rows() {
        let row = h.row(i);
        let s: T = row.iter().copied().sum();
        let scale = row.iter().fold(T::one(), |m, x| m.max(x.abs()));
        if s.abs() > tol * scale {
            return Err(Error::Contrast(format!("row {i} sums to {s}, not zero")));
        }
    }
    HypothesisMatrix::build(h, Effect::Custom)
}
