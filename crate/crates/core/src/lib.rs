//! Inference for general repeated-measures (split-plot) designs with
//! possibly unequal group covariance matrices.
//!
//! The crate provides the Wald-type statistic (WTS) with its χ² reference,
//! the ANOVA-type statistic (ATS) with Box's F(ν̂, ∞) approximation, and
//! resampling versions of the WTS: the studentized permutation test on the
//! pooled observations (WTPS) plus nonparametric and parametric bootstraps.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` aliases below fix the usual double-precision instantiation.
//!
//! ```
//! use longperm::{design, inference, Dataset64, Matrix64};
//!
//! let g1 = Matrix64::from_rows(&[&[1.0, 2.1, 2.9], &[0.8, 2.2, 3.4], &[1.3, 1.7, 3.0]]).unwrap();
//! let g2 = Matrix64::from_rows(&[&[1.1, 1.4, 1.9], &[0.9, 1.6, 2.2], &[1.2, 1.2, 1.7]]).unwrap();
//! let data = Dataset64::new(vec![g1, g2]).unwrap();
//! let h = design::hyp_two_factor(design::Effect::GT, 2, 3).unwrap();
//! let out = inference::wts(&data, &h).unwrap();
//! assert!(out.p_value >= 0.0 && out.p_value <= 1.0);
//! ```

pub mod design;
pub mod distributions;
pub mod error;
pub mod inference;
pub mod linalg;
pub mod resampling;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Matrix64 = linalg::Matrix<f64>;
pub type Matrix32 = linalg::Matrix<f32>;
pub type Dataset64 = inference::Dataset<f64>;
pub type Dataset32 = inference::Dataset<f32>;
pub type HypothesisMatrix64 = design::HypothesisMatrix<f64>;
pub type HypothesisMatrix32 = design::HypothesisMatrix<f32>;
pub type GroupSummary64 = inference::GroupSummary<f64>;
pub type TestOutcome64 = inference::TestOutcome<f64>;
pub type ResampleResult64 = resampling::ResampleResult<f64>;
