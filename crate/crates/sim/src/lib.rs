//! Monte Carlo studies for the `longperm` tests: type-I error rates,
//! quantile distances (KQS), power curves and large-sample curves.
//!
//! Every replicate draws from its own derived random stream, so a report
//! depends only on the configuration and seed, not on thread scheduling.

pub mod config;
pub mod error;
pub mod generate;
pub mod presets;
pub mod quantile;
pub mod study;

pub use config::{CovSetting, HypothesisSpec, KqsPooling, ScenarioConfig};
pub use error::{SimError, SimResult};
pub use generate::{gen_cov, gen_dataset, Generator};
pub use study::{
    run_kqs, run_large_sample, run_power, run_rejection_rates, run_type1, Curve, CurvePoint, KqsReport,
    MethodRate, QuantileRow, SimulationReport,
};
