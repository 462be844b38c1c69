use longperm::design::Effect;
use longperm::distributions::{ErrorDistribution, RngStream};
use longperm::inference::Method;
use longperm::linalg::Matrix;
use longperm_sim::config::{profile_difference, N1, N3};
use longperm_sim::presets;
use longperm_sim::study::{default_increments, trend};
use longperm_sim::{
    gen_cov, gen_dataset, run_kqs, run_large_sample, run_power, run_rejection_rates, run_type1, CovSetting,
    HypothesisSpec, KqsPooling, ScenarioConfig, SimError,
};

fn small(n: &[usize], t: usize, effect: Effect) -> ScenarioConfig {
    ScenarioConfig::new("small", ErrorDistribution::Normal, CovSetting::S1, n.to_vec(), t, HypothesisSpec::Effect(effect))
        .with_counts(200, 99)
}

#[test]
fn covariance_settings() {
    assert_eq!(gen_cov(&CovSetting::S1, 3, 0).unwrap(), Matrix::identity(3));
    assert_eq!(gen_cov(&CovSetting::S2, 4, 2).unwrap(), Matrix::diag(&[1.0, 2.0, 3.0, 4.0]));
    let d8 = gen_cov(&CovSetting::S2, 8, 0).unwrap();
    assert!((d8[(7, 7)] - 8f64.sqrt()).abs() < 1e-15);
    assert!(gen_cov(&CovSetting::S2, 5, 0).is_err());
    let s3 = gen_cov(&CovSetting::S3 { rho: None }, 4, 1).unwrap();
    assert!((s3[(0, 3)] - 0.125).abs() < 1e-15);
    assert!((s3[(2, 1)] - 0.5).abs() < 1e-15);
    assert!(gen_cov(&CovSetting::S3 { rho: None }, 4, 3).is_err());
    assert!(gen_cov(&CovSetting::S3 { rho: Some(vec![1.0]) }, 4, 0).is_err());
    assert!(gen_cov(&CovSetting::Explicit(vec![Matrix::identity(2)]), 3, 0).is_err());
}

#[test]
fn generator_matches_target_moments() {
    let mut cfg = ScenarioConfig::new(
        "moments",
        ErrorDistribution::Exponential,
        CovSetting::S3 { rho: None },
        vec![20_000, 20_000],
        3,
        HypothesisSpec::Effect(Effect::T),
    );
    cfg.mu = vec![1.0, 2.0, 3.0, -1.0, 0.0, 1.0];
    cfg.block_sd2 = vec![0.0, 2.0];
    let data = gen_dataset(&cfg, RngStream::new(4)).unwrap();
    let summaries = longperm::inference::summarize(&data).unwrap();
    for (i, s) in summaries.iter().enumerate() {
        let mut v = gen_cov(&cfg.cov_setting, 3, i).unwrap();
        for l in 0..3 {
            assert!((s.mean[l] - cfg.mu[3 * i + l]).abs() < 0.05, "{:?}", s.mean);
            for j in 0..3 {
                v[(l, j)] += cfg.block_sd2[i];
                assert!((s.cov[(l, j)] - v[(l, j)]).abs() < 0.1, "group {i}: {:?}", s.cov);
            }
        }
    }
}

#[test]
fn validation_errors() {
    let ok = small(&N3, 4, Effect::T);
    assert!(ok.validate().is_ok());
    let mut c = ok.clone();
    c.n_vec = vec![1, 5];
    assert!(matches!(c.validate(), Err(SimError::Config(_))));
    let mut c = ok.clone();
    c.alpha = 1.0;
    assert!(c.validate().is_err());
    let mut c = ok.clone();
    c.mu = vec![0.0; 5];
    assert!(c.validate().is_err());
    let mut c = ok.clone();
    c.n_resample = 0;
    assert!(c.validate().is_err());
    assert!(ok.clone().with_methods(&[Method::WtsAsym]).with_counts(10, 0).validate().is_ok());
    let mut c = ok.clone();
    c.hypothesis = HypothesisSpec::Matrix(Matrix::identity(4));
    assert!(c.validate().is_err());
    let mut c = ok.clone();
    c.block_sd2 = vec![-1.0, 0.0, 0.0];
    assert!(c.validate().is_err());
}

#[test]
fn type1_rejects_alternative_means() {
    let mut c = small(&N3, 4, Effect::T);
    c.mu = (0..12).map(|k| (k % 4) as f64).collect();
    assert!(matches!(run_type1(&c), Err(SimError::Config(_))));
    // A pure group effect satisfies the time-effect null.
    c.mu = (0..12).map(|k| (k / 4) as f64).collect();
    assert!(run_type1(&c).is_ok());
}

#[test]
fn reports_are_reproducible() {
    let c = small(&[8, 8], 3, Effect::GT).with_counts(60, 49);
    let a = run_type1(&c).unwrap();
    let b = run_type1(&c).unwrap();
    assert_eq!(a.rates, b.rates);
    let d = run_type1(&c.clone().with_seed(2)).unwrap();
    assert_ne!(a.rates, d.rates);
    for r in &a.rates {
        assert_eq!(r.rate, r.rejections as f64 / 60.0);
        assert!((r.se - (r.rate * (1.0 - r.rate) / 60.0).sqrt()).abs() < 1e-15);
        assert_eq!(r.failed, 0);
    }
    assert_eq!(a.rates.len(), 3);
}

#[test]
fn every_method_runs() {
    let c = small(&[10, 12], 3, Effect::T).with_counts(40, 39).with_methods(&Method::ALL);
    let r = run_type1(&c).unwrap();
    assert_eq!(r.rates.len(), Method::ALL.len());
    for m in Method::ALL {
        let rate = r.rate(m).unwrap();
        assert!((0.0..=0.25).contains(&rate), "{m}: {rate}");
    }
}

#[test]
fn permutation_test_is_exact_under_exchangeability() {
    // Equal sizes and a common law: the permutation test is exact at any n.
    let c = ScenarioConfig::new("exch", ErrorDistribution::LogNormal, CovSetting::S1, vec![6, 6], 3, HypothesisSpec::Effect(Effect::GT))
        .with_counts(1500, 99)
        .with_methods(&[Method::Wtps]);
    let r = run_type1(&c).unwrap();
    let rate = r.rate(Method::Wtps).unwrap();
    assert!((rate - 0.05).abs() < 4.0 * (0.05 * 0.95 / 1500.0f64).sqrt(), "{rate}");
}

#[test]
fn power_curve_increases() {
    let c = presets::power_scenario(ErrorDistribution::Normal, 4).unwrap().with_counts(300, 99);
    let curve = run_power(&c, &[0.0, 1.0, 2.5], &trend(4)).unwrap();
    assert_eq!(curve.points.len(), 6);
    for m in [Method::Wtps, Method::AtsF] {
        let s: Vec<f64> = curve.series(m).iter().map(|p| p.rate).collect();
        assert!(s[0] < 0.12 && s[1] > s[0] && s[2] > 0.8, "{m}: {s:?}");
    }
    assert!(run_power(&c, &[1.0], &trend(3)).is_err());
    let three = small(&N3, 4, Effect::T);
    assert!(run_power(&three, &[1.0], &trend(4)).is_err());
}

#[test]
fn trend_and_profile_difference() {
    assert_eq!(trend(4), vec![0.25, 0.5, 0.75, 1.0]);
    let h = profile_difference(3).unwrap();
    assert_eq!(h.shape(), (3, 6));
    // Parallel profiles lie in the null space.
    let mu = [1.0, 2.0, 4.0, 3.0, 4.0, 6.0];
    assert!(h.matvec(&mu).iter().all(|x| x.abs() < 1e-14));
}

#[test]
fn large_sample_curve_shape() {
    let c = presets::large_sample(&N1, 4).with_counts(50, 19);
    let curve = run_large_sample(&c, &[0, 20]).unwrap();
    assert_eq!(curve.points.len(), 4);
    assert_eq!(curve.x_name, "increment");
    assert!(curve.rate(Method::WtsAsym, 20.0).is_some());
    assert_eq!(default_increments().len(), 11);
}

#[test]
fn kqs_reports() {
    let c = small(&[12, 12], 4, Effect::T).with_counts(200, 50).with_methods(&[Method::Wtps]);
    let r = run_kqs(&c).unwrap();
    assert_eq!(r.grid.len(), 91);
    assert_eq!(r.df, 3.0);
    assert_eq!(r.pooling, KqsPooling::Pooled);
    assert!(r.kqs.is_finite() && r.kqs_pi.is_finite() && r.kqs_pi_alt.is_finite());
    let mut avg = c.clone();
    avg.kqs_pooling = KqsPooling::Averaged;
    let r2 = run_kqs(&avg).unwrap();
    assert_eq!(r2.kqs_pi, r.kqs_pi_alt);
    assert_eq!(r2.kqs, r.kqs);
}

#[test]
fn kqs_suite_is_null_and_valid() {
    let suite = presets::kqs_suite();
    assert_eq!(suite.len(), 6);
    for c in &suite {
        c.validate().unwrap();
        assert!(c.mean_vector().iter().all(|&m| m == 0.0));
    }
}

#[test]
fn sequential_and_parallel_agree() {
    let c = small(&[7, 9], 3, Effect::G).with_counts(30, 19);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let a = pool.install(|| run_rejection_rates(&c).unwrap());
    let b = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| run_rejection_rates(&c).unwrap());
    assert_eq!(a.rates, b.rates);
}
