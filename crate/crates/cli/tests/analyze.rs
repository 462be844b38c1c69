use std::io::Write;
use std::path::PathBuf;

use longperm::design::Effect;
use longperm::distributions::RngStream;
use longperm::inference::Method;
use longperm::linalg::Matrix;
use longperm_cli::data::Factor;
use longperm_cli::{run_analyze, to_long_table, write_long_csv, AnalysisRequest, Assembled, CliError, DataSource, EffectRequest, Source};
use longperm_sim::presets::o2_surrogate;

fn o2_file(dir: &tempfile::TempDir, seed: u64) -> PathBuf {
    let asm = Assembled {
        dataset: o2_surrogate(RngStream::new(seed)).unwrap(),
        groups: vec!["placebo".into(), "verum".into()],
        factors: vec![
            Factor { name: "staph".into(), levels: vec!["with".into(), "without".into()] },
            Factor { name: "time".into(), levels: vec!["6".into(), "12".into(), "18".into()] },
        ],
        subjects: (0..2).map(|_| (1..=12).map(|k| k.to_string()).collect()).collect(),
    };
    let path = dir.path().join("o2.csv");
    write_long_csv(&to_long_table(&asm), std::fs::File::create(&path).unwrap()).unwrap();
    path
}

fn named(effects: &[Effect]) -> Vec<EffectRequest> {
    effects.iter().map(|&e| EffectRequest::Named(e)).collect()
}

#[test]
fn o2_surrogate_data() {
    let dir = tempfile::tempdir().unwrap();
    let path = o2_file(&dir, 1);
    let mut req = AnalysisRequest::new(DataSource::File(path), named(&[Effect::A, Effect::AB]), vec![Method::WtsAsym, Method::Wtps]);
    req.n_resample = 499;
    let t = run_analyze(&req).unwrap();
    assert_eq!(t.rows.len(), 4);
    let a = t.get("A", Method::WtsAsym).unwrap();
    let ab = t.get("AB", Method::WtsAsym).unwrap();
    assert!(a.p_value < 0.01, "A: {}", a.p_value);
    assert!(ab.p_value > 0.05, "AB: {}", ab.p_value);
    assert_eq!(a.source, Source::Data);
    assert_eq!(t.get("A", Method::Wtps).unwrap().b, 499);
}

#[test]
fn o2_example_uses_summaries_and_surrogate() {
    let mut req = AnalysisRequest::new(DataSource::O2Example, named(&[Effect::AB, Effect::BT, Effect::ABT]), vec![Method::WtsAsym, Method::Wtps]);
    req.n_resample = 199;
    let t = run_analyze(&req).unwrap();
    for (e, p) in [("AB", 0.110), ("BT", 0.115), ("ABT", 0.116)] {
        let r = t.get(e, Method::WtsAsym).unwrap();
        assert_eq!(r.source, Source::Summary);
        assert!((r.p_value - p).abs() < 0.01, "{e}: {}", r.p_value);
        assert_eq!(t.get(e, Method::Wtps).unwrap().source, Source::Surrogate);
    }
}

#[test]
fn analysis_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let path = o2_file(&dir, 2);
    let mut req = AnalysisRequest::new(DataSource::File(path), named(&[Effect::T, Effect::BT]), Method::ALL.to_vec());
    req.n_resample = 99;
    req.seed = 17;
    let a = run_analyze(&req).unwrap();
    let b = run_analyze(&req).unwrap();
    assert_eq!(a.rows, b.rows);
    assert_eq!(a.rows.len(), 14);
    req.seed = 18;
    let c = run_analyze(&req).unwrap();
    assert_ne!(a.rows, c.rows);
    // Asymptotic rows do not depend on the seed.
    for m in [Method::WtsAsym, Method::AtsF] {
        assert_eq!(a.get("BT", m), c.get("BT", m));
    }
}

#[test]
fn request_validation() {
    let req = AnalysisRequest::new(DataSource::O2Example, Vec::new(), vec![Method::WtsAsym]);
    let e = run_analyze(&req).unwrap_err();
    assert!(matches!(e, CliError::Usage(_)));
    assert_eq!(e.exit_code(), 2);
    let req = AnalysisRequest::new(DataSource::O2Example, named(&[Effect::A]), Vec::new());
    assert!(matches!(run_analyze(&req), Err(CliError::Usage(_))));
    let mut req = AnalysisRequest::new(DataSource::O2Example, named(&[Effect::A]), vec![Method::Wtps]);
    req.n_resample = 0;
    assert!(matches!(run_analyze(&req), Err(CliError::Usage(_))));
    // Two-factor effects do not apply to a design with two within-subject factors.
    let req = AnalysisRequest::new(DataSource::O2Example, named(&[Effect::GT]), vec![Method::WtsAsym]);
    assert_eq!(run_analyze(&req).unwrap_err().exit_code(), 2);
}

#[test]
fn custom_matrix_matches_named_effect() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("toy.csv");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "group,subject,time,value").unwrap();
    let vals = [[1.0, 2.0, 2.5], [0.5, 1.9, 3.1], [1.2, 2.2, 2.0], [0.3, 0.4, 0.9], [0.8, 0.1, 1.1], [0.2, 0.9, 0.4]];
    for (k, row) in vals.iter().enumerate() {
        let g = if k < 3 { "x" } else { "y" };
        for (s, v) in row.iter().enumerate() {
            writeln!(f, "{g},{k},{},{v}", s + 1).unwrap();
        }
    }
    drop(f);
    let h = longperm::design::hyp_two_factor::<f64>(Effect::GT, 2, 3).unwrap().h().clone();
    let effects = vec![EffectRequest::Named(Effect::GT), EffectRequest::Matrix { label: "mine".into(), matrix: h }];
    let t = run_analyze(&AnalysisRequest::new(DataSource::File(path.clone()), effects, vec![Method::WtsAsym, Method::AtsF])).unwrap();
    for m in [Method::WtsAsym, Method::AtsF] {
        let a = t.get("GT", m).unwrap();
        let b = t.get("mine", m).unwrap();
        assert!((a.statistic - b.statistic).abs() < 1e-10 * a.statistic.abs());
    }
    let bad = Matrix::from_rows(&[&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]]).unwrap();
    let req = AnalysisRequest::new(DataSource::File(path), vec![EffectRequest::Matrix { label: "bad".into(), matrix: bad }], vec![Method::WtsAsym]);
    assert!(matches!(run_analyze(&req), Err(CliError::Core(longperm::Error::Contrast(_)))));
}

#[test]
fn report_csv_carries_seed_and_b() {
    let mut req = AnalysisRequest::new(DataSource::O2Example, named(&[Effect::A]), vec![Method::WtsAsym, Method::PbsWts]);
    req.n_resample = 49;
    req.seed = 99;
    let t = run_analyze(&req).unwrap();
    let mut out = Vec::new();
    t.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().unwrap().clone();
    let seed_col = header.iter().position(|h| h == "seed").unwrap();
    let b_col = header.iter().position(|h| h == "b").unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| &r[seed_col] == "99"));
    assert_eq!(&rows[1][b_col], "49");
    // Full precision in the machine-readable table.
    let p: f64 = rows[0][header.iter().position(|h| h == "p_value").unwrap()].parse().unwrap();
    assert_eq!(p, t.rows[0].p_value);
    assert!(t.render_text().contains("seed 99"));
}
