use std::io::Cursor;

use longperm::design::FactorialLayout;
use longperm::distributions::RngStream;
use longperm_cli::{assemble, parse_long_csv, parse_long_csv_from, to_long_table, write_long_csv, CliError};
use longperm_sim::presets::o2_surrogate;

const TOY: &str = "group,subject,time,value
ctrl,1,1,1.0
ctrl,1,2,2.0
ctrl,2,1,1.5
ctrl,2,2,2.5
trt,a,1,0.5
trt,a,2,0.7
trt,b,1,0.1
trt,b,2,0.4
";

fn o2_csv() -> String {
    let data = o2_surrogate(RngStream::new(3)).unwrap();
    let asm = longperm_cli::Assembled {
        dataset: data,
        groups: vec!["placebo".into(), "verum".into()],
        factors: vec![
            longperm_cli::data::Factor { name: "staph".into(), levels: vec!["with".into(), "without".into()] },
            longperm_cli::data::Factor { name: "time".into(), levels: vec!["6".into(), "12".into(), "18".into()] },
        ],
        subjects: (0..2).map(|_| (1..=12).map(|k| k.to_string()).collect()).collect(),
    };
    let mut out = Vec::new();
    write_long_csv(&to_long_table(&asm), &mut out).unwrap();
    String::from_utf8(out).unwrap()
}

#[test]
fn toy_file_assembles() {
    let table = parse_long_csv_from(TOY.as_bytes()).unwrap();
    assert_eq!(table.factors, vec!["time"]);
    assert_eq!(table.records.len(), 8);
    let asm = assemble(&table, None).unwrap();
    assert_eq!(asm.groups, vec!["ctrl", "trt"]);
    assert_eq!(asm.dataset.sizes(), vec![2, 2]);
    assert_eq!(asm.dataset.group(1).row(0), &[0.5, 0.7]);
    assert_eq!(asm.dataset.group(0).row(1), &[1.5, 2.5]);
}

#[test]
fn o2_shape_file_has_144_records() {
    let text = o2_csv();
    let table = parse_long_csv_from(text.as_bytes()).unwrap();
    assert_eq!(table.records.len(), 144);
    assert_eq!(table.factors, vec!["staph", "time"]);
    let layout = FactorialLayout::new(2, vec![2, 3]).unwrap();
    let asm = assemble(&table, Some(&layout)).unwrap();
    assert_eq!(asm.dataset.sizes(), vec![12, 12]);
    assert_eq!(asm.dataset.dims(), vec![6, 6]);
    // Numeric levels sort by value, not as strings.
    assert_eq!(asm.factors[1].levels, vec!["6", "12", "18"]);
    assert_eq!(asm.subjects[0][..3], ["1".to_string(), "2".into(), "3".into()]);
}

#[test]
fn round_trip_is_identity() {
    let text = o2_csv();
    let first = assemble(&parse_long_csv_from(text.as_bytes()).unwrap(), None).unwrap();
    let mut out = Vec::new();
    write_long_csv(&to_long_table(&first), &mut out).unwrap();
    let second = assemble(&parse_long_csv_from(Cursor::new(out)).unwrap(), None).unwrap();
    assert_eq!(first, second);
}

#[test]
fn row_order_does_not_matter() {
    let text = o2_csv();
    let mut lines: Vec<&str> = text.lines().collect();
    let header = lines.remove(0);
    // Deterministic shuffle: reverse, then interleave halves.
    lines.reverse();
    let (a, b) = lines.split_at(lines.len() / 2);
    let mixed: Vec<&str> = a.iter().zip(b).flat_map(|(x, y)| [*y, *x]).collect();
    let shuffled = format!("{header}\n{}\n", mixed.join("\n"));
    let x = assemble(&parse_long_csv_from(text.as_bytes()).unwrap(), None).unwrap();
    let y = assemble(&parse_long_csv_from(shuffled.as_bytes()).unwrap(), None).unwrap();
    assert_eq!(x, y);
}

#[test]
fn empty_file_is_a_schema_error() {
    assert!(matches!(parse_long_csv_from("".as_bytes()), Err(CliError::Schema(_))));
    assert!(matches!(parse_long_csv_from("group,subject,time,value\n".as_bytes()), Err(CliError::Schema(_))));
}

#[test]
fn missing_columns() {
    let e = parse_long_csv_from("group,time,value\na,1,2\n".as_bytes()).unwrap_err();
    assert!(matches!(&e, CliError::Schema(m) if m.contains("subject")), "{e}");
    let e = parse_long_csv_from("group,subject,value\na,1,2\n".as_bytes()).unwrap_err();
    assert!(matches!(e, CliError::Schema(_)));
}

#[test]
fn non_numeric_value_names_row() {
    let bad = TOY.replace("trt,a,2,0.7", "trt,a,2,abc");
    match parse_long_csv_from(bad.as_bytes()) {
        Err(CliError::Parse { row, message }) => {
            assert_eq!(row, 7);
            assert!(message.contains("abc"));
        }
        other => panic!("{other:?}"),
    }
    let nan = TOY.replace("0.7", "NaN");
    assert!(matches!(parse_long_csv_from(nan.as_bytes()), Err(CliError::Parse { row: 7, .. })));
    let short = TOY.replace("trt,a,2,0.7", "trt,a,2");
    assert!(matches!(parse_long_csv_from(short.as_bytes()), Err(CliError::Parse { .. })));
}

#[test]
fn duplicates_are_rejected() {
    let dup = format!("{TOY}trt,b,2,9.0\n");
    match parse_long_csv_from(dup.as_bytes()) {
        Err(CliError::Duplicate { row, message }) => {
            assert_eq!(row, 10);
            assert!(message.contains("row 9"), "{message}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn missing_cell_names_subject_and_cell() {
    let text = o2_csv();
    let kept: Vec<&str> = text.lines().filter(|l| !l.starts_with("verum,7,without,12,")).collect();
    assert_eq!(kept.len(), 144);
    let table = parse_long_csv_from(kept.join("\n").as_bytes()).unwrap();
    match assemble(&table, None) {
        Err(CliError::Completeness(m)) => {
            assert!(m.contains("'7'") && m.contains("verum") && m.contains("staph=without") && m.contains("time=12"), "{m}")
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn layout_mismatch_is_a_level_error() {
    let table = parse_long_csv_from(TOY.as_bytes()).unwrap();
    let layout = FactorialLayout::new(2, vec![3]).unwrap();
    assert!(matches!(assemble(&table, Some(&layout)), Err(CliError::Level(_))));
    let layout = FactorialLayout::new(3, vec![2]).unwrap();
    assert!(matches!(assemble(&table, Some(&layout)), Err(CliError::Level(_))));
}

#[test]
fn single_subject_group_is_rejected() {
    let text = "group,subject,time,value\na,1,1,1\na,1,2,2\nb,1,1,1\nb,1,2,3\nb,2,1,2\nb,2,2,2\n";
    let table = parse_long_csv_from(text.as_bytes()).unwrap();
    assert!(matches!(assemble(&table, None), Err(CliError::Core(_))));
}

#[test]
fn missing_file_is_io() {
    let e = parse_long_csv(std::path::Path::new("/nonexistent/data.csv")).unwrap_err();
    assert_eq!(e.exit_code(), longperm_cli::exit::IO);
}
