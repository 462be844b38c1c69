//! Long-format CSV input: `group,subject,<factor1>,...,<factorK>,value`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use longperm::design::FactorialLayout;
use longperm::inference::Dataset;
use longperm::linalg::Matrix;

use crate::error::{CliError, CliResult};

/// One observation.
#[derive(Clone, Debug, PartialEq)]
pub struct LongRecord {
    pub group: String,
    pub subject: String,
    /// One level per within-subject factor, in header order.
    pub levels: Vec<String>,
    pub value: f64,
    /// Line number in the source file (1 is the header).
    pub row: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LongTable {
    /// Within-subject factor names in header order.
    pub factors: Vec<String>,
    pub records: Vec<LongRecord>,
}

/// Numeric labels sort by value and before all others; the rest sort as strings.
pub fn level_cmp(a: &str, b: &str) -> Ordering {
    match (a.trim().parse::<f64>(), b.trim().parse::<f64>()) {
        (Ok(x), Ok(y)) => x.total_cmp(&y).then_with(|| a.cmp(b)),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

fn sorted_unique<'a>(labels: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut v: Vec<String> = labels.map(str::to_owned).collect();
    v.sort_by(|a, b| level_cmp(a, b));
    v.dedup();
    v
}

pub fn parse_long_csv(path: &Path) -> CliResult<LongTable> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    parse_long_csv_from(file)
}

pub fn parse_long_csv_from<R: Read>(reader: R) -> CliResult<LongTable> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| CliError::Schema(e.to_string()))?.clone();
    if header.is_empty() || header.iter().all(str::is_empty) {
        return Err(CliError::Schema("empty file: no header row".into()));
    }
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| CliError::Schema(format!("missing column '{name}'")))
    };
    let (gi, si, vi) = (find("group")?, find("subject")?, find("value")?);
    let factor_cols: Vec<usize> = (0..header.len()).filter(|c| ![gi, si, vi].contains(c)).collect();
    if factor_cols.is_empty() {
        return Err(CliError::Schema("no within-subject factor column".into()));
    }
    let factors: Vec<String> = factor_cols.iter().map(|&c| header[c].to_owned()).collect();
    if let Some(f) = factors.iter().find(|f| f.is_empty()) {
        return Err(CliError::Schema(format!("unnamed column '{f}'")));
    }

    let mut records = Vec::new();
    let mut seen: HashMap<(String, String, Vec<String>), usize> = HashMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let row = e.position().map_or(0, |p| p.line() as usize);
            CliError::Parse { row, message: e.to_string() }
        })?;
        let row = rec.position().map_or(0, |p| p.line() as usize);
        let label = |c: usize, what: &str| {
            let s = rec[c].to_owned();
            if s.is_empty() {
                Err(CliError::Parse { row, message: format!("empty {what}") })
            } else {
                Ok(s)
            }
        };
        let group = label(gi, "group")?;
        let subject = label(si, "subject")?;
        let levels = factor_cols
            .iter()
            .zip(&factors)
            .map(|(&c, f)| label(c, &format!("level of '{f}'")))
            .collect::<CliResult<Vec<_>>>()?;
        let value: f64 = rec[vi]
            .parse()
            .map_err(|_| CliError::Parse { row, message: format!("value '{}' is not a number", &rec[vi]) })?;
        if !value.is_finite() {
            return Err(CliError::Parse { row, message: format!("value '{}' is not finite", &rec[vi]) });
        }
        let key = (group.clone(), subject.clone(), levels.clone());
        if let Some(first) = seen.insert(key, row) {
            return Err(CliError::Duplicate {
                row,
                message: format!("group '{group}', subject '{subject}', cell {levels:?} already given at row {first}"),
            });
        }
        records.push(LongRecord { group, subject, levels, value, row });
    }
    if records.is_empty() {
        return Err(CliError::Schema("no data rows".into()));
    }
    Ok(LongTable { factors, records })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Factor {
    pub name: String,
    pub levels: Vec<String>,
}

/// A data set together with the labels needed to write it back.
#[derive(Clone, Debug, PartialEq)]
pub struct Assembled {
    pub dataset: Dataset<f64>,
    pub groups: Vec<String>,
    pub factors: Vec<Factor>,
    /// Subject labels per group, in row order of the group matrices.
    pub subjects: Vec<Vec<String>>,
}

impl Assembled {
    /// `[a, levels of factor 1, ..., levels of factor K]`.
    pub fn layout(&self) -> CliResult<FactorialLayout> {
        Ok(FactorialLayout::new(self.groups.len(), self.factors.iter().map(|f| f.levels.len()).collect())?)
    }

    pub fn t(&self) -> usize {
        self.factors.iter().map(|f| f.levels.len()).product()
    }

    /// Cell labels in occasion order (first factor varies slowest).
    pub fn cells(&self) -> Vec<Vec<String>> {
        cell_labels(&self.factors)
    }
}

fn cell_labels(factors: &[Factor]) -> Vec<Vec<String>> {
    let mut cells = vec![Vec::new()];
    for f in factors {
        cells = cells
            .into_iter()
            .flat_map(|c: Vec<String>| {
                f.levels.iter().map(move |l| {
                    let mut c = c.clone();
                    c.push(l.clone());
                    c
                })
            })
            .collect();
    }
    cells
}

fn describe_cell(factors: &[Factor], cell: &[String]) -> String {
    factors.iter().zip(cell).map(|(f, l)| format!("{}={}", f.name, l)).collect::<Vec<_>>().join(", ")
}

/// Builds the group matrices. Row order within a group follows the sorted
/// subject labels and occasions follow the sorted factor levels, so the
/// record order in the file does not matter.
pub fn assemble(table: &LongTable, layout: Option<&FactorialLayout>) -> CliResult<Assembled> {
    let groups = sorted_unique(table.records.iter().map(|r| r.group.as_str()));
    let factors: Vec<Factor> = table
        .factors
        .iter()
        .enumerate()
        .map(|(k, name)| Factor { name: name.clone(), levels: sorted_unique(table.records.iter().map(|r| r.levels[k].as_str())) })
        .collect();
    if let Some(l) = layout {
        if l.whole_plot_levels() != groups.len() {
            return Err(CliError::Level(format!("data has {} groups, layout declares {}", groups.len(), l.whole_plot_levels())));
        }
        if l.sub_plot_levels().len() != factors.len() {
            return Err(CliError::Level(format!(
                "data has {} within-subject factors, layout declares {}",
                factors.len(),
                l.sub_plot_levels().len()
            )));
        }
        for (f, &n) in factors.iter().zip(l.sub_plot_levels()) {
            if f.levels.len() != n {
                return Err(CliError::Level(format!(
                    "factor '{}' has levels {:?}, layout declares {n}",
                    f.name, f.levels
                )));
            }
        }
    }

    let cells = cell_labels(&factors);
    let t = cells.len();
    let cell_index: HashMap<&[String], usize> = cells.iter().enumerate().map(|(i, c)| (c.as_slice(), i)).collect();

    let mut by_group: Vec<BTreeMap<SubjectKey, Vec<Option<f64>>>> = vec![BTreeMap::new(); groups.len()];
    for r in &table.records {
        let g = groups.iter().position(|x| *x == r.group).expect("group collected above");
        let c = cell_index[r.levels.as_slice()];
        by_group[g].entry(SubjectKey(r.subject.clone())).or_insert_with(|| vec![None; t])[c] = Some(r.value);
    }
    let mut mats = Vec::with_capacity(by_group.len());
    let mut subject_labels = Vec::with_capacity(by_group.len());
    for (g, subjects) in by_group.iter().enumerate() {
        let mut values = Vec::with_capacity(subjects.len() * t);
        for (s, row) in subjects {
            for (c, v) in row.iter().enumerate() {
                match v {
                    Some(v) => values.push(*v),
                    None => {
                        return Err(CliError::Completeness(format!(
                            "subject '{}' in group '{}' has no value for cell ({})",
                            s.0,
                            groups[g],
                            describe_cell(&factors, &cells[c])
                        )))
                    }
                }
            }
        }
        mats.push(Matrix::from_row_major(subjects.len(), t, values)?);
        subject_labels.push(subjects.keys().map(|k| k.0.clone()).collect());
    }
    Ok(Assembled { dataset: Dataset::new(mats)?, groups, factors, subjects: subject_labels })
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct SubjectKey(String);

impl Ord for SubjectKey {
    fn cmp(&self, other: &Self) -> Ordering {
        level_cmp(&self.0, &other.0)
    }
}

impl PartialOrd for SubjectKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Inverse of [`assemble`].
pub fn to_long_table(a: &Assembled) -> LongTable {
    let cells = a.cells();
    let mut records = Vec::new();
    for (g, m) in a.dataset.groups().iter().enumerate() {
        for (k, subject) in a.subjects[g].iter().enumerate() {
            for (c, cell) in cells.iter().enumerate() {
                records.push(LongRecord {
                    group: a.groups[g].clone(),
                    subject: subject.clone(),
                    levels: cell.clone(),
                    value: m[(k, c)],
                    row: records.len() + 2,
                });
            }
        }
    }
    LongTable { factors: a.factors.iter().map(|f| f.name.clone()).collect(), records }
}

/// Writes the records with full-precision values.
pub fn write_long_csv<W: Write>(table: &LongTable, writer: W) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| CliError::io("<csv output>", std::io::Error::other(e));
    let mut header = vec!["group".to_owned(), "subject".to_owned()];
    header.extend(table.factors.iter().cloned());
    header.push("value".into());
    w.write_record(&header).map_err(io)?;
    for r in &table.records {
        let mut rec = vec![r.group.clone(), r.subject.clone()];
        rec.extend(r.levels.iter().cloned());
        rec.push(r.value.to_string());
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io("<csv output>", e))?;
    Ok(())
}
