//! Report tables: full-precision CSV for machines, aligned text for people.

use std::fmt;
use std::io::Write;
use std::path::Path;

use longperm::inference::Method;
use longperm_sim::{Curve, KqsReport, SimulationReport};

use crate::error::{CliError, CliResult};

/// `x` to 4 significant digits; scientific notation outside `[1e-3, 1e5)`.
pub fn sig4(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if (-3..5).contains(&mag) {
        format!("{:.*}", (3 - mag).max(0) as usize, x)
    } else {
        format!("{x:.3e}")
    }
}

/// Column-aligned plain text.
#[derive(Clone, Debug, Default)]
pub struct TextTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl fmt::Display for TextTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut width: Vec<usize> = self.header.iter().map(|h| h.chars().count()).collect();
        for r in &self.rows {
            for (w, c) in width.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |f: &mut fmt::Formatter<'_>, cells: &[String]| {
            let parts: Vec<String> = cells.iter().zip(&width).map(|(c, w)| format!("{c:>w$}")).collect();
            writeln!(f, "{}", parts.join("  "))
        };
        line(f, &self.header)?;
        for r in &self.rows {
            line(f, r)?;
        }
        Ok(())
    }
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| (*s).to_owned()).collect()
}

/// Where the numbers of a report row come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    /// Raw data read from a file.
    Data,
    /// Published group means and covariances.
    Summary,
    /// Simulated stand-in for unavailable raw data.
    Surrogate,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Data => "data",
            Source::Summary => "summary",
            Source::Surrogate => "surrogate",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub effect: String,
    pub method: Method,
    pub source: Source,
    pub statistic: f64,
    pub df: f64,
    pub p_value: f64,
    pub reference: String,
    /// Resamples behind the p-value; 0 for asymptotic tests.
    pub b: usize,
    pub degenerate: usize,
}

/// Results of one analysis, one row per (effect, method).
#[derive(Clone, Debug, PartialEq)]
pub struct ReportTable {
    pub rows: Vec<ReportRow>,
    pub alpha: f64,
    pub seed: u64,
    pub b: usize,
    /// Seconds since the Unix epoch.
    pub created: u64,
}

impl ReportTable {
    pub fn get(&self, effect: &str, method: Method) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.effect == effect && r.method == method)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> CliResult<()> {
        let mut w = CsvOut::new(writer);
        w.row(&["effect", "method", "source", "statistic", "df", "p_value", "reject", "alpha", "reference", "b", "degenerate", "seed", "created"])?;
        for r in &self.rows {
            w.row(&[
                r.effect.clone(),
                r.method.to_string(),
                r.source.to_string(),
                r.statistic.to_string(),
                r.df.to_string(),
                r.p_value.to_string(),
                (r.p_value <= self.alpha).to_string(),
                self.alpha.to_string(),
                r.reference.clone(),
                r.b.to_string(),
                r.degenerate.to_string(),
                self.seed.to_string(),
                self.created.to_string(),
            ])?;
        }
        w.finish()
    }

    pub fn text(&self) -> TextTable {
        TextTable {
            header: strings(&["effect", "method", "source", "statistic", "df", "p-value"]),
            rows: self
                .rows
                .iter()
                .map(|r| {
                    vec![r.effect.clone(), r.method.to_string(), r.source.to_string(), sig4(r.statistic), sig4(r.df), sig4(r.p_value)]
                })
                .collect(),
        }
    }

    pub fn render_text(&self) -> String {
        format!("{}seed {}, b = {}, alpha = {}\n", self.text(), self.seed, self.b, self.alpha)
    }
}

/// Thin wrapper that maps `csv` errors to I/O errors.
pub struct CsvOut<W: Write> {
    inner: csv::Writer<W>,
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::io("<csv output>", std::io::Error::other(e))
}

impl<W: Write> CsvOut<W> {
    pub fn new(writer: W) -> Self {
        CsvOut { inner: csv::Writer::from_writer(writer) }
    }

    pub fn row<S: AsRef<[u8]>>(&mut self, cells: &[S]) -> CliResult<()> {
        self.inner.write_record(cells).map_err(csv_err)
    }

    pub fn finish(mut self) -> CliResult<()> {
        self.inner.flush().map_err(|e| CliError::io("<csv output>", e))
    }
}

/// Creates `path` (and missing parent directories) and runs `write` on it.
pub fn write_file(path: &Path, write: impl FnOnce(std::fs::File) -> CliResult<()>) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    write(file)
}

pub fn write_simulation_csv<W: Write>(rep: &SimulationReport, writer: W) -> CliResult<()> {
    let mut w = CsvOut::new(writer);
    w.row(&["scenario", "method", "n_sim", "n_resample", "alpha", "seed", "rejections", "rate", "se", "degenerate_resamples", "failed"])?;
    for r in &rep.rates {
        w.row(&[
            rep.scenario.clone(),
            r.method.to_string(),
            rep.n_sim.to_string(),
            rep.n_resample.to_string(),
            rep.alpha.to_string(),
            rep.seed.to_string(),
            r.rejections.to_string(),
            r.rate.to_string(),
            r.se.to_string(),
            r.degenerate_resamples.to_string(),
            r.failed.to_string(),
        ])?;
    }
    w.finish()
}

pub fn simulation_text(rep: &SimulationReport) -> String {
    let t = TextTable {
        header: strings(&["method", "rate", "se", "failed"]),
        rows: rep.rates.iter().map(|r| vec![r.method.to_string(), sig4(r.rate), sig4(r.se), r.failed.to_string()]).collect(),
    };
    format!(
        "{}\n{t}n_sim = {}, b = {}, alpha = {}, seed = {}, {:.1}s\n",
        rep.scenario,
        rep.n_sim,
        rep.n_resample,
        rep.alpha,
        rep.seed,
        rep.duration.as_secs_f64()
    )
}

pub fn write_kqs_csv<W: Write>(rep: &KqsReport, writer: W) -> CliResult<()> {
    let mut w = CsvOut::new(writer);
    w.row(&["scenario", "n_sim", "n_resample", "seed", "df", "pooling", "kqs", "kqs_pi", "kqs_pi_alt", "failed", "degenerate_resamples"])?;
    w.row(&[
        rep.scenario.clone(),
        rep.n_sim.to_string(),
        rep.n_resample.to_string(),
        rep.seed.to_string(),
        rep.df.to_string(),
        format!("{:?}", rep.pooling).to_lowercase(),
        rep.kqs.to_string(),
        rep.kqs_pi.to_string(),
        rep.kqs_pi_alt.to_string(),
        rep.failed.to_string(),
        rep.degenerate_resamples.to_string(),
    ])?;
    w.finish()
}

pub fn kqs_text(rep: &KqsReport) -> String {
    format!(
        "{}\nKQS = {}, KQS^pi = {} ({:?} pooling; other pooling {})\nn_sim = {}, b = {}, seed = {}, {:.1}s\n",
        rep.scenario,
        sig4(rep.kqs),
        sig4(rep.kqs_pi),
        rep.pooling,
        sig4(rep.kqs_pi_alt),
        rep.n_sim,
        rep.n_resample,
        rep.seed,
        rep.duration.as_secs_f64()
    )
}

pub fn write_curve_csv<W: Write>(curve: &Curve, writer: W) -> CliResult<()> {
    let mut w = CsvOut::new(writer);
    w.row(&["scenario", "method", curve.x_name.as_str(), "rate", "se", "n_sim", "n_resample", "seed"])?;
    for p in &curve.points {
        w.row(&[
            curve.scenario.clone(),
            p.method.to_string(),
            p.x.to_string(),
            p.rate.to_string(),
            p.se.to_string(),
            p.n_sim.to_string(),
            curve.n_resample.to_string(),
            curve.seed.to_string(),
        ])?;
    }
    w.finish()
}

pub fn curve_text(curve: &Curve) -> String {
    let t = TextTable {
        header: strings(&["method", curve.x_name.as_str(), "rate", "se"]),
        rows: curve.points.iter().map(|p| vec![p.method.to_string(), sig4(p.x), sig4(p.rate), sig4(p.se)]).collect(),
    };
    format!("{}\n{t}b = {}, seed = {}, {:.1}s\n", curve.scenario, curve.n_resample, curve.seed, curve.duration.as_secs_f64())
}

/// One point of a tidy plot file.
#[derive(Clone, Debug, PartialEq)]
pub struct PlotPoint {
    pub scenario: String,
    pub method: String,
    pub x: f64,
    pub y: f64,
}

/// Type-I error rates against the total sample size.
pub fn simulation_plot(rep: &SimulationReport, n_total: usize) -> Vec<PlotPoint> {
    rep.rates
        .iter()
        .map(|r| PlotPoint { scenario: rep.scenario.clone(), method: r.method.to_string(), x: n_total as f64, y: r.rate })
        .collect()
}

/// Quantile functions: `x` is the level, `y` the quantile.
pub fn kqs_plot(rep: &KqsReport) -> Vec<PlotPoint> {
    let mut out = Vec::new();
    for q in &rep.quantiles {
        for (name, y) in [("WTS", q.statistic), ("chi2", q.chi2), ("permutation", q.permutation)] {
            out.push(PlotPoint { scenario: rep.scenario.clone(), method: name.into(), x: q.level, y });
        }
    }
    out
}

pub fn curve_plot(curve: &Curve) -> Vec<PlotPoint> {
    curve
        .points
        .iter()
        .map(|p| PlotPoint { scenario: curve.scenario.clone(), method: p.method.to_string(), x: p.x, y: p.rate })
        .collect()
}

pub fn write_plot_csv<W: Write>(points: &[PlotPoint], seed: u64, n_resample: usize, writer: W) -> CliResult<()> {
    let mut w = CsvOut::new(writer);
    w.row(&["scenario", "method", "x", "y", "seed", "n_resample"])?;
    for p in points {
        w.row(&[p.scenario.clone(), p.method.clone(), p.x.to_string(), p.y.to_string(), seed.to_string(), n_resample.to_string()])?;
    }
    w.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_significant_digits() {
        assert_eq!(sig4(0.10953), "0.1095");
        assert_eq!(sig4(12.3456), "12.35");
        assert_eq!(sig4(1234.56), "1235");
        assert_eq!(sig4(0.00084512), "8.451e-4");
        assert_eq!(sig4(0.0), "0");
        assert_eq!(sig4(-0.5), "-0.5000");
        assert_eq!(sig4(123456.0), "1.235e5");
    }

    #[test]
    fn text_table_aligns() {
        let t = TextTable { header: strings(&["a", "bbb"]), rows: vec![strings(&["long", "1"])] };
        let s = t.to_string();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0].len(), lines[1].len());
    }
}
