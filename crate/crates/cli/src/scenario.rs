//! Running scenario files and writing their reports.

use std::path::Path;

use longperm_sim::{run_kqs, run_large_sample, run_power, run_type1, Curve, KqsReport, SimulationReport};

use crate::config::{load_scenario, ScenarioFile, StudyKind};
use crate::error::CliResult;
use crate::report::{
    curve_plot, curve_text, kqs_plot, kqs_text, simulation_plot, simulation_text, write_curve_csv, write_file,
    write_kqs_csv, write_plot_csv, write_simulation_csv, PlotPoint,
};

#[derive(Clone, Debug, PartialEq)]
pub enum StudyResult {
    Type1(SimulationReport),
    Kqs(KqsReport),
    Curve(Curve),
}

impl StudyResult {
    pub fn text(&self) -> String {
        match self {
            StudyResult::Type1(r) => simulation_text(r),
            StudyResult::Kqs(r) => kqs_text(r),
            StudyResult::Curve(c) => curve_text(c),
        }
    }

    pub fn plot_points(&self, file: &ScenarioFile) -> Vec<PlotPoint> {
        match self {
            StudyResult::Type1(r) => simulation_plot(r, file.scenario.n_vec.iter().sum()),
            StudyResult::Kqs(r) => kqs_plot(r),
            StudyResult::Curve(c) => curve_plot(c),
        }
    }
}

pub fn run_study(file: &ScenarioFile) -> CliResult<StudyResult> {
    let cfg = &file.scenario;
    Ok(match &file.study {
        StudyKind::Type1 => StudyResult::Type1(run_type1(cfg)?),
        StudyKind::Kqs => StudyResult::Kqs(run_kqs(cfg)?),
        StudyKind::Power { deltas, trend } => StudyResult::Curve(run_power(cfg, deltas, trend)?),
        StudyKind::LargeSample { increments } => StudyResult::Curve(run_large_sample(cfg, increments)?),
    })
}

/// Writes the report table and the tidy plot file where the scenario asks for them.
pub fn write_outputs(file: &ScenarioFile, result: &StudyResult) -> CliResult<()> {
    if let Some(path) = &file.report {
        write_file(path, |f| match result {
            StudyResult::Type1(r) => write_simulation_csv(r, f),
            StudyResult::Kqs(r) => write_kqs_csv(r, f),
            StudyResult::Curve(c) => write_curve_csv(c, f),
        })?;
    }
    if let Some(path) = &file.plot {
        let cfg = &file.scenario;
        let points = result.plot_points(file);
        write_file(path, |f| write_plot_csv(&points, cfg.seed, cfg.n_resample, f))?;
    }
    Ok(())
}

/// Loads, runs and writes one scenario file.
pub fn run_scenario(config_path: &Path) -> CliResult<StudyResult> {
    let file = load_scenario(config_path)?;
    let result = run_study(&file)?;
    write_outputs(&file, &result)?;
    Ok(result)
}
