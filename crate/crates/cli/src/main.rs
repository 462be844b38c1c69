use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use longperm::design::Effect;
use longperm::inference::Method;
use longperm_cli::analyze::read_matrix;
use longperm_cli::report::write_file;
use longperm_cli::{
    exit, load_scenario, run_analyze, run_study, write_outputs, AnalysisRequest, CliError, CliResult, DataSource,
    EffectRequest,
};

/// Wald-type, ANOVA-type and permutation tests for repeated-measures designs.
#[derive(Parser)]
#[command(name = "longperm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test effects on a long-format CSV file.
    Analyze(AnalyzeArgs),
    /// Type-I error rates of a scenario (or the study kind named in the file).
    Simulate(ScenarioArgs),
    /// Power curve over the scenario's delta grid.
    Power(ScenarioArgs),
    /// Quantile distances KQS and KQS^pi.
    Kqs(ScenarioArgs),
    /// Type-I error rates as all group sizes grow.
    LargeSample(ScenarioArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Example {
    /// Leukocyte O2 consumption (reported summaries plus a normal surrogate).
    O2,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Long CSV: group,subject,<factor>...,value.
    #[arg(long, required_unless_present = "example", conflicts_with = "example")]
    data: Option<PathBuf>,
    /// Built-in example instead of a data file.
    #[arg(long, value_enum)]
    example: Option<Example>,
    /// Effects: G, T, GT with one within-subject factor; A, B, T, AB, AT, BT, ABT with two.
    #[arg(long = "effect", value_delimiter = ',')]
    effects: Vec<String>,
    /// Headerless CSV with a custom contrast matrix; may be repeated.
    #[arg(long = "hypothesis-matrix")]
    matrices: Vec<PathBuf>,
    #[arg(long = "method", value_delimiter = ',', default_values_t = ["WTS-asym".to_string(), "ATS-F".to_string(), "WTPS".to_string()])]
    methods: Vec<String>,
    /// Resamples per resampling test.
    #[arg(long, default_value_t = 1000)]
    resamples: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Machine-readable CSV report.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Format on standard output.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file (TOML).
    config: PathBuf,
    /// 10000 data sets with 1000 resamples each.
    #[arg(long = "paper-scale")]
    full_scale: bool,
    #[arg(long)]
    n_sim: Option<usize>,
    #[arg(long)]
    n_resample: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Report CSV; overrides the file's output.report.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Tidy plot CSV; overrides the file's output.plot.
    #[arg(long)]
    plot: Option<PathBuf>,
}

fn analyze(args: AnalyzeArgs) -> CliResult<()> {
    let mut effects = args
        .effects
        .iter()
        .map(|e| e.parse::<Effect>().map(EffectRequest::Named).map_err(|_| CliError::Usage(format!("unknown effect '{e}'"))))
        .collect::<CliResult<Vec<_>>>()?;
    for p in &args.matrices {
        let label = p.file_stem().map_or_else(|| "custom".into(), |s| s.to_string_lossy().into_owned());
        effects.push(EffectRequest::Matrix { label, matrix: read_matrix(p)? });
    }
    let methods = args
        .methods
        .iter()
        .map(|m| m.parse::<Method>().map_err(|_| CliError::Usage(format!("unknown method '{m}'"))))
        .collect::<CliResult<Vec<_>>>()?;
    let data = match (args.data, args.example) {
        (Some(p), _) => DataSource::File(p),
        (None, Some(Example::O2)) => DataSource::O2Example,
        (None, None) => return Err(CliError::Usage("give --data or --example".into())),
    };
    let mut req = AnalysisRequest::new(data, effects, methods);
    req.n_resample = args.resamples;
    req.alpha = args.alpha;
    req.seed = args.seed;
    let table = run_analyze(&req)?;
    if let Some(path) = &args.output {
        write_file(path, |f| table.write_csv(f))?;
    }
    match args.format {
        Format::Text => print!("{}", table.render_text()),
        Format::Csv => table.write_csv(std::io::stdout().lock())?,
    }
    Ok(())
}

fn scenario(args: ScenarioArgs, kind: Option<&str>) -> CliResult<()> {
    let mut file = load_scenario(&args.config)?;
    if let Some(k) = kind {
        file = file.with_kind(k)?;
    }
    if args.full_scale {
        file = file.full_scale();
    }
    if let Some(n) = args.n_sim {
        file.scenario.n_sim = n;
    }
    if let Some(b) = args.n_resample {
        file.scenario.n_resample = b;
    }
    if let Some(s) = args.seed {
        file.scenario.seed = s;
    }
    if args.report.is_some() {
        file.report = args.report;
    }
    if args.plot.is_some() {
        file.plot = args.plot;
    }
    file.scenario.validate()?;
    let result = run_study(&file)?;
    write_outputs(&file, &result)?;
    print!("{}", result.text());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Simulate(a) => scenario(a, None),
        Command::Power(a) => scenario(a, Some("power")),
        Command::Kqs(a) => scenario(a, Some("kqs")),
        Command::LargeSample(a) => scenario(a, Some("large-sample")),
    };
    match result {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
