//! Command-line experiment harness: synthesize datasets, dump metrics, run
//! the selectors over repeats, evaluate and rank the results, and compare
//! runtimes.

pub mod error;
pub mod experiment;

use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::info;

use doless_core::data_io::{
    load_dataset, read_results, save_dataset, synth_dataset, write_results, AntiPatternRates,
    Dataset, ResultRow, SynthConfig,
};
use doless_core::doless::{DolessConfig, DEFAULT_LAMBDA, DEFAULT_POPULATION};
use doless_core::domination::DEFAULT_OPPONENTS;
use doless_core::evaluation::write_rank_table;
use doless_core::moea::Nsga2Config;
use doless_core::objective_model::Goal;
use doless_core::selection::parse_bits;
use doless_core::Selection;

use error::csv_error;
pub use error::CliError;
pub use experiment::{Algorithm, Settings};

/// Environment variable naming the default output directory of `select`.
pub const OUTPUT_DIR_ENV: &str = "DOLESS_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "doless",
    version,
    about = "Multi-goal test-suite minimization experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset bundle.
    Synth(SynthArgs),
    /// Write the per-test effectiveness table of a dataset as CSV.
    Metrics(MetricsArgs),
    /// Run a selector over repeats and write a results CSV.
    Select(SelectArgs),
    /// Re-evaluate a results CSV against its dataset, one row per repeat.
    Evaluate(EvaluateArgs),
    /// Rank result sets on TET and MS with Scott-Knott.
    Rank(RankArgs),
    /// Time both selectors on one dataset and report the speedup.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 150)]
    pub tests: usize,
    #[arg(long, default_value_t = 7)]
    pub signals: usize,
    #[arg(long, default_value_t = 6)]
    pub mutants: usize,
    /// Samples per trace.
    #[arg(long, default_value_t = 101)]
    pub trace_len: usize,
    #[arg(long, default_value_t = 0.05)]
    pub dt: f64,
    /// Probability of each anti-pattern per signal; overridden per pattern below.
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long)]
    pub pulse_rate: Option<f64>,
    #[arg(long)]
    pub oscillation_rate: Option<f64>,
    #[arg(long)]
    pub blowup_rate: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory to write the bundle into.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelectorArgs {
    /// DoLesS goal population size.
    #[arg(long, default_value_t = DEFAULT_POPULATION)]
    pub population: usize,
    /// DoLesS best-group size; defaults to the square root of the population.
    #[arg(long)]
    pub best_count: Option<usize>,
    /// Opponents sampled per goal vector when scoring domination.
    #[arg(long, default_value_t = DEFAULT_OPPONENTS)]
    pub opponents: usize,
    /// Weight of the ‖x‖² term in the least-squares inversion.
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    pub lambda: f64,
    #[arg(long, default_value_t = 100)]
    pub nsga2_population: usize,
    #[arg(long, default_value_t = 250)]
    pub generations: usize,
    #[arg(long, default_value_t = 0.8)]
    pub crossover: f64,
    /// Per-gene flip probability; defaults to 1 / number of tests.
    #[arg(long)]
    pub mutation: Option<f64>,
}

impl SelectorArgs {
    pub fn settings(&self) -> Settings {
        Settings {
            doless: DolessConfig {
                population: self.population,
                best_count: self.best_count,
                opponents: self.opponents,
                lambda: self.lambda,
                ..DolessConfig::default()
            },
            nsga2: Nsga2Config {
                population: self.nsga2_population,
                generations: self.generations,
                crossover_probability: self.crossover,
                mutation_probability: self.mutation,
                ..Nsga2Config::default()
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, value_enum, default_value_t = Algorithm::Doless)]
    pub algorithm: Algorithm,
    #[arg(long, default_value_t = 20)]
    pub repeats: usize,
    /// Repeat `i` uses seed `seed + i`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory receiving `<algorithm>.csv`.
    #[arg(long, env = OUTPUT_DIR_ENV, default_value = "results")]
    pub out_dir: PathBuf,
    /// Run repeats on all cores; per-repeat timings then share the machine.
    #[arg(long)]
    pub parallel: bool,
    #[command(flatten)]
    pub selector: SelectorArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub results: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    /// Results CSVs as `[LABEL=]PATH`; without a label the algorithm column names the group.
    #[arg(required = true)]
    pub inputs: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub selector: SelectorArgs,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Synth(a) => cmd_synth(&a),
        Command::Metrics(a) => cmd_metrics(&a),
        Command::Select(a) => cmd_select(&a).map(|_| ()),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::Rank(a) => cmd_rank(&a),
        Command::Bench(a) => cmd_bench(&a).map(|_| ()),
    }
}

pub fn cmd_synth(a: &SynthArgs) -> Result<(), CliError> {
    let base = a
        .rate
        .map_or_else(AntiPatternRates::default, AntiPatternRates::uniform);
    let config = SynthConfig {
        n_tests: a.tests,
        n_signals: a.signals,
        n_mutants: a.mutants,
        trace_len: a.trace_len,
        dt: a.dt,
        rates: AntiPatternRates {
            pulse: a.pulse_rate.unwrap_or(base.pulse),
            oscillation: a.oscillation_rate.unwrap_or(base.oscillation),
            blowup: a.blowup_rate.unwrap_or(base.blowup),
        },
        seed: a.seed,
    };
    let d = synth_dataset(&config)?;
    for w in d.kill_matrix().warnings() {
        log::warn!("{w}");
    }
    save_dataset(&d, &a.out)?;
    println!(
        "{}: {} tests, {} signals, {} mutants",
        a.out.display(),
        d.n_tests(),
        d.n_signals(),
        d.kill_matrix().n_mutants()
    );
    Ok(())
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).map_err(|e| CliError::io(p, e))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn out_name(path: Option<&Path>) -> PathBuf {
    path.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf)
}

pub fn cmd_metrics(a: &MetricsArgs) -> Result<(), CliError> {
    let d = load_dataset(&a.dataset)?;
    let scores = d.per_test_scores()?;
    let m = d.effectiveness_matrix()?;
    let mut w = csv::Writer::from_writer(output(a.out.as_deref())?);
    let mut header = vec![
        "id".to_string(),
        "execution_time".into(),
        "discontinuity".into(),
        "infinity".into(),
        "instability".into(),
        "minmax".into(),
    ];
    header.extend(Goal::ALL.iter().map(|g| format!("a_{}", g.label())));
    let name = out_name(a.out.as_deref());
    w.write_record(&header).map_err(|e| csv_error(&name, e))?;
    for (k, t) in d.tests().iter().enumerate() {
        let mut record = vec![
            t.id.clone(),
            t.execution_time.to_string(),
            scores.discontinuity[k].to_string(),
            scores.infinity[k].to_string(),
            scores.instability[k].to_string(),
            scores.minmax[k].to_string(),
        ];
        record.extend(Goal::ALL.iter().map(|&g| m.row(g)[k].to_string()));
        w.write_record(&record).map_err(|e| csv_error(&name, e))?;
    }
    w.flush().map_err(|e| CliError::io(&name, e))
}

/// Loads the dataset, runs the repeats and writes `<out_dir>/<algorithm>.csv`.
/// Returns the path written.
pub fn cmd_select(a: &SelectArgs) -> Result<PathBuf, CliError> {
    let d = load_dataset(&a.dataset)?;
    let rows = experiment::run_repeats(
        &d,
        a.algorithm,
        &a.selector.settings(),
        a.seed,
        a.repeats,
        a.parallel,
    )?;
    fs::create_dir_all(&a.out_dir).map_err(|e| CliError::io(&a.out_dir, e))?;
    let path = a.out_dir.join(format!("{}.csv", a.algorithm.name()));
    write_rows(&path, &rows)?;
    println!(
        "{}: {} rows over {} repeats, {:.3}s total",
        path.display(),
        rows.len(),
        a.repeats,
        experiment::total_wallclock(&rows)
    );
    Ok(path)
}

fn write_rows(path: &Path, rows: &[ResultRow]) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    write_results(file, rows).map_err(|e| csv_error(path, e))
}

pub fn load_results(path: &Path) -> Result<Vec<ResultRow>, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_results(file).map_err(|e| csv_error(path, e))
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> Result<(), CliError> {
    let d: Dataset = load_dataset(&a.dataset)?;
    let mut rows = load_results(&a.results)?;
    if rows.is_empty() {
        return Err(CliError::Usage(format!(
            "{}: no result rows",
            a.results.display()
        )));
    }
    let m = d.effectiveness_matrix()?;
    let times = d.execution_times();
    for (i, r) in rows.iter_mut().enumerate() {
        let bits = parse_bits(&r.selection_bits)
            .filter(|b| b.len() == d.n_tests())
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "{}: row {}: selection_bits must be {} characters of 0/1",
                    a.results.display(),
                    i + 1,
                    d.n_tests()
                ))
            })?;
        let mut s = Selection::new(&m, bits)?;
        doless_core::evaluation::evaluate_front(
            std::slice::from_mut(&mut s),
            d.kill_matrix(),
            &times,
        )?;
        r.tet = s.tet.unwrap_or(f64::NAN);
        r.ms = s.ms.unwrap_or(f64::NAN);
    }
    let name = out_name(a.out.as_deref());
    let mut w = csv::Writer::from_writer(output(a.out.as_deref())?);
    for s in experiment::summarize(&rows) {
        w.serialize(s).map_err(|e| csv_error(&name, e))?;
    }
    w.flush().map_err(|e| CliError::io(&name, e))
}

/// Splits `[LABEL=]PATH` at the first `=`.
pub fn parse_rank_input(input: &str) -> (Option<String>, PathBuf) {
    match input.split_once('=') {
        Some((label, path)) if !label.is_empty() => (Some(label.to_string()), PathBuf::from(path)),
        _ => (None, PathBuf::from(input)),
    }
}

pub fn cmd_rank(a: &RankArgs) -> Result<(), CliError> {
    let mut inputs = Vec::with_capacity(a.inputs.len());
    for raw in &a.inputs {
        let (label, path) = parse_rank_input(raw);
        let rows = load_results(&path)?;
        if rows.is_empty() {
            return Err(CliError::Usage(format!(
                "{}: no result rows",
                path.display()
            )));
        }
        inputs.push((label, rows));
    }
    let table = experiment::rank_results(&inputs)?;
    for r in table.iter().filter(|r| r.rank == 1) {
        info!(
            "{} winner: {} (median {})",
            r.measure.label(),
            r.algorithm,
            r.median
        );
    }
    let name = out_name(a.out.as_deref());
    write_rank_table(output(a.out.as_deref())?, &table).map_err(|e| csv_error(&name, e))
}

pub fn cmd_bench(a: &BenchArgs) -> Result<experiment::BenchReport, CliError> {
    if a.repeats == 0 {
        return Err(CliError::Usage("repeats must be at least 1".into()));
    }
    let d = load_dataset(&a.dataset)?;
    let report = experiment::bench(&d, &a.selector.settings(), a.seed, a.repeats)?;
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    println!("{text}");
    if let Some(p) = &a.out {
        fs::write(p, format!("{text}\n")).map_err(|e| CliError::io(p, e))?;
    }
    Ok(report)
}
