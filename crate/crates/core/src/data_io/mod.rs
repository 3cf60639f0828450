//! Datasets: test cases with output traces and execution times, a mutant
//! kill matrix, and where the data came from.
//!
//! On disk a dataset is a directory holding `dataset.json` and one CSV per
//! test case under `traces/`:
//!
//! ```text
//! dataset.json  {dt, kill_matrix, name, provenance, signals, tests: [{execution_time, id, trace_file}]}
//! traces/t000.csv  signal_1,...,signal_N  (one row per sample)
//! ```

mod results;
pub mod synth;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::evaluation::KillMatrix;
use crate::objective_model::{EffectivenessMatrix, PerTestScores};
use crate::signal_metrics::{normalize_per_test, MetricKind, RawScoreTable, SignalTrace};

pub use results::{read_results, write_results, ResultRow};
pub use synth::{synth_dataset, AntiPattern, AntiPatternRates, SynthConfig};

pub const MANIFEST_FILE: &str = "dataset.json";
pub const TRACE_DIR: &str = "traces";

/// Test suites must have more tests than goals for the least-squares step.
pub const MIN_TESTS: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct TestCase {
    pub id: String,
    /// Seconds.
    pub execution_time: f64,
    pub outputs: Vec<SignalTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Provenance {
    Synthetic { config: SynthConfig },
    External { note: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    dt: f64,
    tests: Vec<TestCase>,
    kill_matrix: KillMatrix,
    provenance: Provenance,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        dt: f64,
        tests: Vec<TestCase>,
        kill_matrix: KillMatrix,
        provenance: Provenance,
    ) -> Result<Self> {
        let d = Self {
            name: name.into(),
            dt,
            tests,
            kill_matrix,
            provenance,
        };
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::validation(
                "dt",
                format!("must be positive, got {}", self.dt),
            ));
        }
        let n = self.tests.len();
        if n < MIN_TESTS {
            return Err(Error::validation(
                "tests",
                format!("need more than {} test cases, got {n}", MIN_TESTS - 1),
            ));
        }
        let signals = self.tests[0].outputs.len();
        if signals == 0 {
            return Err(Error::validation(
                "signals",
                "every test needs at least one output signal",
            ));
        }
        let mut ids = std::collections::HashSet::new();
        for (k, t) in self.tests.iter().enumerate() {
            let field = format!("tests[{k}]");
            if !valid_id(&t.id) {
                return Err(Error::validation(
                    format!("{field}.id"),
                    format!("`{}` must be non-empty and use only [A-Za-z0-9._-]", t.id),
                ));
            }
            if !ids.insert(t.id.as_str()) {
                return Err(Error::validation(
                    format!("{field}.id"),
                    format!("duplicate id `{}`", t.id),
                ));
            }
            if !(t.execution_time.is_finite() && t.execution_time > 0.0) {
                return Err(Error::validation(
                    format!("{field}.execution_time"),
                    format!("must be positive, got {}", t.execution_time),
                ));
            }
            if t.outputs.len() != signals {
                return Err(Error::validation(
                    format!("{field}.outputs"),
                    format!("has {} signals, expected {signals}", t.outputs.len()),
                ));
            }
            let len = t.outputs[0].samples().len();
            for (s, trace) in t.outputs.iter().enumerate() {
                if trace.samples().len() != len {
                    return Err(Error::validation(
                        format!("{field}.outputs[{s}]"),
                        format!("has {} samples, expected {len}", trace.samples().len()),
                    ));
                }
                if trace.dt() != self.dt {
                    return Err(Error::validation(
                        format!("{field}.outputs[{s}]"),
                        format!(
                            "time step {} differs from dataset dt {}",
                            trace.dt(),
                            self.dt
                        ),
                    ));
                }
            }
        }
        for (i, row) in self.kill_matrix.rows().iter().enumerate() {
            if row.len() != n {
                return Err(Error::validation(
                    format!("kill_matrix[{i}]"),
                    format!("mutant row {i} has {} entries, expected {n}", row.len()),
                ));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn tests(&self) -> &[TestCase] {
        &self.tests
    }

    pub fn kill_matrix(&self) -> &KillMatrix {
        &self.kill_matrix
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn n_tests(&self) -> usize {
        self.tests.len()
    }

    pub fn n_signals(&self) -> usize {
        self.tests[0].outputs.len()
    }

    pub fn execution_times(&self) -> Vec<f64> {
        self.tests.iter().map(|t| t.execution_time).collect()
    }

    pub fn raw_scores(&self, kind: MetricKind) -> Result<RawScoreTable> {
        RawScoreTable::from_traces(kind, self.tests.iter().map(|t| t.outputs.as_slice()))
    }

    pub fn per_test_scores(&self) -> Result<PerTestScores> {
        let score = |kind| Ok::<_, Error>(normalize_per_test(&self.raw_scores(kind)?));
        Ok(PerTestScores {
            discontinuity: score(MetricKind::Discontinuity)?,
            infinity: score(MetricKind::Infinity)?,
            instability: score(MetricKind::Instability)?,
            minmax: score(MetricKind::MinMax)?,
        })
    }

    pub fn effectiveness_matrix(&self) -> Result<EffectivenessMatrix> {
        EffectivenessMatrix::build(&self.per_test_scores()?, &self.execution_times())
    }
}

fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id != "."
        && id != ".."
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'))
}

fn manifest_path(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join(MANIFEST_FILE)
    } else {
        path.to_path_buf()
    }
}

/// Writes `d` into directory `dir` (created if missing). Output is canonical:
/// sorted JSON keys and shortest round-trip float formatting, so saving the
/// same dataset twice gives byte-identical files.
pub fn save_dataset(d: &Dataset, dir: &Path) -> Result<()> {
    let trace_dir = dir.join(TRACE_DIR);
    fs::create_dir_all(&trace_dir).map_err(|e| Error::io(&trace_dir, e))?;

    let mut tests = Vec::with_capacity(d.tests.len());
    for t in &d.tests {
        let rel = format!("{TRACE_DIR}/{}.csv", t.id);
        let path = dir.join(&rel);
        fs::write(&path, trace_csv(&t.outputs)).map_err(|e| Error::io(&path, e))?;
        tests.push(json!({
            "execution_time": t.execution_time,
            "id": t.id,
            "trace_file": rel,
        }));
    }
    let kills: Vec<Vec<u8>> = d
        .kill_matrix
        .rows()
        .iter()
        .map(|row| row.iter().map(|&k| u8::from(k)).collect())
        .collect();
    let manifest = json!({
        "dt": d.dt,
        "kill_matrix": kills,
        "name": d.name,
        "provenance": serde_json::to_value(&d.provenance).map_err(|e| Error::Parse {
            path: dir.join(MANIFEST_FILE),
            message: e.to_string(),
        })?,
        "signals": d.n_signals(),
        "tests": tests,
    });
    let path = dir.join(MANIFEST_FILE);
    let mut text =
        serde_json::to_string_pretty(&sort_keys(manifest)).expect("JSON values serialize");
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

/// Rebuilds objects so keys come out sorted regardless of map ordering
/// features enabled elsewhere in the dependency graph.
fn sort_keys(v: Value) -> Value {
    match v {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(
                entries
                    .into_iter()
                    .map(|(k, v)| (k, sort_keys(v)))
                    .collect(),
            )
        }
        Value::Array(items) => Value::Array(items.into_iter().map(sort_keys).collect()),
        other => other,
    }
}

fn trace_csv(outputs: &[SignalTrace]) -> String {
    let mut out = String::new();
    let header: Vec<String> = (1..=outputs.len()).map(|i| format!("signal_{i}")).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in 0..outputs[0].samples().len() {
        let cells: Vec<String> = outputs
            .iter()
            .map(|s| s.samples()[row].to_string())
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    name: String,
    dt: f64,
    signals: usize,
    tests: Vec<ManifestTest>,
    kill_matrix: Vec<Vec<u8>>,
    provenance: Provenance,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestTest {
    id: String,
    execution_time: f64,
    trace_file: String,
}

/// Loads a dataset from its directory or its `dataset.json`.
pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let manifest_file = manifest_path(path);
    let text = fs::read_to_string(&manifest_file).map_err(|e| Error::io(&manifest_file, e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: manifest_file.clone(),
        message: e.to_string(),
    })?;
    let base = manifest_file.parent().unwrap_or(Path::new("."));

    if manifest.tests.len() < MIN_TESTS {
        return Err(Error::validation(
            "tests",
            format!(
                "need more than {} test cases, got {}",
                MIN_TESTS - 1,
                manifest.tests.len()
            ),
        ));
    }
    let n = manifest.tests.len();
    let mut kills = Vec::with_capacity(manifest.kill_matrix.len());
    for (i, row) in manifest.kill_matrix.iter().enumerate() {
        if row.len() != n {
            return Err(Error::validation(
                format!("kill_matrix[{i}]"),
                format!("mutant row {i} has {} entries, expected {n}", row.len()),
            ));
        }
        let parsed = row
            .iter()
            .map(|&v| match v {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::validation(
                    format!("kill_matrix[{i}]"),
                    format!("entries must be 0 or 1, got {other}"),
                )),
            })
            .collect::<Result<Vec<bool>>>()?;
        kills.push(parsed);
    }

    let mut tests = Vec::with_capacity(n);
    for (k, t) in manifest.tests.into_iter().enumerate() {
        let trace_path = base.join(&t.trace_file);
        let outputs = read_trace_csv(&trace_path, manifest.dt)?;
        if outputs.len() != manifest.signals {
            return Err(Error::validation(
                format!("tests[{k}].trace_file"),
                format!(
                    "{} has {} signals, manifest declares {}",
                    trace_path.display(),
                    outputs.len(),
                    manifest.signals
                ),
            ));
        }
        tests.push(TestCase {
            id: t.id,
            execution_time: t.execution_time,
            outputs,
        });
    }
    let kill_matrix = KillMatrix::new(kills, n)?;
    Dataset::new(
        manifest.name,
        manifest.dt,
        tests,
        kill_matrix,
        manifest.provenance,
    )
}

fn read_trace_csv(path: &Path, dt: f64) -> Result<Vec<SignalTrace>> {
    let parse_err = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let header = reader
        .headers()
        .map_err(|e| parse_err(e.to_string()))?
        .clone();
    for (i, h) in header.iter().enumerate() {
        if h != format!("signal_{}", i + 1) {
            return Err(parse_err(format!(
                "column {} is `{h}`, expected `signal_{}`",
                i + 1,
                i + 1
            )));
        }
    }
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| parse_err(e.to_string()))?;
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| {
                parse_err(format!(
                    "row {}, column {}: `{cell}` is not a number",
                    r + 1,
                    c + 1
                ))
            })?;
            columns[c].push(v);
        }
    }
    columns
        .into_iter()
        .enumerate()
        .map(|(c, samples)| {
            SignalTrace::new(samples, dt).map_err(|e| parse_err(format!("signal_{}: {e}", c + 1)))
        })
        .collect()
}
