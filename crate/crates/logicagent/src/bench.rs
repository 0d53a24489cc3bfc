//! Dataset loading, scoring and reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use logicagent_core::adjudicate::ResolutionPath;
use logicagent_core::oracle::Label;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::agent::PredictionRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dataset {
    ProntoQA,
    ProofWriter,
    #[serde(rename = "FOLIO")]
    Folio,
    ProverQA,
    RepublicQA,
    Custom,
}

impl Dataset {
    pub const ALL: [Dataset; 6] =
        [Dataset::ProntoQA, Dataset::ProofWriter, Dataset::Folio, Dataset::ProverQA, Dataset::RepublicQA, Dataset::Custom];

    pub fn name(self) -> &'static str {
        match self {
            Dataset::ProntoQA => "ProntoQA",
            Dataset::ProofWriter => "ProofWriter",
            Dataset::Folio => "FOLIO",
            Dataset::ProverQA => "ProverQA",
            Dataset::RepublicQA => "RepublicQA",
            Dataset::Custom => "Custom",
        }
    }

    /// Only True and False are valid gold labels.
    pub fn two_valued(self) -> bool {
        self == Dataset::ProntoQA
    }
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dataset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Dataset::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown dataset format {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub id: String,
    pub context: String,
    pub question: String,
    #[serde(rename = "label")]
    pub gold_label: Label,
    pub dataset: Dataset,
    #[serde(default, rename = "explanation", skip_serializing_if = "Option::is_none")]
    pub gold_explanation: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct SchemaError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{} schema error(s), first: {}", .0.len(), .0[0])]
    Schema(Vec<SchemaError>),
}

/// Field names tried, in order, for each common-schema field.
struct Adapter {
    id: &'static [&'static str],
    context: &'static [&'static str],
    question: &'static [&'static str],
    /// Bare statements that get wrapped into "Is the statement '…' correct?".
    statement: &'static [&'static str],
    label: &'static [&'static str],
    explanation: &'static [&'static str],
}

fn adapter(d: Dataset) -> Adapter {
    match d {
        Dataset::ProntoQA | Dataset::ProofWriter | Dataset::ProverQA => Adapter {
            id: &["id"],
            context: &["context"],
            question: &["question"],
            statement: &[],
            label: &["answer", "label"],
            explanation: &[],
        },
        Dataset::Folio => Adapter {
            id: &["id", "example_id"],
            context: &["context", "premises"],
            question: &["question"],
            statement: &["conclusion"],
            label: &["answer", "label"],
            explanation: &[],
        },
        Dataset::RepublicQA => Adapter {
            id: &["id"],
            context: &["context"],
            question: &["question"],
            statement: &["proposition"],
            label: &["label", "answer"],
            explanation: &["explanation", "gold_explanation"],
        },
        Dataset::Custom => Adapter {
            id: &["id"],
            context: &["context"],
            question: &["question"],
            statement: &[],
            label: &["label"],
            explanation: &["explanation"],
        },
    }
}

fn field<'a>(obj: &'a Map<String, Value>, keys: &[&str]) -> Option<&'a Value> {
    keys.iter().find_map(|k| obj.get(*k))
}

/// Strings, or arrays of strings joined by newlines.
fn text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Array(items) => items.iter().map(|i| i.as_str().map(str::to_string)).collect::<Option<Vec<_>>>().map(|v| v.join("\n")),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

/// A label string, or an option letter resolved against `options` entries
/// such as `"A) True"`.
fn gold(v: &Value, options: Option<&Value>) -> Result<Label, String> {
    let s = v.as_str().ok_or("label is not a string")?.trim();
    if let Some(l) = Label::parse_loose(s) {
        return Ok(l);
    }
    if let Some(opts) = options.and_then(Value::as_array) {
        for o in opts.iter().filter_map(Value::as_str) {
            if let Some(rest) = o.trim().strip_prefix(s) {
                let rest = rest.trim_start_matches([')', '.', ':', ' ']);
                if let Some(l) = Label::parse_loose(rest) {
                    return Ok(l);
                }
            }
        }
    }
    Err(format!("unrecognized label {s:?}"))
}

fn adapt(obj: &Map<String, Value>, d: Dataset, line: usize) -> Result<ProblemInstance, String> {
    let a = adapter(d);
    let id = field(obj, a.id).and_then(text).unwrap_or_else(|| format!("{}-{line}", d.name().to_lowercase()));
    let context = field(obj, a.context).map(|v| text(v).ok_or("context is not text")).transpose()?.unwrap_or_default();
    let question = match field(obj, a.question).and_then(text) {
        Some(q) => q,
        None => {
            let s = field(obj, a.statement).and_then(text).ok_or("missing question")?;
            format!("Is the statement '{}' correct?", s.trim())
        }
    };
    let gold_label = gold(field(obj, a.label).ok_or("missing label")?, obj.get("options"))?;
    if d.two_valued() && gold_label == Label::Uncertain {
        return Err(format!("{d} labels must be True or False"));
    }
    let gold_explanation = match field(obj, a.explanation) {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(vec![s.clone()]),
        Some(v) => Some(
            v.as_array()
                .and_then(|xs| xs.iter().map(|x| x.as_str().map(str::to_string)).collect::<Option<Vec<_>>>())
                .ok_or("explanation must be a string or a list of strings")?,
        ),
    };
    Ok(ProblemInstance { id, context, question, gold_label, dataset: d, gold_explanation })
}

/// Reads a line-delimited file. All schema violations are collected.
pub fn load_dataset(path: &Path, format: Dataset) -> Result<Vec<ProblemInstance>, LoadError> {
    let io_err = |source| LoadError::Io { path: path.display().to_string(), source };
    let reader = BufReader::new(File::open(path).map_err(io_err)?);
    let mut out = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let n = i + 1;
        let parsed = serde_json::from_str::<Value>(&line).map_err(|e| e.to_string()).and_then(|v| match v {
            Value::Object(obj) => adapt(&obj, format, n),
            _ => Err("record is not an object".into()),
        });
        match parsed {
            Ok(inst) => out.push(inst),
            Err(message) => errors.push(SchemaError { line: n, message }),
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(LoadError::Schema(errors))
    }
}

/// Writes instances in the common (`Custom`) schema.
pub fn write_dataset(path: &Path, instances: &[ProblemInstance]) -> io::Result<()> {
    let mut f = File::create(path)?;
    for inst in instances {
        writeln!(f, "{}", serde_json::to_string(inst).map_err(io::Error::other)?)?;
    }
    Ok(())
}

pub fn read_records(path: &Path) -> io::Result<Vec<PredictionRecord>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.push(rec);
    }
    Ok(out)
}

/// Ids already present in a results file; a torn last line is ignored.
pub fn completed_ids(path: &Path) -> io::Result<BTreeSet<String>> {
    if !path.exists() {
        return Ok(BTreeSet::new());
    }
    let mut ids = BTreeSet::new();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        if let Ok(v) = serde_json::from_str::<Value>(&line) {
            if let Some(id) = v.get("instance_id").and_then(Value::as_str) {
                ids.insert(id.to_string());
            }
        }
    }
    Ok(ids)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub count: usize,
    pub correct: usize,
    pub accuracy: f64,
}

impl Tally {
    fn add(&mut self, correct: bool) {
        self.count += 1;
        self.correct += usize::from(correct);
    }

    fn finish(mut self) -> Self {
        self.accuracy = if self.count == 0 { 0.0 } else { self.correct as f64 / self.count as f64 };
        self
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RelationSplit {
    /// Squares with a usable contrary.
    pub contrary_cases: Tally,
    pub contradictory_only: Tally,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub method: String,
    pub backend: String,
    pub model: String,
    pub config_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub started: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finished: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub overall_accuracy: f64,
    pub total: usize,
    pub correct: usize,
    /// Keyed by gold label.
    pub per_label: BTreeMap<Label, Tally>,
    pub by_relation: RelationSplit,
    pub per_path: BTreeMap<ResolutionPath, usize>,
    pub per_dataset: BTreeMap<Dataset, Tally>,
    pub run_metadata: RunMetadata,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no prediction for {} instance(s): {}", .0.len(), .0.join(", "))]
pub struct MissingPrediction(pub Vec<String>);

pub fn evaluate(
    records: &[PredictionRecord],
    instances: &[ProblemInstance],
    run_metadata: RunMetadata,
) -> Result<EvalReport, MissingPrediction> {
    let by_id: BTreeMap<&str, &PredictionRecord> = records.iter().map(|r| (r.instance_id.as_str(), r)).collect();
    let missing: Vec<String> = instances.iter().filter(|i| !by_id.contains_key(i.id.as_str())).map(|i| i.id.clone()).collect();
    if !missing.is_empty() {
        return Err(MissingPrediction(missing));
    }
    let mut overall = Tally::default();
    let mut per_label: BTreeMap<Label, Tally> = BTreeMap::new();
    let mut per_dataset: BTreeMap<Dataset, Tally> = BTreeMap::new();
    let mut per_path: BTreeMap<ResolutionPath, usize> = BTreeMap::new();
    let mut split = RelationSplit::default();
    for inst in instances {
        let rec = by_id[inst.id.as_str()];
        let ok = rec.final_verdict.label == inst.gold_label;
        overall.add(ok);
        per_label.entry(inst.gold_label).or_default().add(ok);
        per_dataset.entry(inst.dataset).or_default().add(ok);
        *per_path.entry(rec.resolution_path).or_default() += 1;
        if rec.square.has_contrary() {
            split.contrary_cases.add(ok);
        } else {
            split.contradictory_only.add(ok);
        }
    }
    let overall = overall.finish();
    Ok(EvalReport {
        overall_accuracy: overall.accuracy,
        total: overall.count,
        correct: overall.correct,
        per_label: per_label.into_iter().map(|(k, t)| (k, t.finish())).collect(),
        by_relation: RelationSplit {
            contrary_cases: split.contrary_cases.finish(),
            contradictory_only: split.contradictory_only.finish(),
        },
        per_path,
        per_dataset: per_dataset.into_iter().map(|(k, t)| (k, t.finish())).collect(),
        run_metadata,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportStyle {
    Json,
    Markdown,
}

fn pct(x: f64) -> String {
    format!("{:.2}", x * 100.0)
}

/// Method × dataset accuracy table.
pub fn markdown_table(rows: &[(&str, &EvalReport)]) -> String {
    let datasets: BTreeSet<Dataset> = rows.iter().flat_map(|(_, r)| r.per_dataset.keys().copied()).collect();
    let mut out = String::from("| Method |");
    for d in &datasets {
        let _ = write!(out, " {d} |");
    }
    out.push_str(" Overall |\n|---|");
    out.push_str(&"---|".repeat(datasets.len() + 1));
    out.push('\n');
    for (method, r) in rows {
        let _ = write!(out, "| {method} |");
        for d in &datasets {
            match r.per_dataset.get(d) {
                Some(t) => {
                    let _ = write!(out, " {} |", pct(t.accuracy));
                }
                None => out.push_str(" - |"),
            }
        }
        let _ = writeln!(out, " {} |", pct(r.overall_accuracy));
    }
    out
}

pub fn render_markdown(r: &EvalReport) -> String {
    let method = if r.run_metadata.method.is_empty() { "LogicAgent" } else { r.run_metadata.method.as_str() };
    let mut out = format!("# Evaluation report\n\n{}\n", markdown_table(&[(method, r)]));
    out.push_str("\n## Per dataset\n\n| Dataset | Count | Correct | Accuracy |\n|---|---|---|---|\n");
    for (d, t) in &r.per_dataset {
        let _ = writeln!(out, "| {d} | {} | {} | {} |", t.count, t.correct, pct(t.accuracy));
    }
    out.push_str("\n## Per gold label\n\n| Label | Count | Correct | Accuracy |\n|---|---|---|---|\n");
    for (l, t) in &r.per_label {
        let _ = writeln!(out, "| {l} | {} | {} | {} |", t.count, t.correct, pct(t.accuracy));
    }
    out.push_str("\n## By relation\n\n| Cases | Count | Correct | Accuracy |\n|---|---|---|---|\n");
    for (name, t) in [("Contrary", &r.by_relation.contrary_cases), ("Contradictory only", &r.by_relation.contradictory_only)] {
        let _ = writeln!(out, "| {name} | {} | {} | {} |", t.count, t.correct, pct(t.accuracy));
    }
    out.push_str("\n## Resolution paths\n\n| Path | Count |\n|---|---|\n");
    for (p, n) in &r.per_path {
        let _ = writeln!(out, "| {p:?} | {n} |");
    }
    let m = &r.run_metadata;
    let _ = write!(out, "\nBackend: {} · model: {} · config: {}\n", m.backend, m.model, m.config_hash);
    out
}

pub fn render_report(r: &EvalReport, style: ReportStyle) -> String {
    match style {
        ReportStyle::Json => serde_json::to_string_pretty(r).expect("report serializes") + "\n",
        ReportStyle::Markdown => render_markdown(r),
    }
}

pub fn write_report(r: &EvalReport, path: &Path, style: ReportStyle) -> io::Result<()> {
    fs::write(path, render_report(r, style))
}

pub fn read_report(path: &Path) -> io::Result<EvalReport> {
    serde_json::from_slice(&fs::read(path)?).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}
