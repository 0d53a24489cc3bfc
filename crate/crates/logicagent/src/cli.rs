//! Command-line interface. Exit codes: 0 success, 1 domain failure, 2 usage.

use std::collections::BTreeSet;
use std::fs::OpenOptions;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use logicagent_core::fol::{validate_cfg, Formula, Term};
use logicagent_core::oracle::{entail, OracleConfig, OracleWarning, DEFAULT_BUDGET};
use logicagent_core::semiotic::{build_square, verify_relations, SemioticConfig, SquarePosition};
use logicagent_core::textmetrics::corpus_stats;
use serde_json::{json, Value};

use crate::agent::{Ablation, Agent};
use crate::backend::{cache_clear, cache_stats};
use crate::bench::{self, Dataset, ReportStyle, RunMetadata};
use crate::config::{BackendKind, Config};

#[derive(Parser)]
#[command(name = "logicagent", version, about = "Semiotic-square guided logical reasoning")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a formula.
    Parse {
        formula: String,
        #[arg(long)]
        json: bool,
    },
    /// Build and verify a semiotic square from an S1 formula.
    Square {
        formula: String,
        #[arg(long)]
        statement: Option<String>,
        /// One premise formula per line.
        #[arg(long)]
        premises: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        domain_sizes: Vec<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Three-valued entailment of a query by a premise file.
    Entail {
        #[arg(long)]
        premises: PathBuf,
        query: String,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        domain_sizes: Vec<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Run the pipeline over a dataset (requires --config).
    Run {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "Custom")]
        format: Dataset,
        #[arg(long, default_value = "results.jsonl")]
        out: PathBuf,
        #[arg(long)]
        backend: Option<String>,
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        ablate: Vec<Ablation>,
        #[arg(long)]
        two_label: bool,
        #[arg(long)]
        concurrency: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        domain_sizes: Option<Vec<usize>>,
        /// Also write an evaluation report (JSON when the name ends in .json).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Score a results file against a dataset.
    Eval {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "Custom")]
        format: Dataset,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Readability and lexical-diversity metrics of a text or dataset.
    Metrics {
        file: PathBuf,
        /// Treat the file as a dataset and measure context plus question.
        #[arg(long)]
        format: Option<Dataset>,
        #[arg(long)]
        json: bool,
    },
    /// Inspect or clear the response cache.
    Cache {
        #[arg(value_parser = ["stats", "clear"])]
        action: String,
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

enum Failure {
    Domain(String),
    Usage(String),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

fn domain(e: impl std::fmt::Display) -> Failure {
    Failure::Domain(e.to_string())
}

pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match dispatch(cli) {
        Ok(code) => code,
        Err(Failure::Domain(m)) => {
            eprintln!("error: {m}");
            1
        }
        Err(Failure::Usage(m)) => {
            eprintln!("usage error: {m}");
            2
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, Failure> {
    let mut out = io::stdout().lock();
    match cli.command {
        Command::Parse { formula, json } => cmd_parse(&formula, json, &mut out),
        Command::Square { formula, statement, premises, domain_sizes, json } => {
            let premises = match premises {
                Some(p) => read_formulas(&p)?,
                None => Vec::new(),
            };
            cmd_square(&formula, statement, &premises, &domain_sizes, json, &mut out)
        }
        Command::Entail { premises, query, domain_sizes, json } => {
            cmd_entail(&read_formulas(&premises)?, &query, &domain_sizes, json, &mut out)
        }
        Command::Run { dataset, format, out: results, backend, model, ablate, two_label, concurrency, domain_sizes, report } => {
            let Some(path) = cli.config else {
                return Err(Failure::Usage("run requires --config".into()));
            };
            let mut cfg = Config::load(&path).map_err(domain)?;
            if let Some(b) = backend {
                cfg.backend.kind = match b.as_str() {
                    "http" => BackendKind::Http,
                    "scripted" => BackendKind::Scripted,
                    other => return Err(Failure::Usage(format!("unknown backend {other:?}"))),
                };
            }
            if let Some(m) = model {
                cfg.agent.model = m;
            }
            cfg.agent.ablations.extend(ablate);
            cfg.agent.two_label |= two_label || format.two_valued();
            if let Some(c) = concurrency {
                cfg.agent.concurrency = c;
            }
            if let Some(d) = domain_sizes {
                cfg.agent.domain_sizes = d;
            }
            cmd_run(&cfg, &dataset, format, &results, report.as_deref())
        }
        Command::Eval { results, dataset, format, out: dest, json } => {
            let records = bench::read_records(&results)?;
            let instances = bench::load_dataset(&dataset, format).map_err(|e| schema_failure(&e))?;
            let meta = RunMetadata { method: "LogicAgent".into(), ..RunMetadata::default() };
            let report = bench::evaluate(&records, &instances, meta).map_err(domain)?;
            let style = if json { ReportStyle::Json } else { ReportStyle::Markdown };
            match dest {
                Some(p) => bench::write_report(&report, &p, style)?,
                None => write!(out, "{}", bench::render_report(&report, style))?,
            }
            Ok(0)
        }
        Command::Metrics { file, format, json } => {
            let text = match format {
                Some(f) => bench::load_dataset(&file, f)
                    .map_err(|e| schema_failure(&e))?
                    .iter()
                    .map(|i| format!("{}\n{}", i.context, i.question))
                    .collect::<Vec<_>>()
                    .join("\n"),
                None => std::fs::read_to_string(&file)?,
            };
            let stats = corpus_stats(&text).map_err(domain)?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&stats).map_err(domain)?)?;
            } else {
                writeln!(
                    out,
                    "FKGL {:.2}\nTTR {:.4}\nMTLD {:.2}\nUBR {:.4}\nvocab {}\ntokens {}\nsentences {}\nsyllables {}",
                    stats.fkgl,
                    stats.ttr,
                    stats.mtld,
                    stats.ubr,
                    stats.vocab_size,
                    stats.token_count,
                    stats.sentence_count,
                    stats.syllable_count
                )?;
            }
            Ok(0)
        }
        Command::Cache { action, dir } => {
            let dir = match (dir, cli.config) {
                (Some(d), _) => d,
                (None, Some(c)) => Config::load(&c).map_err(domain)?.backend.cache_dir.ok_or_else(|| {
                    Failure::Usage("the configuration has no cache_dir".into())
                })?,
                (None, None) => return Err(Failure::Usage("cache needs --dir or --config".into())),
            };
            if action == "clear" {
                writeln!(out, "removed {} entries", cache_clear(&dir)?)?;
            } else {
                let s = cache_stats(&dir)?;
                writeln!(out, "{} entries, {} bytes", s.entries, s.bytes)?;
            }
            Ok(0)
        }
    }
}

fn schema_failure(e: &bench::LoadError) -> Failure {
    match e {
        bench::LoadError::Schema(errs) => {
            Failure::Domain(errs.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("\n"))
        }
        other => domain(other),
    }
}

/// One formula per line; blank lines and `#` comments are skipped.
fn read_formulas(path: &Path) -> Result<Vec<Formula>, Failure> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f = line.parse::<Formula>().map_err(|e| Failure::Domain(format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.push(f);
    }
    Ok(out)
}

fn term_json(t: &Term) -> Value {
    match t {
        Term::Var(n) => json!({"kind": "variable", "name": n}),
        Term::Const(n) => json!({"kind": "constant", "name": n}),
        Term::Func(n, args) => json!({"kind": "function", "name": n, "args": args.iter().map(term_json).collect::<Vec<_>>()}),
    }
}

pub fn ast_json(f: &Formula) -> Value {
    match f {
        Formula::Atom { pred, args } => {
            json!({"type": "atom", "predicate": pred, "args": args.iter().map(term_json).collect::<Vec<_>>()})
        }
        Formula::Not(inner) => json!({"type": "not", "operand": ast_json(inner)}),
        Formula::Binary { op, lhs, rhs } => {
            json!({"type": "binary", "op": op.symbol(), "lhs": ast_json(lhs), "rhs": ast_json(rhs)})
        }
        Formula::Quantified { quant, var, body } => {
            json!({"type": "quantified", "quantifier": quant.symbol(), "variable": var, "body": ast_json(body)})
        }
    }
}

fn cmd_parse(text: &str, as_json: bool, out: &mut impl Write) -> Result<i32, Failure> {
    let report = validate_cfg(text);
    let parsed = text.parse::<Formula>().ok();
    if as_json {
        let v = json!({
            "input": text,
            "rendered": parsed.as_ref().map(|f| f.to_string()),
            "ast": parsed.as_ref().map(ast_json),
            "valid": report.valid,
            "failures": report.failures,
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&v).map_err(domain)?)?;
    } else {
        if let Some(f) = &parsed {
            writeln!(out, "{f}")?;
        }
        for fail in &report.failures {
            writeln!(out, "{:?} at {}..{}: {}", fail.check, fail.location.start, fail.location.end, fail.message)?;
        }
        writeln!(out, "{}", if report.valid { "valid" } else { "invalid" })?;
    }
    Ok(if report.valid { 0 } else { 1 })
}

fn cmd_square(
    fol: &str,
    statement: Option<String>,
    premises: &[Formula],
    domain_sizes: &[usize],
    as_json: bool,
    out: &mut impl Write,
) -> Result<i32, Failure> {
    let s1 = SquarePosition::from_text(statement.unwrap_or_else(|| fol.to_string()), fol);
    if !s1.usable || !validate_cfg(fol).valid {
        let report = validate_cfg(fol);
        let why = report.failures.first().map(|f| f.message.clone()).unwrap_or_default();
        return Err(Failure::Domain(format!("S1 is not a valid formula: {why}")));
    }
    let cfg = SemioticConfig { max_domain: domain_sizes.iter().copied().max().unwrap_or(3), ..SemioticConfig::default() };
    let square = build_square(&s1, premises, None, &cfg);
    let relations = verify_relations(&square, &cfg).map_err(domain)?;
    if as_json {
        let v = json!({"square": square, "relations": relations});
        writeln!(out, "{}", serde_json::to_string_pretty(&v).map_err(domain)?)?;
    } else {
        for (name, p) in [("S1", &square.s1), ("S2", &square.s2), ("¬S1", &square.not_s1), ("¬S2", &square.not_s2)] {
            if p.usable {
                writeln!(out, "{name:<4} {}", p.fol)?;
            } else {
                writeln!(out, "{name:<4} (none)")?;
            }
        }
        writeln!(out, "contrary: {:?}", square.contrary_kind)?;
        for c in &square.constraints {
            writeln!(out, "constraint {:?} {} satisfied={:?}", c.kind, c.target, c.satisfied)?;
        }
        for r in &relations {
            writeln!(out, "{:?} {:?}-{:?}: {}", r.pair, r.between.0, r.between.1, if r.holds { "holds" } else { "fails" })?;
        }
        for f in &square.flags {
            writeln!(out, "flag: {f}")?;
        }
    }
    Ok(0)
}

fn cmd_entail(premises: &[Formula], query: &str, domain_sizes: &[usize], as_json: bool, out: &mut impl Write) -> Result<i32, Failure> {
    let q = query.parse::<Formula>().map_err(domain)?;
    let cfg = OracleConfig { domain_sizes: domain_sizes.to_vec(), budget: DEFAULT_BUDGET };
    let result = entail(premises, &q, &cfg).map_err(domain)?;
    if result.warning == Some(OracleWarning::InconsistentPremises) {
        eprintln!("warning: the premises have no model at the checked domain sizes");
    }
    if as_json {
        writeln!(out, "{}", json!({"verdict": result.verdict.label, "warning": result.warning}))?;
    } else {
        writeln!(out, "{}", result.verdict.label)?;
    }
    Ok(0)
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

pub fn method_name(cfg: &Config) -> String {
    let ablations: Vec<&str> = cfg.agent.ablations.iter().map(|a| a.name()).collect();
    if ablations.is_empty() {
        "LogicAgent".into()
    } else {
        format!("LogicAgent ({})", ablations.join(", "))
    }
}

fn cmd_run(cfg: &Config, dataset: &Path, format: Dataset, results: &Path, report: Option<&Path>) -> Result<i32, Failure> {
    let started = unix_now();
    let instances = bench::load_dataset(dataset, format).map_err(|e| schema_failure(&e))?;
    let backend = cfg.build_backend().map_err(domain)?;
    let done: BTreeSet<String> = bench::completed_ids(results)?;
    let mut file = OpenOptions::new().create(true).append(true).open(results)?;
    let agent = Agent::new(backend.as_ref(), &cfg.agent);
    let mut written = 0usize;
    let mut write_err = None;
    agent.run_batch(&instances, &done, |rec| {
        let line = serde_json::to_string(&rec).expect("record serializes");
        if let Err(e) = writeln!(file, "{line}").and_then(|_| file.flush()) {
            write_err.get_or_insert(e);
        }
        written += 1;
    });
    if let Some(e) = write_err {
        return Err(e.into());
    }
    let skipped = instances.iter().filter(|i| done.contains(&i.id)).count();
    eprintln!("{written} record(s) written to {}, {skipped} skipped as already done", results.display());
    if let Some(path) = report {
        let records = bench::read_records(results)?;
        let meta = RunMetadata {
            method: method_name(cfg),
            backend: backend.name().to_string(),
            model: cfg.agent.model.clone(),
            config_hash: cfg.hash(),
            started: Some(started),
            finished: Some(unix_now()),
        };
        let r = bench::evaluate(&records, &instances, meta).map_err(domain)?;
        let style = if path.extension().is_some_and(|e| e == "json") { ReportStyle::Json } else { ReportStyle::Markdown };
        bench::write_report(&r, path, style)?;
        eprintln!("accuracy {:.2}% ({}/{})", r.overall_accuracy * 100.0, r.correct, r.total);
    }
    Ok(0)
}
