//! The reasoning pipeline: structuring, translation, plan and solve for S1
//! and ¬S1, then adjudication.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Mutex};
use std::time::Instant;

use logicagent_core::adjudicate::{
    deep_reflection, direct_resolution, supplemental_resolution, DirectOutcome, ReflectionType, ResolutionPath,
};
use logicagent_core::fol::{validate_cfg, Formula};
use logicagent_core::oracle::{Label, Source, Verdict};
use logicagent_core::semiotic::{
    build_square_from, Position, SemioticConfig, SemioticSquare, SquareDraft, SquarePosition,
};
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::backend::{Backend, CompletionRequest, TokenBudget, DEFAULT_TOKEN_BUDGET};
use crate::bench::ProblemInstance;
use crate::extract::{extract_payload, Payload, Schema};
use crate::prompts::PromptTemplate;

const JSON_REMINDER: &str = "Return only the JSON block.";
const PLAN_REMINDER: &str =
    "Only generate the plan. Do not determine the truth value of the statement. Return only the JSON block.";
const TYPE_REMINDER: &str =
    "The verdict must be the one your reason's type returns. Return only the JSON block.";
const TWO_VALUED: &str = "This task is two-valued: the verdict must be True or False.";
const FALLBACK_STEP: &str = "Evaluate the target against the premises directly.";
const DECISION_STEP: &str = "Final Step: Determine whether the statement is true, false or uncertain.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ablation {
    NoSquare,
    NoPlan,
    NoReflect,
    NoFol,
    NoStatement,
}

impl Ablation {
    pub const ALL: [Ablation; 5] =
        [Ablation::NoSquare, Ablation::NoPlan, Ablation::NoReflect, Ablation::NoFol, Ablation::NoStatement];

    pub fn name(self) -> &'static str {
        match self {
            Ablation::NoSquare => "no_square",
            Ablation::NoPlan => "no_plan",
            Ablation::NoReflect => "no_reflect",
            Ablation::NoFol => "no_fol",
            Ablation::NoStatement => "no_statement",
        }
    }
}

impl fmt::Display for Ablation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Ablation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ablation::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Ablation::ALL.iter().map(|a| a.name()).collect();
            format!("unknown ablation {s:?}, expected one of {}", names.join(", "))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentConfig {
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub ablations: BTreeSet<Ablation>,
    /// Coerce final Uncertain verdicts to True/False.
    pub two_label: bool,
    pub concurrency: usize,
    pub domain_sizes: Vec<usize>,
    pub token_budget: u64,
    /// Re-prompts after an unusable stage output.
    pub stage_retries: u32,
    /// Record wall-clock time per stage. Off for byte-stable fixtures.
    pub timing: bool,
    pub antonyms: logicagent_core::semiotic::AntonymTable,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            model: "gpt-4o".into(),
            temperature: 0.0,
            max_tokens: 2048,
            ablations: BTreeSet::new(),
            two_label: false,
            concurrency: 4,
            domain_sizes: vec![1, 2, 3],
            token_budget: DEFAULT_TOKEN_BUDGET,
            stage_retries: 1,
            timing: true,
            antonyms: Default::default(),
        }
    }
}

impl AgentConfig {
    pub fn has(&self, a: Ablation) -> bool {
        self.ablations.contains(&a)
    }

    pub fn semiotic(&self) -> SemioticConfig {
        SemioticConfig {
            max_domain: self.domain_sizes.iter().copied().max().unwrap_or(3),
            antonyms: self.antonyms.clone(),
            ..SemioticConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Premise {
    pub statement: String,
    #[serde(rename = "FOL")]
    pub formula: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub steps: Vec<String>,
    pub final_step_is_decision: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub fallback: bool,
}

impl Plan {
    fn fallback() -> Self {
        Plan { steps: vec![FALLBACK_STEP.into()], final_step_is_decision: true, fallback: true }
    }

    fn from_steps(mut steps: Vec<String>) -> Self {
        let decides = steps.last().is_some_and(|s| {
            let s = s.to_lowercase();
            s.contains("final") || s.contains("decide") || s.contains("determine")
        });
        if !decides {
            steps.push(DECISION_STEP.into());
        }
        Plan { steps, final_step_is_decision: true, fallback: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReasoningTrace {
    pub position: Position,
    /// None when planning is ablated.
    pub plan: Option<Plan>,
    pub steps: Vec<String>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Structure,
    Translate,
    Plan,
    Solve,
    Reflect,
    ReflectForced,
}

impl Stage {
    pub fn tag(self) -> &'static str {
        match self {
            Stage::Structure => "structure",
            Stage::Translate => "translate",
            Stage::Plan => "plan",
            Stage::Solve => "solve",
            Stage::Reflect => "reflect",
            Stage::ReflectForced => "reflect_forced",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageDiagnostic {
    pub stage: Stage,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<Position>,
    pub attempt: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u64>,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub stages: Vec<StageDiagnostic>,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub instance_id: String,
    pub square: SemioticSquare,
    pub premises: Vec<Premise>,
    pub traces: BTreeMap<Position, ReasoningTrace>,
    pub resolution_path: ResolutionPath,
    #[serde(rename = "final")]
    pub final_verdict: Verdict,
    pub reflection_type: Option<ReflectionType>,
    /// Set when two-label mode replaced a final Uncertain.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub coerced: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    pub diagnostics: Diagnostics,
}

impl PredictionRecord {
    pub fn verdict_of(&self, p: Position) -> Option<Label> {
        self.traces.get(&p).map(|t| t.verdict.label)
    }
}

#[derive(Debug)]
enum StageError {
    Backend,
    Unusable,
}

/// Per-instance state shared by the concurrent branches.
struct Run<'a> {
    backend: &'a dyn Backend,
    cfg: &'a AgentConfig,
    instance: &'a str,
    budget: TokenBudget,
    diagnostics: Mutex<Vec<StageDiagnostic>>,
    warnings: Mutex<Vec<String>>,
}

impl Run<'_> {
    fn warn(&self, msg: String) {
        log::warn!("{}: {msg}", self.instance);
        self.warnings.lock().unwrap_or_else(|p| p.into_inner()).push(msg);
    }

    /// Renders, sends and extracts, re-prompting up to `stage_retries` times
    /// when extraction fails or `accept` rejects the payload.
    fn call<T>(
        &self,
        stage: Stage,
        position: Option<Position>,
        template: PromptTemplate,
        bindings: &BTreeMap<&str, String>,
        schema: Schema,
        suffix: Option<&str>,
        accept: impl Fn(Payload) -> Result<T, &'static str>,
    ) -> Result<T, StageError> {
        let base = template.render(bindings).map_err(|e| {
            self.warn(e.to_string());
            StageError::Backend
        })?;
        let base = match suffix {
            Some(s) => format!("{base}\n\n{s}"),
            None => base,
        };
        let mut reminder: Option<&str> = None;
        for attempt in 1..=1 + self.cfg.stage_retries {
            let prompt = match reminder {
                Some(r) => format!("{base}\n\n{r}"),
                None => base.clone(),
            };
            let mut req = CompletionRequest::new(self.cfg.model.clone(), prompt)
                .tag("instance", self.instance)
                .tag("stage", stage.tag())
                .tag("attempt", attempt)
                .tag("template", template.name())
                .tag("template_version", template.version());
            req.temperature = self.cfg.temperature;
            req.max_tokens = self.cfg.max_tokens;
            if let Some(p) = position {
                req = req.tag("position", format!("{p:?}"));
            }
            let started = Instant::now();
            let result = self.budget.complete(self.backend, &req);
            let wall_ms = self.cfg.timing.then(|| started.elapsed().as_millis() as u64);
            let completion = match result {
                Ok(c) => c,
                Err(e) => {
                    self.warn(format!("{} failed: {e}", stage.tag()));
                    return Err(StageError::Backend);
                }
            };
            self.diagnostics.lock().unwrap_or_else(|p| p.into_inner()).push(StageDiagnostic {
                stage,
                position,
                attempt,
                wall_ms,
                prompt_tokens: completion.prompt_tokens,
                completion_tokens: completion.completion_tokens,
            });
            match extract_payload(&completion.text, schema) {
                Ok(p) => match accept(p.parsed) {
                    Ok(v) => return Ok(v),
                    Err(r) => reminder = Some(r),
                },
                Err(_) => reminder = Some(JSON_REMINDER),
            }
        }
        self.warn(format!("{} output unusable after {} attempt(s)", stage.tag(), 1 + self.cfg.stage_retries));
        Err(StageError::Unusable)
    }

    fn structure(&self, question: &str) -> SquareDraft {
        let bindings = BTreeMap::from([("question", question.to_string())]);
        let res = self.call(Stage::Structure, None, PromptTemplate::SemanticStructuring, &bindings, Schema::Square, None, |p| {
            match p {
                Payload::Square(d) => Ok(d),
                _ => Err(JSON_REMINDER),
            }
        });
        res.unwrap_or_else(|_| {
            self.warn("semantic structuring degraded to S1 passthrough".into());
            SquareDraft::from_s1(passthrough(core_proposition(question)))
        })
    }

    fn translate(&self, context: &str) -> Vec<Premise> {
        if context.trim().is_empty() {
            return Vec::new();
        }
        let bindings = BTreeMap::from([("context", context.to_string())]);
        let raw = match self.call(Stage::Translate, None, PromptTemplate::Translator, &bindings, Schema::Premises, None, |p| {
            match p {
                Payload::Premises(ps) => Ok(ps),
                _ => Err(JSON_REMINDER),
            }
        }) {
            Ok(ps) => ps,
            Err(_) => {
                self.warn("translation degraded to an empty premise list".into());
                return Vec::new();
            }
        };
        let mut out = Vec::new();
        for p in raw {
            let report = validate_cfg(&p.fol);
            match p.fol.parse::<Formula>() {
                Ok(formula) if report.valid => out.push(Premise { statement: p.statement, formula }),
                _ => {
                    let why = report.failures.first().map(|f| f.message.clone()).unwrap_or_default();
                    self.warn(format!("dropped premise {:?}: {why}", p.fol));
                }
            }
        }
        out
    }

    fn premises_text(&self, premises: &[Premise]) -> String {
        if premises.is_empty() {
            return "(none)".into();
        }
        let (fol, statement) = (!self.cfg.has(Ablation::NoFol), !self.cfg.has(Ablation::NoStatement));
        let mut out = Vec::new();
        for p in premises {
            match (statement, fol) {
                (true, true) => out.push(format!("- {}\n  FOL: {}", p.statement, p.formula)),
                (false, _) => out.push(format!("- FOL: {}", p.formula)),
                (true, false) => out.push(format!("- {}", p.statement)),
            }
        }
        out.join("\n")
    }

    fn target_text(&self, t: &SquarePosition) -> String {
        let with_fol = !self.cfg.has(Ablation::NoFol) && !t.fol.is_empty();
        if self.cfg.has(Ablation::NoStatement) && !t.fol.is_empty() {
            return format!("\"{}\"", t.fol);
        }
        if with_fol {
            format!("\"{}\",\n\"{}\"", t.statement, t.fol)
        } else {
            format!("\"{}\"", t.statement)
        }
    }

    fn plan(&self, premises: &str, target: &str, position: Position) -> Plan {
        let bindings = BTreeMap::from([("premises", premises.to_string()), ("target_statement", target.to_string())]);
        let res = self.call(Stage::Plan, Some(position), PromptTemplate::Planner, &bindings, Schema::Plan, None, |p| match p {
            Payload::Plan(steps) if steps.iter().any(|s| claims_verdict(s)) => Err(PLAN_REMINDER),
            Payload::Plan(steps) => Ok(Plan::from_steps(steps)),
            _ => Err(JSON_REMINDER),
        });
        res.unwrap_or_else(|_| Plan::fallback())
    }

    fn branch(&self, square: &SemioticSquare, premises: &[Premise], position: Position) -> ReasoningTrace {
        let target = match position {
            Position::S1 => &square.s1,
            Position::S2 => &square.s2,
            Position::NotS1 => &square.not_s1,
            Position::NotS2 => &square.not_s2,
        };
        let premises_text = self.premises_text(premises);
        let target_text = self.target_text(target);
        let plan = (!self.cfg.has(Ablation::NoPlan)).then(|| self.plan(&premises_text, &target_text, position));
        let plan_text = plan.as_ref().map(|p| p.steps.join("\n")).unwrap_or_default();
        let bindings = BTreeMap::from([
            ("premises", premises_text),
            ("target_statement", target_text),
            ("PLAN", plan_text),
        ]);
        let res = self.call(Stage::Solve, Some(position), PromptTemplate::Solver, &bindings, Schema::Solve, None, |p| match p {
            Payload::Solve { steps, verdict } => Ok((steps, verdict)),
            _ => Err(JSON_REMINDER),
        });
        match res {
            Ok((steps, label)) => ReasoningTrace { position, plan, steps, verdict: Verdict::new(label, Source::Solver) },
            Err(_) => ReasoningTrace {
                position,
                plan,
                steps: Vec::new(),
                verdict: Verdict::new(Label::Uncertain, Source::Default),
            },
        }
    }

    fn execution_text(&self, square: &SemioticSquare, premises: &[Premise], traces: [&ReasoningTrace; 2]) -> String {
        let mut out = format!("Premises:\n{}\n", self.premises_text(premises));
        for t in traces {
            let (name, target) = match t.position {
                Position::S1 => ("S1", &square.s1),
                _ => ("¬S1", &square.not_s1),
            };
            out.push_str(&format!("\n{name}: {}\nReasoning:\n", self.target_text(target)));
            for s in &t.steps {
                out.push_str(s);
                out.push('\n');
            }
            out.push_str(&format!("Verdict: {}\n", t.verdict.label));
        }
        out
    }

    /// Verification of the S1/¬S1 traces. The returned verdict must agree
    /// with the label its type maps to.
    fn quick(&self, execution: &str, s1: Label) -> (Verdict, Option<ReflectionType>) {
        let bindings = BTreeMap::from([("EXECUTION", execution.to_string())]);
        let res = self.call(
            Stage::Reflect,
            None,
            PromptTemplate::ReflectiveVerification,
            &bindings,
            Schema::Verdict,
            None,
            |p| match p {
                Payload::Verdict { verdict, reason } => match ReflectionType::parse_loose(&reason) {
                    Some(t) if t.final_label(s1, verdict) == verdict => Ok((verdict, t)),
                    _ => Err(TYPE_REMINDER),
                },
                _ => Err(JSON_REMINDER),
            },
        );
        match res {
            Ok((label, t)) => (Verdict::new(label, Source::QuickReflection), Some(t)),
            Err(_) => (Verdict::new(Label::Uncertain, Source::Default), None),
        }
    }

    fn forced(&self, execution: &str) -> (Verdict, Option<ReflectionType>) {
        let bindings = BTreeMap::from([("EXECUTION", execution.to_string())]);
        let res = self.call(
            Stage::ReflectForced,
            None,
            PromptTemplate::ReflectiveVerification,
            &bindings,
            Schema::Verdict,
            Some(TWO_VALUED),
            |p| match p {
                Payload::Verdict { verdict, reason } => Ok((verdict, ReflectionType::parse_loose(&reason))),
                _ => Err(JSON_REMINDER),
            },
        );
        match res {
            Ok((label, t)) if label != Label::Uncertain => (Verdict::new(label, Source::QuickReflection), t),
            _ => (Verdict::new(Label::False, Source::Default), None),
        }
    }
}

/// `X` from "Is the statement 'X' correct?", else the whole question.
pub fn core_proposition(question: &str) -> String {
    static PATTERN: std::sync::OnceLock<Regex> = std::sync::OnceLock::new();
    let re = PATTERN.get_or_init(|| Regex::new(r#"(?i)is the statement\s*['"‘“](.+)['"’”]\s*correct"#).unwrap());
    match re.captures(question) {
        Some(c) => c[1].trim().to_string(),
        None => question.trim().to_string(),
    }
}

fn passthrough(statement: String) -> SquarePosition {
    SquarePosition { statement, fol: String::new(), formula: None, usable: false }
}

/// A plan step that states a truth value instead of deferring it.
pub fn claims_verdict(step: &str) -> bool {
    static PATTERN: std::sync::OnceLock<Regex> = std::sync::OnceLock::new();
    let re = PATTERN.get_or_init(|| {
        Regex::new(r"(?i)\b(?:statement|conclusion|goal|answer|proposition|s1|it)\s+(?:is|must be)\s+(?:therefore\s+)?(?:true|false|uncertain)\b(\s*/)?").unwrap()
    });
    if step.to_lowercase().contains("whether") {
        return false;
    }
    re.captures_iter(step).any(|c| c.get(1).is_none())
}

pub struct Agent<'a> {
    backend: &'a dyn Backend,
    cfg: &'a AgentConfig,
}

impl<'a> Agent<'a> {
    pub fn new(backend: &'a dyn Backend, cfg: &'a AgentConfig) -> Self {
        Agent { backend, cfg }
    }

    pub fn run(&self, instance: &ProblemInstance) -> PredictionRecord {
        let run = Run {
            backend: self.backend,
            cfg: self.cfg,
            instance: &instance.id,
            budget: TokenBudget::new(self.cfg.token_budget),
            diagnostics: Mutex::new(Vec::new()),
            warnings: Mutex::new(Vec::new()),
        };
        let no_square = self.cfg.has(Ablation::NoSquare);
        let draft = if no_square {
            SquareDraft::from_s1(passthrough(core_proposition(&instance.question)))
        } else {
            run.structure(&instance.question)
        };
        let premises = run.translate(&instance.context);
        let formulas: Vec<Formula> = premises.iter().map(|p| p.formula.clone()).collect();
        let mut square = build_square_from(&draft, &formulas, None, &self.cfg.semiotic());
        if !square.not_s1.usable && square.not_s1.statement.is_empty() {
            let s = square.s1.statement.trim_end_matches('.');
            square.not_s1 = passthrough(format!("It is not the case that {s}"));
        }

        let mut traces = BTreeMap::new();
        let mut reflection_type = None;
        let (path, mut verdict) = if no_square {
            let t1 = run.branch(&square, &premises, Position::S1);
            let v = Verdict::new(t1.verdict.label, Source::DirectResolution);
            traces.insert(Position::S1, t1);
            (ResolutionPath::AblationDirect, v)
        } else {
            let (t1, tn) = std::thread::scope(|s| {
                let neg = s.spawn(|| run.branch(&square, &premises, Position::NotS1));
                let t1 = run.branch(&square, &premises, Position::S1);
                (t1, neg.join().expect("¬S1 branch panicked"))
            });
            let (l1, ln) = (t1.verdict.label, tn.verdict.label);
            let execution = run.execution_text(&square, &premises, [&t1, &tn]);
            traces.insert(Position::S1, t1);
            traces.insert(Position::NotS1, tn);
            if self.cfg.has(Ablation::NoReflect) {
                (ResolutionPath::AblationDirect, Verdict::new(supplemental_resolution(l1, ln), Source::DirectResolution))
            } else {
                match direct_resolution(l1, ln) {
                    DirectOutcome::Final(l) => (ResolutionPath::Direct, Verdict::new(l, Source::DirectResolution)),
                    DirectOutcome::NeedDeep if square.has_contrary() => {
                        let outcome = deep_reflection(l1, |pos| {
                            let t = run.branch(&square, &premises, pos);
                            let label = t.verdict.label;
                            let failed = t.verdict.source == Source::Default;
                            traces.insert(pos, t);
                            if failed {
                                Err(())
                            } else {
                                Ok(label)
                            }
                        });
                        match outcome.label {
                            Some(l) => (ResolutionPath::Deep, Verdict::new(l, Source::DeepReflection)),
                            None => {
                                let (v, t) = run.quick(&execution, l1);
                                reflection_type = t;
                                (ResolutionPath::DeepThenQuick, v)
                            }
                        }
                    }
                    DirectOutcome::NeedQuick | DirectOutcome::NeedDeep => {
                        let (v, t) = run.quick(&execution, l1);
                        reflection_type = t;
                        (ResolutionPath::Quick, v)
                    }
                }
            }
        };

        let mut coerced = false;
        if self.cfg.two_label && verdict.label == Label::Uncertain {
            let neg = traces.get(&Position::NotS1).cloned().unwrap_or_else(|| ReasoningTrace {
                position: Position::NotS1,
                plan: None,
                steps: Vec::new(),
                verdict: Verdict::new(Label::Uncertain, Source::Default),
            });
            let execution = run.execution_text(&square, &premises, [&traces[&Position::S1], &neg]);
            let (v, t) = run.forced(&execution);
            verdict = v;
            if t.is_some() {
                reflection_type = t;
            }
            coerced = true;
        }

        let mut stages = run.diagnostics.into_inner().unwrap_or_else(|p| p.into_inner());
        stages.sort_by_key(|d| (d.stage, d.position, d.attempt));
        let diagnostics = Diagnostics {
            prompt_tokens: stages.iter().map(|d| d.prompt_tokens).sum(),
            completion_tokens: stages.iter().map(|d| d.completion_tokens).sum(),
            stages,
        };
        let mut warnings = run.warnings.into_inner().unwrap_or_else(|p| p.into_inner());
        warnings.sort();
        PredictionRecord {
            instance_id: instance.id.clone(),
            square,
            premises,
            traces,
            resolution_path: path,
            final_verdict: verdict,
            reflection_type,
            coerced,
            warnings,
            diagnostics,
        }
    }

    /// Runs every instance not in `skip` on up to `concurrency` threads and
    /// hands records to `emit` in input order.
    pub fn run_batch(
        &self,
        instances: &[ProblemInstance],
        skip: &BTreeSet<String>,
        mut emit: impl FnMut(PredictionRecord),
    ) {
        let todo: Vec<&ProblemInstance> = instances.iter().filter(|i| !skip.contains(&i.id)).collect();
        let width = self.cfg.concurrency.clamp(1, todo.len().max(1));
        let next = AtomicUsize::new(0);
        let (tx, rx) = mpsc::channel();
        std::thread::scope(|s| {
            for _ in 0..width {
                let tx = tx.clone();
                let (next, todo) = (&next, &todo);
                s.spawn(move || loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some(inst) = todo.get(i) else { break };
                    if tx.send((i, self.run(inst))).is_err() {
                        break;
                    }
                });
            }
            drop(tx);
            let mut pending = BTreeMap::new();
            let mut want = 0;
            for (i, rec) in rx {
                pending.insert(i, rec);
                while let Some(rec) = pending.remove(&want) {
                    emit(rec);
                    want += 1;
                }
            }
        });
    }
}

/// True when the recorded path matches the per-position verdicts.
pub fn path_consistent(rec: &PredictionRecord, cfg: &AgentConfig) -> bool {
    if cfg.has(Ablation::NoSquare) || cfg.has(Ablation::NoReflect) {
        return rec.resolution_path == ResolutionPath::AblationDirect;
    }
    let (Some(l1), Some(ln)) = (rec.verdict_of(Position::S1), rec.verdict_of(Position::NotS1)) else {
        return false;
    };
    match (direct_resolution(l1, ln), rec.resolution_path) {
        (DirectOutcome::Final(_), ResolutionPath::Direct) => true,
        (DirectOutcome::NeedQuick, ResolutionPath::Quick) => true,
        (DirectOutcome::NeedDeep, ResolutionPath::Deep | ResolutionPath::DeepThenQuick) => rec.square.has_contrary(),
        (DirectOutcome::NeedDeep, ResolutionPath::Quick) => !rec.square.has_contrary(),
        _ => false,
    }
}
