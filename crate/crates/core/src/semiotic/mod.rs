//! Semiotic squares: contrary construction, existential import and
//! truth-table verification of the square's relations.

mod antonym;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::fol::{render_formula, validate_formula, BinOp, Formula, Quantifier, ValidationPolicy};
use crate::oracle::{self, entail, find_model, FiniteModel, Label, OracleConfig, OracleError};
use crate::transform::contradictory;
pub use antonym::AntonymTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TemplateRule {
    Rule1,
    Rule2,
    Rule3,
    Rule4,
    Rule5,
    Rule6,
    Other,
}

impl TemplateRule {
    pub fn is_strict(self) -> bool {
        matches!(self, TemplateRule::Rule1 | TemplateRule::Rule2 | TemplateRule::Rule3)
    }

    pub fn is_conditional(self) -> bool {
        matches!(self, TemplateRule::Rule4 | TemplateRule::Rule5 | TemplateRule::Rule6)
    }
}

/// Matches the outermost connective or quantifier against the six templates.
pub fn classify_template(f: &Formula) -> TemplateRule {
    match f {
        Formula::Quantified { quant: Quantifier::ForAll, .. } => TemplateRule::Rule1,
        Formula::Quantified { quant: Quantifier::Exists, .. } => TemplateRule::Rule4,
        Formula::Binary { op: BinOp::And, .. } => TemplateRule::Rule2,
        Formula::Binary { op: BinOp::Iff, .. } => TemplateRule::Rule3,
        Formula::Binary { op: BinOp::Implies, .. } => TemplateRule::Rule5,
        Formula::Binary { op: BinOp::Or, .. } => TemplateRule::Rule6,
        _ => TemplateRule::Other,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{found:?} does not match the {expected} templates")]
pub struct TemplateMismatch {
    pub found: TemplateRule,
    pub expected: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintKind {
    NonEmptyDomain,
    SatisfiableAntecedent,
    AntecedentExclusion,
    InstantiableVariable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportConstraint {
    pub kind: ConstraintKind,
    pub target: Formula,
    pub satisfied: Option<bool>,
}

impl ImportConstraint {
    pub fn new(kind: ConstraintKind, target: Formula) -> Self {
        ImportConstraint { kind, target, satisfied: None }
    }

    /// The formula a model must satisfy to belong to the class this
    /// constraint selects.
    pub fn model_filter(&self) -> Formula {
        match self.kind {
            ConstraintKind::AntecedentExclusion => Formula::not(self.target.clone()).universal_closure(),
            _ => self.target.existential_closure(),
        }
    }
}

/// Strict contraries. Rule 1 on an implication body negates the consequent.
pub fn contrary_strict(f: &Formula) -> Result<Formula, TemplateMismatch> {
    let rule = classify_template(f);
    match (rule, f) {
        (TemplateRule::Rule1, Formula::Quantified { quant, var, body }) => {
            let body = match &**body {
                Formula::Binary { op: BinOp::Implies, lhs, rhs } => Formula::implies((**lhs).clone(), contradictory(rhs)),
                other => contradictory(other),
            };
            Ok(Formula::Quantified { quant: *quant, var: var.clone(), body: alloc::boxed::Box::new(body) })
        }
        (TemplateRule::Rule2 | TemplateRule::Rule3, Formula::Binary { op, lhs, rhs }) => {
            Ok(Formula::binary(*op, (**lhs).clone(), contradictory(rhs)))
        }
        _ => Err(TemplateMismatch { found: rule, expected: "strict" }),
    }
}

/// Conditional contraries with their unevaluated import constraints.
pub fn contrary_conditional(f: &Formula) -> Result<(Formula, Vec<ImportConstraint>), TemplateMismatch> {
    let rule = classify_template(f);
    match (rule, f) {
        (TemplateRule::Rule4, Formula::Quantified { quant, var, body }) => Ok((
            Formula::Quantified { quant: *quant, var: var.clone(), body: alloc::boxed::Box::new(contradictory(body)) },
            alloc::vec![ImportConstraint::new(ConstraintKind::NonEmptyDomain, f.clone())],
        )),
        (TemplateRule::Rule5, Formula::Binary { lhs, rhs, .. }) => Ok((
            Formula::implies((**lhs).clone(), contradictory(rhs)),
            alloc::vec![ImportConstraint::new(ConstraintKind::SatisfiableAntecedent, (**lhs).clone())],
        )),
        (TemplateRule::Rule6, Formula::Binary { lhs, rhs, .. }) => Ok((
            Formula::or((**lhs).clone(), contradictory(rhs)),
            alloc::vec![ImportConstraint::new(ConstraintKind::AntecedentExclusion, (**lhs).clone())],
        )),
        _ => Err(TemplateMismatch { found: rule, expected: "conditional" }),
    }
}

/// Constraints that keep a contrary of this shape from holding vacuously.
pub fn vacuity_constraints(f: &Formula) -> Vec<ImportConstraint> {
    match f {
        Formula::Quantified { quant: Quantifier::ForAll, body, .. } => match &**body {
            Formula::Binary { op: BinOp::Implies, lhs, .. } => {
                alloc::vec![ImportConstraint::new(ConstraintKind::InstantiableVariable, (**lhs).clone())]
            }
            _ => Vec::new(),
        },
        Formula::Quantified { quant: Quantifier::Exists, .. } => {
            alloc::vec![ImportConstraint::new(ConstraintKind::NonEmptyDomain, f.clone())]
        }
        Formula::Binary { op: BinOp::Implies, lhs, .. } => {
            alloc::vec![ImportConstraint::new(ConstraintKind::SatisfiableAntecedent, (**lhs).clone())]
        }
        _ => Vec::new(),
    }
}

/// The template contrary with every constraint it needs, or None for `Other`.
pub fn template_contrary(f: &Formula) -> Option<(ContraryKind, Formula, Vec<ImportConstraint>)> {
    let rule = classify_template(f);
    if rule.is_strict() {
        let s2 = contrary_strict(f).ok()?;
        let constraints = if rule == TemplateRule::Rule1 { vacuity_constraints(&s2) } else { Vec::new() };
        Some((ContraryKind::Strict, s2, constraints))
    } else if rule.is_conditional() {
        let (s2, constraints) = contrary_conditional(f).ok()?;
        Some((ContraryKind::Conditional, s2, constraints))
    } else {
        None
    }
}

/// Evaluates each constraint against the premises. A search that runs out
/// of budget leaves the constraint unsatisfied.
pub fn existential_import_check(
    constraints: &[ImportConstraint],
    premises: &[Formula],
    cfg: &OracleConfig,
) -> Result<Vec<ImportConstraint>, OracleError> {
    let mut out = Vec::with_capacity(constraints.len());
    for c in constraints {
        let outcome = match c.kind {
            ConstraintKind::AntecedentExclusion => {
                entail(premises, &c.target.existential_closure(), cfg).map(|e| e.verdict.label != Label::True)
            }
            _ => {
                let mut fs = premises.to_vec();
                fs.push(c.target.existential_closure());
                oracle::satisfiable(&fs, cfg)
            }
        };
        let satisfied = match outcome {
            Ok(b) => b,
            Err(OracleError::BudgetExceeded(_)) => false,
            Err(e) => return Err(e),
        };
        out.push(ImportConstraint { satisfied: Some(satisfied), ..c.clone() });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContraryKind {
    Strict,
    Conditional,
    ModelAssisted,
    Absent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Position {
    S1,
    S2,
    NotS1,
    NotS2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RelationKind {
    Contrariety,
    Contradiction,
    Implication,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationReport {
    pub pair: RelationKind,
    pub between: (Position, Position),
    pub holds: bool,
    pub witness: Option<FiniteModel>,
    pub domains_checked: Vec<usize>,
}

/// One corner of the square: natural-language text and its formula.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "PositionRepr", into = "PositionRepr")]
pub struct SquarePosition {
    pub statement: String,
    pub fol: String,
    pub formula: Option<Formula>,
    /// False for the placeholder positions of a square without a contrary.
    pub usable: bool,
}

#[derive(Serialize, Deserialize)]
struct PositionRepr {
    #[serde(default)]
    statement: String,
    #[serde(rename = "FOL", default)]
    fol: String,
    #[serde(default, skip_serializing_if = "core::ops::Not::not")]
    unusable: bool,
}

impl From<PositionRepr> for SquarePosition {
    fn from(r: PositionRepr) -> Self {
        let mut p = SquarePosition::from_text(r.statement, r.fol);
        p.usable = !r.unusable && p.formula.is_some();
        p
    }
}

impl From<SquarePosition> for PositionRepr {
    fn from(p: SquarePosition) -> Self {
        PositionRepr { statement: p.statement, fol: p.fol, unusable: !p.usable }
    }
}

impl SquarePosition {
    pub fn new(statement: impl Into<String>, formula: Formula) -> Self {
        SquarePosition { statement: statement.into(), fol: render_formula(&formula), formula: Some(formula), usable: true }
    }

    /// Keeps the text as written; `formula` is None when it does not parse.
    pub fn from_text(statement: impl Into<String>, fol: impl Into<String>) -> Self {
        let fol = fol.into();
        let formula = crate::fol::parse_formula(&fol).ok();
        SquarePosition { statement: statement.into(), usable: formula.is_some(), fol, formula }
    }

    pub fn unusable() -> Self {
        SquarePosition { statement: String::new(), fol: String::new(), formula: None, usable: false }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquareValidation {
    pub truth_table_ok: bool,
    pub cfg_ok: bool,
    pub llm_ok: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemioticSquare {
    #[serde(rename = "concept_A", default)]
    pub concept_a: String,
    #[serde(rename = "concept_B", default)]
    pub concept_b: String,
    #[serde(rename = "S1")]
    pub s1: SquarePosition,
    #[serde(rename = "S2")]
    pub s2: SquarePosition,
    #[serde(rename = "not_S1")]
    pub not_s1: SquarePosition,
    #[serde(rename = "not_S2")]
    pub not_s2: SquarePosition,
    pub contrary_kind: ContraryKind,
    #[serde(default)]
    pub constraints: Vec<ImportConstraint>,
    #[serde(default)]
    pub validation: SquareValidation,
    /// Antonym-looking predicates missing from the antonym table.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

impl SemioticSquare {
    pub fn has_contrary(&self) -> bool {
        self.contrary_kind != ContraryKind::Absent && self.s2.usable && self.not_s2.usable
    }
}

/// What the structuring stage proposed. Only S1 is required.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquareDraft {
    #[serde(rename = "concept_A", default)]
    pub concept_a: String,
    #[serde(rename = "concept_B", default)]
    pub concept_b: String,
    #[serde(rename = "S1")]
    pub s1: Option<SquarePosition>,
    #[serde(rename = "S2", default)]
    pub s2: Option<SquarePosition>,
    #[serde(rename = "not_S1", default)]
    pub not_s1: Option<SquarePosition>,
    #[serde(rename = "not_S2", default)]
    pub not_s2: Option<SquarePosition>,
}

impl SquareDraft {
    pub fn from_s1(s1: SquarePosition) -> Self {
        SquareDraft { s1: Some(s1), ..Self::default() }
    }
}

/// Proposes contrary candidates when no template applies or the template
/// contrary is rejected.
pub trait ContraryGenerator {
    fn candidates(&self, s1: &SquarePosition, premises: &[Formula]) -> Vec<SquarePosition>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SemioticConfig {
    pub max_domain: usize,
    pub budget: u64,
    pub antonyms: AntonymTable,
}

impl Default for SemioticConfig {
    fn default() -> Self {
        SemioticConfig { max_domain: 3, budget: oracle::DEFAULT_BUDGET, antonyms: AntonymTable::default() }
    }
}

impl SemioticConfig {
    pub fn oracle(&self) -> OracleConfig {
        OracleConfig { domain_sizes: (1..=self.max_domain).collect(), budget: self.budget }
    }
}

fn canonical(p: &SquarePosition, cfg: &SemioticConfig) -> Option<Formula> {
    p.formula.as_ref().filter(|_| p.usable).map(|f| cfg.antonyms.canonicalize(f))
}

fn check(
    pair: RelationKind,
    between: (Position, Position),
    formulas: Vec<Formula>,
    cfg: &SemioticConfig,
) -> Result<RelationReport, OracleError> {
    let ocfg = cfg.oracle();
    let witness = find_model(&formulas, &ocfg)?;
    Ok(RelationReport { pair, between, holds: witness.is_none(), witness, domains_checked: ocfg.domain_sizes })
}

/// Contradiction is checked over all models. Contrariety and implication
/// are checked over the models admitted by the satisfied constraints.
pub fn verify_relations(square: &SemioticSquare, cfg: &SemioticConfig) -> Result<Vec<RelationReport>, OracleError> {
    let mut reports = Vec::new();
    let (Some(s1), Some(ns1)) = (canonical(&square.s1, cfg), canonical(&square.not_s1, cfg)) else {
        return Ok(reports);
    };
    reports.push(check(
        RelationKind::Contradiction,
        (Position::S1, Position::NotS1),
        alloc::vec![Formula::iff(s1.clone(), ns1.clone())],
        cfg,
    )?);
    if !square.has_contrary() {
        return Ok(reports);
    }
    let (Some(s2), Some(ns2)) = (canonical(&square.s2, cfg), canonical(&square.not_s2, cfg)) else {
        return Ok(reports);
    };
    reports.push(check(
        RelationKind::Contradiction,
        (Position::S2, Position::NotS2),
        alloc::vec![Formula::iff(s2.clone(), ns2.clone())],
        cfg,
    )?);
    let class: Vec<Formula> = model_class(&square.constraints).into_iter().map(|f| cfg.antonyms.canonicalize(&f)).collect();
    let with = |extra: [Formula; 2]| {
        let mut fs = class.clone();
        fs.extend(extra);
        fs
    };
    reports.push(check(RelationKind::Contrariety, (Position::S1, Position::S2), with([s1.clone(), s2.clone()]), cfg)?);
    reports.push(check(
        RelationKind::Implication,
        (Position::S1, Position::NotS2),
        with([s1.clone(), Formula::not(ns2)]),
        cfg,
    )?);
    reports.push(check(RelationKind::Implication, (Position::S2, Position::NotS1), with([s2, Formula::not(ns1)]), cfg)?);
    Ok(reports)
}

/// Filters for the model class selected by the satisfied constraints.
pub fn model_class(constraints: &[ImportConstraint]) -> Vec<Formula> {
    constraints.iter().filter(|c| c.satisfied == Some(true)).map(ImportConstraint::model_filter).collect()
}

/// A model in the square's class where S1 and S2 are both false.
pub fn both_false_witness(square: &SemioticSquare, cfg: &SemioticConfig) -> Result<Option<FiniteModel>, OracleError> {
    let (Some(s1), Some(s2)) = (canonical(&square.s1, cfg), canonical(&square.s2, cfg)) else {
        return Ok(None);
    };
    if !square.has_contrary() {
        return Ok(None);
    }
    let mut fs: Vec<Formula> = model_class(&square.constraints).iter().map(|f| cfg.antonyms.canonicalize(f)).collect();
    fs.push(Formula::not(s1));
    fs.push(Formula::not(s2));
    find_model(&fs, &cfg.oracle())
}

pub fn build_square(
    s1: &SquarePosition,
    premises: &[Formula],
    generator: Option<&dyn ContraryGenerator>,
    cfg: &SemioticConfig,
) -> SemioticSquare {
    build_square_from(&SquareDraft::from_s1(s1.clone()), premises, generator, cfg)
}

struct Candidate {
    kind: ContraryKind,
    position: SquarePosition,
    constraints: Vec<ImportConstraint>,
}

/// Builds a square from a draft. ¬S1 and ¬S2 are always derived
/// symbolically; drafted positions are kept only when the oracle finds them
/// equivalent to the derived ones.
pub fn build_square_from(
    draft: &SquareDraft,
    premises: &[Formula],
    generator: Option<&dyn ContraryGenerator>,
    cfg: &SemioticConfig,
) -> SemioticSquare {
    let s1 = draft.s1.clone().unwrap_or_else(SquarePosition::unusable);
    let mut square = SemioticSquare {
        concept_a: draft.concept_a.clone(),
        concept_b: draft.concept_b.clone(),
        s1: s1.clone(),
        s2: SquarePosition::unusable(),
        not_s1: SquarePosition::unusable(),
        not_s2: SquarePosition::unusable(),
        contrary_kind: ContraryKind::Absent,
        constraints: Vec::new(),
        validation: SquareValidation::default(),
        flags: Vec::new(),
    };
    let policy = ValidationPolicy::default();
    let Some(s1f) = s1.formula.clone().filter(|f| validate_formula(f, policy).valid) else {
        return square;
    };
    square.not_s1 = adopt(draft.not_s1.as_ref(), contradictory(&s1f), &s1.statement, cfg);

    let mut candidates = Vec::new();
    if let Some((kind, s2f, constraints)) = template_contrary(&s1f) {
        let position = match draft.s2.as_ref().filter(|d| same_formula(d, &s2f, cfg)) {
            Some(d) => d.clone(),
            None => SquarePosition::new(render_formula(&s2f), s2f),
        };
        candidates.push(Candidate { kind, position, constraints });
    }
    let mut proposed: Vec<SquarePosition> = draft.s2.iter().cloned().collect();
    if let Some(g) = generator {
        proposed.extend(g.candidates(&s1, premises));
    }
    for p in proposed {
        let Some(f) = p.formula.clone() else { continue };
        if candidates.iter().any(|c| same_formula(&c.position, &cfg.antonyms.canonicalize(&f), cfg)) {
            continue;
        }
        let constraints = vacuity_constraints(&cfg.antonyms.canonicalize(&f));
        candidates.push(Candidate { kind: ContraryKind::ModelAssisted, position: p, constraints });
    }

    let mut first_constraints = None;
    for c in candidates {
        let Some(s2f) = c.position.formula.clone().filter(|f| validate_formula(f, policy).valid) else { continue };
        let Ok(constraints) = existential_import_check(&c.constraints, premises, &cfg.oracle()) else { continue };
        if first_constraints.is_none() {
            first_constraints = Some(constraints.clone());
        }
        if constraints.iter().any(|k| k.satisfied != Some(true)) {
            continue;
        }
        let trial = SemioticSquare {
            s2: c.position.clone(),
            not_s2: adopt(draft.not_s2.as_ref(), contradictory(&s2f), &c.position.statement, cfg),
            contrary_kind: c.kind,
            constraints,
            ..square.clone()
        };
        match verify_relations(&trial, cfg) {
            Ok(reports) if reports.iter().all(|r| r.holds) => {
                square = trial;
                square.validation.truth_table_ok = true;
                break;
            }
            _ => continue,
        }
    }
    if square.contrary_kind == ContraryKind::Absent {
        square.constraints = first_constraints.unwrap_or_default();
        square.validation.truth_table_ok =
            verify_relations(&square, cfg).map(|rs| rs.iter().all(|r| r.holds)).unwrap_or(false);
    }
    square.validation.cfg_ok = [&square.s1, &square.s2, &square.not_s1, &square.not_s2]
        .iter()
        .filter(|p| p.usable)
        .all(|p| p.formula.as_ref().is_some_and(|f| validate_formula(f, policy).valid));
    let formulas: Vec<&Formula> =
        [&square.s1, &square.s2, &square.not_s1, &square.not_s2].iter().filter_map(|p| p.formula.as_ref()).collect();
    square.flags = cfg.antonyms.undeclared(formulas).into_iter().map(|n| format!("undeclared antonym: {n}")).collect();
    square
}

/// Uses the drafted position when it is equivalent to `derived`, otherwise
/// the derived formula with a negated restatement.
fn adopt(draft: Option<&SquarePosition>, derived: Formula, base_statement: &str, cfg: &SemioticConfig) -> SquarePosition {
    match draft.filter(|d| same_formula(d, &derived, cfg)) {
        Some(d) => SquarePosition { usable: true, ..d.clone() },
        None => {
            let statement = format!("It is not the case that {}", base_statement.trim_end_matches('.'));
            SquarePosition::new(statement, derived)
        }
    }
}

fn same_formula(p: &SquarePosition, f: &Formula, cfg: &SemioticConfig) -> bool {
    let Some(g) = p.formula.as_ref() else { return false };
    let (g, f) = (cfg.antonyms.canonicalize(g), cfg.antonyms.canonicalize(f));
    g == f || oracle::equivalent(&g, &f, &cfg.oracle()).unwrap_or(false)
}
