//! Finite-model checking: evaluation, enumeration, satisfiability and
//! three-valued entailment over small domains.

mod enumerate;
mod ground;
mod sat;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::fol::{BinOp, Formula, Quantifier, Term};
pub use enumerate::ModelIter;
use ground::{ground, AtomTable, ConstantMappings};
use sat::Cnf;

pub const DEFAULT_BUDGET: u64 = 200_000;
pub const DEFAULT_DOMAIN_SIZES: [usize; 3] = [1, 2, 3];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("constant `{0}` has no interpretation")]
    UnmappedConstant(String),
    #[error("variable `{0}` is not bound")]
    OpenFormula(String),
    #[error("function term `{0}` is outside the supported fragment")]
    FunctionTerm(String),
    #[error("predicate `{0}`/{1} is not in the vocabulary")]
    UnknownPredicate(String, usize),
    #[error("domain size must be at least 1")]
    EmptyDomain,
    #[error("model search exceeded its budget of {0} nodes")]
    BudgetExceeded(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    pub domain_sizes: Vec<usize>,
    /// Search nodes allowed per satisfiability check at one domain size.
    pub budget: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { domain_sizes: DEFAULT_DOMAIN_SIZES.to_vec(), budget: DEFAULT_BUDGET }
    }
}

impl OracleConfig {
    pub fn up_to(max_domain: usize) -> Self {
        OracleConfig { domain_sizes: (1..=max_domain).collect(), ..Self::default() }
    }
}

pub(crate) struct Budget {
    limit: u64,
    used: u64,
}

impl Budget {
    pub fn new(limit: u64) -> Self {
        Budget { limit, used: 0 }
    }

    pub fn tick(&mut self) -> Result<(), OracleError> {
        self.used += 1;
        if self.used > self.limit {
            Err(OracleError::BudgetExceeded(self.limit))
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub predicates: BTreeSet<(String, usize)>,
    pub constants: BTreeSet<String>,
}

impl Vocabulary {
    pub fn of<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> Self {
        let mut v = Vocabulary::default();
        for f in formulas {
            v.extend(f);
        }
        v
    }

    pub fn extend(&mut self, f: &Formula) {
        self.predicates.extend(f.predicates());
        self.constants.extend(f.constants());
    }

    pub fn predicate(mut self, name: impl Into<String>, arity: usize) -> Self {
        self.predicates.insert((name.into(), arity));
        self
    }

    pub fn constant(mut self, name: impl Into<String>) -> Self {
        self.constants.insert(name.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "ModelRepr", from = "ModelRepr")]
pub struct FiniteModel {
    pub domain: Vec<usize>,
    pub interpretation: BTreeMap<(String, usize), BTreeSet<Vec<usize>>>,
    pub constant_map: BTreeMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct ModelRepr {
    domain: Vec<usize>,
    predicates: Vec<RelationRepr>,
    constants: BTreeMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct RelationRepr {
    name: String,
    arity: usize,
    tuples: Vec<Vec<usize>>,
}

impl From<FiniteModel> for ModelRepr {
    fn from(m: FiniteModel) -> Self {
        let predicates = m
            .interpretation
            .into_iter()
            .map(|((name, arity), tuples)| RelationRepr { name, arity, tuples: tuples.into_iter().collect() })
            .collect();
        ModelRepr { domain: m.domain, predicates, constants: m.constant_map }
    }
}

impl From<ModelRepr> for FiniteModel {
    fn from(r: ModelRepr) -> Self {
        let interpretation =
            r.predicates.into_iter().map(|rel| ((rel.name, rel.arity), rel.tuples.into_iter().collect())).collect();
        FiniteModel { domain: r.domain, interpretation, constant_map: r.constants }
    }
}

impl FiniteModel {
    pub fn new(size: usize) -> Self {
        FiniteModel { domain: (0..size).collect(), interpretation: BTreeMap::new(), constant_map: BTreeMap::new() }
    }

    pub fn with_constant(mut self, name: impl Into<String>, element: usize) -> Self {
        self.constant_map.insert(name.into(), element);
        self
    }

    /// Declares the predicate and adds the given tuples to its extension.
    pub fn with_relation(mut self, name: impl Into<String>, arity: usize, tuples: &[&[usize]]) -> Self {
        let ext = self.interpretation.entry((name.into(), arity)).or_default();
        ext.extend(tuples.iter().map(|t| t.to_vec()));
        self
    }

    pub fn holds(&self, pred: &str, tuple: &[usize]) -> bool {
        self.interpretation
            .iter()
            .find(|((name, arity), _)| name == pred && *arity == tuple.len())
            .is_some_and(|(_, ext)| ext.contains(tuple))
    }
}

impl fmt::Display for FiniteModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "domain {{")?;
        for (i, e) in self.domain.iter().enumerate() {
            write!(f, "{}{e}", if i > 0 { ", " } else { "" })?;
        }
        write!(f, "}}")?;
        for (c, e) in &self.constant_map {
            write!(f, "; {c}={e}")?;
        }
        for ((name, _), ext) in &self.interpretation {
            write!(f, "; {name}={{")?;
            for (i, t) in ext.iter().enumerate() {
                write!(f, "{}(", if i > 0 { ", " } else { "" })?;
                for (j, e) in t.iter().enumerate() {
                    write!(f, "{}{e}", if j > 0 { "," } else { "" })?;
                }
                write!(f, ")")?;
            }
            write!(f, "}}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    True,
    False,
    Uncertain,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::True, Label::False, Label::Uncertain];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::True => "True",
            Label::False => "False",
            Label::Uncertain => "Uncertain",
        }
    }

    /// Swaps True and False.
    pub fn flip(self) -> Label {
        match self {
            Label::True => Label::False,
            Label::False => Label::True,
            Label::Uncertain => Label::Uncertain,
        }
    }

    /// Case-insensitive; `unknown` is accepted as Uncertain.
    pub fn parse_loose(s: &str) -> Option<Label> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("true") {
            Some(Label::True)
        } else if s.eq_ignore_ascii_case("false") {
            Some(Label::False)
        } else if s.eq_ignore_ascii_case("uncertain") || s.eq_ignore_ascii_case("unknown") {
            Some(Label::Uncertain)
        } else {
            None
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Source {
    Oracle,
    Solver,
    DirectResolution,
    QuickReflection,
    DeepReflection,
    Default,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub label: Label,
    pub source: Source,
}

impl Verdict {
    pub fn new(label: Label, source: Source) -> Self {
        Verdict { label, source }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleWarning {
    /// No model of the premises exists at any checked domain size.
    InconsistentPremises,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entailment {
    pub verdict: Verdict,
    pub warning: Option<OracleWarning>,
}

/// Classical truth of a closed formula in `m`.
pub fn eval_formula(f: &Formula, m: &FiniteModel) -> Result<bool, OracleError> {
    if m.domain.is_empty() {
        return Err(OracleError::EmptyDomain);
    }
    let mut env = Vec::new();
    eval_in(f, m, &mut env)
}

fn eval_in(f: &Formula, m: &FiniteModel, env: &mut Vec<(String, usize)>) -> Result<bool, OracleError> {
    Ok(match f {
        Formula::Atom { pred, args } => {
            let mut tuple = Vec::with_capacity(args.len());
            for t in args {
                tuple.push(match t {
                    Term::Var(v) => env
                        .iter()
                        .rev()
                        .find(|(n, _)| n == v)
                        .map(|(_, e)| *e)
                        .ok_or_else(|| OracleError::OpenFormula(v.clone()))?,
                    Term::Const(c) => {
                        *m.constant_map.get(c).ok_or_else(|| OracleError::UnmappedConstant(c.clone()))?
                    }
                    Term::Func(name, _) => return Err(OracleError::FunctionTerm(name.clone())),
                });
            }
            m.holds(pred, &tuple)
        }
        Formula::Not(inner) => !eval_in(inner, m, env)?,
        Formula::Binary { op, lhs, rhs } => {
            let a = eval_in(lhs, m, env)?;
            match op {
                BinOp::And => a && eval_in(rhs, m, env)?,
                BinOp::Or => a || eval_in(rhs, m, env)?,
                BinOp::Implies => !a || eval_in(rhs, m, env)?,
                BinOp::Iff => a == eval_in(rhs, m, env)?,
                BinOp::Xor => a != eval_in(rhs, m, env)?,
            }
        }
        Formula::Quantified { quant, var, body } => {
            let want = matches!(quant, Quantifier::Exists);
            let mut result = !want;
            for &e in &m.domain {
                env.push((var.clone(), e));
                let v = eval_in(body, m, env);
                env.pop();
                if v? == want {
                    result = want;
                    break;
                }
            }
            result
        }
    })
}

/// Every model of size `domain_size` over `vocabulary` (extended with the
/// filters' own symbols) that satisfies all filters. Constant mappings are
/// enumerated up to a permutation of the domain.
pub fn enumerate_models(
    vocabulary: &Vocabulary,
    domain_size: usize,
    filter: &[Formula],
    budget: u64,
) -> Result<ModelIter, OracleError> {
    if domain_size == 0 {
        return Err(OracleError::EmptyDomain);
    }
    let mut vocab = vocabulary.clone();
    for f in filter {
        vocab.extend(f);
    }
    Ok(ModelIter::new(&vocab, domain_size, filter, budget))
}

/// A model of all formulas at exactly `size` elements, found by DPLL search.
pub fn find_model_of_size(formulas: &[Formula], size: usize, budget: u64) -> Result<Option<FiniteModel>, OracleError> {
    if size == 0 {
        return Err(OracleError::EmptyDomain);
    }
    let vocab = Vocabulary::of(formulas);
    let table = AtomTable::new(vocab.predicates.iter().cloned(), size);
    let constants: Vec<String> = vocab.constants.iter().cloned().collect();
    let mut budget = Budget::new(budget);
    for mapping in ConstantMappings::new(constants.len(), size) {
        let constant_map: BTreeMap<String, usize> = constants.iter().cloned().zip(mapping).collect();
        let mut cnf = Cnf::new(table.len);
        for f in formulas {
            cnf.assert(&ground(f, &table, &constant_map)?);
        }
        budget.tick()?;
        if let Some(atoms) = cnf.solve(&mut budget)? {
            let mut interpretation: BTreeMap<(String, usize), BTreeSet<Vec<usize>>> =
                table.preds.iter().map(|p| (p.clone(), BTreeSet::new())).collect();
            for (i, v) in atoms.into_iter().enumerate() {
                if v {
                    let (p, tuple) = table.decode(i);
                    interpretation.get_mut(&table.preds[p]).unwrap().insert(tuple);
                }
            }
            return Ok(Some(FiniteModel { domain: (0..size).collect(), interpretation, constant_map }));
        }
    }
    Ok(None)
}

/// The first model over the configured sizes, smallest domain first.
pub fn find_model(formulas: &[Formula], cfg: &OracleConfig) -> Result<Option<FiniteModel>, OracleError> {
    for &size in &cfg.domain_sizes {
        if let Some(m) = find_model_of_size(formulas, size, cfg.budget)? {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

pub fn satisfiable(formulas: &[Formula], cfg: &OracleConfig) -> Result<bool, OracleError> {
    Ok(find_model(formulas, cfg)?.is_some())
}

/// Agreement on every model of the configured sizes.
pub fn equivalent(a: &Formula, b: &Formula, cfg: &OracleConfig) -> Result<bool, OracleError> {
    Ok(!satisfiable(&[Formula::xor(a.clone(), b.clone())], cfg)?)
}

/// Three-valued entailment. True when every premise-model satisfies the
/// query, False when every premise-model refutes it, Uncertain otherwise.
pub fn entail(premises: &[Formula], query: &Formula, cfg: &OracleConfig) -> Result<Entailment, OracleError> {
    for f in premises.iter().chain(core::iter::once(query)) {
        if let Some(v) = f.free_variables().into_iter().next() {
            return Err(OracleError::OpenFormula(v));
        }
    }
    let mut with_query = premises.to_vec();
    with_query.push(query.clone());
    let mut against_query = premises.to_vec();
    against_query.push(Formula::not(query.clone()));

    let (mut can_hold, mut can_fail) = (false, false);
    for &size in &cfg.domain_sizes {
        if !can_hold {
            can_hold = find_model_of_size(&with_query, size, cfg.budget)?.is_some();
        }
        if !can_fail {
            can_fail = find_model_of_size(&against_query, size, cfg.budget)?.is_some();
        }
        if can_hold && can_fail {
            break;
        }
    }
    let (label, warning) = match (can_hold, can_fail) {
        (true, false) => (Label::True, None),
        (false, true) => (Label::False, None),
        (true, true) => (Label::Uncertain, None),
        (false, false) => (Label::Uncertain, Some(OracleWarning::InconsistentPremises)),
    };
    Ok(Entailment { verdict: Verdict::new(label, Source::Oracle), warning })
}
