//! First-order logic syntax: terms, formulas, parsing, rendering and
//! grammar-level validation.
//!
//! The text format accepts the Unicode connectives `∀ ∃ ¬ ∧ ∨ ⊕ → ↔` and the
//! ASCII aliases `forall exists ~ & | ^ -> <->`. Precedence from tightest to
//! loosest is `¬`, `∧`, `∨`/`⊕`, `→`/`↔`; binary operators associate to the
//! left and a quantifier binds the longest formula that follows it.

mod lexer;
mod parser;
mod render;
mod validate;

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use lexer::Span;
pub use parser::{parse_formula, ParseError, ParseErrorKind};
pub use render::render_ascii;
pub use validate::{
    arity_conflicts, validate_cfg, validate_cfg_with, validate_formula, CheckKind, ValidationFailure, ValidationPolicy,
    ValidationReport,
};

/// A term in argument position.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(String),
    /// Function application. Parsed so it can be reported, but rejected by
    /// validation and unsupported by the model checker.
    Func(String, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Self {
        Term::Const(name.into())
    }

    pub fn name(&self) -> &str {
        match self {
            Term::Var(n) | Term::Const(n) | Term::Func(n, _) => n,
        }
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Const(_) => {}
            Term::Func(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    fn replace_var(&self, var: &str, with: &Term) -> Term {
        match self {
            Term::Var(v) if v == var => with.clone(),
            Term::Func(f, args) => Term::Func(f.clone(), args.iter().map(|a| a.replace_var(var, with)).collect()),
            other => other.clone(),
        }
    }
}

/// Whether an identifier belongs to the variable lexical class:
/// one of `x y z u v w`, optionally followed by digits.
pub fn is_variable_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some('x' | 'y' | 'z' | 'u' | 'v' | 'w') => chars.all(|c| c.is_ascii_digit()),
        _ => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BinOp {
    And,
    Or,
    Xor,
    Implies,
    Iff,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::And => "∧",
            BinOp::Or => "∨",
            BinOp::Xor => "⊕",
            BinOp::Implies => "→",
            BinOp::Iff => "↔",
        }
    }

    pub fn ascii(self) -> &'static str {
        match self {
            BinOp::And => "&",
            BinOp::Or => "|",
            BinOp::Xor => "^",
            BinOp::Implies => "->",
            BinOp::Iff => "<->",
        }
    }

    /// Binding strength; larger binds tighter.
    pub(crate) fn level(self) -> u8 {
        match self {
            BinOp::And => 3,
            BinOp::Or | BinOp::Xor => 2,
            BinOp::Implies | BinOp::Iff => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Quantifier {
    ForAll,
    Exists,
}

impl Quantifier {
    pub fn symbol(self) -> &'static str {
        match self {
            Quantifier::ForAll => "∀",
            Quantifier::Exists => "∃",
        }
    }

    pub fn dual(self) -> Quantifier {
        match self {
            Quantifier::ForAll => Quantifier::Exists,
            Quantifier::Exists => Quantifier::ForAll,
        }
    }
}

/// A first-order formula.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Atom { pred: String, args: Vec<Term> },
    Not(Box<Formula>),
    Binary { op: BinOp, lhs: Box<Formula>, rhs: Box<Formula> },
    Quantified { quant: Quantifier, var: String, body: Box<Formula> },
}

impl Formula {
    pub fn atom(pred: impl Into<String>, args: Vec<Term>) -> Self {
        Formula::Atom { pred: pred.into(), args }
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn binary(op: BinOp, lhs: Formula, rhs: Formula) -> Self {
        Formula::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    pub fn and(lhs: Formula, rhs: Formula) -> Self {
        Formula::binary(BinOp::And, lhs, rhs)
    }

    pub fn or(lhs: Formula, rhs: Formula) -> Self {
        Formula::binary(BinOp::Or, lhs, rhs)
    }

    pub fn implies(lhs: Formula, rhs: Formula) -> Self {
        Formula::binary(BinOp::Implies, lhs, rhs)
    }

    pub fn iff(lhs: Formula, rhs: Formula) -> Self {
        Formula::binary(BinOp::Iff, lhs, rhs)
    }

    pub fn xor(lhs: Formula, rhs: Formula) -> Self {
        Formula::binary(BinOp::Xor, lhs, rhs)
    }

    pub fn forall(var: impl Into<String>, body: Formula) -> Self {
        Formula::Quantified { quant: Quantifier::ForAll, var: var.into(), body: Box::new(body) }
    }

    pub fn exists(var: impl Into<String>, body: Formula) -> Self {
        Formula::Quantified { quant: Quantifier::Exists, var: var.into(), body: Box::new(body) }
    }

    /// Variables occurring free in the formula.
    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom { args, .. } => {
                let mut vars = BTreeSet::new();
                args.iter().for_each(|a| a.collect_vars(&mut vars));
                out.extend(vars.into_iter().filter(|v| !bound.contains(v)));
            }
            Formula::Not(inner) => inner.collect_free(bound, out),
            Formula::Binary { lhs, rhs, .. } => {
                lhs.collect_free(bound, out);
                rhs.collect_free(bound, out);
            }
            Formula::Quantified { var, body, .. } => {
                bound.push(var.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_variables().is_empty()
    }

    /// Replaces every free occurrence of `var` by `term`.
    ///
    /// Fails when a variable of `term` would be captured by a binder that
    /// scopes over a free occurrence of `var`.
    pub fn substitute(&self, var: &str, term: &Term) -> Result<Formula, CaptureError> {
        let mut term_vars = BTreeSet::new();
        term.collect_vars(&mut term_vars);
        self.subst_inner(var, term, &term_vars)
    }

    fn subst_inner(&self, var: &str, term: &Term, term_vars: &BTreeSet<String>) -> Result<Formula, CaptureError> {
        Ok(match self {
            Formula::Atom { pred, args } => {
                Formula::Atom { pred: pred.clone(), args: args.iter().map(|a| a.replace_var(var, term)).collect() }
            }
            Formula::Not(inner) => Formula::not(inner.subst_inner(var, term, term_vars)?),
            Formula::Binary { op, lhs, rhs } => {
                Formula::binary(*op, lhs.subst_inner(var, term, term_vars)?, rhs.subst_inner(var, term, term_vars)?)
            }
            Formula::Quantified { quant, var: bound, body } => {
                if bound == var || !body.free_variables().contains(var) {
                    return Ok(self.clone());
                }
                if term_vars.contains(bound) {
                    return Err(CaptureError { var: String::from(var), binder: bound.clone() });
                }
                Formula::Quantified {
                    quant: *quant,
                    var: bound.clone(),
                    body: Box::new(body.subst_inner(var, term, term_vars)?),
                }
            }
        })
    }

    /// Every `(predicate, arity)` pair used in the formula.
    pub fn predicates(&self) -> BTreeSet<(String, usize)> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |pred, args| {
            out.insert((String::from(pred), args.len()));
        });
        out
    }

    /// Every constant symbol used in the formula.
    pub fn constants(&self) -> BTreeSet<String> {
        fn walk(t: &Term, out: &mut BTreeSet<String>) {
            match t {
                Term::Const(c) => {
                    out.insert(c.clone());
                }
                Term::Var(_) => {}
                Term::Func(_, args) => args.iter().for_each(|a| walk(a, out)),
            }
        }
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |_, args| args.iter().for_each(|a| walk(a, &mut out)));
        out
    }

    pub fn has_function_terms(&self) -> bool {
        let mut found = false;
        self.visit_atoms(&mut |_, args| found |= args.iter().any(|a| matches!(a, Term::Func(..))));
        found
    }

    pub fn visit_atoms<F: FnMut(&str, &[Term])>(&self, f: &mut F) {
        match self {
            Formula::Atom { pred, args } => f(pred, args),
            Formula::Not(inner) => inner.visit_atoms(f),
            Formula::Binary { lhs, rhs, .. } => {
                lhs.visit_atoms(f);
                rhs.visit_atoms(f);
            }
            Formula::Quantified { body, .. } => body.visit_atoms(f),
        }
    }

    /// Nesting depth; atoms have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Atom { .. } => 0,
            Formula::Not(inner) => 1 + inner.depth(),
            Formula::Binary { lhs, rhs, .. } => 1 + lhs.depth().max(rhs.depth()),
            Formula::Quantified { body, .. } => 1 + body.depth(),
        }
    }

    /// Wraps the formula in existential quantifiers over its free variables.
    pub fn existential_closure(&self) -> Formula {
        self.free_variables().into_iter().rev().fold(self.clone(), |f, v| Formula::exists(v, f))
    }

    /// Wraps the formula in universal quantifiers over its free variables.
    pub fn universal_closure(&self) -> Formula {
        self.free_variables().into_iter().rev().fold(self.clone(), |f, v| Formula::forall(v, f))
    }
}

/// Substitution would capture a variable of the replacement term.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("substituting for `{var}` would capture a variable under binder `{binder}`")]
pub struct CaptureError {
    pub var: String,
    pub binder: String,
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(n) | Term::Const(n) => f.write_str(n),
            Term::Func(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        render::write_formula(f, self, render::Syntax::Unicode)
    }
}

impl core::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

/// Renders a formula in the Unicode interchange syntax.
pub fn render_formula(f: &Formula) -> String {
    alloc::format!("{f}")
}

// Formulas travel through JSON as their rendered text.
impl Serialize for Formula {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Formula {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_formula(&text).map_err(serde::de::Error::custom)
    }
}
