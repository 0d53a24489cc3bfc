//! Grammar-level validation: quantifier scope, predicate structure and
//! connective placement.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::lexer::Span;
use super::parser::{parse_with_events, ParseErrorKind};
use super::{Formula, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckKind {
    QuantifierScope,
    PredicateStructure,
    ConnectivePlacement,
    Lexical,
    /// Function symbols parse but have no place in the reasoning fragment.
    FunctionSymbol,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationFailure {
    pub check: CheckKind,
    pub location: Span,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub failures: Vec<ValidationFailure>,
}

impl ValidationReport {
    fn from_failures(failures: Vec<ValidationFailure>) -> Self {
        ValidationReport { valid: failures.is_empty(), failures }
    }

    pub fn has(&self, check: CheckKind) -> bool {
        self.failures.iter().any(|f| f.check == check)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ValidationPolicy {
    /// Flag free variables; every formula handed to the reasoner is a sentence.
    pub require_closed: bool,
}

impl Default for ValidationPolicy {
    fn default() -> Self {
        ValidationPolicy { require_closed: true }
    }
}

/// Validates formula text under the default closed-sentence policy.
pub fn validate_cfg(text: &str) -> ValidationReport {
    validate_cfg_with(text, ValidationPolicy::default())
}

pub fn validate_cfg_with(text: &str, policy: ValidationPolicy) -> ValidationReport {
    let (_, events) = match parse_with_events(text) {
        Ok(parsed) => parsed,
        Err(e) => {
            let check = match e.kind {
                ParseErrorKind::Empty | ParseErrorKind::UnexpectedChar => CheckKind::Lexical,
                ParseErrorKind::BarePredicate | ParseErrorKind::EmptyArguments => CheckKind::PredicateStructure,
                ParseErrorKind::ExpectedVariable => CheckKind::QuantifierScope,
                ParseErrorKind::MissingOperand
                | ParseErrorKind::MixedChain
                | ParseErrorKind::UnbalancedParen
                | ParseErrorKind::UnexpectedToken
                | ParseErrorKind::UnexpectedEnd => CheckKind::ConnectivePlacement,
            };
            return ValidationReport::from_failures(alloc::vec![ValidationFailure {
                check,
                location: e.span,
                message: e.message,
            }]);
        }
    };

    let mut failures = Vec::new();
    for (var, span) in events.shadowed {
        failures.push(ValidationFailure {
            check: CheckKind::QuantifierScope,
            location: span,
            message: alloc::format!("`{var}` is bound again inside its own scope"),
        });
    }
    if policy.require_closed {
        for (var, span) in events.free_vars {
            failures.push(ValidationFailure {
                check: CheckKind::QuantifierScope,
                location: span,
                message: alloc::format!("variable `{var}` is not bound by any quantifier"),
            });
        }
    }
    let mut first_arity: BTreeMap<&str, usize> = BTreeMap::new();
    for (pred, arity, span) in &events.atoms {
        match first_arity.get(pred.as_str()) {
            Some(&seen) if seen != *arity => failures.push(ValidationFailure {
                check: CheckKind::PredicateStructure,
                location: *span,
                message: alloc::format!("`{pred}` used with arity {arity} after arity {seen}"),
            }),
            Some(_) => {}
            None => {
                first_arity.insert(pred, *arity);
            }
        }
    }
    for (name, span) in events.functions {
        failures.push(ValidationFailure {
            check: CheckKind::FunctionSymbol,
            location: span,
            message: alloc::format!("function symbol `{name}` is not supported"),
        });
    }
    failures.sort_by_key(|f| (f.location.start, f.location.end));
    ValidationReport::from_failures(failures)
}

/// Validates an already-built formula. Locations are empty spans because the
/// tree carries no source positions.
pub fn validate_formula(f: &Formula, policy: ValidationPolicy) -> ValidationReport {
    let mut failures = Vec::new();
    let mut arities: BTreeMap<String, usize> = BTreeMap::new();
    walk(f, &mut Vec::new(), &mut arities, policy, &mut failures);
    ValidationReport::from_failures(failures)
}

fn walk(
    f: &Formula,
    bound: &mut Vec<String>,
    arities: &mut BTreeMap<String, usize>,
    policy: ValidationPolicy,
    failures: &mut Vec<ValidationFailure>,
) {
    let fail = |check, message| ValidationFailure { check, location: Span::default(), message };
    match f {
        Formula::Atom { pred, args } => {
            if args.is_empty() {
                failures.push(fail(CheckKind::PredicateStructure, alloc::format!("`{pred}` has no arguments")));
            }
            match arities.get(pred) {
                Some(&seen) if seen != args.len() => failures.push(fail(
                    CheckKind::PredicateStructure,
                    alloc::format!("`{pred}` used with arity {} after arity {seen}", args.len()),
                )),
                Some(_) => {}
                None => {
                    arities.insert(pred.clone(), args.len());
                }
            }
            for t in args {
                check_term(t, bound, policy, failures);
            }
        }
        Formula::Not(inner) => walk(inner, bound, arities, policy, failures),
        Formula::Binary { lhs, rhs, .. } => {
            walk(lhs, bound, arities, policy, failures);
            walk(rhs, bound, arities, policy, failures);
        }
        Formula::Quantified { var, body, .. } => {
            if bound.contains(var) {
                failures.push(fail(CheckKind::QuantifierScope, alloc::format!("`{var}` is bound again inside its own scope")));
            }
            bound.push(var.clone());
            walk(body, bound, arities, policy, failures);
            bound.pop();
        }
    }
}

fn check_term(t: &Term, bound: &[String], policy: ValidationPolicy, failures: &mut Vec<ValidationFailure>) {
    match t {
        Term::Var(v) if policy.require_closed && !bound.contains(v) => failures.push(ValidationFailure {
            check: CheckKind::QuantifierScope,
            location: Span::default(),
            message: alloc::format!("variable `{v}` is not bound by any quantifier"),
        }),
        Term::Func(name, args) => {
            failures.push(ValidationFailure {
                check: CheckKind::FunctionSymbol,
                location: Span::default(),
                message: alloc::format!("function symbol `{name}` is not supported"),
            });
            args.iter().for_each(|a| check_term(a, bound, policy, failures));
        }
        _ => {}
    }
}

/// Predicates used with more than one arity across a set of formulas.
pub fn arity_conflicts<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> BTreeMap<String, Vec<usize>> {
    let mut seen: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for f in formulas {
        for (pred, arity) in f.predicates() {
            let entry = seen.entry(pred).or_default();
            if !entry.contains(&arity) {
                entry.push(arity);
            }
        }
    }
    seen.retain(|_, arities| arities.len() > 1);
    seen
}
