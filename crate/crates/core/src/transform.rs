//! Negation and negation-normal-form rewriting.

use alloc::boxed::Box;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::fol::{BinOp, Formula};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RewriteRule {
    QuantNeg,
    DeMorganAnd,
    DeMorganOr,
    ImplNeg,
    IffNeg,
    XorNeg,
    DoubleNeg,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewriteStep {
    pub rule: RewriteRule,
    pub before: Formula,
    pub after: Formula,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplificationTrace {
    pub steps: Vec<RewriteStep>,
}

/// Wraps `f` in a negation without simplifying.
pub fn negate(f: &Formula) -> Formula {
    Formula::not(f.clone())
}

/// Pushes negations down to atoms. `¬(A ↔ B)` becomes `A ⊕ B` and
/// `¬(A ⊕ B)` becomes `A ↔ B`, so the result may contain both.
pub fn simplify_negations(f: &Formula) -> (Formula, SimplificationTrace) {
    let mut trace = SimplificationTrace::default();
    let out = push(f.clone(), &mut trace);
    (out, trace)
}

/// The strict negation of `f`, simplified.
pub fn contradictory(f: &Formula) -> Formula {
    simplify_negations(&negate(f)).0
}

fn push(f: Formula, trace: &mut SimplificationTrace) -> Formula {
    match f {
        Formula::Atom { .. } => f,
        Formula::Binary { op, lhs, rhs } => Formula::binary(op, push(*lhs, trace), push(*rhs, trace)),
        Formula::Quantified { quant, var, body } => Formula::Quantified { quant, var, body: Box::new(push(*body, trace)) },
        Formula::Not(inner) => {
            let (rule, after) = match &*inner {
                Formula::Atom { .. } => return Formula::Not(inner),
                Formula::Not(g) => (RewriteRule::DoubleNeg, (**g).clone()),
                Formula::Quantified { quant, var, body } => (
                    RewriteRule::QuantNeg,
                    Formula::Quantified { quant: quant.dual(), var: var.clone(), body: Box::new(Formula::not((**body).clone())) },
                ),
                Formula::Binary { op, lhs, rhs } => {
                    let (a, b) = ((**lhs).clone(), (**rhs).clone());
                    match op {
                        BinOp::And => (RewriteRule::DeMorganAnd, Formula::or(Formula::not(a), Formula::not(b))),
                        BinOp::Or => (RewriteRule::DeMorganOr, Formula::and(Formula::not(a), Formula::not(b))),
                        BinOp::Implies => (RewriteRule::ImplNeg, Formula::and(a, Formula::not(b))),
                        BinOp::Iff => (RewriteRule::IffNeg, Formula::xor(a, b)),
                        BinOp::Xor => (RewriteRule::XorNeg, Formula::iff(a, b)),
                    }
                }
            };
            trace.steps.push(RewriteStep { rule, before: Formula::Not(inner), after: after.clone() });
            push(after, trace)
        }
    }
}

/// True when negation occurs only directly on atoms.
pub fn is_negation_normal(f: &Formula) -> bool {
    match f {
        Formula::Atom { .. } => true,
        Formula::Not(inner) => matches!(**inner, Formula::Atom { .. }),
        Formula::Binary { lhs, rhs, .. } => is_negation_normal(lhs) && is_negation_normal(rhs),
        Formula::Quantified { body, .. } => is_negation_normal(body),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fol::parse_formula;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn negate_does_not_simplify() {
        assert_eq!(negate(&p("P(a)")), p("¬P(a)"));
        assert_eq!(negate(&p("∀x P(x)")), p("¬∀x P(x)"));
        assert_eq!(negate(&p("¬P(a)")), p("¬¬P(a)"));
    }

    #[test]
    fn single_rewrites() {
        let cases = [
            ("¬∀x P(x)", "∃x ¬P(x)", RewriteRule::QuantNeg),
            ("¬∃x P(x)", "∀x ¬P(x)", RewriteRule::QuantNeg),
            ("¬(P(a) → Q(a))", "P(a) ∧ ¬Q(a)", RewriteRule::ImplNeg),
            ("¬(P(a) ∧ Q(a))", "¬P(a) ∨ ¬Q(a)", RewriteRule::DeMorganAnd),
            ("¬(P(a) ∨ Q(a))", "¬P(a) ∧ ¬Q(a)", RewriteRule::DeMorganOr),
            ("¬(P(a) ↔ Q(a))", "P(a) ⊕ Q(a)", RewriteRule::IffNeg),
            ("¬(P(a) ⊕ Q(a))", "P(a) ↔ Q(a)", RewriteRule::XorNeg),
            ("¬¬P(a)", "P(a)", RewriteRule::DoubleNeg),
        ];
        for (input, expected, rule) in cases {
            let (out, trace) = simplify_negations(&p(input));
            assert_eq!(out, p(expected), "{input}");
            assert_eq!(trace.steps.len(), 1, "{input}");
            assert_eq!(trace.steps[0].rule, rule);
            assert_eq!(trace.steps[0].before, p(input));
        }
    }

    #[test]
    fn contradictory_of_universal_rule() {
        assert_eq!(contradictory(&p("∀x (Just(x) → ¬Thief(x))")), p("∃x (Just(x) ∧ Thief(x))"));
        assert_eq!(contradictory(&p("∃x (Just(x) ∧ Thief(x))")), p("∀x (¬Just(x) ∨ ¬Thief(x))"));
        assert_eq!(contradictory(&p("A(a) ∨ B(a)")), p("¬A(a) ∧ ¬B(a)"));
        assert_eq!(contradictory(&p("P(a)")), p("¬P(a)"));
    }

    #[test]
    fn nested_negations_reach_atoms() {
        let (out, trace) = simplify_negations(&p("¬∀x (P(x) ∧ ¬∃y (R(x, y) → ¬Q(y)))"));
        assert!(is_negation_normal(&out));
        assert_eq!(out, p("∃x (¬P(x) ∨ ∃y (R(x, y) → ¬Q(y)))"));
        assert_eq!(trace.steps.len(), 3);
    }

    #[test]
    fn already_normal_input_is_untouched() {
        let f = p("∀x ((Debt(x) ∧ Repaid(x)) → ¬Just(x))");
        let (out, trace) = simplify_negations(&f);
        assert_eq!(out, f);
        assert!(trace.steps.is_empty());
    }
}
