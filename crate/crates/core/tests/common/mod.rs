#![allow(dead_code)]

use logicagent_core::fol::{BinOp, Formula, Quantifier, Term};
use proptest::prelude::*;

pub fn term() -> impl Strategy<Value = Term> {
    prop_oneof![Just(Term::var("x")), Just(Term::var("y")), Just(Term::constant("a")), Just(Term::constant("b"))]
}

pub fn atom() -> impl Strategy<Value = Formula> {
    prop_oneof![
        term().prop_map(|t| Formula::atom("P", vec![t])),
        term().prop_map(|t| Formula::atom("Q", vec![t])),
        (term(), term()).prop_map(|(s, t)| Formula::atom("R", vec![s, t])),
    ]
}

pub fn binop() -> impl Strategy<Value = BinOp> {
    prop_oneof![Just(BinOp::And), Just(BinOp::Or), Just(BinOp::Xor), Just(BinOp::Implies), Just(BinOp::Iff)]
}

/// Formulas over P/1, Q/1, R/2, constants a, b and variables x, y. May be open.
pub fn formula(depth: u32) -> impl Strategy<Value = Formula> {
    atom().prop_recursive(depth, 48, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (binop(), inner.clone(), inner.clone()).prop_map(|(op, l, r)| Formula::binary(op, l, r)),
            (any::<bool>(), prop_oneof![Just("x"), Just("y")], inner).prop_map(|(all, v, body)| {
                let quant = if all { Quantifier::ForAll } else { Quantifier::Exists };
                Formula::Quantified { quant, var: v.to_string(), body: Box::new(body) }
            }),
        ]
    })
}

pub fn closed(depth: u32) -> impl Strategy<Value = Formula> {
    (formula(depth), any::<bool>()).prop_map(|(f, all)| if all { f.universal_closure() } else { f.existential_closure() })
}

pub fn p(s: &str) -> Formula {
    logicagent_core::fol::parse_formula(s).unwrap()
}
