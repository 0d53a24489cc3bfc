mod common;

use common::{closed, formula, p};
use logicagent_core::fol::{parse_formula, render_ascii, validate_cfg, validate_formula, ValidationPolicy};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn render_then_parse_is_identity(f in formula(5)) {
        let text = f.to_string();
        prop_assert_eq!(parse_formula(&text).unwrap(), f.clone(), "{}", text);
        prop_assert_eq!(parse_formula(&render_ascii(&f)).unwrap(), f);
    }

    #[test]
    fn text_and_tree_validation_agree(f in closed(4)) {
        let from_text = validate_cfg(&f.to_string());
        let from_tree = validate_formula(&f, ValidationPolicy::default());
        prop_assert_eq!(from_text.valid, from_tree.valid);
    }
}

#[test]
fn ascii_and_unicode_spellings_parse_identically() {
    let pairs = [
        ("forall x (P(x) -> Q(x))", "∀x (P(x) → Q(x))"),
        ("exists y (R(a, y) & ~Q(y))", "∃y (R(a, y) ∧ ¬Q(y))"),
        ("(P(a) | Q(b)) <-> ~(P(b) ^ Q(a))", "(P(a) ∨ Q(b)) ↔ ¬(P(b) ⊕ Q(a))"),
    ];
    for (ascii, unicode) in pairs {
        assert_eq!(p(ascii), p(unicode));
    }
}
