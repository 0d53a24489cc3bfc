use alloc::string::String;
use core::fmt::{self, Write};

use super::{Formula, Quantifier};

#[derive(Clone, Copy)]
pub(crate) enum Syntax {
    Unicode,
    Ascii,
}

/// Renders a formula with the ASCII operator aliases.
pub fn render_ascii(f: &Formula) -> String {
    struct Ascii<'a>(&'a Formula);
    impl fmt::Display for Ascii<'_> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write_formula(f, self.0, Syntax::Ascii)
        }
    }
    alloc::format!("{}", Ascii(f))
}

pub(crate) fn write_formula<W: Write>(out: &mut W, f: &Formula, syntax: Syntax) -> fmt::Result {
    match f {
        // top-level binaries drop their outer parentheses
        Formula::Binary { op, lhs, rhs } => write_binary_parts(out, *op, lhs, rhs, syntax),
        other => write_nested(out, other, syntax),
    }
}

/// A quantifier that is not closed off by parentheses extends as far right
/// as possible, so it must be wrapped when something follows it.
fn opens_scope(f: &Formula) -> bool {
    match f {
        Formula::Quantified { .. } => true,
        Formula::Not(inner) => opens_scope(inner),
        _ => false,
    }
}

fn write_binary_parts<W: Write>(
    out: &mut W,
    op: super::BinOp,
    lhs: &Formula,
    rhs: &Formula,
    syntax: Syntax,
) -> fmt::Result {
    if opens_scope(lhs) {
        out.write_char('(')?;
        write_nested(out, lhs, syntax)?;
        out.write_char(')')?;
    } else {
        write_nested(out, lhs, syntax)?;
    }
    let sym = match syntax {
        Syntax::Unicode => op.symbol(),
        Syntax::Ascii => op.ascii(),
    };
    write!(out, " {sym} ")?;
    write_nested(out, rhs, syntax)
}

fn write_nested<W: Write>(out: &mut W, f: &Formula, syntax: Syntax) -> fmt::Result {
    match f {
        Formula::Atom { pred, args } => {
            write!(out, "{pred}(")?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.write_str(", ")?;
                }
                write!(out, "{a}")?;
            }
            out.write_char(')')
        }
        Formula::Not(inner) => {
            out.write_str(match syntax {
                Syntax::Unicode => "¬",
                Syntax::Ascii => "~",
            })?;
            write_nested(out, inner, syntax)
        }
        Formula::Binary { op, lhs, rhs } => {
            out.write_char('(')?;
            write_binary_parts(out, *op, lhs, rhs, syntax)?;
            out.write_char(')')
        }
        Formula::Quantified { quant, var, body } => {
            match (syntax, quant) {
                (Syntax::Unicode, q) => write!(out, "{}{var} ", q.symbol())?,
                (Syntax::Ascii, Quantifier::ForAll) => write!(out, "forall {var} ")?,
                (Syntax::Ascii, Quantifier::Exists) => write!(out, "exists {var} ")?,
            }
            write_nested(out, body, syntax)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse_formula, render_formula};
    use super::*;

    #[test]
    fn atoms_and_negation() {
        assert_eq!(render_formula(&parse_formula("P(a)").unwrap()), "P(a)");
        assert_eq!(render_formula(&parse_formula("¬P(a)").unwrap()), "¬P(a)");
        assert_eq!(render_formula(&parse_formula("R(a,x)").unwrap()), "R(a, x)");
    }

    #[test]
    fn nested_binaries_are_parenthesised() {
        let f = parse_formula("∀x (Debt(x) ∧ Repaid(x) → ¬Just(x))").unwrap();
        assert_eq!(render_formula(&f), "∀x ((Debt(x) ∧ Repaid(x)) → ¬Just(x))");
    }

    #[test]
    fn quantifier_on_the_left_is_closed_off() {
        let f = Formula::and(parse_formula("¬∀x P(x)").unwrap(), parse_formula("Q(a)").unwrap());
        let text = render_formula(&f);
        assert_eq!(text, "(¬∀x P(x)) ∧ Q(a)");
        assert_eq!(parse_formula(&text).unwrap(), f);
    }

    #[test]
    fn ascii_rendering_parses_back() {
        let f = parse_formula("(∀x (P(x) ⊕ Q(x))) ↔ ∃y ¬R(y, a)").unwrap();
        let text = render_ascii(&f);
        assert_eq!(text, "(forall x (P(x) ^ Q(x))) <-> exists y ~R(y, a)");
        assert_eq!(parse_formula(&text).unwrap(), f);
    }
}
