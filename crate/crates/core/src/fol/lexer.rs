use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{BinOp, Quantifier};

/// Half-open character range `[start, end)` into the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn point(at: usize) -> Self {
        Span { start: at, end: at + 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Quant(Quantifier),
    Not,
    Op(BinOp),
    LParen,
    RParen,
    Comma,
    Ident(String),
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct LexError {
    pub ch: char,
    pub span: Span,
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let single = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '∀' => Some(Tok::Quant(Quantifier::ForAll)),
            '∃' => Some(Tok::Quant(Quantifier::Exists)),
            '¬' | '~' => Some(Tok::Not),
            '∧' | '&' => Some(Tok::Op(BinOp::And)),
            '∨' | '|' => Some(Tok::Op(BinOp::Or)),
            '⊕' | '^' => Some(Tok::Op(BinOp::Xor)),
            '→' => Some(Tok::Op(BinOp::Implies)),
            '↔' => Some(Tok::Op(BinOp::Iff)),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = single {
            i += 1;
            out.push(Token { tok, span: Span::new(start, i) });
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'>') {
            i += 2;
            out.push(Token { tok: Tok::Op(BinOp::Implies), span: Span::new(start, i) });
            continue;
        }
        if c == '<' && chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') {
            i += 3;
            out.push(Token { tok: Tok::Op(BinOp::Iff), span: Span::new(start, i) });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let tok = match word.as_str() {
                "forall" => Tok::Quant(Quantifier::ForAll),
                "exists" => Tok::Quant(Quantifier::Exists),
                _ => Tok::Ident(word),
            };
            out.push(Token { tok, span: Span::new(start, i) });
            continue;
        }
        return Err(LexError { ch: c, span: Span::point(start) });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<Tok> {
        tokenize(text).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn ascii_aliases_match_unicode() {
        assert_eq!(kinds("forall x (P(x) -> ~Q(x))"), kinds("∀x (P(x) → ¬Q(x))"));
        assert_eq!(kinds("A(a) <-> B(a) ^ C(a) | D(a) & E(a)"), kinds("A(a) ↔ B(a) ⊕ C(a) ∨ D(a) ∧ E(a)"));
    }

    #[test]
    fn spans_count_characters_not_bytes() {
        let toks = tokenize("∀x P(x)").unwrap();
        assert_eq!(toks[0].span, Span::new(0, 1));
        assert_eq!(toks[1].span, Span::new(1, 2));
        assert_eq!(toks[2].span, Span::new(3, 4));
    }

    #[test]
    fn rejects_unknown_characters() {
        let err = tokenize("P(a) # Q(a)").unwrap_err();
        assert_eq!(err.ch, '#');
        assert_eq!(err.span, Span::point(5));
    }
}
