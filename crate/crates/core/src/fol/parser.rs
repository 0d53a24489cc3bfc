//! Precedence-climbing parser for the formula grammar.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::lexer::{tokenize, Span, Tok, Token};
use super::{is_variable_name, BinOp, Formula, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ParseErrorKind {
    Empty,
    UnexpectedChar,
    UnexpectedToken,
    UnexpectedEnd,
    MissingOperand,
    UnbalancedParen,
    BarePredicate,
    EmptyArguments,
    ExpectedVariable,
    /// `→` and `↔` chained at the same level without parentheses.
    MixedChain,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: Span,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}..{}", self.message, self.span.start, self.span.end)
    }
}

impl core::error::Error for ParseError {}

/// Parses a formula from the interchange text format.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    parse_with_events(text).map(|(f, _)| f)
}

/// Source locations noted while parsing, consumed by validation.
#[derive(Debug, Default)]
pub(crate) struct ParseEvents {
    pub shadowed: Vec<(String, Span)>,
    pub free_vars: Vec<(String, Span)>,
    pub atoms: Vec<(String, usize, Span)>,
    pub functions: Vec<(String, Span)>,
}

pub(crate) fn parse_with_events(text: &str) -> Result<(Formula, ParseEvents), ParseError> {
    let tokens = tokenize(text).map_err(|e| ParseError {
        kind: ParseErrorKind::UnexpectedChar,
        span: e.span,
        message: alloc::format!("unexpected character `{}`", e.ch),
    })?;
    let end = text.chars().count();
    if tokens.is_empty() {
        return Err(ParseError { kind: ParseErrorKind::Empty, span: Span::new(0, end), message: "empty formula".into() });
    }
    let mut parser = Parser { tokens, pos: 0, bound: Vec::new(), end, events: ParseEvents::default() };
    let f = parser.expr(1)?;
    if let Some(tok) = parser.peek() {
        let (kind, message) = match tok.tok {
            Tok::RParen => (ParseErrorKind::UnbalancedParen, "unmatched `)`"),
            _ => (ParseErrorKind::UnexpectedToken, "unexpected token after complete formula"),
        };
        return Err(ParseError { kind, span: tok.span, message: message.into() });
    }
    Ok((f, parser.events))
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    bound: Vec<String>,
    end: usize,
    events: ParseEvents,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn end_span(&self) -> Span {
        Span::new(self.end, self.end)
    }

    fn err(kind: ParseErrorKind, span: Span, message: impl Into<String>) -> ParseError {
        ParseError { kind, span, message: message.into() }
    }

    /// Whether the upcoming token can start an operand.
    fn operand_follows(&self) -> bool {
        matches!(
            self.peek().map(|t| &t.tok),
            Some(Tok::Not | Tok::Quant(_) | Tok::LParen | Tok::Ident(_))
        )
    }

    fn expr(&mut self, min_level: u8) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        let mut arrow_chain: Option<BinOp> = None;
        loop {
            let (op, span) = match self.peek() {
                Some(Token { tok: Tok::Op(op), span }) if op.level() >= min_level => (*op, *span),
                _ => break,
            };
            self.pos += 1;
            if op.level() == 1 {
                match arrow_chain {
                    Some(prev) if prev != op => {
                        return Err(Self::err(
                            ParseErrorKind::MixedChain,
                            span,
                            alloc::format!("`{}` after `{}` needs explicit parentheses", op.symbol(), prev.symbol()),
                        ))
                    }
                    _ => arrow_chain = Some(op),
                }
            }
            if !self.operand_follows() {
                return Err(Self::err(
                    ParseErrorKind::MissingOperand,
                    span,
                    alloc::format!("operator `{}` is missing its right operand", op.symbol()),
                ));
            }
            let rhs = self.expr(op.level() + 1)?;
            lhs = Formula::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let Some(token) = self.next() else {
            return Err(Self::err(ParseErrorKind::UnexpectedEnd, self.end_span(), "unexpected end of formula"));
        };
        match token.tok {
            Tok::Not => {
                if !self.operand_follows() {
                    return Err(Self::err(ParseErrorKind::MissingOperand, token.span, "`¬` is missing its operand"));
                }
                Ok(Formula::not(self.unary()?))
            }
            Tok::Quant(quant) => {
                let var = match self.next() {
                    Some(Token { tok: Tok::Ident(name), span }) => {
                        if self.bound.contains(&name) {
                            self.events.shadowed.push((name.clone(), Span::new(token.span.start, span.end)));
                        }
                        name
                    }
                    Some(other) => {
                        return Err(Self::err(ParseErrorKind::ExpectedVariable, other.span, "expected a variable after quantifier"))
                    }
                    None => {
                        return Err(Self::err(ParseErrorKind::ExpectedVariable, token.span, "quantifier without variable"))
                    }
                };
                if !self.operand_follows() {
                    return Err(Self::err(ParseErrorKind::MissingOperand, token.span, "quantifier without a body"));
                }
                self.bound.push(var.clone());
                let body = self.expr(1);
                self.bound.pop();
                Ok(Formula::Quantified { quant, var, body: alloc::boxed::Box::new(body?) })
            }
            Tok::LParen => {
                if !self.operand_follows() {
                    let span = self.peek().map_or(token.span, |t| t.span);
                    return Err(Self::err(ParseErrorKind::MissingOperand, span, "expected a formula after `(`"));
                }
                let inner = self.expr(1)?;
                match self.next() {
                    Some(Token { tok: Tok::RParen, .. }) => Ok(inner),
                    _ => Err(Self::err(ParseErrorKind::UnbalancedParen, token.span, "unclosed `(`")),
                }
            }
            Tok::Ident(pred) => {
                match self.peek() {
                    Some(Token { tok: Tok::LParen, .. }) => self.pos += 1,
                    _ => {
                        return Err(Self::err(
                            ParseErrorKind::BarePredicate,
                            token.span,
                            alloc::format!("predicate `{pred}` has no argument list"),
                        ))
                    }
                }
                let args = self.term_list(token.span)?;
                let close = self.tokens[self.pos - 1].span.end;
                self.events.atoms.push((pred.clone(), args.len(), Span::new(token.span.start, close)));
                Ok(Formula::Atom { pred, args })
            }
            Tok::RParen => Err(Self::err(ParseErrorKind::UnbalancedParen, token.span, "unmatched `)`")),
            Tok::Op(op) => Err(Self::err(
                ParseErrorKind::MissingOperand,
                token.span,
                alloc::format!("operator `{}` is missing its left operand", op.symbol()),
            )),
            Tok::Comma => Err(Self::err(ParseErrorKind::UnexpectedToken, token.span, "unexpected `,`")),
        }
    }

    /// Parses `TERM (, TERM)* )` after an opening parenthesis.
    fn term_list(&mut self, head: Span) -> Result<Vec<Term>, ParseError> {
        let mut args = Vec::new();
        if let Some(Token { tok: Tok::RParen, span }) = self.peek() {
            return Err(Self::err(ParseErrorKind::EmptyArguments, Span::new(head.start, span.end), "empty argument list"));
        }
        loop {
            args.push(self.term(head)?);
            match self.next() {
                Some(Token { tok: Tok::Comma, .. }) => continue,
                Some(Token { tok: Tok::RParen, .. }) => return Ok(args),
                Some(other) => {
                    return Err(Self::err(ParseErrorKind::UnexpectedToken, other.span, "expected `,` or `)` in argument list"))
                }
                None => return Err(Self::err(ParseErrorKind::UnbalancedParen, head, "unclosed argument list")),
            }
        }
    }

    fn term(&mut self, head: Span) -> Result<Term, ParseError> {
        match self.next() {
            Some(Token { tok: Tok::Ident(name), span }) => {
                if let Some(Token { tok: Tok::LParen, .. }) = self.peek() {
                    self.pos += 1;
                    let args = self.term_list(span)?;
                    let close = self.tokens[self.pos - 1].span.end;
                    self.events.functions.push((name.clone(), Span::new(span.start, close)));
                    return Ok(Term::Func(name, args));
                }
                if self.bound.contains(&name) {
                    Ok(Term::Var(name))
                } else if is_variable_name(&name) {
                    self.events.free_vars.push((name.clone(), span));
                    Ok(Term::Var(name))
                } else {
                    Ok(Term::Const(name))
                }
            }
            Some(other) => Err(Self::err(ParseErrorKind::UnexpectedToken, other.span, "expected a term")),
            None => Err(Self::err(ParseErrorKind::UnbalancedParen, head, "unclosed argument list")),
        }
    }
}
