use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::OracleError;
use crate::fol::{BinOp, Formula, Quantifier, Term};

/// Index of every ground atom over a fixed vocabulary and domain size.
#[derive(Debug, Clone)]
pub(crate) struct AtomTable {
    pub preds: Vec<(String, usize)>,
    offsets: Vec<usize>,
    index_of: BTreeMap<(String, usize), usize>,
    pub size: usize,
    pub len: usize,
}

impl AtomTable {
    pub fn new(preds: impl IntoIterator<Item = (String, usize)>, size: usize) -> Self {
        let preds: Vec<(String, usize)> = preds.into_iter().collect();
        let mut offsets = Vec::with_capacity(preds.len());
        let mut index_of = BTreeMap::new();
        let mut len = 0usize;
        for (i, (name, arity)) in preds.iter().enumerate() {
            offsets.push(len);
            index_of.insert((name.clone(), *arity), i);
            len += size.pow(*arity as u32);
        }
        AtomTable { preds, offsets, index_of, size, len }
    }

    pub fn atom(&self, pred: &str, tuple: &[usize]) -> Option<usize> {
        let p = *self.index_of.get(&(pred.to_string(), tuple.len()))?;
        let mut code = 0;
        for &e in tuple {
            code = code * self.size + e;
        }
        Some(self.offsets[p] + code)
    }

    /// Inverse of `atom`: predicate position and element tuple.
    pub fn decode(&self, atom: usize) -> (usize, Vec<usize>) {
        let p = match self.offsets.binary_search(&atom) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let arity = self.preds[p].1;
        let mut code = atom - self.offsets[p];
        let mut tuple = alloc::vec![0; arity];
        for slot in tuple.iter_mut().rev() {
            *slot = code % self.size;
            code /= self.size;
        }
        (p, tuple)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Ground {
    Const(bool),
    Atom(usize),
    Not(Box<Ground>),
    And(Vec<Ground>),
    Or(Vec<Ground>),
    Iff(Box<Ground>, Box<Ground>),
}

pub(crate) fn ground(
    f: &Formula,
    table: &AtomTable,
    constants: &BTreeMap<String, usize>,
) -> Result<Ground, OracleError> {
    let mut env = Vec::new();
    build(f, table, constants, &mut env)
}

fn build(
    f: &Formula,
    table: &AtomTable,
    constants: &BTreeMap<String, usize>,
    env: &mut Vec<(String, usize)>,
) -> Result<Ground, OracleError> {
    Ok(match f {
        Formula::Atom { pred, args } => {
            let mut tuple = Vec::with_capacity(args.len());
            for t in args {
                tuple.push(resolve(t, constants, env)?);
            }
            match table.atom(pred, &tuple) {
                Some(i) => Ground::Atom(i),
                None => return Err(OracleError::UnknownPredicate(pred.clone(), args.len())),
            }
        }
        Formula::Not(inner) => negate(build(inner, table, constants, env)?),
        Formula::Binary { op, lhs, rhs } => {
            let a = build(lhs, table, constants, env)?;
            let b = build(rhs, table, constants, env)?;
            match op {
                BinOp::And => and(alloc::vec![a, b]),
                BinOp::Or => or(alloc::vec![a, b]),
                BinOp::Implies => or(alloc::vec![negate(a), b]),
                BinOp::Iff => iff(a, b),
                BinOp::Xor => negate(iff(a, b)),
            }
        }
        Formula::Quantified { quant, var, body } => {
            let mut parts = Vec::with_capacity(table.size);
            for e in 0..table.size {
                env.push((var.clone(), e));
                let part = build(body, table, constants, env);
                env.pop();
                parts.push(part?);
            }
            match quant {
                Quantifier::ForAll => and(parts),
                Quantifier::Exists => or(parts),
            }
        }
    })
}

fn resolve(t: &Term, constants: &BTreeMap<String, usize>, env: &[(String, usize)]) -> Result<usize, OracleError> {
    match t {
        Term::Var(v) => env
            .iter()
            .rev()
            .find(|(name, _)| name == v)
            .map(|(_, e)| *e)
            .ok_or_else(|| OracleError::OpenFormula(v.clone())),
        Term::Const(c) => constants.get(c).copied().ok_or_else(|| OracleError::UnmappedConstant(c.clone())),
        Term::Func(name, _) => Err(OracleError::FunctionTerm(name.clone())),
    }
}

fn negate(g: Ground) -> Ground {
    match g {
        Ground::Const(b) => Ground::Const(!b),
        Ground::Not(inner) => *inner,
        other => Ground::Not(Box::new(other)),
    }
}

fn and(parts: Vec<Ground>) -> Ground {
    let mut out = Vec::with_capacity(parts.len());
    for p in parts {
        match p {
            Ground::Const(true) => {}
            Ground::Const(false) => return Ground::Const(false),
            Ground::And(inner) => out.extend(inner),
            other => out.push(other),
        }
    }
    match out.len() {
        0 => Ground::Const(true),
        1 => out.pop().unwrap(),
        _ => Ground::And(out),
    }
}

fn or(parts: Vec<Ground>) -> Ground {
    let mut out = Vec::with_capacity(parts.len());
    for p in parts {
        match p {
            Ground::Const(false) => {}
            Ground::Const(true) => return Ground::Const(true),
            Ground::Or(inner) => out.extend(inner),
            other => out.push(other),
        }
    }
    match out.len() {
        0 => Ground::Const(false),
        1 => out.pop().unwrap(),
        _ => Ground::Or(out),
    }
}

fn iff(a: Ground, b: Ground) -> Ground {
    match (a, b) {
        (Ground::Const(x), other) | (other, Ground::Const(x)) => {
            if x {
                other
            } else {
                negate(other)
            }
        }
        (a, b) => Ground::Iff(Box::new(a), Box::new(b)),
    }
}

/// Kleene evaluation under a partial assignment.
pub(crate) fn eval3(g: &Ground, assign: &[Option<bool>]) -> Option<bool> {
    match g {
        Ground::Const(b) => Some(*b),
        Ground::Atom(i) => assign[*i],
        Ground::Not(inner) => eval3(inner, assign).map(|b| !b),
        Ground::And(parts) => {
            let mut unknown = false;
            for p in parts {
                match eval3(p, assign) {
                    Some(false) => return Some(false),
                    None => unknown = true,
                    Some(true) => {}
                }
            }
            if unknown {
                None
            } else {
                Some(true)
            }
        }
        Ground::Or(parts) => {
            let mut unknown = false;
            for p in parts {
                match eval3(p, assign) {
                    Some(true) => return Some(true),
                    None => unknown = true,
                    Some(false) => {}
                }
            }
            if unknown {
                None
            } else {
                Some(false)
            }
        }
        Ground::Iff(a, b) => Some(eval3(a, assign)? == eval3(b, assign)?),
    }
}

/// Restricted-growth strings of length `k` over `n` symbols, in lexicographic
/// order. Each one picks a representative constant mapping up to a
/// permutation of the domain.
pub(crate) struct ConstantMappings {
    current: Option<Vec<usize>>,
    n: usize,
}

impl ConstantMappings {
    pub fn new(k: usize, n: usize) -> Self {
        let current = if n == 0 && k > 0 { None } else { Some(alloc::vec![0; k]) };
        ConstantMappings { current, n }
    }
}

impl Iterator for ConstantMappings {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let mut next = out.clone();
        let mut i = next.len();
        while i > 1 {
            i -= 1;
            let ceiling = next[..i].iter().max().copied().unwrap_or(0) + 1;
            if next[i] < ceiling && next[i] + 1 < self.n {
                next[i] += 1;
                for slot in next[i + 1..].iter_mut() {
                    *slot = 0;
                }
                self.current = Some(next);
                return Some(out);
            }
        }
        Some(out)
    }
}
