use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::fol::Formula;

const PREFIXES: [&str; 4] = ["Non", "Dis", "Un", "In"];

/// Lexical antonym predicates that verification rewrites to negations,
/// e.g. `Unjust(x)` to `¬Just(x)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AntonymTable {
    pub pairs: BTreeMap<String, String>,
}

impl Default for AntonymTable {
    fn default() -> Self {
        let mut pairs = BTreeMap::new();
        pairs.insert("Unjust".to_string(), "Just".to_string());
        AntonymTable { pairs }
    }
}

impl AntonymTable {
    pub fn empty() -> Self {
        AntonymTable { pairs: BTreeMap::new() }
    }

    pub fn declare(mut self, antonym: impl Into<String>, base: impl Into<String>) -> Self {
        self.pairs.insert(antonym.into(), base.into());
        self
    }

    pub fn canonicalize(&self, f: &Formula) -> Formula {
        match f {
            Formula::Atom { pred, args } => match self.pairs.get(pred) {
                Some(base) => Formula::not(Formula::atom(base.clone(), args.clone())),
                None => f.clone(),
            },
            Formula::Not(inner) => match self.canonicalize(inner) {
                Formula::Not(g) => *g,
                g => Formula::Not(Box::new(g)),
            },
            Formula::Binary { op, lhs, rhs } => Formula::binary(*op, self.canonicalize(lhs), self.canonicalize(rhs)),
            Formula::Quantified { quant, var, body } => {
                Formula::Quantified { quant: *quant, var: var.clone(), body: Box::new(self.canonicalize(body)) }
            }
        }
    }

    /// Predicates that look like a prefixed antonym of another predicate in
    /// the same vocabulary but are not declared in the table.
    pub fn undeclared<'a>(&self, formulas: impl IntoIterator<Item = &'a Formula>) -> Vec<String> {
        let names: BTreeSet<String> = formulas.into_iter().flat_map(|f| f.predicates()).map(|(n, _)| n).collect();
        let mut out = Vec::new();
        for name in &names {
            if self.pairs.contains_key(name) {
                continue;
            }
            for prefix in PREFIXES {
                let Some(rest) = name.strip_prefix(prefix) else { continue };
                let mut chars = rest.chars();
                let Some(first) = chars.next() else { continue };
                let base: String = first.to_uppercase().chain(chars).collect();
                if names.contains(&base) {
                    out.push(name.clone());
                    break;
                }
            }
        }
        out
    }
}
