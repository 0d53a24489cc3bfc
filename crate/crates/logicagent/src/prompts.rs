//! The five stage prompts and placeholder substitution.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PromptTemplate {
    SemanticStructuring,
    Translator,
    Planner,
    Solver,
    ReflectiveVerification,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("template {template} has no binding for {placeholder}")]
pub struct UnboundPlaceholder {
    pub template: PromptTemplate,
    pub placeholder: &'static str,
}

impl PromptTemplate {
    pub const ALL: [PromptTemplate; 5] = [
        PromptTemplate::SemanticStructuring,
        PromptTemplate::Translator,
        PromptTemplate::Planner,
        PromptTemplate::Solver,
        PromptTemplate::ReflectiveVerification,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PromptTemplate::SemanticStructuring => "semantic_structuring",
            PromptTemplate::Translator => "translator",
            PromptTemplate::Planner => "planner",
            PromptTemplate::Solver => "solver",
            PromptTemplate::ReflectiveVerification => "reflective_verification",
        }
    }

    pub fn body(self) -> &'static str {
        match self {
            PromptTemplate::SemanticStructuring => include_str!("../prompts/semantic_structuring.txt"),
            PromptTemplate::Translator => include_str!("../prompts/translator.txt"),
            PromptTemplate::Planner => include_str!("../prompts/planner.txt"),
            PromptTemplate::Solver => include_str!("../prompts/solver.txt"),
            PromptTemplate::ReflectiveVerification => include_str!("../prompts/reflective_verification.txt"),
        }
    }

    /// Placeholder tokens as they appear in the body. Other braces in the
    /// body (JSON examples) are left alone.
    pub fn placeholders(self) -> &'static [&'static str] {
        match self {
            PromptTemplate::SemanticStructuring => &["{question}"],
            PromptTemplate::Translator => &["{context}"],
            PromptTemplate::Planner => &["{target_statement}", "{premises}"],
            PromptTemplate::Solver => &["{target_statement}", "{premises}", "{PLAN}"],
            PromptTemplate::ReflectiveVerification => &["[[EXECUTION]]"],
        }
    }

    /// First 16 hex digits of the body's sha256; part of cache keys.
    pub fn version(self) -> String {
        let digest = Sha256::digest(self.body().as_bytes());
        hex::encode(&digest[..8])
    }

    /// Single pass over the body: each placeholder occurrence is replaced by
    /// its binding and bound text is never rescanned.
    pub fn render(self, bindings: &BTreeMap<&str, String>) -> Result<String, UnboundPlaceholder> {
        let names = self.placeholders();
        for &p in names {
            if !bindings.contains_key(key_of(p)) {
                return Err(UnboundPlaceholder { template: self, placeholder: p });
            }
        }
        let body = self.body();
        let mut out = String::with_capacity(body.len() + 256);
        let mut rest = body;
        loop {
            let next = names.iter().filter_map(|p| rest.find(p).map(|i| (i, *p))).min_by_key(|(i, _)| *i);
            match next {
                Some((i, p)) => {
                    out.push_str(&rest[..i]);
                    out.push_str(&bindings[key_of(p)]);
                    rest = &rest[i + p.len()..];
                }
                None => {
                    out.push_str(rest);
                    break;
                }
            }
        }
        Ok(out)
    }
}

/// `{PLAN}` and `[[EXECUTION]]` bind as `PLAN` and `EXECUTION`.
fn key_of(placeholder: &str) -> &str {
    placeholder.trim_matches(|c| matches!(c, '{' | '}' | '[' | ']'))
}

impl fmt::Display for PromptTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
