//! Locating and validating the JSON block at the end of a model response.

use std::fmt;
use std::str::FromStr;

use logicagent_core::oracle::Label;
use logicagent_core::semiotic::SquareDraft;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schema {
    Square,
    Premises,
    Plan,
    Solve,
    Verdict,
}

impl Schema {
    pub const ALL: [Schema; 5] = [Schema::Square, Schema::Premises, Schema::Plan, Schema::Solve, Schema::Verdict];

    pub fn name(self) -> &'static str {
        match self {
            Schema::Square => "square",
            Schema::Premises => "premises",
            Schema::Plan => "plan",
            Schema::Solve => "solve",
            Schema::Verdict => "verdict",
        }
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Schema {
    type Err = ExtractionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Schema::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ExtractionError::UnknownSchema(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtractionError {
    #[error("no {0} block found in the response")]
    NoBlock(Schema),
    #[error("unknown schema {0:?}")]
    UnknownSchema(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawPremise {
    pub statement: String,
    #[serde(rename = "FOL")]
    pub fol: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    Square(SquareDraft),
    Premises(Vec<RawPremise>),
    Plan(Vec<String>),
    Solve { steps: Vec<String>, verdict: Label },
    Verdict { verdict: Label, reason: String },
}

impl Payload {
    pub fn schema(&self) -> Schema {
        match self {
            Payload::Square(_) => Schema::Square,
            Payload::Premises(_) => Schema::Premises,
            Payload::Plan(_) => Schema::Plan,
            Payload::Solve { .. } => Schema::Solve,
            Payload::Verdict { .. } => Schema::Verdict,
        }
    }

    /// The JSON shape a stage is asked to produce.
    pub fn to_json(&self) -> Value {
        match self {
            Payload::Square(d) => serde_json::to_value(d).unwrap_or(Value::Null),
            Payload::Premises(ps) => json!({ "premises": ps }),
            Payload::Plan(steps) => json!({ "plan": steps }),
            Payload::Solve { steps, verdict } => json!({ "steps": steps, "verdict": verdict.as_str() }),
            Payload::Verdict { verdict, reason } => json!({ "verdict": verdict.as_str(), "reason": reason }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractedPayload {
    pub raw: String,
    pub parsed: Payload,
    pub repair_applied: bool,
}

pub fn extract_payload(raw: &str, schema: Schema) -> Result<ExtractedPayload, ExtractionError> {
    if let Some(parsed) = last_valid_block(raw, schema) {
        return Ok(ExtractedPayload { raw: raw.to_string(), parsed, repair_applied: false });
    }
    let repaired = balance_brackets(&drop_trailing_commas(&strip_fences(raw)));
    match last_valid_block(&repaired, schema) {
        Some(parsed) => Ok(ExtractedPayload { raw: raw.to_string(), parsed, repair_applied: true }),
        None => Err(ExtractionError::NoBlock(schema)),
    }
}

pub fn extract_named(raw: &str, schema_name: &str) -> Result<ExtractedPayload, ExtractionError> {
    extract_payload(raw, schema_name.parse()?)
}

fn last_valid_block(text: &str, schema: Schema) -> Option<Payload> {
    let starts: Vec<usize> = text.match_indices('{').map(|(i, _)| i).collect();
    for &i in starts.iter().rev() {
        let mut values = serde_json::Deserializer::from_str(&text[i..]).into_iter::<Value>();
        if let Some(Ok(v)) = values.next() {
            if let Some(p) = conform(&v, schema) {
                return Some(p);
            }
        }
    }
    None
}

fn string_list(v: &Value) -> Option<Vec<String>> {
    v.as_array()?.iter().map(|s| s.as_str().map(str::to_string)).collect()
}

fn label(v: &Value) -> Option<Label> {
    let s = v.as_str()?;
    Label::parse_loose(s.trim_matches(|c: char| !c.is_alphanumeric()))
}

fn conform(v: &Value, schema: Schema) -> Option<Payload> {
    let obj = v.as_object()?;
    match schema {
        Schema::Square => {
            let s1 = obj.get("S1")?.as_object()?;
            s1.get("FOL")?.as_str()?;
            let draft: SquareDraft = serde_json::from_value(v.clone()).ok()?;
            Some(Payload::Square(draft))
        }
        Schema::Premises => {
            let items = obj.get("premises")?.as_array()?;
            let ps = items.iter().map(|p| serde_json::from_value(p.clone()).ok()).collect::<Option<Vec<RawPremise>>>()?;
            Some(Payload::Premises(ps))
        }
        Schema::Plan => {
            let steps = string_list(obj.get("plan")?)?;
            (!steps.is_empty()).then_some(Payload::Plan(steps))
        }
        Schema::Solve => {
            let steps = string_list(obj.get("steps")?)?;
            let verdict = label(obj.get("verdict")?)?;
            (!steps.is_empty()).then_some(Payload::Solve { steps, verdict })
        }
        Schema::Verdict => {
            let verdict = label(obj.get("verdict")?)?;
            let reason = match obj.get("reason") {
                Some(r) => r.as_str()?.to_string(),
                None => String::new(),
            };
            Some(Payload::Verdict { verdict, reason })
        }
    }
}

fn strip_fences(text: &str) -> String {
    text.lines().filter(|l| !l.trim_start().starts_with("```")).collect::<Vec<_>>().join("\n")
}

/// Removes commas directly before a closing bracket, outside strings.
fn drop_trailing_commas(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let (mut in_str, mut escaped) = (false, false);
    for (i, &c) in chars.iter().enumerate() {
        if in_str {
            out.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_str = false;
            }
            continue;
        }
        if c == '"' {
            in_str = true;
        } else if c == ',' {
            let next = chars[i + 1..].iter().find(|c| !c.is_whitespace());
            if matches!(next, Some('}') | Some(']')) {
                continue;
            }
        }
        out.push(c);
    }
    out
}

/// Closes an unterminated string and any brackets still open at the end.
fn balance_brackets(text: &str) -> String {
    let mut stack = Vec::new();
    let (mut in_str, mut escaped) = (false, false);
    for c in text.chars() {
        if in_str {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_str = false;
            }
            continue;
        }
        match c {
            '"' => in_str = true,
            '{' => stack.push('}'),
            '[' => stack.push(']'),
            '}' | ']' if stack.last() == Some(&c) => {
                stack.pop();
            }
            _ => {}
        }
    }
    let mut out = text.to_string();
    if in_str {
        out.push('"');
    }
    out.extend(stack.iter().rev());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_block_at_the_end() {
        let raw = "Reasoning... so S1 was wrong.\n{\"verdict\": \"True\", \"reason\": \"Type 1: S1 reasoning correct\"}";
        let p = extract_payload(raw, Schema::Verdict).unwrap();
        assert!(!p.repair_applied);
        assert_eq!(p.parsed, Payload::Verdict { verdict: Label::True, reason: "Type 1: S1 reasoning correct".into() });
    }

    #[test]
    fn premises_block() {
        let raw = "Here: {\"premises\": [{\"statement\": \"s\", \"FOL\": \"P(a)\"}]}";
        let Payload::Premises(ps) = extract_named(raw, "premises").unwrap().parsed else { panic!() };
        assert_eq!(ps, [RawPremise { statement: "s".into(), fol: "P(a)".into() }]);
    }

    #[test]
    fn prose_only_fails() {
        assert_eq!(extract_payload("I think it is true.", Schema::Solve), Err(ExtractionError::NoBlock(Schema::Solve)));
        assert!(extract_named("{}", "nonsense").is_err());
    }

    #[test]
    fn last_block_wins() {
        let raw = "{\"verdict\": \"False\"} then {\"verdict\": \"uncertain\", \"reason\": \"Type 3\"}";
        let p = extract_payload(raw, Schema::Verdict).unwrap();
        assert_eq!(p.parsed, Payload::Verdict { verdict: Label::Uncertain, reason: "Type 3".into() });
    }

    #[test]
    fn repairs_fences_commas_and_brackets() {
        let raw = "```json\n{\"steps\": [\"Step 1: a\", \"Final answer: false\",], \"verdict\": \"FALSE\",}\n```";
        let p = extract_payload(raw, Schema::Solve).unwrap();
        assert!(p.repair_applied);
        assert_eq!(p.parsed, Payload::Solve { steps: vec!["Step 1: a".into(), "Final answer: false".into()], verdict: Label::False });

        let truncated = "{\"plan\": [\"Step 1: find the goal\", \"Final Step: decide";
        let p = extract_payload(truncated, Schema::Plan).unwrap();
        assert_eq!(p.parsed, Payload::Plan(vec!["Step 1: find the goal".into(), "Final Step: decide".into()]));
    }

    #[test]
    fn commas_inside_strings_survive() {
        assert_eq!(drop_trailing_commas("{\"a\": \"x,]\",}"), "{\"a\": \"x,]\"}");
    }

    #[test]
    fn square_with_trailing_comma() {
        let raw = r#"{
  "concept_A": "just",
  "concept_B": "unjust",
  "S1": {"statement": "Repayment of debt is always just.", "FOL": "∀x (Debt(x) ∧ Repaid(x) → Just(x))"},
  "S2": {"statement": "Repayment of debt is always unjust.", "FOL": "∀x (Debt(x) ∧ Repaid(x) → Unjust(x))"},
}"#;
        let Payload::Square(d) = extract_payload(raw, Schema::Square).unwrap().parsed else { panic!() };
        assert_eq!(d.concept_b, "unjust");
        assert!(d.s1.unwrap().usable);
        assert!(d.not_s1.is_none());
    }
}
