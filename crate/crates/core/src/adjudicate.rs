//! Combining the verdicts of S1 and ¬S1 (and S2, ¬S2 when needed) into one
//! final label.

use serde::{Deserialize, Serialize};

use crate::oracle::Label;
use crate::semiotic::Position;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DirectOutcome {
    Final(Label),
    NeedQuick,
    NeedDeep,
}

/// Total over the nine verdict pairs.
pub fn direct_resolution(s1: Label, not_s1: Label) -> DirectOutcome {
    use Label::*;
    match (s1, not_s1) {
        (True, False) => DirectOutcome::Final(True),
        (False, True) => DirectOutcome::Final(False),
        (Uncertain, Uncertain) => DirectOutcome::Final(Uncertain),
        (Uncertain, _) | (_, Uncertain) => DirectOutcome::NeedQuick,
        (True, True) | (False, False) => DirectOutcome::NeedDeep,
    }
}

/// Resolution without any reflection: the direct table extended by the
/// supplemental rule. A lone definite verdict wins, negated when it belongs
/// to ¬S1; an agreeing definite pair keeps S1's verdict.
pub fn supplemental_resolution(s1: Label, not_s1: Label) -> Label {
    use Label::*;
    match direct_resolution(s1, not_s1) {
        DirectOutcome::Final(l) => l,
        DirectOutcome::NeedQuick => match (s1, not_s1) {
            (Uncertain, definite) => definite.flip(),
            (definite, _) => definite,
        },
        DirectOutcome::NeedDeep => s1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ReflectionType {
    Type1,
    Type2,
    Type3,
    Type4,
    Type5,
    Type6,
}

impl ReflectionType {
    pub const ALL: [ReflectionType; 6] = [
        ReflectionType::Type1,
        ReflectionType::Type2,
        ReflectionType::Type3,
        ReflectionType::Type4,
        ReflectionType::Type5,
        ReflectionType::Type6,
    ];

    /// Reads the digit after the first `type` (any case), or a bare digit.
    /// `Type 4: S1 incorrect` is Type4.
    pub fn parse_loose(s: &str) -> Option<ReflectionType> {
        let lower = s.trim().to_ascii_lowercase();
        let digit = match lower.find("type") {
            Some(i) => lower[i + 4..].trim_start().chars().next(),
            None if lower.len() == 1 => lower.chars().next(),
            None => None,
        }?;
        match digit {
            '1' => Some(ReflectionType::Type1),
            '2' => Some(ReflectionType::Type2),
            '3' => Some(ReflectionType::Type3),
            '4' => Some(ReflectionType::Type4),
            '5' => Some(ReflectionType::Type5),
            '6' => Some(ReflectionType::Type6),
            _ => None,
        }
    }

    /// The final label this verification type implies. Type 1 returns S1's
    /// verdict and Type 6 the independently verified one.
    pub fn final_label(self, s1_verdict: Label, verified: Label) -> Label {
        match self {
            ReflectionType::Type1 => s1_verdict,
            ReflectionType::Type2 | ReflectionType::Type3 => Label::Uncertain,
            ReflectionType::Type4 => Label::False,
            ReflectionType::Type5 => Label::True,
            ReflectionType::Type6 => verified,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ResolutionPath {
    Direct,
    Quick,
    Deep,
    DeepThenQuick,
    AblationDirect,
}

/// The five leaves of deep reflection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeepLeaf {
    /// Both True and S2 True: S2 implies ¬S1.
    BothTrueS2True,
    /// Both True and ¬S2 False: S1 implies ¬S2, contrapositive.
    BothTrueNotS2False,
    BothTrueFallback,
    /// Both False and S2 True.
    BothFalseS2True,
    BothFalseFallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeepOutcome {
    pub leaf: DeepLeaf,
    /// None when quick reflection must decide.
    pub label: Option<Label>,
}

/// Runs the deep-reflection tree for an agreeing definite pair. `solve` is
/// asked for S2 and possibly ¬S2; a solver error falls through to quick
/// reflection.
pub fn deep_reflection<E>(shared: Label, mut solve: impl FnMut(Position) -> Result<Label, E>) -> DeepOutcome {
    let s2 = solve(Position::S2).ok();
    match shared {
        Label::True => {
            if s2 == Some(Label::True) {
                return DeepOutcome { leaf: DeepLeaf::BothTrueS2True, label: Some(Label::False) };
            }
            if solve(Position::NotS2).ok() == Some(Label::False) {
                return DeepOutcome { leaf: DeepLeaf::BothTrueNotS2False, label: Some(Label::False) };
            }
            DeepOutcome { leaf: DeepLeaf::BothTrueFallback, label: None }
        }
        _ => {
            if s2 == Some(Label::True) {
                return DeepOutcome { leaf: DeepLeaf::BothFalseS2True, label: Some(Label::False) };
            }
            DeepOutcome { leaf: DeepLeaf::BothFalseFallback, label: None }
        }
    }
}
