use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::symbol::{DirSet, Direction, RootCode, NUM_CODES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Modality {
    /// Obligation: the event must occur.
    O,
    /// Prohibition: the event must not occur.
    P,
}

/// Direction of the governed event relative to the triggering event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelDir {
    Same,
    Opposite,
}

impl RelDir {
    /// Directions of interest once triggered by an event in direction `d`.
    pub fn doi(self, d: Direction) -> DirSet {
        match self {
            RelDir::Same => DirSet::single(d),
            RelDir::Opposite => DirSet::single(d.opposite()),
        }
    }

    fn sign(self) -> char {
        match self {
            RelDir::Same => '+',
            RelDir::Opposite => '-',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Condition {
    pub code: RootCode,
    pub rel_dir: RelDir,
}

/// `O(ec)`, `P(ec)`, `O(cec,ec,±)` or `P(cec,ec,±)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NormHypothesis {
    pub modality: Modality,
    pub condition: Option<Condition>,
    pub event_code: RootCode,
}

impl NormHypothesis {
    pub fn unconditional(modality: Modality, event_code: RootCode) -> Self {
        NormHypothesis {
            modality,
            condition: None,
            event_code,
        }
    }

    pub fn conditional(
        modality: Modality,
        condition_code: RootCode,
        event_code: RootCode,
        rel_dir: RelDir,
    ) -> Self {
        NormHypothesis {
            modality,
            condition: Some(Condition {
                code: condition_code,
                rel_dir,
            }),
            event_code,
        }
    }

    pub fn is_conditional(&self) -> bool {
        self.condition.is_some()
    }

    /// Position in [`enumerate_hypotheses`].
    pub fn canonical_index(&self) -> usize {
        let m = match self.modality {
            Modality::O => 0,
            Modality::P => 1,
        };
        let ec = self.event_code.get() as usize - 1;
        match self.condition {
            None => m * NUM_CODES + ec,
            Some(c) => {
                let cec = c.code.get() as usize - 1;
                let r = match c.rel_dir {
                    RelDir::Same => 0,
                    RelDir::Opposite => 1,
                };
                2 * NUM_CODES + ((m * NUM_CODES + cec) * NUM_CODES + ec) * 2 + r
            }
        }
    }
}

impl PartialOrd for NormHypothesis {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for NormHypothesis {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical_index().cmp(&other.canonical_index())
    }
}

pub const HYPOTHESIS_COUNT: usize = 2 * NUM_CODES + 2 * NUM_CODES * NUM_CODES * 2;

/// All 1640 hypotheses: unconditional `O` then `P` by event code, then
/// conditional ones by modality, condition code, event code and `+` before `-`.
pub fn enumerate_hypotheses() -> Vec<NormHypothesis> {
    let mut out = Vec::with_capacity(HYPOTHESIS_COUNT);
    for m in [Modality::O, Modality::P] {
        for ec in RootCode::all() {
            out.push(NormHypothesis::unconditional(m, ec));
        }
    }
    for m in [Modality::O, Modality::P] {
        for cec in RootCode::all() {
            for ec in RootCode::all() {
                for r in [RelDir::Same, RelDir::Opposite] {
                    out.push(NormHypothesis::conditional(m, cec, ec, r));
                }
            }
        }
    }
    out
}

impl fmt::Display for NormHypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = match self.modality {
            Modality::O => 'O',
            Modality::P => 'P',
        };
        match self.condition {
            None => write!(f, "{m}({})", self.event_code.get()),
            Some(c) => write!(
                f,
                "{m}({},{},{})",
                c.code.get(),
                self.event_code.get(),
                c.rel_dir.sign()
            ),
        }
    }
}

impl Serialize for NormHypothesis {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NormHypothesis {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn syntax(input: &str, reason: impl Into<String>) -> Error {
    Error::NormSyntax {
        input: input.to_string(),
        reason: reason.into(),
    }
}

fn parse_code(input: &str, field: &str) -> Result<RootCode> {
    let code: u8 = field
        .trim()
        .parse()
        .map_err(|_| syntax(input, format!("'{}' is not an event code", field.trim())))?;
    RootCode::new(code).map_err(|_| syntax(input, format!("event code {code} outside 1-20")))
}

impl FromStr for NormHypothesis {
    type Err = Error;

    fn from_str(input: &str) -> Result<Self> {
        let s = input.trim();
        let modality = match s.chars().next() {
            Some('O') => Modality::O,
            Some('P') => Modality::P,
            _ => return Err(syntax(input, "modality must be O or P")),
        };
        let inner = s[1..]
            .trim_start()
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| syntax(input, "arguments must be in parentheses"))?;
        let fields: Vec<&str> = inner.split(',').collect();
        match fields.as_slice() {
            [ec] => Ok(NormHypothesis::unconditional(
                modality,
                parse_code(input, ec)?,
            )),
            [cec, ec, dir] => {
                let rel_dir = match dir.trim() {
                    "+" => RelDir::Same,
                    "-" | "\u{2212}" => RelDir::Opposite,
                    other => {
                        return Err(syntax(
                            input,
                            format!("relative direction '{other}' is not + or -"),
                        ))
                    }
                };
                Ok(NormHypothesis::conditional(
                    modality,
                    parse_code(input, cec)?,
                    parse_code(input, ec)?,
                    rel_dir,
                ))
            }
            _ => Err(syntax(input, "expected one or three arguments")),
        }
    }
}
