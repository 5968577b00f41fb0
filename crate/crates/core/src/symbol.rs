//! The 41-symbol event alphabet: twenty CAMEO root codes in two directions,
//! plus the sequence terminator.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of CAMEO root codes.
pub const NUM_CODES: usize = 20;

/// 20 codes x 2 directions + END.
pub const ALPHABET_SIZE: usize = 2 * NUM_CODES + 1;

/// Root codes treated as sanctions: Disapprove, Reject, Reduce relations.
pub const SANCTION_CODES: [u8; 3] = [11, 12, 16];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    /// Same orientation as the first event of the sequence.
    F,
    B,
}

impl Direction {
    pub fn opposite(self) -> Direction {
        match self {
            Direction::F => Direction::B,
            Direction::B => Direction::F,
        }
    }

    fn bit(self) -> u8 {
        match self {
            Direction::F => 1,
            Direction::B => 2,
        }
    }
}

/// A CAMEO root code in `1..=20`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct RootCode(u8);

impl RootCode {
    pub fn new(code: u8) -> Result<RootCode> {
        if (1..=NUM_CODES as u8).contains(&code) {
            Ok(RootCode(code))
        } else {
            Err(Error::Parse(format!("root code {code} outside 1-20")))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = RootCode> {
        (1..=NUM_CODES as u8).map(RootCode)
    }

    pub fn is_sanction(self) -> bool {
        SANCTION_CODES.contains(&self.0)
    }
}

impl TryFrom<u8> for RootCode {
    type Error = Error;

    fn try_from(code: u8) -> Result<RootCode> {
        RootCode::new(code)
    }
}

impl From<RootCode> for u8 {
    fn from(code: RootCode) -> u8 {
        code.0
    }
}

impl fmt::Display for RootCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DirectedEvent {
    pub direction: Direction,
    pub code: RootCode,
}

impl DirectedEvent {
    pub fn new(direction: Direction, code: RootCode) -> Self {
        DirectedEvent { direction, code }
    }

    pub fn reversed(self) -> Self {
        DirectedEvent {
            direction: self.direction.opposite(),
            code: self.code,
        }
    }
}

/// One element of a sequence: a directed event or the terminator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Symbol {
    Event(DirectedEvent),
    End,
}

impl Symbol {
    pub const END_INDEX: usize = ALPHABET_SIZE - 1;

    /// Shorthand used heavily in tests and fixtures. Panics on an invalid code.
    pub fn ev(direction: Direction, code: u8) -> Symbol {
        Symbol::Event(DirectedEvent::new(
            direction,
            RootCode::new(code).expect("valid root code"),
        ))
    }

    /// Dense index in `0..41`; END is last.
    #[inline]
    pub fn index(self) -> usize {
        match self {
            Symbol::Event(e) => {
                (e.code.0 as usize - 1) * 2
                    + match e.direction {
                        Direction::F => 0,
                        Direction::B => 1,
                    }
            }
            Symbol::End => Self::END_INDEX,
        }
    }

    #[inline]
    pub fn from_index(index: usize) -> Symbol {
        assert!(index < ALPHABET_SIZE, "symbol index {index} out of range");
        if index == Self::END_INDEX {
            Symbol::End
        } else {
            let direction = if index.is_multiple_of(2) {
                Direction::F
            } else {
                Direction::B
            };
            Symbol::Event(DirectedEvent::new(direction, RootCode(index as u8 / 2 + 1)))
        }
    }

    pub fn all() -> impl Iterator<Item = Symbol> {
        (0..ALPHABET_SIZE).map(Symbol::from_index)
    }

    /// Swaps F and B; END is unchanged.
    #[inline]
    pub fn reversed(self) -> Symbol {
        match self {
            Symbol::Event(e) => Symbol::Event(e.reversed()),
            Symbol::End => Symbol::End,
        }
    }

    pub fn event(self) -> Option<DirectedEvent> {
        match self {
            Symbol::Event(e) => Some(e),
            Symbol::End => None,
        }
    }

    pub fn is_end(self) -> bool {
        matches!(self, Symbol::End)
    }

    /// True if this is an event with direction in `dirs` and code in `codes`.
    #[inline]
    pub fn matches(self, dirs: DirSet, codes: CodeSet) -> bool {
        match self {
            Symbol::Event(e) => dirs.contains(e.direction) && codes.contains(e.code),
            Symbol::End => false,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Event(e) => {
                let d = match e.direction {
                    Direction::F => 'F',
                    Direction::B => 'B',
                };
                write!(f, "{d}{:02}", e.code.0)
            }
            Symbol::End => f.write_str("END"),
        }
    }
}

impl FromStr for Symbol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Symbol> {
        if s == "END" {
            return Ok(Symbol::End);
        }
        let bad = || Error::Parse(format!("invalid symbol token `{s}`"));
        if s.len() != 3 || !s.is_ascii() {
            return Err(bad());
        }
        let direction = match &s[..1] {
            "F" => Direction::F,
            "B" => Direction::B,
            _ => return Err(bad()),
        };
        let digits = &s[1..];
        if !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let code: u8 = digits.parse().map_err(|_| bad())?;
        Ok(Symbol::Event(DirectedEvent::new(
            direction,
            RootCode::new(code).map_err(|_| bad())?,
        )))
    }
}

/// Reverse every event direction in a symbol slice.
pub fn reverse_all(symbols: &[Symbol]) -> Vec<Symbol> {
    symbols.iter().map(|s| s.reversed()).collect()
}

/// Subset of {F, B}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct DirSet(u8);

impl DirSet {
    pub const EMPTY: DirSet = DirSet(0);
    pub const F: DirSet = DirSet(1);
    pub const B: DirSet = DirSet(2);
    pub const BOTH: DirSet = DirSet(3);

    pub fn single(d: Direction) -> DirSet {
        DirSet(d.bit())
    }

    #[inline]
    pub fn contains(self, d: Direction) -> bool {
        self.0 & d.bit() != 0
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Maps each member to its opposite direction.
    pub fn opposite(self) -> DirSet {
        let mut out = 0;
        if self.contains(Direction::F) {
            out |= Direction::B.bit();
        }
        if self.contains(Direction::B) {
            out |= Direction::F.bit();
        }
        DirSet(out)
    }

    pub fn iter(self) -> impl Iterator<Item = Direction> {
        [Direction::F, Direction::B]
            .into_iter()
            .filter(move |d| self.contains(*d))
    }
}

impl fmt::Display for DirSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self
            .iter()
            .map(|d| match d {
                Direction::F => "F",
                Direction::B => "B",
            })
            .collect();
        write!(f, "{{{}}}", names.join(","))
    }
}

/// A set of root codes, stored as a bitmask over codes 1..=20.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct CodeSet(u32);

impl CodeSet {
    pub fn single(code: RootCode) -> CodeSet {
        CodeSet(1 << code.0)
    }

    pub fn sanctions() -> CodeSet {
        SANCTION_CODES
            .iter()
            .fold(CodeSet(0), |acc, &c| CodeSet(acc.0 | 1 << c))
    }

    #[inline]
    pub fn contains(self, code: RootCode) -> bool {
        self.0 & (1 << code.0) != 0
    }

    pub fn codes(self) -> impl Iterator<Item = RootCode> {
        RootCode::all().filter(move |c| self.contains(*c))
    }
}

impl fmt::Display for CodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let codes: Vec<String> = self.codes().map(|c| c.to_string()).collect();
        write!(f, "{{{}}}", codes.join(","))
    }
}
