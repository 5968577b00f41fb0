//! Event sequences and the corpus text format.
//!
//! A corpus file holds one sequence per line as space-separated tokens
//! (`F01`..`F20`, `B01`..`B20`, terminated by `END`). The optional sidecar
//! metadata file is tab-separated: sequence id, country pair, comma-joined
//! source event ids, comma-joined days.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbol::{DirectedEvent, Direction, Symbol};

/// Identifier of a (possibly cloned) source event.
///
/// Clones of a heavily mentioned event carry the ordinal of the mention they
/// were split off for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EventKey {
    pub id: u64,
    pub clone: Option<u32>,
}

impl EventKey {
    pub fn original(id: u64) -> Self {
        EventKey { id, clone: None }
    }

    pub fn cloned(id: u64, ordinal: u32) -> Self {
        EventKey {
            id,
            clone: Some(ordinal),
        }
    }
}

impl fmt::Display for EventKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.clone {
            None => write!(f, "{}", self.id),
            Some(k) => write!(f, "{}:{}", self.id, k),
        }
    }
}

impl FromStr for EventKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("invalid event key `{s}`"));
        match s.split_once(':') {
            None => Ok(EventKey::original(s.parse().map_err(|_| bad())?)),
            Some((id, k)) => Ok(EventKey::cloned(
                id.parse().map_err(|_| bad())?,
                k.parse().map_err(|_| bad())?,
            )),
        }
    }
}

/// The two countries of a bilateral sequence, in forward orientation:
/// `actor1` performed the sequence's first event towards `actor2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CountryPair {
    pub actor1: String,
    pub actor2: String,
}

impl fmt::Display for CountryPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.actor1, self.actor2)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceEvent {
    pub key: EventKey,
    pub day: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventSequence {
    pub id: u64,
    pub country_pair: Option<CountryPair>,
    pub events: Vec<DirectedEvent>,
    pub terminated: bool,
    /// Aligned with `events` when the sequence came from ingest; empty otherwise.
    pub provenance: Vec<SourceEvent>,
}

impl EventSequence {
    /// A terminated sequence without source metadata.
    pub fn from_events(id: u64, events: Vec<DirectedEvent>) -> Self {
        EventSequence {
            id,
            country_pair: None,
            events,
            terminated: true,
            provenance: Vec::new(),
        }
    }

    /// Builds a sequence from symbols; the slice must be END-terminated with
    /// no interior END.
    pub fn from_symbols(id: u64, symbols: &[Symbol]) -> Result<Self> {
        let (last, body) = symbols
            .split_last()
            .ok_or_else(|| Error::Parse("empty symbol sequence".into()))?;
        if !last.is_end() {
            return Err(Error::Parse(format!("sequence {id} is not END-terminated")));
        }
        let events = body
            .iter()
            .map(|s| {
                s.event()
                    .ok_or_else(|| Error::Parse(format!("sequence {id} has an interior END")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EventSequence::from_events(id, events))
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// The events as symbols, followed by END when terminated.
    pub fn symbols(&self) -> Vec<Symbol> {
        let mut out: Vec<Symbol> = self.events.iter().copied().map(Symbol::Event).collect();
        if self.terminated {
            out.push(Symbol::End);
        }
        out
    }

    /// Copy with every direction swapped.
    pub fn reversed(&self) -> Self {
        EventSequence {
            events: self.events.iter().map(|e| e.reversed()).collect(),
            ..self.clone()
        }
    }

    /// Renders the corpus line (without newline).
    pub fn to_line(&self) -> String {
        let mut tokens: Vec<String> = self.symbols().iter().map(|s| s.to_string()).collect();
        if !self.terminated {
            tokens.push(Symbol::End.to_string());
        }
        tokens.join(" ")
    }

    pub fn parse_line(id: u64, line: &str) -> Result<Self> {
        let symbols = line
            .split_ascii_whitespace()
            .map(str::parse)
            .collect::<Result<Vec<Symbol>>>()
            .map_err(|e| Error::Parse(format!("line {}: {e}", id + 1)))?;
        EventSequence::from_symbols(id, &symbols)
    }

    /// True if the first event (if any) is forward, per the orientation convention.
    pub fn starts_forward(&self) -> bool {
        self.events
            .first()
            .is_none_or(|e| e.direction == Direction::F)
    }
}

/// Every sequence's symbols, END-terminated.
pub fn corpus_symbols(corpus: &[EventSequence]) -> Vec<Vec<Symbol>> {
    corpus.iter().map(EventSequence::symbols).collect()
}

pub fn write_corpus(path: &Path, corpus: &[EventSequence]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_corpus_to(&mut out, corpus).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn write_corpus_to<W: Write>(out: &mut W, corpus: &[EventSequence]) -> std::io::Result<()> {
    for seq in corpus {
        writeln!(out, "{}", seq.to_line())?;
    }
    Ok(())
}

pub fn write_metadata(path: &Path, corpus: &[EventSequence]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_metadata_to(&mut out, corpus).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn write_metadata_to<W: Write>(out: &mut W, corpus: &[EventSequence]) -> std::io::Result<()> {
    for seq in corpus {
        let pair = seq
            .country_pair
            .as_ref()
            .map(ToString::to_string)
            .unwrap_or_default();
        let ids: Vec<String> = seq.provenance.iter().map(|p| p.key.to_string()).collect();
        let days: Vec<String> = seq
            .provenance
            .iter()
            .map(|p| p.day.format("%Y%m%d").to_string())
            .collect();
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            seq.id,
            pair,
            ids.join(","),
            days.join(",")
        )?;
    }
    Ok(())
}

/// Reads a corpus file. Blank lines are skipped; sequence ids are assigned in
/// file order.
pub fn read_corpus(path: &Path) -> Result<Vec<EventSequence>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus_from(BufReader::new(file)).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn read_corpus_from<R: BufRead>(reader: R) -> Result<Vec<EventSequence>> {
    let mut corpus = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(|e| Error::Parse(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        corpus.push(EventSequence::parse_line(corpus.len() as u64, &line)?);
    }
    Ok(corpus)
}
