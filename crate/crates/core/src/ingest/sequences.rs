//! Splitting relevance groups into bilateral directed-event sequences.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::groups::RelevanceGroup;
use super::parse::RawEvent;
use crate::error::{Error, Result};
use crate::sequence::{CountryPair, EventKey, EventSequence, SourceEvent};
use crate::symbol::{DirectedEvent, Direction, Symbol, ALPHABET_SIZE};

/// Events by global id; clone keys resolve to their original event.
pub type EventIndex = HashMap<u64, RawEvent>;

pub fn index_events(events: Vec<RawEvent>) -> EventIndex {
    let mut index = EventIndex::with_capacity(events.len());
    for ev in events {
        index.entry(ev.global_event_id).or_insert(ev);
    }
    index
}

fn countries(ev: &RawEvent) -> Result<(&str, &str)> {
    match (&ev.actor1_country, &ev.actor2_country) {
        (Some(a), Some(b)) => Ok((a.as_str(), b.as_str())),
        _ => Err(Error::Contract(format!(
            "event {} reached sequencing without both countries",
            ev.global_event_id
        ))),
    }
}

/// Emits one sequence per (group, unordered country pair).
///
/// Events are ordered by day; ties within a day are shuffled with a generator
/// seeded from `rng_seed` and consumed in output order, so output is a pure
/// function of the inputs and the seed. Sequence ids number the output from 0.
pub fn build_sequences(
    groups: &[RelevanceGroup],
    events: &EventIndex,
    rng_seed: u64,
) -> Result<Vec<EventSequence>> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut out = Vec::new();
    for group in groups {
        let mut by_pair: BTreeMap<(&str, &str), Vec<(EventKey, &RawEvent)>> = BTreeMap::new();
        for key in &group.event_ids {
            let ev = events.get(&key.id).ok_or_else(|| {
                Error::Contract(format!("group member {key} has no source event"))
            })?;
            let (a, b) = countries(ev)?;
            let pair = if a <= b { (a, b) } else { (b, a) };
            by_pair.entry(pair).or_default().push((*key, ev));
        }
        for (_, mut members) in by_pair {
            if members.is_empty() {
                continue;
            }
            // Members arrive in key order; a stable sort keeps that as the
            // pre-shuffle order within a day.
            members.sort_by_key(|(_, ev)| ev.day);
            let mut start = 0;
            while start < members.len() {
                let day = members[start].1.day;
                let end = start
                    + members[start..]
                        .iter()
                        .take_while(|(_, ev)| ev.day == day)
                        .count();
                if end - start > 1 {
                    members[start..end].shuffle(&mut rng);
                }
                start = end;
            }

            let (fwd1, fwd2) = countries(members[0].1)?;
            let mut events_out = Vec::with_capacity(members.len());
            let mut provenance = Vec::with_capacity(members.len());
            for (key, ev) in &members {
                let (a, _) = countries(ev)?;
                let direction = if a == fwd1 {
                    Direction::F
                } else {
                    Direction::B
                };
                events_out.push(DirectedEvent::new(direction, ev.root_code));
                provenance.push(SourceEvent {
                    key: *key,
                    day: ev.day,
                });
            }
            out.push(EventSequence {
                id: out.len() as u64,
                country_pair: Some(CountryPair {
                    actor1: fwd1.to_string(),
                    actor2: fwd2.to_string(),
                }),
                events: events_out,
                terminated: true,
                provenance,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub sequences: usize,
    /// Longest sequence, not counting END.
    pub max_length: usize,
    /// `length_histogram[k]` = number of sequences with `k` events.
    pub length_histogram: Vec<usize>,
    /// Occurrences of each symbol (END included), by symbol index.
    pub symbol_frequencies: Vec<u64>,
}

pub fn corpus_stats(corpus: &[EventSequence]) -> CorpusStats {
    let max_length = corpus.iter().map(EventSequence::len).max().unwrap_or(0);
    let mut length_histogram = vec![0; max_length + 1];
    let mut symbol_frequencies = vec![0u64; ALPHABET_SIZE];
    for seq in corpus {
        length_histogram[seq.len()] += 1;
        for s in seq.symbols() {
            symbol_frequencies[s.index()] += 1;
        }
    }
    if corpus.is_empty() {
        length_histogram.clear();
    }
    CorpusStats {
        sequences: corpus.len(),
        max_length,
        length_histogram,
        symbol_frequencies,
    }
}

impl CorpusStats {
    /// Key-value text rendering for reports.
    pub fn render(&self) -> String {
        let mut out = format!(
            "sequences={}\nmax_length={}\n",
            self.sequences, self.max_length
        );
        let hist: Vec<String> = self
            .length_histogram
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .map(|(len, n)| format!("{len}:{n}"))
            .collect();
        out.push_str(&format!("length_histogram={}\n", hist.join(",")));
        let freq: Vec<String> = self
            .symbol_frequencies
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .map(|(i, n)| format!("{}:{n}", Symbol::from_index(i)))
            .collect();
        out.push_str(&format!("symbol_frequencies={}\n", freq.join(",")));
        out
    }
}
