use rayon::prelude::*;
use serde::Serialize;

use super::hypothesis::{Modality, NormHypothesis};
use super::machine::{Assumption, Semantics};
use crate::sequence::EventSequence;
use crate::symbol::{CodeSet, DirSet, Direction, RootCode, Symbol, ALPHABET_SIZE};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct NormCounts {
    pub triggers: u64,
    pub fulfilments: u64,
    pub violations: u64,
    pub sanctioned_violations: u64,
}

impl NormCounts {
    pub fn unsanctioned_violations(&self) -> u64 {
        self.violations - self.sanctioned_violations
    }

    fn add(&mut self, other: &NormCounts) {
        self.triggers += other.triggers;
        self.fulfilments += other.fulfilments;
        self.violations += other.violations;
        self.sanctioned_violations += other.sanctioned_violations;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormParams {
    pub p_comp: f64,
    pub p_sanc: f64,
}

/// Add-one smoothed compliance and sanction probabilities.
pub fn estimate_params(counts: &NormCounts) -> NormParams {
    let t = counts.triggers as f64;
    let v = counts.violations as f64;
    let s = counts.sanctioned_violations as f64;
    NormParams {
        p_comp: (t - v + 1.0) / (t + 2.0),
        p_sanc: (s + 1.0) / (v + 2.0),
    }
}

/// Positions of every symbol in one sequence, for first-occurrence queries.
pub(crate) struct Occurrences {
    positions: [Vec<u32>; ALPHABET_SIZE],
}

impl Occurrences {
    pub(crate) fn new(symbols: &[Symbol]) -> Self {
        let mut positions: [Vec<u32>; ALPHABET_SIZE] = std::array::from_fn(|_| Vec::new());
        for (i, s) in symbols.iter().enumerate() {
            positions[s.index()].push(i as u32);
        }
        Occurrences { positions }
    }

    fn first_of(&self, symbol: Symbol, from: usize) -> Option<usize> {
        let p = &self.positions[symbol.index()];
        let i = p.partition_point(|&x| (x as usize) < from);
        p.get(i).map(|&x| x as usize)
    }

    /// First index `>= from` holding an event in `dirs x codes`.
    pub(crate) fn first_match(&self, dirs: DirSet, codes: CodeSet, from: usize) -> Option<usize> {
        let mut best: Option<usize> = None;
        for code in codes.codes() {
            for d in dirs.iter() {
                if let Some(i) = self.first_of(Symbol::ev(d, code.get()), from) {
                    best = Some(best.map_or(i, |b| b.min(i)));
                }
            }
        }
        best
    }

    /// First event with `code` in either direction.
    fn first_code(&self, code: RootCode) -> Option<(usize, Direction)> {
        let f = self.first_of(Symbol::ev(Direction::F, code.get()), 0);
        let b = self.first_of(Symbol::ev(Direction::B, code.get()), 0);
        match (f, b) {
            (Some(i), Some(j)) if j < i => Some((j, Direction::B)),
            (Some(i), _) => Some((i, Direction::F)),
            (None, Some(j)) => Some((j, Direction::B)),
            (None, None) => None,
        }
    }
}

/// How a norm plays out in one sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Trace {
    /// Index of the first symbol after activation (0 for unconditional norms).
    pub activation: usize,
    pub doi: DirSet,
    pub fulfilled: bool,
    /// Where the search for a sanction starts: the activation point for a
    /// violated obligation, the symbol after the violating event for a
    /// violated prohibition.
    pub sanction_from: usize,
    /// First sanction at or after `sanction_from`, if violated.
    pub sanction_at: Option<usize>,
}

impl Trace {
    pub fn sanctioned(&self, semantics: &Semantics) -> bool {
        match self.sanction_at {
            Some(i) if semantics.strict_sanction => i == self.sanction_from,
            Some(_) => true,
            None => false,
        }
    }

    /// The only Activating branch with nonzero likelihood, if any. `None`
    /// happens only under strict sanctions with a late sanction.
    pub fn consistent_branch(&self, semantics: &Semantics) -> Option<Assumption> {
        if self.fulfilled {
            Some(Assumption::Comply)
        } else if self.sanctioned(semantics) {
            Some(Assumption::ViolateSanctioned)
        } else if self.sanction_at.is_none() {
            Some(Assumption::ViolateUnsanctioned)
        } else {
            None
        }
    }
}

pub(crate) fn activation(norm: &NormHypothesis, occ: &Occurrences) -> Option<(usize, DirSet)> {
    match norm.condition {
        None => Some((0, DirSet::BOTH)),
        Some(c) => occ
            .first_code(c.code)
            .map(|(j, d)| (j + 1, c.rel_dir.doi(d))),
    }
}

pub(crate) fn trace_with(
    norm: &NormHypothesis,
    semantics: &Semantics,
    occ: &Occurrences,
) -> Option<Trace> {
    let (a, doi) = activation(norm, occ)?;
    let governed = occ.first_match(doi, CodeSet::single(norm.event_code), a);
    let (fulfilled, sanction_from) = match (norm.modality, governed) {
        (Modality::O, Some(_)) => (true, a),
        (Modality::O, None) => (false, a),
        (Modality::P, Some(k)) => (false, k + 1),
        (Modality::P, None) => (true, a),
    };
    let sanction_at = if fulfilled {
        None
    } else {
        occ.first_match(
            semantics.sanction_dirs(doi),
            CodeSet::sanctions(),
            sanction_from,
        )
    };
    Some(Trace {
        activation: a,
        doi,
        fulfilled,
        sanction_from,
        sanction_at,
    })
}

/// The norm's trace over an END-terminated symbol sequence; `None` if it
/// never triggers.
pub fn trace(norm: &NormHypothesis, semantics: &Semantics, symbols: &[Symbol]) -> Option<Trace> {
    trace_with(norm, semantics, &Occurrences::new(symbols))
}

fn tally(counts: &mut NormCounts, t: Option<Trace>, semantics: &Semantics) {
    if let Some(t) = t {
        counts.triggers += 1;
        if t.fulfilled {
            counts.fulfilments += 1;
        } else {
            counts.violations += 1;
            if t.sanctioned(semantics) {
                counts.sanctioned_violations += 1;
            }
        }
    }
}

pub fn count_norm_stats(norm: &NormHypothesis, corpus: &[EventSequence]) -> NormCounts {
    count_norm_stats_with(norm, corpus, &Semantics::default())
}

pub fn count_norm_stats_with(
    norm: &NormHypothesis,
    corpus: &[EventSequence],
    semantics: &Semantics,
) -> NormCounts {
    let mut counts = NormCounts::default();
    for seq in corpus {
        tally(
            &mut counts,
            trace(norm, semantics, &seq.symbols()),
            semantics,
        );
    }
    counts
}

/// Counts for many hypotheses in one pass over the corpus.
pub fn count_all(
    hypotheses: &[NormHypothesis],
    corpus: &[EventSequence],
    semantics: &Semantics,
) -> Vec<NormCounts> {
    corpus
        .par_iter()
        .fold(
            || vec![NormCounts::default(); hypotheses.len()],
            |mut acc, seq| {
                let occ = Occurrences::new(&seq.symbols());
                for (h, c) in hypotheses.iter().zip(acc.iter_mut()) {
                    tally(c, trace_with(h, semantics, &occ), semantics);
                }
                acc
            },
        )
        .reduce(
            || vec![NormCounts::default(); hypotheses.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    x.add(y);
                }
                a
            },
        )
}
