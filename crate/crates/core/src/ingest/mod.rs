//! GDELT ingest: parse events and mentions, keep bilateral government events,
//! group them by mutual relevance and emit directed bilateral sequences.

mod groups;
mod parse;
mod sequences;
mod union_find;

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

pub use groups::{
    build_relevance_groups, default_source_filters, filter_events, is_bilateral_government,
    DateWindow, GroupingDiagnostics, RelevanceGroup, DEFAULT_CLONE_THRESHOLD, GOVERNMENT,
};
pub use parse::{
    open_input, parse_day, parse_event_row, parse_events, parse_events_with, parse_mention_row,
    parse_mentions, parse_mentions_with, root_code, MentionRecord, RawEvent, RowCounts,
    EVENTS_COLUMNS, MENTIONS_COLUMNS,
};
pub use sequences::{build_sequences, corpus_stats, index_events, CorpusStats, EventIndex};
pub use union_find::UnionFind;

use crate::error::{Error, Result};
use crate::sequence::EventSequence;

#[derive(Debug, Clone, Serialize)]
pub struct IngestConfig {
    pub clone_threshold: usize,
    pub source_filters: Vec<String>,
    pub window: DateWindow,
    pub seed: u64,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            clone_threshold: DEFAULT_CLONE_THRESHOLD,
            source_filters: default_source_filters(),
            window: DateWindow::UNBOUNDED,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct IngestDiagnostics {
    pub event_files: usize,
    pub mention_files: usize,
    pub event_rows: u64,
    pub event_rows_skipped: u64,
    pub events_not_bilateral_government: u64,
    pub events_outside_window: u64,
    pub events_retained: u64,
    pub mention_rows: u64,
    pub mention_rows_skipped: u64,
    pub grouping: GroupingDiagnostics,
    pub sequences_emitted: u64,
}

impl IngestDiagnostics {
    /// `key=value` lines.
    pub fn render(&self) -> String {
        let g = &self.grouping;
        let mut out = String::new();
        let rows: [(&str, u64); 19] = [
            ("event_files", self.event_files as u64),
            ("mention_files", self.mention_files as u64),
            ("event_rows", self.event_rows),
            ("event_rows_skipped", self.event_rows_skipped),
            (
                "events_not_bilateral_government",
                self.events_not_bilateral_government,
            ),
            ("events_outside_window", self.events_outside_window),
            ("events_retained", self.events_retained),
            ("mention_rows", self.mention_rows),
            ("mention_rows_skipped", self.mention_rows_skipped),
            ("mentions_considered", g.mentions_in),
            ("mentions_source_filtered", g.mentions_source_filtered),
            ("mentions_unknown_event", g.mentions_unknown_event),
            ("mentions_duplicate", g.mentions_duplicate),
            ("duplicate_event_ids", g.duplicate_event_ids),
            ("events_cloned", g.events_cloned),
            ("clones_created", g.clones_created),
            ("co_mention_edges", g.co_mention_edges),
            ("relevance_groups", g.groups),
            ("sequences_emitted", self.sequences_emitted),
        ];
        for (k, v) in rows {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct IngestOutput {
    pub corpus: Vec<EventSequence>,
    pub diagnostics: IngestDiagnostics,
}

/// Regular files directly under `dir`, in lexicographic name order.
pub fn list_input_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Runs the full ingest over the given events and mentions files.
///
/// Files are parsed in parallel, one file per task, and each file's rows are
/// filtered as they are read so raw rows never accumulate. Results are merged
/// in the order the paths are given.
pub fn run_ingest(
    event_files: &[PathBuf],
    mention_files: &[PathBuf],
    config: &IngestConfig,
) -> Result<IngestOutput> {
    let mut diag = IngestDiagnostics {
        event_files: event_files.len(),
        mention_files: mention_files.len(),
        ..Default::default()
    };

    struct EventBatch {
        events: Vec<RawEvent>,
        counts: RowCounts,
        not_gov: u64,
        outside: u64,
    }
    let batches: Vec<EventBatch> = event_files
        .par_iter()
        .map(|path| {
            let reader = open_input(path)?;
            let (mut not_gov, mut outside) = (0, 0);
            let (events, counts) = parse_events_with(reader, |ev| {
                if !is_bilateral_government(ev) {
                    not_gov += 1;
                    false
                } else if !config.window.contains(ev.day) {
                    outside += 1;
                    false
                } else {
                    true
                }
            })
            .map_err(|e| Error::io(path, e))?;
            Ok(EventBatch {
                events,
                counts,
                not_gov,
                outside,
            })
        })
        .collect::<Result<_>>()?;

    let mut events = Vec::new();
    for batch in batches {
        diag.event_rows += batch.counts.rows;
        diag.event_rows_skipped += batch.counts.skipped;
        diag.events_not_bilateral_government += batch.not_gov;
        diag.events_outside_window += batch.outside;
        events.extend(batch.events);
    }
    diag.events_retained = events.len() as u64;

    let retained: HashSet<u64> = events.iter().map(|e| e.global_event_id).collect();
    let mention_batches: Vec<(Vec<MentionRecord>, RowCounts, u64)> = mention_files
        .par_iter()
        .map(|path| {
            let reader = open_input(path)?;
            let mut unknown = 0;
            let (mentions, counts) = parse_mentions_with(reader, |m| {
                let keep = retained.contains(&m.global_event_id);
                if !keep {
                    unknown += 1;
                }
                keep
            })
            .map_err(|e| Error::io(path, e))?;
            Ok((mentions, counts, unknown))
        })
        .collect::<Result<_>>()?;

    let mut mentions = Vec::new();
    let mut unknown = 0;
    for (batch, counts, u) in mention_batches {
        diag.mention_rows += counts.rows;
        diag.mention_rows_skipped += counts.skipped;
        unknown += u;
        mentions.extend(batch);
    }

    let (groups, mut grouping) = build_relevance_groups(
        &events,
        &mentions,
        config.clone_threshold,
        &config.source_filters,
    );
    grouping.mentions_in += unknown;
    grouping.mentions_unknown_event += unknown;
    diag.grouping = grouping;

    let index = index_events(events);
    let corpus = build_sequences(&groups, &index, config.seed)?;
    diag.sequences_emitted = corpus.len() as u64;
    Ok(IngestOutput {
        corpus,
        diagnostics: diag,
    })
}
