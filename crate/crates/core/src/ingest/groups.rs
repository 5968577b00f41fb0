//! Event filtering and mutual-relevance grouping.
//!
//! Two events are co-mentioned when they share a mention identifier; groups
//! are the connected components of that relation.

use std::collections::{HashMap, HashSet};

use chrono::NaiveDate;
use serde::Serialize;

use super::parse::{MentionRecord, RawEvent};
use super::union_find::UnionFind;
use crate::sequence::EventKey;

/// CAMEO actor type code for government actors.
pub const GOVERNMENT: &str = "GOV";

pub const DEFAULT_CLONE_THRESHOLD: usize = 250;

pub fn default_source_filters() -> Vec<String> {
    vec!["BBC".to_string()]
}

/// True for an inter-country event between two government actors.
pub fn is_bilateral_government(ev: &RawEvent) -> bool {
    match (&ev.actor1_country, &ev.actor2_country) {
        (Some(a), Some(b)) if a != b => {
            ev.actor1_type.as_deref() == Some(GOVERNMENT)
                && ev.actor2_type.as_deref() == Some(GOVERNMENT)
        }
        _ => false,
    }
}

pub fn filter_events(events: Vec<RawEvent>) -> Vec<RawEvent> {
    events.into_iter().filter(is_bilateral_government).collect()
}

/// Inclusive calendar window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DateWindow {
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
}

impl DateWindow {
    pub const UNBOUNDED: DateWindow = DateWindow {
        start: None,
        end: None,
    };

    /// 2018-06-19 to 2019-06-20, the one-year window of the original study.
    pub fn original_study() -> DateWindow {
        DateWindow {
            start: NaiveDate::from_ymd_opt(2018, 6, 19),
            end: NaiveDate::from_ymd_opt(2019, 6, 20),
        }
    }

    pub fn contains(&self, day: NaiveDate) -> bool {
        self.start.is_none_or(|s| day >= s) && self.end.is_none_or(|e| day <= e)
    }
}

impl Default for DateWindow {
    fn default() -> Self {
        DateWindow::UNBOUNDED
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelevanceGroup {
    /// Sorted member keys.
    pub event_ids: Vec<EventKey>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct GroupingDiagnostics {
    pub mentions_in: u64,
    pub mentions_source_filtered: u64,
    pub mentions_unknown_event: u64,
    pub mentions_duplicate: u64,
    pub duplicate_event_ids: u64,
    pub events_cloned: u64,
    pub clones_created: u64,
    /// Co-mentioned node pairs, counted once per shared document.
    pub co_mention_edges: u64,
    pub groups: u64,
}

/// Post-clone events and the interned documents mentioning each.
#[derive(Debug)]
struct Nodes {
    keys: Vec<EventKey>,
    mentions: Vec<Vec<usize>>,
}

/// Groups events by the transitive closure of co-mention.
///
/// Mentions whose identifier contains any of `source_filters` are dropped
/// first; events with more than `clone_threshold` surviving mentions are then
/// split into one clone per mention. Events without surviving mentions form
/// singleton groups. Groups and their members come out sorted by key.
pub fn build_relevance_groups(
    events: &[RawEvent],
    mentions: &[MentionRecord],
    clone_threshold: usize,
    source_filters: &[String],
) -> (Vec<RelevanceGroup>, GroupingDiagnostics) {
    assert!(clone_threshold >= 1, "clone threshold must be at least 1");
    let mut diag = GroupingDiagnostics {
        mentions_in: mentions.len() as u64,
        ..Default::default()
    };

    let mut ids: Vec<u64> = Vec::with_capacity(events.len());
    let mut known: HashSet<u64> = HashSet::with_capacity(events.len());
    for ev in events {
        if known.insert(ev.global_event_id) {
            ids.push(ev.global_event_id);
        } else {
            diag.duplicate_event_ids += 1;
        }
    }
    ids.sort_unstable();

    // Interned identifiers, per event in order of first appearance.
    let mut interned: HashMap<&str, usize> = HashMap::new();
    let mut per_event: HashMap<u64, Vec<usize>> = HashMap::new();
    let mut seen: HashSet<(u64, usize)> = HashSet::new();
    for m in mentions {
        if source_filters
            .iter()
            .any(|f| m.mention_identifier.contains(f.as_str()))
        {
            diag.mentions_source_filtered += 1;
            continue;
        }
        if !known.contains(&m.global_event_id) {
            diag.mentions_unknown_event += 1;
            continue;
        }
        let next = interned.len();
        let doc = *interned
            .entry(m.mention_identifier.as_str())
            .or_insert(next);
        if !seen.insert((m.global_event_id, doc)) {
            diag.mentions_duplicate += 1;
            continue;
        }
        per_event.entry(m.global_event_id).or_default().push(doc);
    }

    let mut nodes = Nodes {
        keys: Vec::with_capacity(ids.len()),
        mentions: Vec::with_capacity(ids.len()),
    };
    for id in ids {
        let docs = per_event.remove(&id).unwrap_or_default();
        if docs.len() > clone_threshold {
            diag.events_cloned += 1;
            diag.clones_created += docs.len() as u64;
            for (ordinal, doc) in docs.into_iter().enumerate() {
                nodes.keys.push(EventKey::cloned(id, ordinal as u32));
                nodes.mentions.push(vec![doc]);
            }
        } else {
            nodes.keys.push(EventKey::original(id));
            nodes.mentions.push(docs);
        }
    }

    let mut uf = UnionFind::new(nodes.keys.len());
    let mut first_holder: Vec<Option<usize>> = vec![None; interned.len()];
    let mut holders: Vec<u64> = vec![0; interned.len()];
    for (node, docs) in nodes.mentions.iter().enumerate() {
        for &doc in docs {
            holders[doc] += 1;
            match first_holder[doc] {
                None => first_holder[doc] = Some(node),
                Some(first) => {
                    uf.union(first, node);
                }
            }
        }
    }
    diag.co_mention_edges = holders.iter().map(|&k| k * k.saturating_sub(1) / 2).sum();

    // Node order is key order, so sorted components have sorted keys.
    let groups: Vec<RelevanceGroup> = uf
        .components()
        .into_iter()
        .map(|members| RelevanceGroup {
            event_ids: members.into_iter().map(|n| nodes.keys[n]).collect(),
        })
        .collect();
    diag.groups = groups.len() as u64;
    (groups, diag)
}
