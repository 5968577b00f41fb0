//! Row parsers for the GDELT 2.0 events and mentions export tables.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use chrono::NaiveDate;
use flate2::read::MultiGzDecoder;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::symbol::RootCode;

/// Column positions in the 61-column events table.
mod events_col {
    pub const GLOBAL_EVENT_ID: usize = 0;
    pub const DAY: usize = 1;
    pub const ACTOR1_COUNTRY: usize = 7;
    pub const ACTOR1_TYPE1: usize = 12;
    pub const ACTOR2_COUNTRY: usize = 17;
    pub const ACTOR2_TYPE1: usize = 22;
    pub const EVENT_CODE: usize = 26;
}

pub const EVENTS_COLUMNS: usize = 61;

/// Column positions in the 16-column mentions table.
mod mentions_col {
    pub const GLOBAL_EVENT_ID: usize = 0;
    pub const MENTION_IDENTIFIER: usize = 5;
}

pub const MENTIONS_COLUMNS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RawEvent {
    pub global_event_id: u64,
    pub day: NaiveDate,
    pub actor1_country: Option<String>,
    pub actor2_country: Option<String>,
    pub actor1_type: Option<String>,
    pub actor2_type: Option<String>,
    pub root_code: RootCode,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct MentionRecord {
    pub global_event_id: u64,
    pub mention_identifier: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RowCounts {
    pub rows: u64,
    pub skipped: u64,
}

impl RowCounts {
    pub fn merge(&mut self, other: RowCounts) {
        self.rows += other.rows;
        self.skipped += other.skipped;
    }
}

fn optional(field: &str) -> Option<String> {
    let field = field.trim();
    (!field.is_empty()).then(|| field.to_string())
}

pub fn parse_day(field: &str) -> Option<NaiveDate> {
    let field = field.trim();
    if field.len() != 8 || !field.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    NaiveDate::parse_from_str(field, "%Y%m%d").ok()
}

/// Root code from a CAMEO event code: the leading two digits of a 2-4 digit code.
pub fn root_code(event_code: &str) -> Option<RootCode> {
    let code = event_code.trim();
    if !(2..=4).contains(&code.len()) || !code.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    RootCode::new(code[..2].parse().ok()?).ok()
}

/// Parses one events-table row; `None` when a mandatory field is unusable.
pub fn parse_event_row(line: &str) -> Option<RawEvent> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() <= events_col::EVENT_CODE {
        return None;
    }
    Some(RawEvent {
        global_event_id: fields[events_col::GLOBAL_EVENT_ID].trim().parse().ok()?,
        day: parse_day(fields[events_col::DAY])?,
        actor1_country: optional(fields[events_col::ACTOR1_COUNTRY]),
        actor2_country: optional(fields[events_col::ACTOR2_COUNTRY]),
        actor1_type: optional(fields[events_col::ACTOR1_TYPE1]),
        actor2_type: optional(fields[events_col::ACTOR2_TYPE1]),
        root_code: root_code(fields[events_col::EVENT_CODE])?,
    })
}

pub fn parse_mention_row(line: &str) -> Option<MentionRecord> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() <= mentions_col::MENTION_IDENTIFIER {
        return None;
    }
    let identifier = fields[mentions_col::MENTION_IDENTIFIER].trim();
    if identifier.is_empty() {
        return None;
    }
    Some(MentionRecord {
        global_event_id: fields[mentions_col::GLOBAL_EVENT_ID].trim().parse().ok()?,
        mention_identifier: identifier.to_string(),
    })
}

fn for_each_line<R: BufRead>(mut reader: R, mut f: impl FnMut(&str)) -> std::io::Result<()> {
    let mut buf = Vec::new();
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            return Ok(());
        }
        let line = String::from_utf8_lossy(&buf);
        let line = line.trim_end_matches(['\n', '\r']);
        if !line.is_empty() {
            f(line);
        }
    }
}

/// Parses events rows, skipping (and counting) unparseable ones. Rows for
/// which `keep` returns false are dropped without being stored.
pub fn parse_events_with<R: BufRead>(
    reader: R,
    mut keep: impl FnMut(&RawEvent) -> bool,
) -> std::io::Result<(Vec<RawEvent>, RowCounts)> {
    let mut out = Vec::new();
    let mut counts = RowCounts::default();
    for_each_line(reader, |line| {
        counts.rows += 1;
        match parse_event_row(line) {
            Some(ev) => {
                if keep(&ev) {
                    out.push(ev);
                }
            }
            None => counts.skipped += 1,
        }
    })?;
    Ok((out, counts))
}

pub fn parse_events<R: BufRead>(reader: R) -> std::io::Result<(Vec<RawEvent>, RowCounts)> {
    parse_events_with(reader, |_| true)
}

pub fn parse_mentions_with<R: BufRead>(
    reader: R,
    mut keep: impl FnMut(&MentionRecord) -> bool,
) -> std::io::Result<(Vec<MentionRecord>, RowCounts)> {
    let mut out = Vec::new();
    let mut counts = RowCounts::default();
    for_each_line(reader, |line| {
        counts.rows += 1;
        match parse_mention_row(line) {
            Some(m) => {
                if keep(&m) {
                    out.push(m);
                }
            }
            None => counts.skipped += 1,
        }
    })?;
    Ok((out, counts))
}

pub fn parse_mentions<R: BufRead>(reader: R) -> std::io::Result<(Vec<MentionRecord>, RowCounts)> {
    parse_mentions_with(reader, |_| true)
}

/// Opens a file for line reading, transparently decompressing gzip input.
pub fn open_input(path: &Path) -> Result<Box<dyn BufRead + Send>> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut magic = [0u8; 2];
    let n = read_prefix(&mut file, &mut magic).map_err(|e| Error::io(path, e))?;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    if n == 2 && magic == [0x1f, 0x8b] {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(file))))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}

fn read_prefix(file: &mut File, buf: &mut [u8]) -> std::io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match file.read(&mut buf[filled..])? {
            0 => break,
            n => filled += n,
        }
    }
    Ok(filled)
}
