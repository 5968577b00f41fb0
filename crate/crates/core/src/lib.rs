//! Norm mining over bilateral event sequences.
//!
//! The pipeline runs in four stages, one module each:
//!
//! - [`ingest`] turns GDELT events and mentions tables into directed bilateral
//!   event sequences over a 41-symbol alphabet.
//! - [`seqmodel`] trains the background next-symbol model (a bounded-depth
//!   Pitman-Yor context trie) and the inclusion-filtered variants used when
//!   scoring norms.
//! - [`norms`] enumerates obligation and prohibition hypotheses, tracks their
//!   life cycle with a state machine, and accumulates posterior log odds
//!   against the no-norm hypothesis.
//! - [`eval`] runs the likelihood-ratio test against model-sampled null
//!   corpora and can plant norms into synthetic corpora.

// `!(x < y)` is how range checks here reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod eval;
pub mod ingest;
pub mod norms;
pub mod seqmodel;
pub mod sequence;
pub mod symbol;

pub use error::{Error, Result};
pub use sequence::EventSequence;
pub use symbol::{CodeSet, DirSet, DirectedEvent, Direction, RootCode, Symbol};
