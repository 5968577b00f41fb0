use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use super::counts::{count_all, estimate_params, NormCounts, NormParams};
use super::hypothesis::NormHypothesis;
use super::likelihood::{log_ratio, ScoringTables};
use super::machine::Semantics;
use crate::error::{Error, Result};
use crate::seqmodel::{ModelBank, NextSymbolModel};
use crate::sequence::EventSequence;

#[derive(Debug, Clone, Serialize)]
pub struct NormScore {
    pub norm: NormHypothesis,
    pub prior_log_odds: f64,
    pub log_odds: f64,
    pub counts: NormCounts,
    pub params: NormParams,
}

#[derive(Debug, Clone)]
pub struct MineOptions {
    pub prior_log_odds: f64,
    pub semantics: Semantics,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
    /// Sequences scored between progress messages.
    pub progress_every: usize,
}

impl Default for MineOptions {
    fn default() -> Self {
        MineOptions {
            prior_log_odds: 0.0,
            semantics: Semantics::default(),
            workers: None,
            progress_every: 10_000,
        }
    }
}

pub fn mine<M: NextSymbolModel>(
    corpus: &[EventSequence],
    hypotheses: &[NormHypothesis],
    bank: &ModelBank<M>,
    prior_log_odds: f64,
) -> Result<Vec<NormScore>> {
    let opts = MineOptions {
        prior_log_odds,
        ..Default::default()
    };
    mine_with(corpus, hypotheses, bank, &opts)
}

/// Counts, estimates and scores every hypothesis, ranked by log odds
/// (descending, ties in canonical order).
///
/// Each (sequence, hypothesis) ratio is computed independently and the ratios
/// are added to each hypothesis's total strictly in corpus order, so the
/// result does not depend on how many workers ran.
pub fn mine_with<M: NextSymbolModel>(
    corpus: &[EventSequence],
    hypotheses: &[NormHypothesis],
    bank: &ModelBank<M>,
    opts: &MineOptions,
) -> Result<Vec<NormScore>> {
    match opts.workers {
        None => mine_inner(corpus, hypotheses, bank, opts),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Contract(format!("cannot start {n} workers: {e}")))?
            .install(|| mine_inner(corpus, hypotheses, bank, opts)),
    }
}

fn mine_inner<M: NextSymbolModel>(
    corpus: &[EventSequence],
    hypotheses: &[NormHypothesis],
    bank: &ModelBank<M>,
    opts: &MineOptions,
) -> Result<Vec<NormScore>> {
    let semantics = &opts.semantics;
    let counts = count_all(hypotheses, corpus, semantics);
    let params: Vec<NormParams> = counts.iter().map(estimate_params).collect();
    log::info!(
        "counted {} hypotheses over {} sequences",
        hypotheses.len(),
        corpus.len()
    );

    let mut totals = vec![0.0f64; hypotheses.len()];
    let block = opts.progress_every.max(1);
    for (b, chunk) in corpus.chunks(block).enumerate() {
        let ratios: Vec<Vec<f64>> = chunk
            .par_iter()
            .map(|seq| {
                let tables = ScoringTables::new(bank, seq.symbols());
                hypotheses
                    .iter()
                    .zip(&params)
                    .map(|(h, p)| log_ratio(&tables, h, p, semantics))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        for row in &ratios {
            for (t, r) in totals.iter_mut().zip(row) {
                *t += r;
            }
        }
        log::info!(
            "scored {}/{} sequences",
            (b * block + chunk.len()),
            corpus.len()
        );
    }

    let mut scores: Vec<NormScore> = hypotheses
        .iter()
        .zip(counts)
        .zip(params)
        .zip(totals)
        .map(|(((norm, counts), params), total)| NormScore {
            norm: *norm,
            prior_log_odds: opts.prior_log_odds,
            log_odds: opts.prior_log_odds + total,
            counts,
            params,
        })
        .collect();
    scores.sort_by(|a, b| {
        b.log_odds
            .total_cmp(&a.log_odds)
            .then_with(|| a.norm.cmp(&b.norm))
    });
    Ok(scores)
}

pub const SCORES_CSV_HEADER: &str =
    "norm,log_odds,triggers,fulfilled,violations,unsanctioned,sanctioned,p_comp,p_sanc";

/// One row per score, in the given order.
pub fn scores_csv(scores: &[NormScore]) -> String {
    let mut out = String::from(SCORES_CSV_HEADER);
    out.push('\n');
    for s in scores {
        let c = &s.counts;
        let _ = writeln!(
            out,
            "\"{}\",{:.6},{},{},{},{},{},{:.6},{:.6}",
            s.norm,
            s.log_odds,
            c.triggers,
            c.fulfilments,
            c.violations,
            c.unsanctioned_violations(),
            c.sanctioned_violations,
            s.params.p_comp,
            s.params.p_sanc
        );
    }
    out
}

pub fn positive_count(scores: &[NormScore]) -> usize {
    scores.iter().filter(|s| s.log_odds > 0.0).count()
}
