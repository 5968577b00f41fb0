//! Likelihood ratio test of the norm-augmented model against the background
//! model, with an empirical null distribution from model-sampled corpora.

mod plant;

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use plant::{plant_norm_corpus, plant_norm_corpus_with, PlantedCorpus, PlantedNormSpec};

use crate::error::{Error, Result};
use crate::norms::{
    count_norm_stats_with, estimate_params, norm_loglik, NormHypothesis, NormParams, ScoringTables,
    Semantics,
};
use crate::seqmodel::{sample_symbols, ModelBank, NextSymbolModel, DEFAULT_LENGTH_CAP};
use crate::sequence::EventSequence;

/// Consecutive length-cap failures tolerated before giving up on a model.
pub const MAX_CONSECUTIVE_REDRAWS: u32 = 100;

pub fn lrt_statistic(l0: f64, l1: f64) -> f64 {
    2.0 * (l1 - l0)
}

/// `(k + 1) / (N + 1)` where `k` samples are at least `observed`.
pub fn empirical_pvalue(observed: f64, samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Contract("p-value needs at least one sample".into()));
    }
    let k = samples.iter().filter(|&&s| s >= observed).count();
    Ok((k + 1) as f64 / (samples.len() + 1) as f64)
}

#[derive(Debug, Clone)]
pub struct NullCorpus {
    pub corpus: Vec<EventSequence>,
    /// Draws that hit the length cap and were thrown away.
    pub redraws: u64,
}

/// `n` independent sequences sampled from `model`, ids `0..n`.
pub fn generate_null_corpus<M, R>(model: &M, n: usize, rng: &mut R) -> Result<NullCorpus>
where
    M: NextSymbolModel + ?Sized,
    R: Rng + ?Sized,
{
    let mut corpus = Vec::with_capacity(n);
    let mut redraws = 0;
    let mut consecutive = 0;
    while corpus.len() < n {
        match sample_symbols(model, rng, DEFAULT_LENGTH_CAP) {
            Ok(symbols) => {
                consecutive = 0;
                corpus.push(EventSequence::from_symbols(corpus.len() as u64, &symbols)?);
            }
            Err(Error::Sampling(msg)) => {
                redraws += 1;
                consecutive += 1;
                if consecutive > MAX_CONSECUTIVE_REDRAWS {
                    return Err(Error::Sampling(format!(
                        "{consecutive} consecutive draws failed ({msg}); the model rarely emits END"
                    )));
                }
            }
            Err(e) => return Err(e),
        }
    }
    if redraws > 0 {
        log::warn!("{redraws} null draws hit the length cap and were redrawn");
    }
    Ok(NullCorpus { corpus, redraws })
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub n_synth: usize,
    /// Sequences per synthetic corpus; `None` uses the real corpus size.
    pub synth_size: Option<usize>,
    pub seed: u64,
    /// Score synthetic corpora with the real-data parameters instead of
    /// re-estimating them on each corpus.
    pub frozen_params: bool,
    pub semantics: Semantics,
    /// Histogram bins; `None` applies Sturges' rule.
    pub bins: Option<usize>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            n_synth: 58,
            synth_size: None,
            seed: 0,
            frozen_params: false,
            semantics: Semantics::default(),
            bins: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LrtReport {
    pub norm: NormHypothesis,
    pub params: NormParams,
    pub l0: f64,
    pub l1: f64,
    pub lrt_observed: f64,
    pub lrt_samples: Vec<f64>,
    pub p_value_upper: f64,
    pub n_synth: usize,
    pub synth_size: usize,
    pub seed: u64,
    pub frozen_params: bool,
}

impl LrtReport {
    /// `key=value` lines.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "norm={}", self.norm);
        let _ = writeln!(out, "p_comp={}", self.params.p_comp);
        let _ = writeln!(out, "p_sanc={}", self.params.p_sanc);
        let _ = writeln!(out, "L0={}", self.l0);
        let _ = writeln!(out, "L1={}", self.l1);
        let _ = writeln!(out, "L1_minus_L0={}", self.l1 - self.l0);
        let _ = writeln!(out, "lrt_observed={}", self.lrt_observed);
        let _ = writeln!(out, "n_synth={}", self.n_synth);
        let _ = writeln!(out, "synth_size={}", self.synth_size);
        let _ = writeln!(out, "seed={}", self.seed);
        let _ = writeln!(
            out,
            "synthetic_params={}",
            if self.frozen_params {
                "frozen"
            } else {
                "re-estimated"
            }
        );
        let above = self
            .lrt_samples
            .iter()
            .filter(|&&s| s >= self.lrt_observed)
            .count();
        let _ = writeln!(out, "samples_at_or_above_observed={above}");
        let _ = writeln!(out, "p_value_upper={}", self.p_value_upper);
        for (i, s) in self.lrt_samples.iter().enumerate() {
            let _ = writeln!(out, "lrt_sample.{i}={s}");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub count: u64,
}

/// `ceil(log2 n) + 1` bins.
pub fn sturges_bins(n: usize) -> usize {
    if n <= 1 {
        1
    } else {
        (n as f64).log2().ceil() as usize + 1
    }
}

/// Equal-width bins spanning the samples; the last bin is closed on the right.
pub fn histogram(samples: &[f64], bins: usize) -> Vec<HistogramBin> {
    if samples.is_empty() {
        return Vec::new();
    }
    let bins = bins.max(1);
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    };
    let width = (hi - lo) / bins as f64;
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|i| HistogramBin {
            left: lo + width * i as f64,
            right: if i + 1 == bins {
                hi
            } else {
                lo + width * (i + 1) as f64
            },
            count: 0,
        })
        .collect();
    for &s in samples {
        let i = (((s - lo) / width) as usize).min(bins - 1);
        out[i].count += 1;
    }
    out
}

pub fn histogram_csv(bins: &[HistogramBin]) -> String {
    let mut out = String::from("bin_left,bin_right,count\n");
    for b in bins {
        let _ = writeln!(out, "{},{},{}", b.left, b.right, b.count);
    }
    out
}

/// Total background and norm log likelihood of a corpus, summed in corpus order.
pub fn corpus_logliks<M: NextSymbolModel>(
    corpus: &[EventSequence],
    bank: &ModelBank<M>,
    norm: &NormHypothesis,
    params: &NormParams,
    semantics: &Semantics,
) -> Result<(f64, f64)> {
    let per_seq: Vec<(f64, f64)> = corpus
        .par_iter()
        .map(|seq| {
            let tables = ScoringTables::new(bank, seq.symbols());
            Ok((
                tables.base_loglik(),
                norm_loglik(&tables, norm, params, semantics)?,
            ))
        })
        .collect::<Result<_>>()?;
    let (mut l0, mut l1) = (0.0, 0.0);
    for (a, b) in per_seq {
        l0 += a;
        l1 += b;
    }
    Ok((l0, l1))
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub report: LrtReport,
    pub histogram: Vec<HistogramBin>,
}

/// Compares `L1` and `L0` on the real corpus against `n_synth` corpora drawn
/// from the background model. Synthetic corpus `i` uses seed `seed + i` and is
/// scored with the same bank.
pub fn evaluate_top_norm<M: NextSymbolModel>(
    corpus: &[EventSequence],
    bank: &ModelBank<M>,
    norm: &NormHypothesis,
    params: &NormParams,
    opts: &EvalOptions,
) -> Result<Evaluation> {
    let semantics = &opts.semantics;
    let (l0, l1) = corpus_logliks(corpus, bank, norm, params, semantics)?;
    let lrt_observed = lrt_statistic(l0, l1);
    let synth_size = opts.synth_size.unwrap_or(corpus.len());
    log::info!(
        "observed LRT {lrt_observed}; sampling {} null corpora",
        opts.n_synth
    );

    let lrt_samples: Vec<f64> = (0..opts.n_synth)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(i as u64));
            let null = generate_null_corpus(bank.base(), synth_size, &mut rng)?;
            let p = if opts.frozen_params {
                *params
            } else {
                estimate_params(&count_norm_stats_with(norm, &null.corpus, semantics))
            };
            let (s0, s1) = corpus_logliks(&null.corpus, bank, norm, &p, semantics)?;
            log::info!("null corpus {i}: LRT {}", lrt_statistic(s0, s1));
            Ok(lrt_statistic(s0, s1))
        })
        .collect::<Result<_>>()?;

    let p_value_upper = if lrt_samples.is_empty() {
        1.0
    } else {
        empirical_pvalue(lrt_observed, &lrt_samples)?
    };
    let bins = opts.bins.unwrap_or_else(|| sturges_bins(lrt_samples.len()));
    Ok(Evaluation {
        histogram: histogram(&lrt_samples, bins),
        report: LrtReport {
            norm: *norm,
            params: *params,
            l0,
            l1,
            lrt_observed,
            lrt_samples,
            p_value_upper,
            n_synth: opts.n_synth,
            synth_size,
            seed: opts.seed,
            frozen_params: opts.frozen_params,
        },
    })
}
