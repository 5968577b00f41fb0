//! Sequence likelihood under a norm hypothesis.
//!
//! The likelihood follows the norm state machine through the sequence. Before
//! activation every symbol is scored by the background model. At activation the
//! remainder is scored under three mutually exclusive assumptions (comply,
//! violate and be sanctioned, violate and go unsanctioned), mixed with weights
//! `p_comp^|doi|`, `(1 - p_comp^|doi|) p_sanc` and `(1 - p_comp^|doi|)(1 - p_sanc)`.
//! A norm activates at most once per sequence, so each branch reduces to a few
//! contiguous runs scored by one distribution each, which is how it is
//! computed here.
//!
//! END is scored by whatever distribution the branch is using at that point.
//! A branch still waiting for an event it requires (fulfilment of an
//! obligation, the violating event of a prohibition, a sanction) gets zero.

use std::cell::OnceCell;

use super::counts::{activation, Occurrences};
use super::hypothesis::{Modality, NormHypothesis};
use super::machine::{Assumption, NormState, NormStateMachine, Semantics};
use crate::error::{Error, Result};
use crate::seqmodel::{
    excl_distribution, excluded_mass, seq_loglik, Distribution, InclKey, ModelBank, NextSymbolModel,
};
use crate::sequence::EventSequence;
use crate::symbol::{reverse_all, CodeSet, DirSet, Symbol};

use super::counts::NormParams;

/// Per-sequence cache of everything the scorer asks the bank for.
pub struct ScoringTables<'a, M> {
    bank: &'a ModelBank<M>,
    symbols: Vec<Symbol>,
    reversed: Vec<Symbol>,
    base: Vec<Distribution>,
    base_ln: Vec<f64>,
    /// `ln p_incl` of each actual symbol, per inclusion key; the second half
    /// holds the direction-reversed queries used when `doi = {B}`.
    incl_ln: Vec<OnceCell<Vec<f64>>>,
    occ: Occurrences,
}

impl<'a, M: NextSymbolModel> ScoringTables<'a, M> {
    pub fn new(bank: &'a ModelBank<M>, symbols: Vec<Symbol>) -> Self {
        let mut base = Vec::with_capacity(symbols.len());
        let mut base_ln = Vec::with_capacity(symbols.len());
        let mut dist = Distribution::zeros();
        for i in 0..symbols.len() {
            bank.base().predict_into(&symbols[..i], &mut dist);
            base_ln.push(dist.prob(symbols[i]).ln());
            base.push(dist);
        }
        ScoringTables {
            bank,
            reversed: reverse_all(&symbols),
            occ: Occurrences::new(&symbols),
            symbols,
            base,
            base_ln,
            incl_ln: (0..2 * InclKey::COUNT).map(|_| OnceCell::new()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    fn base_sum(&self, from: usize, to: usize) -> f64 {
        let mut total = 0.0;
        for x in &self.base_ln[from..to] {
            total += x;
        }
        total
    }

    /// Total base log likelihood of the whole sequence.
    pub fn base_loglik(&self) -> f64 {
        self.base_sum(0, self.len())
    }

    fn incl_table(&self, doi: DirSet, key: InclKey) -> &[f64] {
        let reversed = doi == DirSet::B;
        let slot = key.index() + if reversed { InclKey::COUNT } else { 0 };
        self.incl_ln[slot].get_or_init(|| {
            let model = self.bank.incl(key);
            let seq = if reversed {
                &self.reversed
            } else {
                &self.symbols
            };
            let mut dist = Distribution::zeros();
            (0..seq.len())
                .map(|i| {
                    model.predict_into(&seq[..i], &mut dist);
                    dist.prob(seq[i]).ln()
                })
                .collect()
        })
    }

    /// Sum of `ln p_incl(doi, key)` over `from..=to`.
    fn incl_sum(&self, doi: DirSet, key: InclKey, from: usize, to: usize) -> f64 {
        let mut total = 0.0;
        for x in &self.incl_table(doi, key)[from..=to] {
            total += x;
        }
        total
    }

    /// Sum of `ln p_excl(doi, codes)` over `from..len`. The caller guarantees
    /// no symbol in the range is excluded.
    fn excl_sum(&self, doi: DirSet, codes: CodeSet, from: usize) -> Result<f64> {
        let mut total = 0.0;
        for i in from..self.len() {
            let mass = excluded_mass(&self.base[i], doi, codes);
            if !(mass < 1.0) {
                return Err(Error::Invariant(format!(
                    "excluded mass {mass} for {doi} x {codes} leaves nothing to renormalize"
                )));
            }
            total += (self.base[i].prob(self.symbols[i]) / (1.0 - mass)).ln();
        }
        Ok(total)
    }
}

/// Log likelihoods of the post-activation remainder under each assumption,
/// indexed by [`Assumption::index`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branches {
    /// Index of the first symbol scored under the assumptions.
    pub activation: usize,
    pub doi: DirSet,
    pub loglik: [f64; 3],
}

impl Branches {
    pub fn log_weights(&self, params: &NormParams) -> [f64; 3] {
        let pc = params.p_comp.powi(self.doi.len() as i32);
        [
            pc.ln(),
            (1.0 - pc).ln() + params.p_sanc.ln(),
            (1.0 - pc).ln() + (1.0 - params.p_sanc).ln(),
        ]
    }

    /// Log of the weighted mixture over the three assumptions.
    pub fn mixture(&self, params: &NormParams) -> f64 {
        let w = self.log_weights(params);
        logsumexp(&[
            w[0] + self.loglik[0],
            w[1] + self.loglik[1],
            w[2] + self.loglik[2],
        ])
    }
}

pub fn logsumexp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Scores the remainder after activation under each assumption, or `None` if
/// the norm never activates.
pub fn branch_logliks<M: NextSymbolModel>(
    tables: &ScoringTables<'_, M>,
    norm: &NormHypothesis,
    semantics: &Semantics,
) -> Result<Option<Branches>> {
    let Some((a, doi)) = activation(norm, &tables.occ) else {
        return Ok(None);
    };
    let n = tables.len();
    let ec = CodeSet::single(norm.event_code);
    let ec_key = InclKey::Code(norm.event_code);
    let governed = tables.occ.first_match(doi, ec, a);

    let comp = match (norm.modality, governed) {
        (Modality::O, Some(k)) => tables.incl_sum(doi, ec_key, a, k) + tables.base_sum(k + 1, n),
        (Modality::P, None) => tables.excl_sum(doi, ec, a)?,
        _ => f64::NEG_INFINITY,
    };

    // Log likelihood up to the violation and the index where the search for a
    // sanction starts.
    let violation = match (norm.modality, governed) {
        (Modality::O, None) => Some((0.0, a)),
        (Modality::P, Some(k)) => Some((tables.incl_sum(doi, ec_key, a, k), k + 1)),
        _ => None,
    };

    let (sanc, no_sanc) = match violation {
        None => (f64::NEG_INFINITY, f64::NEG_INFINITY),
        Some((head, v)) => {
            let sd = semantics.sanction_dirs(doi);
            let sanctions = CodeSet::sanctions();
            let first = tables.occ.first_match(sd, sanctions, v);
            let sanc = match first {
                Some(m) if !semantics.strict_sanction || m == v => {
                    head + tables.incl_sum(sd, InclKey::Sanctions, v, m) + tables.base_sum(m + 1, n)
                }
                _ => f64::NEG_INFINITY,
            };
            let no_sanc = match first {
                None => head + tables.excl_sum(sd, sanctions, v)?,
                Some(_) => f64::NEG_INFINITY,
            };
            (sanc, no_sanc)
        }
    };

    Ok(Some(Branches {
        activation: a,
        doi,
        loglik: [comp, sanc, no_sanc],
    }))
}

/// `ln p(sequence | norm) - ln p(sequence | no norm)`. Exactly zero when the
/// norm never activates.
pub fn log_ratio<M: NextSymbolModel>(
    tables: &ScoringTables<'_, M>,
    norm: &NormHypothesis,
    params: &NormParams,
    semantics: &Semantics,
) -> Result<f64> {
    Ok(match branch_logliks(tables, norm, semantics)? {
        None => 0.0,
        Some(b) => b.mixture(params) - tables.base_sum(b.activation, tables.len()),
    })
}

pub fn seq_loglik_norm<M: NextSymbolModel>(
    norm: &NormHypothesis,
    params: &NormParams,
    sequence: &EventSequence,
    bank: &ModelBank<M>,
) -> Result<f64> {
    seq_loglik_norm_with(norm, params, sequence, bank, &Semantics::default())
}

pub fn seq_loglik_norm_with<M: NextSymbolModel>(
    norm: &NormHypothesis,
    params: &NormParams,
    sequence: &EventSequence,
    bank: &ModelBank<M>,
    semantics: &Semantics,
) -> Result<f64> {
    let tables = ScoringTables::new(bank, sequence.symbols());
    match branch_logliks(&tables, norm, semantics)? {
        // Same computation as the background likelihood.
        None => Ok(seq_loglik(bank.base(), tables.symbols())),
        Some(b) => Ok(tables.base_sum(0, b.activation) + b.mixture(params)),
    }
}

/// [`seq_loglik_norm_with`] on prebuilt tables.
pub fn norm_loglik<M: NextSymbolModel>(
    tables: &ScoringTables<'_, M>,
    norm: &NormHypothesis,
    params: &NormParams,
    semantics: &Semantics,
) -> Result<f64> {
    Ok(match branch_logliks(tables, norm, semantics)? {
        None => tables.base_loglik(),
        Some(b) => tables.base_sum(0, b.activation) + b.mixture(params),
    })
}

/// The next-symbol distribution the likelihood uses for a machine in a
/// resolved state. The planted-corpus generator samples from it.
pub fn step_distribution<M: NextSymbolModel>(
    machine: &NormStateMachine,
    bank: &ModelBank<M>,
    context: &[Symbol],
) -> Result<Distribution> {
    let norm = &machine.norm;
    let ec = CodeSet::single(norm.event_code);
    match (machine.state, machine.assumption) {
        (NormState::Inactive | NormState::Fulfilled | NormState::ViolSanc, _) => {
            Ok(bank.base().predict(context))
        }
        (NormState::Active, Some(a)) => match (norm.modality, a) {
            (Modality::P, Assumption::Comply) => {
                excl_distribution(&bank.base().predict(context), machine.doi, ec)
            }
            (Modality::O, Assumption::Comply) | (Modality::P, _) => {
                Ok(bank.incl_distribution(machine.doi, InclKey::Code(norm.event_code), context))
            }
            (Modality::O, _) => Err(Error::Invariant(format!("{norm} active under {a:?}"))),
        },
        (NormState::ViolNoSanc, Some(Assumption::ViolateSanctioned)) => {
            Ok(bank.incl_distribution(machine.sanction_dirs(), InclKey::Sanctions, context))
        }
        (NormState::ViolNoSanc, Some(_)) => excl_distribution(
            &bank.base().predict(context),
            machine.sanction_dirs(),
            CodeSet::sanctions(),
        ),
        (state, a) => Err(Error::Contract(format!(
            "no step distribution for {norm} in {state:?} under {a:?}"
        ))),
    }
}
