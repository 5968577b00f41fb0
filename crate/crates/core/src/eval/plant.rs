use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::{
    step_distribution, trace, Assumption, NormHypothesis, NormState, NormStateMachine, Semantics,
};
use crate::seqmodel::{draw, ModelBank, NextSymbolModel, DEFAULT_LENGTH_CAP};
use crate::sequence::EventSequence;
use crate::symbol::Symbol;

/// Drafts considered before the rejection rate can abort generation.
const REJECTION_WINDOW: u64 = 10_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlantedNormSpec {
    pub norm: NormHypothesis,
    pub p_comp: f64,
    pub p_sanc: f64,
    pub n_sequences: usize,
    pub seed: u64,
}

impl PlantedNormSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_comp", self.p_comp), ("p_sanc", self.p_sanc)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Contract(format!(
                    "{name} = {p} is not a probability"
                )));
            }
        }
        if self.n_sequences == 0 {
            return Err(Error::Contract(
                "a planted corpus needs at least one sequence".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PlantedCorpus {
    pub corpus: Vec<EventSequence>,
    /// Triggered sequences per branch, by [`Assumption::index`].
    pub branch_counts: [u64; 3],
    pub untriggered: u64,
    /// Post-activation drafts generated and how many were thrown away as
    /// inconsistent with their branch.
    pub drafts: u64,
    pub rejections: u64,
}

pub fn plant_norm_corpus<M: NextSymbolModel>(
    bank: &ModelBank<M>,
    spec: &PlantedNormSpec,
) -> Result<PlantedCorpus> {
    plant_norm_corpus_with(bank, spec, &Semantics::default())
}

/// Generates sequences in which `spec.norm` is in force.
///
/// Symbols before activation come from the background model. At activation a
/// branch is drawn with the mixture weights the likelihood uses, and the rest
/// of the sequence is drawn step by step from the distribution the likelihood
/// would score each symbol with. A draft that turns out inconsistent with its
/// branch (say, ending before an obligation is fulfilled) is discarded and the
/// remainder redrawn from the activation point under the same branch, so the
/// branch frequencies follow the weights exactly.
pub fn plant_norm_corpus_with<M: NextSymbolModel>(
    bank: &ModelBank<M>,
    spec: &PlantedNormSpec,
    semantics: &Semantics,
) -> Result<PlantedCorpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = PlantedCorpus {
        corpus: Vec::with_capacity(spec.n_sequences),
        branch_counts: [0; 3],
        untriggered: 0,
        drafts: 0,
        rejections: 0,
    };

    while out.corpus.len() < spec.n_sequences {
        let fresh = NormStateMachine::with_semantics(spec.norm, *semantics);
        let Some((prefix, machine)) = draw_prefix(bank, fresh, &mut rng)? else {
            continue;
        };
        if machine.state != NormState::Activating {
            out.untriggered += 1;
            out.corpus.push(EventSequence::from_symbols(
                out.corpus.len() as u64,
                &prefix,
            )?);
            continue;
        }

        let branch = draw_branch(&machine, spec, &mut rng);
        let resolved = machine.resolve(branch)?;
        let symbols = loop {
            out.drafts += 1;
            if let Some(s) = draw_remainder(bank, resolved, &prefix, &mut rng)? {
                let t = trace(&spec.norm, semantics, &s);
                if t.and_then(|t| t.consistent_branch(semantics)) == Some(branch) {
                    break s;
                }
            }
            out.rejections += 1;
            if out.drafts >= REJECTION_WINDOW && out.rejections * 100 > out.drafts * 99 {
                return Err(Error::Sampling(format!(
                    "{} of {} drafts for {} were inconsistent with their branch; \
                     the planted norm is not feasible under this model bank",
                    out.rejections, out.drafts, spec.norm
                )));
            }
        };
        out.branch_counts[branch.index()] += 1;
        out.corpus.push(EventSequence::from_symbols(
            out.corpus.len() as u64,
            &symbols,
        )?);
    }
    if out.rejections > 0 {
        log::info!(
            "planted {}: {} of {} drafts rejected",
            spec.norm,
            out.rejections,
            out.drafts
        );
    }
    Ok(out)
}

/// Draws from the background model until the norm activates or END. `None`
/// if the length cap was hit.
fn draw_prefix<M: NextSymbolModel, R: Rng>(
    bank: &ModelBank<M>,
    mut machine: NormStateMachine,
    rng: &mut R,
) -> Result<Option<(Vec<Symbol>, NormStateMachine)>> {
    let mut symbols = Vec::new();
    while machine.state != NormState::Activating {
        let s = draw(&bank.base().predict(&symbols), rng)?;
        symbols.push(s);
        machine = machine.receive(s)?;
        if s.is_end() {
            break;
        }
        if symbols.len() >= DEFAULT_LENGTH_CAP {
            return Ok(None);
        }
    }
    Ok(Some((symbols, machine)))
}

fn draw_branch<R: Rng>(
    machine: &NormStateMachine,
    spec: &PlantedNormSpec,
    rng: &mut R,
) -> Assumption {
    let pc = spec.p_comp.powi(machine.doi.len() as i32);
    let u: f64 = rng.gen();
    if u < pc {
        Assumption::Comply
    } else if u < pc + (1.0 - pc) * spec.p_sanc {
        Assumption::ViolateSanctioned
    } else {
        Assumption::ViolateUnsanctioned
    }
}

/// Continues `prefix` under a resolved machine until END. `None` if the
/// length cap was hit.
fn draw_remainder<M: NextSymbolModel, R: Rng>(
    bank: &ModelBank<M>,
    mut machine: NormStateMachine,
    prefix: &[Symbol],
    rng: &mut R,
) -> Result<Option<Vec<Symbol>>> {
    let mut symbols = prefix.to_vec();
    loop {
        let s = draw(&step_distribution(&machine, bank, &symbols)?, rng)?;
        symbols.push(s);
        if s.is_end() {
            return Ok(Some(symbols));
        }
        machine = machine.receive(s)?;
        if symbols.len() >= DEFAULT_LENGTH_CAP {
            return Ok(None);
        }
    }
}
