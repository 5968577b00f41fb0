use serde::{Deserialize, Serialize};

use super::hypothesis::{Modality, NormHypothesis};
use crate::error::{Error, Result};
use crate::symbol::{CodeSet, DirSet, Symbol};

/// Where a sanction for a violation is looked for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SanctionDirection {
    /// In the directions of interest, as the likelihood formulas state.
    #[default]
    Doi,
    /// In the opposite directions (the other party sanctions the violator).
    Opposite,
}

/// Switches for the ambiguous corners of the norm semantics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Semantics {
    /// A sanction only counts if it is the very next event after the
    /// violation (or activation, for obligations). Off by default: a sanction
    /// anywhere later in the sequence counts.
    pub strict_sanction: bool,
    pub sanction_direction: SanctionDirection,
}

impl Semantics {
    pub fn sanction_dirs(&self, doi: DirSet) -> DirSet {
        match self.sanction_direction {
            SanctionDirection::Doi => doi,
            SanctionDirection::Opposite => doi.opposite(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NormState {
    Inactive,
    Activating,
    Active,
    Fulfilled,
    ViolNoSanc,
    ViolSanc,
}

/// The branch chosen when the norm activates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Assumption {
    Comply,
    ViolateSanctioned,
    ViolateUnsanctioned,
}

impl Assumption {
    pub const ALL: [Assumption; 3] = [
        Assumption::Comply,
        Assumption::ViolateSanctioned,
        Assumption::ViolateUnsanctioned,
    ];

    pub fn index(self) -> usize {
        match self {
            Assumption::Comply => 0,
            Assumption::ViolateSanctioned => 1,
            Assumption::ViolateUnsanctioned => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormStateMachine {
    pub norm: NormHypothesis,
    pub state: NormState,
    /// Empty until the norm activates, for conditional norms.
    pub doi: DirSet,
    pub assumption: Option<Assumption>,
    pub semantics: Semantics,
}

impl NormStateMachine {
    pub fn new(norm: NormHypothesis) -> Self {
        Self::with_semantics(norm, Semantics::default())
    }

    pub fn with_semantics(norm: NormHypothesis, semantics: Semantics) -> Self {
        let (state, doi) = if norm.is_conditional() {
            (NormState::Inactive, DirSet::EMPTY)
        } else {
            (NormState::Activating, DirSet::BOTH)
        };
        NormStateMachine {
            norm,
            state,
            doi,
            assumption: None,
            semantics,
        }
    }

    pub fn event_codes(&self) -> CodeSet {
        CodeSet::single(self.norm.event_code)
    }

    pub fn sanction_dirs(&self) -> DirSet {
        self.semantics.sanction_dirs(self.doi)
    }

    /// Still waiting for an event the current assumption requires.
    pub fn awaiting_required_event(&self) -> bool {
        match (self.state, self.assumption) {
            (NormState::Active, Some(Assumption::Comply)) => self.norm.modality == Modality::O,
            (NormState::Active, Some(_)) => self.norm.modality == Modality::P,
            (NormState::ViolNoSanc, Some(Assumption::ViolateSanctioned)) => true,
            _ => false,
        }
    }

    pub fn receive(self, symbol: Symbol) -> Result<Self> {
        let mut next = self;
        match self.state {
            NormState::Inactive => {
                if let (Some(cond), Some(ev)) = (self.norm.condition, symbol.event()) {
                    if ev.code == cond.code {
                        next.state = NormState::Activating;
                        next.doi = cond.rel_dir.doi(ev.direction);
                    }
                }
            }
            NormState::Activating => {
                return Err(Error::Contract(format!(
                    "{} received {symbol} while activating with no assumption resolved",
                    self.norm
                )));
            }
            NormState::Active => {
                if symbol.matches(self.doi, self.event_codes()) {
                    match (self.norm.modality, self.assumption) {
                        (Modality::O, Some(Assumption::Comply)) => {
                            next.state = NormState::Fulfilled
                        }
                        (Modality::P, Some(Assumption::Comply)) => {}
                        (Modality::P, Some(_)) => next.state = NormState::ViolNoSanc,
                        _ => {
                            return Err(Error::Invariant(format!(
                                "{} active under {:?}",
                                self.norm, self.assumption
                            )))
                        }
                    }
                }
            }
            NormState::ViolNoSanc => {
                if self.assumption == Some(Assumption::ViolateSanctioned)
                    && symbol.matches(self.sanction_dirs(), CodeSet::sanctions())
                {
                    next.state = NormState::ViolSanc;
                }
            }
            NormState::Fulfilled | NormState::ViolSanc => {}
        }
        Ok(next)
    }

    /// Fixes the branch of an activating machine. Violated obligations move
    /// straight to `ViolNoSanc`, since they carry no deadline.
    pub fn resolve(self, assumption: Assumption) -> Result<Self> {
        if self.state != NormState::Activating {
            return Err(Error::Contract(format!(
                "resolve called on {} in state {:?}",
                self.norm, self.state
            )));
        }
        let state = match (assumption, self.norm.modality) {
            (Assumption::Comply, _) => NormState::Active,
            (_, Modality::O) => NormState::ViolNoSanc,
            (_, Modality::P) => NormState::Active,
        };
        Ok(NormStateMachine {
            state,
            assumption: Some(assumption),
            ..self
        })
    }
}

pub fn nsm_new(norm: NormHypothesis) -> NormStateMachine {
    NormStateMachine::new(norm)
}

pub fn nsm_receive(machine: NormStateMachine, symbol: Symbol) -> Result<NormStateMachine> {
    machine.receive(symbol)
}

pub fn nsm_resolve(machine: NormStateMachine, assumption: Assumption) -> Result<NormStateMachine> {
    machine.resolve(assumption)
}
