use std::fmt;

use rayon::prelude::*;

use super::model::{Distribution, Hyperparams, NextSymbolModel, SequenceModel};
use crate::error::{Error, Result};
use crate::sequence::EventSequence;
use crate::symbol::{CodeSet, DirSet, Direction, RootCode, Symbol, ALPHABET_SIZE, NUM_CODES};

/// Which inclusion-filtered model to use: one per root code, plus the
/// sanction set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InclKey {
    Code(RootCode),
    Sanctions,
}

impl InclKey {
    pub const COUNT: usize = NUM_CODES + 1;

    pub fn index(self) -> usize {
        match self {
            InclKey::Code(c) => c.get() as usize - 1,
            InclKey::Sanctions => NUM_CODES,
        }
    }

    pub fn from_index(i: usize) -> InclKey {
        if i == NUM_CODES {
            InclKey::Sanctions
        } else {
            InclKey::Code(RootCode::new(i as u8 + 1).expect("index below 20"))
        }
    }

    pub fn all() -> impl Iterator<Item = InclKey> {
        (0..Self::COUNT).map(InclKey::from_index)
    }

    pub fn codes(self) -> CodeSet {
        match self {
            InclKey::Code(c) => CodeSet::single(c),
            InclKey::Sanctions => CodeSet::sanctions(),
        }
    }

    /// The key for a code set, if the bank has a model for it.
    pub fn for_codes(codes: CodeSet) -> Option<InclKey> {
        if codes == CodeSet::sanctions() {
            return Some(InclKey::Sanctions);
        }
        let mut members = codes.codes();
        match (members.next(), members.next()) {
            (Some(c), None) => Some(InclKey::Code(c)),
            _ => None,
        }
    }
}

impl fmt::Display for InclKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.codes().fmt(f)
    }
}

/// The background model plus the 21 inclusion-filtered models.
#[derive(Debug, Clone)]
pub struct ModelBank<M = SequenceModel> {
    pub(crate) base: M,
    /// Indexed by [`InclKey::index`].
    pub(crate) incl: Vec<M>,
}

impl<M> ModelBank<M> {
    pub fn from_parts(base: M, incl: Vec<M>) -> Result<Self> {
        if incl.len() != InclKey::COUNT {
            return Err(Error::Contract(format!(
                "model bank needs {} inclusion models, got {}",
                InclKey::COUNT,
                incl.len()
            )));
        }
        Ok(ModelBank { base, incl })
    }

    pub fn base(&self) -> &M {
        &self.base
    }

    pub fn incl(&self, key: InclKey) -> &M {
        &self.incl[key.index()]
    }

    pub fn incl_models(&self) -> impl Iterator<Item = (InclKey, &M)> {
        self.incl
            .iter()
            .enumerate()
            .map(|(i, m)| (InclKey::from_index(i), m))
    }

    pub fn incl_count(&self) -> usize {
        self.incl.len()
    }
}

impl<M: Clone> ModelBank<M> {
    /// Uses one model for every slot.
    pub fn shared(model: M) -> Self {
        ModelBank {
            incl: vec![model.clone(); InclKey::COUNT],
            base: model,
        }
    }
}

impl ModelBank<SequenceModel> {
    /// Trains the base model on the dual-copy corpus and each inclusion model
    /// on the dual copies holding a forward event with a code in its set.
    /// Copies are generated before filtering.
    pub fn train(corpus: &[EventSequence], params: Hyperparams) -> ModelBank<SequenceModel> {
        let copies: Vec<Vec<Symbol>> = corpus
            .iter()
            .flat_map(|seq| {
                let symbols = seq.symbols();
                let reversed = symbols.iter().map(|s| s.reversed()).collect();
                [symbols, reversed]
            })
            .collect();

        let train = |filter: Option<InclKey>| {
            let mut model = SequenceModel::new(params.clone());
            for copy in &copies {
                let keep = match filter {
                    None => true,
                    Some(key) => copy.iter().any(|s| s.matches(DirSet::F, key.codes())),
                };
                if keep {
                    model.add_sequence(copy);
                }
            }
            model
        };

        let mut models: Vec<SequenceModel> = std::iter::once(None)
            .chain(InclKey::all().map(Some))
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(train)
            .collect();
        let base = models.remove(0);
        for (key, model) in InclKey::all().zip(&models) {
            if model.trained_sequences() == 0 {
                log::warn!("no training sequence has a forward event in {key}; its inclusion model is uniform");
            }
        }
        ModelBank { base, incl: models }
    }

    /// Inclusion keys whose model saw no training data.
    pub fn untrained_incl(&self) -> Vec<InclKey> {
        self.incl_models()
            .filter(|(_, m)| m.trained_sequences() == 0)
            .map(|(k, _)| k)
            .collect()
    }

    pub fn params(&self) -> &Hyperparams {
        self.base.params()
    }
}

impl<M: NextSymbolModel> ModelBank<M> {
    /// The inclusion distribution for `doi` and a key. For `doi = {B}` the
    /// history is direction-reversed before the query and the resulting
    /// distribution is mapped back, so entry `s` holds `p(reverse(s) | reverse(h))`.
    pub fn incl_distribution(&self, doi: DirSet, key: InclKey, context: &[Symbol]) -> Distribution {
        let model = self.incl(key);
        if doi == DirSet::B {
            let reversed: Vec<Symbol> = context.iter().map(|s| s.reversed()).collect();
            reverse_distribution(&model.predict(&reversed))
        } else {
            model.predict(context)
        }
    }

    pub fn prob_incl(
        &self,
        doi: DirSet,
        codes: CodeSet,
        symbol: Symbol,
        context: &[Symbol],
    ) -> Result<f64> {
        let key = InclKey::for_codes(codes)
            .ok_or_else(|| Error::Contract(format!("no inclusion model for code set {codes}")))?;
        if doi.is_empty() {
            return Err(Error::Contract("empty direction set".into()));
        }
        let model = self.incl(key);
        if doi == DirSet::B {
            let reversed: Vec<Symbol> = context.iter().map(|s| s.reversed()).collect();
            Ok(model.predict(&reversed).prob(symbol.reversed()))
        } else {
            Ok(model.predict(context).prob(symbol))
        }
    }

    pub fn prob_excl(
        &self,
        doi: DirSet,
        codes: CodeSet,
        symbol: Symbol,
        context: &[Symbol],
    ) -> Result<f64> {
        prob_excl(&self.base, doi, codes, symbol, context)
    }
}

/// Entry `s` of the result is entry `reverse(s)` of `dist`.
pub fn reverse_distribution(dist: &Distribution) -> Distribution {
    let mut out = Distribution::zeros();
    for i in 0..ALPHABET_SIZE {
        out.0[Symbol::from_index(i).reversed().index()] = dist.0[i];
    }
    out
}

/// Total probability of the directed events `doi x codes`.
pub fn excluded_mass(dist: &Distribution, doi: DirSet, codes: CodeSet) -> f64 {
    let mut mass = 0.0;
    for code in codes.codes() {
        for d in [Direction::F, Direction::B] {
            if doi.contains(d) {
                mass += dist.0[Symbol::ev(d, code.get()).index()];
            }
        }
    }
    mass
}

/// Zeroes the directed events `doi x codes` and renormalizes the rest.
pub fn excl_distribution(dist: &Distribution, doi: DirSet, codes: CodeSet) -> Result<Distribution> {
    let mass = excluded_mass(dist, doi, codes);
    if !(mass < 1.0) {
        return Err(Error::Invariant(format!(
            "excluded mass {mass} for {doi} x {codes} leaves nothing to renormalize"
        )));
    }
    let scale = 1.0 - mass;
    let mut out = Distribution::zeros();
    for (i, p) in dist.0.iter().enumerate() {
        if !Symbol::from_index(i).matches(doi, codes) {
            out.0[i] = p / scale;
        }
    }
    Ok(out)
}

/// `p_SM(symbol | context)` with `doi x codes` removed and the remainder renormalized.
pub fn prob_excl<M: NextSymbolModel + ?Sized>(
    model: &M,
    doi: DirSet,
    codes: CodeSet,
    symbol: Symbol,
    context: &[Symbol],
) -> Result<f64> {
    let dist = model.predict(context);
    let mass = excluded_mass(&dist, doi, codes);
    if !(mass < 1.0) {
        return Err(Error::Invariant(format!(
            "excluded mass {mass} for {doi} x {codes} leaves nothing to renormalize"
        )));
    }
    if symbol.matches(doi, codes) {
        Ok(0.0)
    } else {
        Ok(dist.prob(symbol) / (1.0 - mass))
    }
}
