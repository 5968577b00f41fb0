use rand::distributions::{Distribution as _, WeightedIndex};
use rand::Rng;

use super::model::{Distribution, NextSymbolModel};
use crate::error::{Error, Result};
use crate::sequence::EventSequence;
use crate::symbol::Symbol;

pub const DEFAULT_LENGTH_CAP: usize = 10_000;

/// Draws one symbol from `dist`.
pub fn draw<R: Rng + ?Sized>(dist: &Distribution, rng: &mut R) -> Result<Symbol> {
    let index = WeightedIndex::new(dist.as_slice())
        .map_err(|e| Error::Sampling(format!("unusable next-symbol distribution: {e}")))?;
    Ok(Symbol::from_index(index.sample(rng)))
}

/// Draws symbols given the growing prefix until END. Fails if END has not
/// appeared after `length_cap` events.
pub fn sample_symbols<M, R>(model: &M, rng: &mut R, length_cap: usize) -> Result<Vec<Symbol>>
where
    M: NextSymbolModel + ?Sized,
    R: Rng + ?Sized,
{
    let mut symbols = Vec::new();
    let mut dist = Distribution::zeros();
    loop {
        model.predict_into(&symbols, &mut dist);
        let s = draw(&dist, rng)?;
        symbols.push(s);
        if s.is_end() {
            return Ok(symbols);
        }
        if symbols.len() >= length_cap {
            return Err(Error::Sampling(format!(
                "no END within {length_cap} events"
            )));
        }
    }
}

pub fn sample_sequence<M, R>(model: &M, rng: &mut R, length_cap: usize) -> Result<EventSequence>
where
    M: NextSymbolModel + ?Sized,
    R: Rng + ?Sized,
{
    let symbols = sample_symbols(model, rng, length_cap)?;
    EventSequence::from_symbols(0, &symbols)
}
