//! Background sequence model, inclusion-filtered variants, persistence and
//! sampling.

mod bank;
mod model;
mod persist;
mod sample;

pub use bank::{
    excl_distribution, excluded_mass, prob_excl, reverse_distribution, InclKey, ModelBank,
};
pub use model::{
    seq_loglik, seq_loglik_base, ConstantModel, Distribution, Hyperparams, NextSymbolModel,
    SequenceModel,
};
pub use persist::{decode_bank, encode_bank, load_bank, save_bank, FORMAT_VERSION, MAGIC};
pub use sample::{draw, sample_sequence, sample_symbols, DEFAULT_LENGTH_CAP};

/// Trains the background model on every sequence and its reversed copy.
pub fn train_base(corpus: &[crate::sequence::EventSequence], params: Hyperparams) -> SequenceModel {
    SequenceModel::train_base(corpus, params)
}

/// Trains the base model and all 21 inclusion models.
pub fn train_bank(
    corpus: &[crate::sequence::EventSequence],
    params: Hyperparams,
) -> ModelBank<SequenceModel> {
    ModelBank::train(corpus, params)
}
