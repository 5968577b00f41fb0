//! Bounded-depth Pitman-Yor context trie.
//!
//! Each trie node is a context (the most recent symbols, newest first along
//! the path from the root) holding raw successor counts. Prediction
//! interpolates from the empty context outwards:
//!
//! ```text
//! p(e|u) = (c(u,e) - d·t(u,e)) / (c(u,·) + θ)
//!        + (θ + d·t(u,·)) / (c(u,·) + θ) · p(e|suffix(u))
//! ```
//!
//! with `t(u,e) = 1` when `c(u,e) > 0` (one table per dish) and the empty
//! context backing off to the uniform distribution over the alphabet.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sequence::EventSequence;
use crate::symbol::{Symbol, ALPHABET_SIZE};

/// A full next-symbol distribution, indexed by [`Symbol::index`].
#[derive(Clone, Copy, PartialEq)]
pub struct Distribution(pub [f64; ALPHABET_SIZE]);

impl Distribution {
    pub fn uniform() -> Self {
        Distribution([1.0 / ALPHABET_SIZE as f64; ALPHABET_SIZE])
    }

    pub fn zeros() -> Self {
        Distribution([0.0; ALPHABET_SIZE])
    }

    #[inline]
    pub fn prob(&self, symbol: Symbol) -> f64 {
        self.0[symbol.index()]
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl fmt::Debug for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(
                self.0
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| **p != 0.0)
                    .map(|(i, p)| (Symbol::from_index(i).to_string(), *p)),
            )
            .finish()
    }
}

/// Anything that yields a next-symbol distribution for a history.
///
/// Implementations must be immutable after construction so one instance can
/// serve any number of concurrent readers.
pub trait NextSymbolModel: Send + Sync {
    fn predict_into(&self, context: &[Symbol], out: &mut Distribution);

    fn predict(&self, context: &[Symbol]) -> Distribution {
        let mut out = Distribution::zeros();
        self.predict_into(context, &mut out);
        out
    }
}

impl<M: NextSymbolModel + ?Sized> NextSymbolModel for &M {
    fn predict_into(&self, context: &[Symbol], out: &mut Distribution) {
        (**self).predict_into(context, out)
    }
}

/// Smoothing parameters, one discount and strength per context length
/// (index 0 is the empty context).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hyperparams {
    pub max_depth: usize,
    pub discounts: Vec<f64>,
    pub strengths: Vec<f64>,
}

impl Hyperparams {
    pub const DEFAULT_DEPTH: usize = 8;
    pub const DEFAULT_DISCOUNT: f64 = 0.5;
    pub const DEFAULT_STRENGTH: f64 = 1.0;
    pub const MAX_DEPTH_LIMIT: usize = 63;

    /// Same discount and strength at every level.
    pub fn uniform(max_depth: usize, discount: f64, strength: f64) -> Result<Self> {
        Hyperparams::per_level(vec![discount; max_depth + 1], vec![strength; max_depth + 1])
    }

    pub fn per_level(discounts: Vec<f64>, strengths: Vec<f64>) -> Result<Self> {
        if discounts.len() < 2 || discounts.len() != strengths.len() {
            return Err(Error::Contract(
                "need matching discount/strength lists covering depth >= 1".into(),
            ));
        }
        if discounts.len() - 1 > Self::MAX_DEPTH_LIMIT {
            return Err(Error::Contract(format!(
                "max depth {} exceeds the supported {}",
                discounts.len() - 1,
                Self::MAX_DEPTH_LIMIT
            )));
        }
        for (level, (&d, &s)) in discounts.iter().zip(&strengths).enumerate() {
            if !(0.0..1.0).contains(&d) {
                return Err(Error::Contract(format!(
                    "discount {d} at level {level} outside [0, 1)"
                )));
            }
            if !(s > -d) || !s.is_finite() {
                return Err(Error::Contract(format!(
                    "strength {s} at level {level} must exceed -discount ({})",
                    -d
                )));
            }
        }
        Ok(Hyperparams {
            max_depth: discounts.len() - 1,
            discounts,
            strengths,
        })
    }
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams::uniform(
            Self::DEFAULT_DEPTH,
            Self::DEFAULT_DISCOUNT,
            Self::DEFAULT_STRENGTH,
        )
        .expect("default hyperparameters are valid")
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct Node {
    /// (symbol index, child node), sorted by symbol.
    pub(crate) children: Vec<(u8, u32)>,
    /// (symbol index, count), sorted by symbol; only nonzero counts.
    pub(crate) counts: Vec<(u8, u32)>,
    pub(crate) total: u64,
}

impl Node {
    fn child(&self, sym: u8) -> Option<u32> {
        self.children
            .binary_search_by_key(&sym, |&(s, _)| s)
            .ok()
            .map(|i| self.children[i].1)
    }

    fn increment(&mut self, sym: u8) {
        match self.counts.binary_search_by_key(&sym, |&(s, _)| s) {
            Ok(i) => self.counts[i].1 += 1,
            Err(i) => self.counts.insert(i, (sym, 1)),
        }
        self.total += 1;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceModel {
    pub(crate) params: Hyperparams,
    pub(crate) nodes: Vec<Node>,
    pub(crate) trained_sequences: u64,
}

impl SequenceModel {
    /// An untrained model; it predicts the uniform distribution everywhere.
    pub fn new(params: Hyperparams) -> Self {
        SequenceModel {
            params,
            nodes: vec![Node::default()],
            trained_sequences: 0,
        }
    }

    /// Trains on every sequence and its direction-reversed copy.
    pub fn train_base(corpus: &[EventSequence], params: Hyperparams) -> Self {
        let mut model = SequenceModel::new(params);
        for seq in corpus {
            let symbols = seq.symbols();
            model.add_sequence(&symbols);
            let reversed: Vec<Symbol> = symbols.iter().map(|s| s.reversed()).collect();
            model.add_sequence(&reversed);
        }
        model
    }

    pub fn params(&self) -> &Hyperparams {
        &self.params
    }

    pub fn max_depth(&self) -> usize {
        self.params.max_depth
    }

    /// Number of (copies of) sequences seen in training.
    pub fn trained_sequences(&self) -> u64 {
        self.trained_sequences
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Adds the counts of one symbol sequence, as given.
    pub fn add_sequence(&mut self, symbols: &[Symbol]) {
        let idx: Vec<u8> = symbols.iter().map(|s| s.index() as u8).collect();
        for i in 0..idx.len() {
            let target = idx[i];
            let mut node = 0usize;
            self.nodes[node].increment(target);
            for k in 1..=self.params.max_depth.min(i) {
                let ctx_sym = idx[i - k];
                node = match self.nodes[node].child(ctx_sym) {
                    Some(c) => c as usize,
                    None => self.insert_child(node, ctx_sym),
                };
                self.nodes[node].increment(target);
            }
        }
        self.trained_sequences += 1;
    }

    fn insert_child(&mut self, parent: usize, sym: u8) -> usize {
        let id = self.nodes.len();
        assert!(id < u32::MAX as usize, "context trie exceeds u32 node ids");
        self.nodes.push(Node::default());
        let children = &mut self.nodes[parent].children;
        let pos = children
            .binary_search_by_key(&sym, |&(s, _)| s)
            .unwrap_err();
        children.insert(pos, (sym, id as u32));
        id
    }

    /// Nodes along the longest stored suffix of `context`, root first.
    fn path(&self, context: &[Symbol]) -> ([usize; 64], usize) {
        let mut path = [0usize; 64];
        let mut len = 1;
        let depth = self.params.max_depth.min(context.len());
        let mut node = 0usize;
        for k in 1..=depth {
            let sym = context[context.len() - k].index() as u8;
            match self.nodes[node].child(sym) {
                Some(c) => {
                    node = c as usize;
                    path[len] = node;
                    len += 1;
                }
                None => break,
            }
        }
        (path, len)
    }

    /// Raw count `c(u, e)` for a context (most recent symbol last); zero if
    /// the context is not stored.
    pub fn count(&self, context: &[Symbol], symbol: Symbol) -> u64 {
        let (path, len) = self.path(context);
        if len - 1 < context.len().min(self.params.max_depth) {
            return 0;
        }
        let node = &self.nodes[path[len - 1]];
        node.counts
            .binary_search_by_key(&(symbol.index() as u8), |&(s, _)| s)
            .map_or(0, |i| node.counts[i].1 as u64)
    }
}

impl NextSymbolModel for SequenceModel {
    fn predict_into(&self, context: &[Symbol], out: &mut Distribution) {
        *out = Distribution::uniform();
        let (path, len) = self.path(context);
        for (level, &node_id) in path[..len].iter().enumerate() {
            let node = &self.nodes[node_id];
            if node.total == 0 {
                continue;
            }
            let d = self.params.discounts[level];
            let theta = self.params.strengths[level];
            let denom = node.total as f64 + theta;
            let backoff = (theta + d * node.counts.len() as f64) / denom;
            for p in out.0.iter_mut() {
                *p *= backoff;
            }
            for &(sym, c) in &node.counts {
                out.0[sym as usize] += (c as f64 - d) / denom;
            }
        }
    }
}

/// The same distribution for every context. Used to pin down scoring
/// arithmetic against hand-computed values.
#[derive(Debug, Clone)]
pub struct ConstantModel(pub Distribution);

impl ConstantModel {
    /// Uniform over the given symbols, zero elsewhere.
    pub fn uniform_over(symbols: &[Symbol]) -> Self {
        let mut d = Distribution::zeros();
        for s in symbols {
            d.0[s.index()] = 1.0 / symbols.len() as f64;
        }
        ConstantModel(d)
    }
}

impl NextSymbolModel for ConstantModel {
    fn predict_into(&self, _context: &[Symbol], out: &mut Distribution) {
        *out = self.0;
    }
}

/// Log probability of a full END-terminated symbol sequence.
pub fn seq_loglik<M: NextSymbolModel + ?Sized>(model: &M, symbols: &[Symbol]) -> f64 {
    let mut dist = Distribution::zeros();
    let mut total = 0.0;
    for i in 0..symbols.len() {
        model.predict_into(&symbols[..i], &mut dist);
        total += dist.prob(symbols[i]).ln();
    }
    total
}

/// [`seq_loglik`] for an [`EventSequence`].
pub fn seq_loglik_base<M: NextSymbolModel + ?Sized>(model: &M, sequence: &EventSequence) -> f64 {
    seq_loglik(model, &sequence.symbols())
}
