//! Pipeline configuration: built-in defaults, then an optional TOML file,
//! then command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chrono::NaiveDate;
use normmine::ingest::{DateWindow, IngestConfig, DEFAULT_CLONE_THRESHOLD};
use normmine::norms::{SanctionDirection, Semantics};
use normmine::seqmodel::Hyperparams;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: Paths,
    pub ingest: IngestSection,
    pub model: ModelSection,
    pub mine: MineSection,
    pub evaluate: EvaluateSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub events_dir: PathBuf,
    pub mentions_dir: PathBuf,
    pub corpus: PathBuf,
    pub bank: PathBuf,
    pub out_dir: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            events_dir: "data/events".into(),
            mentions_dir: "data/mentions".into(),
            corpus: "out/corpus.txt".into(),
            bank: "out/bank.nmb".into(),
            out_dir: "out".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestSection {
    pub clone_threshold: usize,
    pub source_filters: Vec<String>,
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
    pub seed: u64,
}

impl Default for IngestSection {
    fn default() -> Self {
        IngestSection {
            clone_threshold: DEFAULT_CLONE_THRESHOLD,
            source_filters: vec!["BBC".into()],
            start: None,
            end: None,
            seed: 0,
        }
    }
}

impl IngestSection {
    pub fn to_config(&self) -> IngestConfig {
        IngestConfig {
            clone_threshold: self.clone_threshold,
            source_filters: self.source_filters.clone(),
            window: DateWindow {
                start: self.start,
                end: self.end,
            },
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub max_depth: usize,
    pub discount: f64,
    pub strength: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            max_depth: Hyperparams::DEFAULT_DEPTH,
            discount: Hyperparams::DEFAULT_DISCOUNT,
            strength: Hyperparams::DEFAULT_STRENGTH,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MineSection {
    /// Log prior odds; 0 is even odds.
    pub prior_log_odds: f64,
    pub workers: Option<usize>,
    /// File with one norm per line restricting the hypothesis space.
    pub hypotheses: Option<PathBuf>,
    pub progress_every: usize,
    pub strict_sanction: bool,
    pub sanction_direction: SanctionDirection,
}

impl Default for MineSection {
    fn default() -> Self {
        MineSection {
            prior_log_odds: 0.0,
            workers: None,
            hypotheses: None,
            progress_every: 10_000,
            strict_sanction: false,
            sanction_direction: SanctionDirection::Doi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateSection {
    /// Norm to test; the top row of the mining output when absent.
    pub norm: Option<String>,
    pub n_synth: usize,
    pub synth_size: Option<usize>,
    pub seed: u64,
    pub strict_sanction: bool,
    pub sanction_direction: SanctionDirection,
    pub frozen_params: bool,
    pub bins: Option<usize>,
    pub workers: Option<usize>,
}

impl Default for EvaluateSection {
    fn default() -> Self {
        EvaluateSection {
            norm: None,
            n_synth: 58,
            synth_size: None,
            seed: 0,
            strict_sanction: false,
            sanction_direction: SanctionDirection::Doi,
            frozen_params: false,
            bins: None,
            workers: None,
        }
    }
}

pub fn semantics(strict_sanction: bool, sanction_direction: SanctionDirection) -> Semantics {
    Semantics {
        strict_sanction,
        sanction_direction,
    }
}

impl PipelineConfig {
    pub fn load(path: Option<&Path>) -> Result<PipelineConfig> {
        let Some(path) = path else {
            return Ok(PipelineConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config file {}", path.display()))
    }

    pub fn hyperparams(&self) -> Result<Hyperparams> {
        let m = &self.model;
        Ok(Hyperparams::uniform(m.max_depth, m.discount, m.strength)?)
    }
}
