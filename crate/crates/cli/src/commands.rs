use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use normmine::eval::{
    evaluate_top_norm, generate_null_corpus, histogram_csv, plant_norm_corpus_with, EvalOptions,
    PlantedNormSpec,
};
use normmine::ingest::{corpus_stats, list_input_files, run_ingest};
use normmine::norms::{
    count_norm_stats_with, enumerate_hypotheses, estimate_params, mine_with, positive_count,
    scores_csv, MineOptions, NormHypothesis, NormScore, Semantics,
};
use normmine::seqmodel::{load_bank, save_bank, train_bank, ModelBank, SequenceModel};
use normmine::sequence::{read_corpus, write_corpus, write_metadata};
use normmine::EventSequence;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{semantics, PipelineConfig};

pub const SCORES_FILE: &str = "norms.csv";
pub const DETAIL_FILE: &str = "norms_detail.json";
pub const REPORT_FILE: &str = "lrt_report.txt";
pub const HISTOGRAM_FILE: &str = "lrt_hist.csv";

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create directory {}", dir.display()))?;
    }
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    ensure_parent(path)?;
    std::fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

/// `corpus.txt` -> `corpus.<suffix>`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn load_corpus(path: &Path) -> Result<Vec<EventSequence>> {
    read_corpus(path).with_context(|| format!("cannot load corpus {}", path.display()))
}

fn load(path: &Path) -> Result<ModelBank<SequenceModel>> {
    load_bank(path).with_context(|| format!("cannot load model bank {}", path.display()))
}

fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(n) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| anyhow!("cannot start {n} workers: {e}"))?
            .install(f)),
    }
}

pub fn ingest(cfg: &PipelineConfig) -> Result<()> {
    let events = list_input_files(&cfg.paths.events_dir).context("events directory")?;
    let mentions = list_input_files(&cfg.paths.mentions_dir).context("mentions directory")?;
    if events.is_empty() {
        log::warn!(
            "no events files in {}; the corpus will be empty",
            cfg.paths.events_dir.display()
        );
    }
    log::info!(
        "ingesting {} events and {} mentions files",
        events.len(),
        mentions.len()
    );
    let out = run_ingest(&events, &mentions, &cfg.ingest.to_config())?;

    let corpus_path = &cfg.paths.corpus;
    ensure_parent(corpus_path)?;
    write_corpus(corpus_path, &out.corpus)?;
    write_metadata(&sibling(corpus_path, "meta.tsv"), &out.corpus)?;
    write_file(
        &sibling(corpus_path, "diagnostics.txt"),
        &out.diagnostics.render(),
    )?;
    log::info!(
        "wrote {} sequences to {}",
        out.corpus.len(),
        corpus_path.display()
    );
    print!("{}", corpus_stats(&out.corpus).render());
    Ok(())
}

pub fn train(cfg: &PipelineConfig) -> Result<()> {
    let corpus = load_corpus(&cfg.paths.corpus)?;
    if corpus.is_empty() {
        log::warn!("empty corpus: every model in the bank is uniform");
    }
    let params = cfg.hyperparams()?;
    log::info!(
        "training on {} sequences (max depth {})",
        corpus.len(),
        params.max_depth
    );
    let bank = train_bank(&corpus, params);
    ensure_parent(&cfg.paths.bank)?;
    save_bank(&bank, &cfg.paths.bank)?;
    log::info!(
        "saved base model and {} inclusion models to {}",
        bank.incl_count(),
        cfg.paths.bank.display()
    );
    Ok(())
}

/// Norms listed one per line; blank lines and `#` comments are skipped.
pub fn read_hypotheses(path: &Path) -> Result<Vec<NormHypothesis>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read hypotheses file {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let h: NormHypothesis = line
            .parse()
            .with_context(|| format!("{}:{}", path.display(), i + 1))?;
        out.push(h);
    }
    out.sort();
    out.dedup();
    if out.is_empty() {
        bail!("hypotheses file {} lists no norms", path.display());
    }
    Ok(out)
}

#[derive(Serialize)]
struct MiningDetail<'a> {
    sequences: usize,
    hypotheses: usize,
    prior_log_odds: f64,
    semantics: Semantics,
    positive: usize,
    scores: &'a [NormScore],
}

pub fn mine(cfg: &PipelineConfig) -> Result<()> {
    let corpus = load_corpus(&cfg.paths.corpus)?;
    let bank = load(&cfg.paths.bank)?;
    let hypotheses = match &cfg.mine.hypotheses {
        Some(path) => read_hypotheses(path)?,
        None => enumerate_hypotheses(),
    };
    let m = &cfg.mine;
    let opts = MineOptions {
        prior_log_odds: m.prior_log_odds,
        semantics: semantics(m.strict_sanction, m.sanction_direction),
        workers: m.workers,
        progress_every: m.progress_every,
    };
    log::info!(
        "mining {} hypotheses over {} sequences",
        hypotheses.len(),
        corpus.len()
    );
    let scores = mine_with(&corpus, &hypotheses, &bank, &opts)?;
    let positive = positive_count(&scores);

    let out = &cfg.paths.out_dir;
    write_file(&out.join(SCORES_FILE), &scores_csv(&scores))?;
    let detail = MiningDetail {
        sequences: corpus.len(),
        hypotheses: hypotheses.len(),
        prior_log_odds: opts.prior_log_odds,
        semantics: opts.semantics,
        positive,
        scores: &scores,
    };
    let mut json = serde_json::to_string_pretty(&detail)?;
    json.push('\n');
    write_file(&out.join(DETAIL_FILE), &json)?;
    println!("positive_log_odds_norms={positive}");
    Ok(())
}

/// The norm on the first data row of a mining table.
fn top_norm(scores: &Path) -> Result<NormHypothesis> {
    let text = std::fs::read_to_string(scores).with_context(|| {
        format!(
            "no --norm given and cannot read mining output {}",
            scores.display()
        )
    })?;
    let row = text
        .lines()
        .nth(1)
        .ok_or_else(|| anyhow!("mining output {} has no rows", scores.display()))?;
    let field = row
        .split("\",")
        .next()
        .unwrap_or("")
        .trim_start_matches('"');
    Ok(field.parse()?)
}

pub fn evaluate(cfg: &PipelineConfig) -> Result<()> {
    let e = &cfg.evaluate;
    let norm: NormHypothesis = match &e.norm {
        Some(s) => s.parse()?,
        None => top_norm(&cfg.paths.out_dir.join(SCORES_FILE))?,
    };
    let corpus = load_corpus(&cfg.paths.corpus)?;
    let bank = load(&cfg.paths.bank)?;
    let sem = semantics(e.strict_sanction, e.sanction_direction);
    let params = estimate_params(&count_norm_stats_with(&norm, &corpus, &sem));
    let opts = EvalOptions {
        n_synth: e.n_synth,
        synth_size: e.synth_size,
        seed: e.seed,
        frozen_params: e.frozen_params,
        semantics: sem,
        bins: e.bins,
    };
    log::info!("evaluating {norm} with {} null corpora", opts.n_synth);
    let result = with_workers(e.workers, || {
        evaluate_top_norm(&corpus, &bank, &norm, &params, &opts)
    })??;

    let out = &cfg.paths.out_dir;
    let report = result.report.render();
    write_file(&out.join(REPORT_FILE), &report)?;
    write_file(&out.join(HISTOGRAM_FILE), &histogram_csv(&result.histogram))?;
    print!("{report}");
    Ok(())
}

pub struct SynthRequest {
    pub out: PathBuf,
    pub n: usize,
    pub seed: u64,
    /// `None` samples from the background model only.
    pub norm: Option<String>,
    pub p_comp: f64,
    pub p_sanc: f64,
    pub semantics: Semantics,
}

pub fn synth(cfg: &PipelineConfig, req: &SynthRequest) -> Result<()> {
    let bank = load(&cfg.paths.bank)?;
    let corpus = match &req.norm {
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
            generate_null_corpus(bank.base(), req.n, &mut rng)?.corpus
        }
        Some(text) => {
            let spec = PlantedNormSpec {
                norm: text.parse()?,
                p_comp: req.p_comp,
                p_sanc: req.p_sanc,
                n_sequences: req.n,
                seed: req.seed,
            };
            let planted = plant_norm_corpus_with(&bank, &spec, &req.semantics)?;
            let [comply, sanctioned, unsanctioned] = planted.branch_counts;
            log::info!(
                "planted {}: {comply} compliant, {sanctioned} sanctioned and {unsanctioned} \
                 unsanctioned violations, {} untriggered",
                spec.norm,
                planted.untriggered
            );
            planted.corpus
        }
    };
    ensure_parent(&req.out)?;
    write_corpus(&req.out, &corpus)?;
    log::info!("wrote {} sequences to {}", corpus.len(), req.out.display());
    Ok(())
}
