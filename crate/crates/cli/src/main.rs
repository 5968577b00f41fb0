//! `normmine`: ingest GDELT tables, train the background model bank, mine
//! norms and test the best one against model-sampled null corpora.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use normmine::norms::SanctionDirection;

use crate::config::PipelineConfig;

#[derive(Debug, Parser)]
#[command(
    name = "normmine",
    version,
    about = "Norm mining over GDELT bilateral event sequences"
)]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Only report warnings and errors on stderr.
    #[arg(short, long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the sequence corpus from events and mentions tables.
    Ingest(IngestArgs),
    /// Train and save the model bank on a corpus.
    Train(TrainArgs),
    /// Score every norm hypothesis and write the ranked table.
    Mine(MineArgs),
    /// Likelihood ratio test of one norm against null corpora.
    Evaluate(EvaluateArgs),
    /// Sample a corpus from a bank, optionally with a planted norm.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct IngestArgs {
    #[arg(long)]
    events_dir: Option<PathBuf>,
    #[arg(long)]
    mentions_dir: Option<PathBuf>,
    /// Corpus output; metadata and diagnostics are written next to it.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    clone_threshold: Option<usize>,
    /// Mention identifier substring to drop; repeat for several.
    #[arg(long = "source-filter")]
    source_filters: Vec<String>,
    /// First day kept (YYYY-MM-DD).
    #[arg(long)]
    start: Option<chrono::NaiveDate>,
    /// Last day kept (YYYY-MM-DD).
    #[arg(long)]
    end: Option<chrono::NaiveDate>,
    /// Seed for ordering same-day events.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    bank: Option<PathBuf>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    discount: Option<f64>,
    #[arg(long)]
    strength: Option<f64>,
}

#[derive(Debug, Args)]
struct SemanticsArgs {
    /// Only a sanction immediately after the violation counts.
    #[arg(long)]
    strict_sanction: bool,
    #[arg(long, value_parser = parse_sanction_direction)]
    sanction_direction: Option<SanctionDirection>,
}

#[derive(Debug, Args)]
struct MineArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    bank: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    prior_log_odds: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    /// File of norms, one per line, to score instead of all 1640.
    #[arg(long)]
    hypotheses: Option<PathBuf>,
    /// Sequences between progress messages.
    #[arg(long)]
    progress_every: Option<usize>,
    #[command(flatten)]
    semantics: SemanticsArgs,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    bank: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Norm such as `O(4,4,-)`; defaults to the top row of norms.csv.
    #[arg(long, allow_hyphen_values = true)]
    norm: Option<String>,
    #[arg(long)]
    n_synth: Option<usize>,
    #[arg(long)]
    synth_size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Keep the real-data parameters on synthetic corpora.
    #[arg(long)]
    frozen_params: bool,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    semantics: SemanticsArgs,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    bank: Option<PathBuf>,
    /// Output corpus file.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sample from the background model only.
    #[arg(long, conflicts_with = "norm")]
    null: bool,
    #[arg(long, allow_hyphen_values = true, required_unless_present = "null")]
    norm: Option<String>,
    #[arg(long, default_value_t = 0.5)]
    p_comp: f64,
    #[arg(long, default_value_t = 0.5)]
    p_sanc: f64,
    #[command(flatten)]
    semantics: SemanticsArgs,
}

fn parse_sanction_direction(s: &str) -> Result<SanctionDirection, String> {
    match s {
        "doi" => Ok(SanctionDirection::Doi),
        "opposite" => Ok(SanctionDirection::Opposite),
        _ => Err(format!("`{s}` is not doi or opposite")),
    }
}

fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

fn apply_semantics(strict: &mut bool, dir: &mut SanctionDirection, args: SemanticsArgs) {
    *strict |= args.strict_sanction;
    set(dir, args.sanction_direction);
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut cfg = PipelineConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Ingest(a) => {
            set(&mut cfg.paths.events_dir, a.events_dir);
            set(&mut cfg.paths.mentions_dir, a.mentions_dir);
            set(&mut cfg.paths.corpus, a.corpus);
            set(&mut cfg.ingest.clone_threshold, a.clone_threshold);
            if !a.source_filters.is_empty() {
                cfg.ingest.source_filters = a.source_filters;
            }
            cfg.ingest.start = a.start.or(cfg.ingest.start);
            cfg.ingest.end = a.end.or(cfg.ingest.end);
            set(&mut cfg.ingest.seed, a.seed);
            commands::ingest(&cfg)
        }
        Command::Train(a) => {
            set(&mut cfg.paths.corpus, a.corpus);
            set(&mut cfg.paths.bank, a.bank);
            set(&mut cfg.model.max_depth, a.max_depth);
            set(&mut cfg.model.discount, a.discount);
            set(&mut cfg.model.strength, a.strength);
            commands::train(&cfg)
        }
        Command::Mine(a) => {
            set(&mut cfg.paths.corpus, a.corpus);
            set(&mut cfg.paths.bank, a.bank);
            set(&mut cfg.paths.out_dir, a.out_dir);
            set(&mut cfg.mine.prior_log_odds, a.prior_log_odds);
            cfg.mine.workers = a.workers.or(cfg.mine.workers);
            cfg.mine.hypotheses = a.hypotheses.or(cfg.mine.hypotheses);
            set(&mut cfg.mine.progress_every, a.progress_every);
            let m = &mut cfg.mine;
            apply_semantics(
                &mut m.strict_sanction,
                &mut m.sanction_direction,
                a.semantics,
            );
            commands::mine(&cfg)
        }
        Command::Evaluate(a) => {
            set(&mut cfg.paths.corpus, a.corpus);
            set(&mut cfg.paths.bank, a.bank);
            set(&mut cfg.paths.out_dir, a.out_dir);
            let e = &mut cfg.evaluate;
            e.norm = a.norm.or(e.norm.take());
            set(&mut e.n_synth, a.n_synth);
            e.synth_size = a.synth_size.or(e.synth_size);
            set(&mut e.seed, a.seed);
            e.frozen_params |= a.frozen_params;
            e.bins = a.bins.or(e.bins);
            e.workers = a.workers.or(e.workers);
            apply_semantics(
                &mut e.strict_sanction,
                &mut e.sanction_direction,
                a.semantics,
            );
            commands::evaluate(&cfg)
        }
        Command::Synth(a) => {
            set(&mut cfg.paths.bank, a.bank);
            let mut strict = false;
            let mut dir = SanctionDirection::Doi;
            apply_semantics(&mut strict, &mut dir, a.semantics);
            let request = commands::SynthRequest {
                out: a.out,
                n: a.n,
                seed: a.seed,
                norm: if a.null { None } else { a.norm },
                p_comp: a.p_comp,
                p_sanc: a.p_sanc,
                semantics: config::semantics(strict, dir),
            };
            commands::synth(&cfg, &request)
        }
    }
}

/// 3 for broken internal invariants, 2 for everything caused by the input.
fn exit_code(err: &anyhow::Error) -> u8 {
    let internal = err
        .chain()
        .filter_map(|e| e.downcast_ref::<normmine::Error>())
        .any(normmine::Error::is_internal);
    if internal {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .format_target(false)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
