mod config;
mod failure;
mod run_all;
mod stages;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use brakescope_core::describer::save_descriptions;
use brakescope_core::eval::save_report;
use brakescope_core::model::{save_records, ScenarioCategory};
use brakescope_core::describer::load_descriptions;
use brakescope_core::scenario_store::ScenarioDb;
use brakescope_core::synthkit::{corpus_specs, generate, write_corpus, ScenarioSpec};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use config::{PipelineConfig, ProviderKind};
use failure::{Failure, ResultExt};

/// Mine braking scenarios from driving logs: tag, find key objects, describe,
/// classify and retrieve.
#[derive(Parser)]
#[command(name = "brakescope", version)]
struct Cli {
    /// JSON configuration file; flags given on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Maximum worker threads within a stage (config default 4).
    #[arg(long, global = true)]
    concurrency: Option<usize>,
    /// Also emit debug events.
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labelled synthetic corpus (logs/ and annotations.csv).
    Synth(SynthArgs),
    /// Interpolate gaps and smooth one log.
    Preprocess(PreprocessArgs),
    /// Compute the tag matrices of one log.
    Tag(IoArgs),
    /// Extract key-object pairs from tag matrices.
    Koi(KoiArgs),
    /// Describe every key-object pair of one log.
    Describe(DescribeArgs),
    /// Classify and embed descriptions into scenario records.
    Classify(ClassifyArgs),
    /// Query a scenario database by category or by text similarity.
    Retrieve(RetrieveArgs),
    /// Score records against annotations and write a report.
    Eval(EvalArgs),
    /// Run every stage over a directory of logs, skipping up-to-date outputs.
    RunAll(RunAllArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Scenario category, or "all" for every behaviour category.
    #[arg(long, default_value = "all")]
    category: String,
    /// Scenarios per category.
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Standard deviation of Gaussian position noise in metres.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Generate the veer-behind contrast case instead (labelled cut_in).
    #[arg(long)]
    veer_behind: bool,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct PreprocessArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Smoothing window length in samples (odd).
    #[arg(long)]
    window: Option<usize>,
    /// Smoothing polynomial degree.
    #[arg(long)]
    polyorder: Option<usize>,
}

#[derive(Args)]
struct IoArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct KoiArgs {
    #[arg(long)]
    tags: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DescribeArgs {
    #[arg(long)]
    tags: PathBuf,
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ProviderArgs {
    /// Chat and embedding backend.
    #[arg(long, value_enum)]
    provider: Option<ProviderKind>,
    /// Chat model name for the remote provider.
    #[arg(long)]
    llm_model: Option<String>,
    /// Embedding model name for the remote provider.
    #[arg(long)]
    embed_model: Option<String>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    descriptions: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    provider: ProviderArgs,
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("mode").required(true).args(["category", "query"])))]
struct RetrieveArgs {
    #[arg(long)]
    db: PathBuf,
    /// Return every record of this category.
    #[arg(long)]
    category: Option<ScenarioCategory>,
    /// Free-text similarity query.
    #[arg(long)]
    query: Option<String>,
    /// Number of similarity results.
    #[arg(long, default_value_t = 50)]
    k: usize,
    /// Write results here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    provider: ProviderArgs,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    records: PathBuf,
    #[arg(long)]
    annotations: PathBuf,
    /// JSON array of {name, query, category} retrieval queries.
    #[arg(long)]
    retrieval_queries: Option<PathBuf>,
    /// Key-object pair files to score against the annotations (repeatable).
    #[arg(long)]
    pairs: Vec<PathBuf>,
    #[arg(long)]
    report: PathBuf,
    #[command(flatten)]
    provider: ProviderArgs,
}

#[derive(Args)]
struct RunAllArgs {
    /// Directory of .jsonl logs.
    #[arg(long)]
    logs: Option<PathBuf>,
    /// Directory for all stage outputs.
    #[arg(long)]
    work_dir: Option<PathBuf>,
    /// Ground-truth annotations; enables the eval stage.
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// JSON array of {name, query, category} retrieval queries, scored in the eval stage.
    #[arg(long)]
    retrieval_queries: Option<PathBuf>,
    /// Rerun every stage even when outputs are up to date.
    #[arg(long)]
    force: bool,
    #[command(flatten)]
    provider: ProviderArgs,
}

impl ProviderArgs {
    fn apply(&self, cfg: &mut PipelineConfig) {
        if let Some(p) = self.provider {
            cfg.provider = p;
        }
        if self.llm_model.is_some() {
            cfg.llm_model.clone_from(&self.llm_model);
        }
        if self.embed_model.is_some() {
            cfg.embed_model.clone_from(&self.embed_model);
        }
    }
}

fn init_logging(verbose: bool) {
    let level = if verbose { tracing::Level::DEBUG } else { tracing::Level::INFO };
    tracing_subscriber::fmt()
        .json()
        .with_max_level(level)
        .with_current_span(false)
        .with_target(false)
        .with_writer(std::io::stderr)
        .init();
}

fn require_file(path: &Path) -> Result<(), Failure> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::input(format!("input file {} does not exist", path.display())))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut cfg = PipelineConfig::load(cli.config.as_deref())?;
    if let Some(c) = cli.concurrency {
        cfg.concurrency = c;
    }
    let started = Instant::now();
    match cli.command {
        Command::Synth(a) => {
            let categories = if a.category == "all" {
                ScenarioCategory::BEHAVIOURS.to_vec()
            } else {
                vec![a.category.parse::<ScenarioCategory>().input(|| format!("unknown category {:?}", a.category))?]
            };
            if !(a.noise >= 0.0) {
                return Err(Failure::input("noise must be non-negative"));
            }
            let mut specs = corpus_specs(&categories, a.n, a.seed, a.noise);
            if a.veer_behind {
                specs = specs.into_iter().map(|s| ScenarioSpec { veer_behind: true, category: ScenarioCategory::CutIn, ..s }).collect();
            }
            cfg.validate()?;
            let pool = stages::thread_pool(cfg.concurrency)?;
            let corpus = pool
                .install(|| specs.par_iter().map(generate).collect::<Result<Vec<_>, _>>())
                .input(|| "cannot generate scenario")?;
            write_corpus(&a.out_dir, &corpus).internal(|| format!("cannot write corpus to {}", a.out_dir.display()))?;
            stages::finished("synth", started, corpus.len());
        }
        Command::Preprocess(a) => {
            if let Some(w) = a.window {
                cfg.smoothing.window = w;
            }
            if let Some(p) = a.polyorder {
                cfg.smoothing.polyorder = p;
            }
            cfg.validate()?;
            require_file(&a.input)?;
            let report = stages::preprocess_file(&a.input, &a.out, cfg.smoothing)?;
            if !report.unsmoothed_tracks.is_empty() {
                tracing::warn!(tracks = ?report.unsmoothed_tracks, "tracks shorter than the window were not smoothed");
            }
            stages::finished("preprocess", started, 1);
        }
        Command::Tag(a) => {
            cfg.validate()?;
            require_file(&a.input)?;
            let n = stages::tag_file(&a.input, &a.out, &cfg.tagger)?;
            stages::finished("tag", started, n);
        }
        Command::Koi(a) => {
            require_file(&a.tags)?;
            let pairs = stages::koi_file(&a.tags, &a.out)?;
            stages::finished("koi", started, pairs.len());
        }
        Command::Describe(a) => {
            require_file(&a.tags)?;
            require_file(&a.pairs)?;
            let records = stages::describe_file(&a.tags, &a.pairs)?;
            save_descriptions(&records, &a.out).internal(|| format!("cannot write {}", a.out.display()))?;
            stages::finished("describe", started, records.len());
        }
        Command::Classify(a) => {
            a.provider.apply(&mut cfg);
            cfg.validate()?;
            require_file(&a.descriptions)?;
            let descriptions =
                load_descriptions(&a.descriptions).input(|| format!("cannot load {}", a.descriptions.display()))?;
            let gw = stages::gateway(&cfg)?;
            let pool = stages::thread_pool(cfg.concurrency)?;
            let records = stages::classify(&descriptions, &gw, &pool)?;
            save_records(&records, &a.out).internal(|| format!("cannot write {}", a.out.display()))?;
            stages::finished("classify", started, records.len());
        }
        Command::Retrieve(a) => {
            a.provider.apply(&mut cfg);
            require_file(&a.db)?;
            let db = ScenarioDb::load(&a.db).input(|| format!("cannot load database {}", a.db.display()))?;
            let hits: Vec<Hit<'_>> = match (&a.category, &a.query) {
                (Some(c), _) => db.retrieve_by_category(*c).into_iter().map(|r| Hit::new(r, None)).collect(),
                (None, Some(q)) => {
                    if a.k == 0 {
                        return Err(Failure::input("--k must be at least 1"));
                    }
                    let gw = stages::gateway(&cfg)?;
                    db.retrieve_by_similarity(q, a.k, &gw)
                        .internal(|| "similarity search failed")?
                        .into_iter()
                        .map(|h| Hit::new(h.record, Some(h.score)))
                        .collect()
                }
                (None, None) => unreachable!("clap requires a mode"),
            };
            write_hits(&hits, a.out.as_deref())?;
            stages::finished("retrieve", started, hits.len());
        }
        Command::Eval(a) => {
            a.provider.apply(&mut cfg);
            for p in [&a.records, &a.annotations].into_iter().chain(&a.pairs).chain(&a.retrieval_queries) {
                require_file(p)?;
            }
            let gw = stages::gateway(&cfg)?;
            let inputs = stages::EvalInputs {
                records: &a.records,
                annotations: &a.annotations,
                pairs: &a.pairs,
                queries: a.retrieval_queries.as_deref(),
            };
            let report = stages::evaluate(&inputs, &gw)?;
            save_report(&report, &a.report).internal(|| format!("cannot write {}", a.report.display()))?;
            stages::finished("eval", started, report.per_category.len());
        }
        Command::RunAll(a) => {
            a.provider.apply(&mut cfg);
            let logs_dir = a.logs.or(cfg.logs_dir.clone()).ok_or_else(|| Failure::input("--logs is required"))?;
            let work_dir = a.work_dir.or(cfg.work_dir.clone()).ok_or_else(|| Failure::input("--work-dir is required"))?;
            let opts = run_all::RunAll {
                logs_dir,
                work_dir,
                annotations: a.annotations.or(cfg.annotations.clone()),
                queries: a.retrieval_queries.or(cfg.retrieval_queries.clone()),
                config_file: cli.config.clone(),
                force: a.force,
            };
            let out = run_all::run_all(&cfg, &opts)?;
            stages::finished("run-all", started, 1);
            println!("{}", out.display());
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct Hit<'a> {
    log_id: &'a str,
    guest_id: &'a str,
    category: ScenarioCategory,
    #[serde(skip_serializing_if = "Option::is_none")]
    score: Option<f64>,
    rephrased_description: &'a str,
}

impl<'a> Hit<'a> {
    fn new(r: &'a brakescope_core::model::ScenarioRecord, score: Option<f64>) -> Self {
        Self {
            log_id: &r.log_id,
            guest_id: &r.guest_id,
            category: r.category,
            score,
            rephrased_description: &r.rephrased_description,
        }
    }
}

fn write_hits(hits: &[Hit<'_>], out: Option<&Path>) -> Result<(), Failure> {
    let mut buf = Vec::new();
    for h in hits {
        serde_json::to_writer(&mut buf, h).internal(|| "cannot serialize result")?;
        buf.push(b'\n');
    }
    match out {
        Some(p) => std::fs::write(p, buf).internal(|| format!("cannot write {}", p.display())),
        None => std::io::stdout().write_all(&buf).internal(|| "cannot write to stdout"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.verbose);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            tracing::error!(exit_code = e.exit_code(), error = %e, "command failed");
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
