//! The whole pipeline over a directory of logs, resumable by file modification time.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime};

use brakescope_core::describer::save_descriptions;
use brakescope_core::eval::save_report;
use brakescope_core::model::save_records;
use brakescope_core::describer::load_descriptions;
use rayon::prelude::*;

use crate::config::PipelineConfig;
use crate::failure::{Failure, ResultExt};
use crate::stages;

pub struct RunAll {
    pub logs_dir: PathBuf,
    pub work_dir: PathBuf,
    pub annotations: Option<PathBuf>,
    pub queries: Option<PathBuf>,
    /// Also counted as an input of every stage, so config edits rerun everything.
    pub config_file: Option<PathBuf>,
    pub force: bool,
}

/// Work-directory layout.
pub struct Layout {
    pub preprocessed: PathBuf,
    pub tags: PathBuf,
    pub pairs: PathBuf,
    pub descriptions: PathBuf,
    pub records: PathBuf,
    pub db: PathBuf,
    pub report: PathBuf,
}

impl Layout {
    pub fn new(work: &Path) -> Self {
        Self {
            preprocessed: work.join("preprocessed"),
            tags: work.join("tags"),
            pairs: work.join("pairs"),
            descriptions: work.join("descriptions.jsonl"),
            records: work.join("records.jsonl"),
            db: work.join("db.jsonl"),
            report: work.join("report.json"),
        }
    }
}

fn mtime(p: &Path) -> Option<SystemTime> {
    std::fs::metadata(p).and_then(|m| m.modified()).ok()
}

/// True when every output exists and none is older than any input.
fn up_to_date(inputs: &[PathBuf], outputs: &[PathBuf]) -> bool {
    let Some(oldest_out) = outputs.iter().map(|p| mtime(p)).collect::<Option<Vec<_>>>().and_then(|v| v.into_iter().min())
    else {
        return false;
    };
    inputs.iter().all(|p| mtime(p).is_some_and(|t| t <= oldest_out))
}

fn skipped(stage: &str) {
    tracing::info!(stage, status = "up to date", "stage skipped: up to date");
}

fn list_logs(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let entries = std::fs::read_dir(dir).input(|| format!("cannot read logs directory {}", dir.display()))?;
    let mut logs = Vec::new();
    for e in entries {
        let path = e.internal(|| format!("cannot list {}", dir.display()))?.path();
        if path.extension().is_some_and(|x| x == "jsonl") {
            logs.push(path);
        }
    }
    logs.sort();
    if logs.is_empty() {
        return Err(Failure::input(format!("no .jsonl logs in {}", dir.display())));
    }
    Ok(logs)
}

struct Ctx<'a> {
    extra: Vec<PathBuf>,
    force: bool,
    pool: &'a rayon::ThreadPool,
}

impl Ctx<'_> {
    fn fresh(&self, inputs: &[PathBuf], outputs: &[PathBuf]) -> bool {
        let mut all: Vec<PathBuf> = inputs.to_vec();
        all.extend(self.extra.iter().cloned());
        !self.force && up_to_date(&all, outputs)
    }

    /// Runs `f(input, output)` for every stale file pair in parallel.
    fn per_file<T: Send>(
        &self,
        stage: &str,
        pairs: &[(PathBuf, PathBuf)],
        f: impl Fn(&Path, &Path) -> Result<T, Failure> + Sync,
    ) -> Result<(), Failure> {
        let stale: Vec<&(PathBuf, PathBuf)> =
            pairs.iter().filter(|(i, o)| !self.fresh(std::slice::from_ref(i), std::slice::from_ref(o))).collect();
        if stale.is_empty() {
            skipped(stage);
            return Ok(());
        }
        let started = Instant::now();
        self.pool.install(|| stale.par_iter().map(|(i, o)| f(i, o).map(|_| ())).collect::<Result<Vec<()>, Failure>>())?;
        stages::finished(stage, started, stale.len());
        Ok(())
    }
}

/// Returns the final artifact: the report when annotations are given, else the database.
pub fn run_all(cfg: &PipelineConfig, opts: &RunAll) -> Result<PathBuf, Failure> {
    cfg.validate()?;
    if let Some(a) = &opts.annotations {
        if !a.is_file() {
            return Err(Failure::input(format!("annotations file {} does not exist", a.display())));
        }
    }
    if let Some(q) = &opts.queries {
        if !q.is_file() {
            return Err(Failure::input(format!("retrieval queries file {} does not exist", q.display())));
        }
    }
    let logs = list_logs(&opts.logs_dir)?;
    let layout = Layout::new(&opts.work_dir);
    for d in [&layout.preprocessed, &layout.tags, &layout.pairs] {
        std::fs::create_dir_all(d).internal(|| format!("cannot create {}", d.display()))?;
    }
    let pool = stages::thread_pool(cfg.concurrency)?;
    let ctx = Ctx { extra: opts.config_file.iter().cloned().collect(), force: opts.force, pool: &pool };
    let names: Vec<_> = logs.iter().map(|p| p.file_name().expect("listed file").to_owned()).collect();
    let under = |dir: &Path| names.iter().map(|n| dir.join(n)).collect::<Vec<_>>();
    let (pre, tags, pairs) = (under(&layout.preprocessed), under(&layout.tags), under(&layout.pairs));
    let zip = |a: &[PathBuf], b: &[PathBuf]| a.iter().cloned().zip(b.iter().cloned()).collect::<Vec<_>>();

    ctx.per_file("preprocess", &zip(&logs, &pre), |i, o| stages::preprocess_file(i, o, cfg.smoothing))?;
    ctx.per_file("tag", &zip(&pre, &tags), |i, o| stages::tag_file(i, o, &cfg.tagger))?;
    ctx.per_file("koi", &zip(&tags, &pairs), stages::koi_file)?;

    let mut describe_in = tags.clone();
    describe_in.extend(pairs.iter().cloned());
    if ctx.fresh(&describe_in, std::slice::from_ref(&layout.descriptions)) {
        skipped("describe");
    } else {
        let started = Instant::now();
        let per_log: Vec<_> = pool.install(|| {
            tags.par_iter().zip(&pairs).map(|(t, p)| stages::describe_file(t, p)).collect::<Result<Vec<_>, Failure>>()
        })?;
        let all: Vec<_> = per_log.into_iter().flatten().collect();
        save_descriptions(&all, &layout.descriptions).internal(|| "cannot write descriptions")?;
        stages::finished("describe", started, all.len());
    }

    let gateway = stages::gateway(cfg)?;
    if ctx.fresh(std::slice::from_ref(&layout.descriptions), std::slice::from_ref(&layout.records)) {
        skipped("classify");
    } else {
        let started = Instant::now();
        let descriptions = load_descriptions(&layout.descriptions).input(|| "cannot load descriptions")?;
        let records = stages::classify(&descriptions, &gateway, &pool)?;
        save_records(&records, &layout.records).internal(|| "cannot write records")?;
        stages::finished("classify", started, records.len());
    }

    if ctx.fresh(std::slice::from_ref(&layout.records), std::slice::from_ref(&layout.db)) {
        skipped("store");
    } else {
        let started = Instant::now();
        let n = stages::store(&layout.records, &layout.db)?;
        stages::finished("store", started, n);
    }

    let Some(annotations) = &opts.annotations else {
        return Ok(layout.db);
    };
    let mut eval_in = vec![layout.records.clone(), annotations.clone()];
    eval_in.extend(pairs.iter().cloned());
    eval_in.extend(opts.queries.iter().cloned());
    if ctx.fresh(&eval_in, std::slice::from_ref(&layout.report)) {
        skipped("eval");
    } else {
        let started = Instant::now();
        let inputs = stages::EvalInputs {
            records: &layout.records,
            annotations,
            pairs: &pairs,
            queries: opts.queries.as_deref(),
        };
        let report = stages::evaluate(&inputs, &gateway)?;
        save_report(&report, &layout.report).internal(|| "cannot write report")?;
        stages::finished("eval", started, report.per_category.len());
    }
    Ok(layout.report)
}
