//! Stage implementations shared by the single-stage commands and `run-all`.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use brakescope_core::describer::{describe_pair, DescriptionRecord};
use brakescope_core::eval::{
    evaluate_retrieval, load_queries, score_classification, score_koi, EvalReport,
};
use brakescope_core::koi::{identify_key_objects, load_pairs, save_pairs, KeyPair};
use brakescope_core::llm_gateway::{Gateway, RemoteChat, RemoteEmbedder};
use brakescope_core::model::{
    load_annotations, load_log, load_records, load_tags, save_log, save_tags, Provenance, ScenarioRecord,
};
use brakescope_core::preprocess::{preprocess_log, ProcessingReport, SmoothingConfig};
use brakescope_core::scenario_store::ScenarioDb;
use brakescope_core::tagger::{tag_log, TaggerConfig};
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::config::{PipelineConfig, ProviderKind};
use crate::failure::{Failure, ResultExt};

pub fn thread_pool(threads: usize) -> Result<ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().internal(|| "cannot start worker pool")
}

/// Logs one JSON event for a finished stage.
pub fn finished(stage: &str, started: Instant, count: usize) {
    tracing::info!(stage, duration_ms = started.elapsed().as_millis() as u64, count, status = "done", "stage finished");
}

pub fn gateway(cfg: &PipelineConfig) -> Result<Gateway, Failure> {
    match cfg.provider {
        ProviderKind::Mock => Ok(Gateway::mock()),
        ProviderKind::Remote => {
            let (Some(llm), Some(embed)) = (&cfg.llm_model, &cfg.embed_model) else {
                return Err(Failure::input("the remote provider needs llm_model and embed_model"));
            };
            let chat = RemoteChat::from_env(llm.clone()).input(|| "cannot configure the LLM provider")?;
            let embedder = RemoteEmbedder::from_env(embed.clone()).input(|| "cannot configure the embedding provider")?;
            Ok(Gateway::new(Arc::new(chat), Arc::new(embedder)))
        }
    }
}

pub fn preprocess_file(input: &Path, output: &Path, cfg: SmoothingConfig) -> Result<ProcessingReport, Failure> {
    let log = load_log(input).input(|| format!("cannot load log {}", input.display()))?;
    let (out, report) = preprocess_log(&log, cfg).input(|| format!("cannot preprocess {}", input.display()))?;
    save_log(&out, output).internal(|| format!("cannot write {}", output.display()))?;
    Ok(report)
}

/// Returns the number of tracked objects.
pub fn tag_file(input: &Path, output: &Path, cfg: &TaggerConfig) -> Result<usize, Failure> {
    let log = load_log(input).input(|| format!("cannot load log {}", input.display()))?;
    let tags = tag_log(&log, cfg).input(|| format!("cannot tag {}", input.display()))?;
    save_tags(&tags, output).internal(|| format!("cannot write {}", output.display()))?;
    Ok(tags.objects())
}

pub fn koi_file(input: &Path, output: &Path) -> Result<Vec<KeyPair>, Failure> {
    let tags = load_tags(input).input(|| format!("cannot load tags {}", input.display()))?;
    let pairs = identify_key_objects(&tags);
    save_pairs(&pairs, output).internal(|| format!("cannot write {}", output.display()))?;
    Ok(pairs)
}

/// Describes every pair of `pairs_path`; all pairs must belong to the tagged log.
pub fn describe_file(tags_path: &Path, pairs_path: &Path) -> Result<Vec<DescriptionRecord>, Failure> {
    let tags = load_tags(tags_path).input(|| format!("cannot load tags {}", tags_path.display()))?;
    let pairs = load_pairs(pairs_path).input(|| format!("cannot load pairs {}", pairs_path.display()))?;
    pairs
        .iter()
        .map(|p| {
            if p.log_id != tags.log_id {
                return Err(Failure::input(format!(
                    "pair ({}, {}) does not belong to log {} in {}",
                    p.log_id,
                    p.guest_id,
                    tags.log_id,
                    tags_path.display()
                )));
            }
            describe_pair(&tags, &p.guest_id).input(|| format!("cannot describe ({}, {})", p.log_id, p.guest_id))
        })
        .collect()
}

/// Classifies and embeds each description, keeping input order.
pub fn classify(descriptions: &[DescriptionRecord], gw: &Gateway, pool: &ThreadPool) -> Result<Vec<ScenarioRecord>, Failure> {
    let provenance = Provenance { llm_model: gw.llm_model().to_string(), embed_model: gw.embed_model().to_string() };
    pool.install(|| {
        descriptions
            .par_iter()
            .map(|d| {
                let parsed = gw
                    .classify_description(&d.description)
                    .internal(|| format!("classification of ({}, {}) failed", d.log_id, d.guest_id))?;
                if let Some(w) = &parsed.warning {
                    tracing::warn!(log_id = %d.log_id, guest_id = %d.guest_id, warning = %w, "verdict adjusted");
                }
                let v = parsed.verdict;
                let embedding = gw
                    .embed(&v.rephrased_description)
                    .internal(|| format!("embedding of ({}, {}) failed", d.log_id, d.guest_id))?;
                Ok(ScenarioRecord {
                    log_id: d.log_id.clone(),
                    guest_id: d.guest_id.clone(),
                    raw_description: d.description.clone(),
                    rephrased_description: v.rephrased_description,
                    category: v.category,
                    explanation: v.explanation,
                    embedding,
                    provenance: provenance.clone(),
                })
            })
            .collect()
    })
}

/// Builds the database from a records file, rejecting duplicates and bad embeddings.
pub fn store(records_path: &Path, db_path: &Path) -> Result<usize, Failure> {
    let records = load_records(records_path).input(|| format!("cannot load records {}", records_path.display()))?;
    let db = ScenarioDb::from_records(records).input(|| format!("cannot build database from {}", records_path.display()))?;
    db.save(db_path).internal(|| format!("cannot write {}", db_path.display()))?;
    Ok(db.len())
}

pub struct EvalInputs<'a> {
    pub records: &'a Path,
    pub annotations: &'a Path,
    pub pairs: &'a [PathBuf],
    pub queries: Option<&'a Path>,
}

pub fn evaluate(inputs: &EvalInputs<'_>, gw: &Gateway) -> Result<EvalReport, Failure> {
    let records = load_records(inputs.records).input(|| format!("cannot load records {}", inputs.records.display()))?;
    let annotations =
        load_annotations(inputs.annotations).input(|| format!("cannot load annotations {}", inputs.annotations.display()))?;
    let classification = score_classification(&records, &annotations).input(|| "cannot score classification")?;

    let koi = if inputs.pairs.is_empty() {
        None
    } else {
        let mut pairs = Vec::new();
        for p in inputs.pairs {
            pairs.extend(load_pairs(p).input(|| format!("cannot load pairs {}", p.display()))?);
        }
        // only logs that were annotated take part
        let logs: HashSet<&str> = annotations.iter().map(|a| a.log_id.as_str()).collect();
        pairs.retain(|p| logs.contains(p.log_id.as_str()));
        Some(score_koi(&pairs, &annotations))
    };

    let retrieval = match inputs.queries {
        None => BTreeMap::new(),
        Some(q) => {
            let queries = load_queries(q).input(|| format!("cannot load queries {}", q.display()))?;
            let db = ScenarioDb::from_records(records).input(|| "cannot index records")?;
            evaluate_retrieval(&db, &queries, &annotations, gw).input(|| "retrieval evaluation failed")?
        }
    };
    Ok(EvalReport::from_parts(classification, koi, retrieval))
}
