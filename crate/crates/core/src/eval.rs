//! Scoring against annotations: classification, key-object identification
//! and similarity retrieval.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::koi::KeyPair;
use crate::llm_gateway::Gateway;
use crate::model::{write_atomically, Annotation, ModelError, ScenarioCategory, ScenarioRecord, TagName};
use crate::scenario_store::{ScenarioDb, StoreError};

pub const P_AT_K: usize = 10;
pub const R_AT_K: usize = 50;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("duplicate prediction for ({0}, {1})")]
    DuplicatePrediction(String, String),
    #[error("no_relevant: query {0:?} has no relevant records")]
    NoRelevant(String),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    /// Set when there were no predictions and precision was reported as 0.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub precision_undefined: bool,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Metrics {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
        Self { precision, recall, f1, tp, fp, fn_, precision_undefined: tp + fp == 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassificationScores {
    pub per_category: BTreeMap<ScenarioCategory, Metrics>,
    /// Micro-average over the prompt categories.
    pub overall: Metrics,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KoiScores {
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RetrievalScores {
    pub p_at_10: f64,
    pub r_at_50: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_category: BTreeMap<ScenarioCategory, Metrics>,
    pub overall: Metrics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub koi: Option<KoiScores>,
    #[serde(default)]
    pub retrieval: BTreeMap<String, RetrievalScores>,
}

type Key = (String, String);

fn key_of(a: &Annotation) -> Key {
    (a.log_id.clone(), a.guest_id.clone())
}

/// Scores predicted `(key, category)` triples against the annotations.
pub fn score_predictions(predictions: &[Annotation], annotations: &[Annotation]) -> Result<ClassificationScores, EvalError> {
    let truth: HashMap<Key, ScenarioCategory> = annotations.iter().map(|a| (key_of(a), a.scenario_category)).collect();
    let mut predicted: HashMap<Key, ScenarioCategory> = HashMap::new();
    for p in predictions {
        if predicted.insert(key_of(p), p.scenario_category).is_some() {
            return Err(EvalError::DuplicatePrediction(p.log_id.clone(), p.guest_id.clone()));
        }
    }
    let mut counts: BTreeMap<ScenarioCategory, (usize, usize, usize)> =
        ScenarioCategory::ALL.iter().map(|&c| (c, (0, 0, 0))).collect();
    for (k, &c) in &predicted {
        let slot = counts.get_mut(&c).expect("every category present");
        if truth.get(k) == Some(&c) {
            slot.0 += 1;
        } else {
            slot.1 += 1;
        }
    }
    for (k, &c) in &truth {
        if predicted.get(k) != Some(&c) {
            counts.get_mut(&c).expect("every category present").2 += 1;
        }
    }
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for c in ScenarioCategory::PROMPT_CATEGORIES {
        let (a, b, d) = counts[&c];
        tp += a;
        fp += b;
        fn_ += d;
    }
    Ok(ClassificationScores {
        per_category: counts.into_iter().map(|(c, (a, b, d))| (c, Metrics::from_counts(a, b, d))).collect(),
        overall: Metrics::from_counts(tp, fp, fn_),
    })
}

pub fn score_classification(records: &[ScenarioRecord], annotations: &[Annotation]) -> Result<ClassificationScores, EvalError> {
    let predictions: Vec<Annotation> = records
        .iter()
        .map(|r| Annotation { log_id: r.log_id.clone(), guest_id: r.guest_id.clone(), scenario_category: r.category })
        .collect();
    score_predictions(&predictions, annotations)
}

/// Precision and recall of the key pairs against every relevant annotation.
pub fn score_koi(pairs: &[KeyPair], annotations: &[Annotation]) -> KoiScores {
    let relevant: HashSet<Key> =
        annotations.iter().filter(|a| a.scenario_category.is_relevant()).map(key_of).collect();
    let found: HashSet<Key> = pairs.iter().map(|p| (p.log_id.clone(), p.guest_id.clone())).collect();
    let hit = found.intersection(&relevant).count();
    KoiScores { precision: ratio(hit, found.len()), recall: ratio(hit, relevant.len()) }
}

/// P@`k_p` and R@`k_r` of a ranked key list. The precision denominator is
/// `min(k_p, ranked.len())`.
pub fn score_retrieval(
    name: &str,
    ranked: &[(&str, &str)],
    relevant: &HashSet<(String, String)>,
    k_p: usize,
    k_r: usize,
) -> Result<RetrievalScores, EvalError> {
    if relevant.is_empty() {
        return Err(EvalError::NoRelevant(name.to_string()));
    }
    let is_rel = |(l, g): &(&str, &str)| relevant.contains(&(l.to_string(), g.to_string()));
    let top_p = &ranked[..k_p.min(ranked.len())];
    let top_r = &ranked[..k_r.min(ranked.len())];
    Ok(RetrievalScores {
        p_at_10: ratio(top_p.iter().filter(|k| is_rel(k)).count(), top_p.len()),
        r_at_50: ratio(top_r.iter().filter(|k| is_rel(k)).count(), relevant.len()),
    })
}

/// A free-text retrieval query whose relevant set is every annotation of `category`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalQuery {
    pub name: String,
    pub query: String,
    pub category: ScenarioCategory,
}

pub fn load_queries(path: impl AsRef<Path>) -> Result<Vec<RetrievalQuery>, ModelError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ModelError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| ModelError::parse(e.line(), e.to_string()))
}

pub fn evaluate_retrieval(
    db: &ScenarioDb,
    queries: &[RetrievalQuery],
    annotations: &[Annotation],
    gateway: &Gateway,
) -> Result<BTreeMap<String, RetrievalScores>, EvalError> {
    let k = P_AT_K.max(R_AT_K);
    queries
        .iter()
        .map(|q| {
            let relevant: HashSet<Key> =
                annotations.iter().filter(|a| a.scenario_category == q.category).map(key_of).collect();
            let ranked = db.retrieve_by_similarity(&q.query, k, gateway)?;
            let keys: Vec<(&str, &str)> = ranked.iter().map(|r| r.record.key()).collect();
            Ok((q.name.clone(), score_retrieval(&q.name, &keys, &relevant, P_AT_K, R_AT_K)?))
        })
        .collect()
}

pub fn save_report(report: &EvalReport, path: impl AsRef<Path>) -> Result<(), ModelError> {
    write_atomically(path.as_ref(), |f| {
        serde_json::to_writer_pretty(&mut *f, report).map_err(std::io::Error::other)?;
        std::io::Write::write_all(f, b"\n")?;
        Ok(())
    })
}

pub fn load_report(path: impl AsRef<Path>) -> Result<EvalReport, ModelError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ModelError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| ModelError::parse(e.line(), e.to_string()))
}

impl EvalReport {
    pub fn from_parts(
        classification: ClassificationScores,
        koi: Option<KoiScores>,
        retrieval: BTreeMap<String, RetrievalScores>,
    ) -> Self {
        Self { per_category: classification.per_category, overall: classification.overall, koi, retrieval }
    }

    /// Metrics of one category, by name.
    pub fn category(&self, name: &str) -> Option<&Metrics> {
        ScenarioCategory::parse_name(name).ok().and_then(|c| self.per_category.get(&c))
    }
}
