//! Scenario database with category lookup and flat cosine-similarity search.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use crate::llm_gateway::{Gateway, GatewayError};
use crate::model::{load_records, save_records, ModelError, ScenarioCategory, ScenarioRecord};

/// Allowed deviation of a stored embedding's norm from 1.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("record ({log_id}, {guest_id}) already exists")]
    Conflict { log_id: String, guest_id: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("embedding has dimension {got}, database uses {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("embedding of ({log_id}, {guest_id}) is not unit-norm")]
    NotUnitNorm { log_id: String, guest_id: String },
    #[error("k must be at least 1")]
    InvalidK,
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedResult<'a> {
    pub record: &'a ScenarioRecord,
    pub score: f64,
}

/// Orders by score descending, then key ascending.
pub fn ranking_order(a: &RankedResult<'_>, b: &RankedResult<'_>) -> Ordering {
    b.score.total_cmp(&a.score).then_with(|| a.record.key().cmp(&b.record.key()))
}

#[derive(Debug, Clone, Default)]
pub struct ScenarioDb {
    records: Vec<ScenarioRecord>,
    by_key: HashMap<(String, String), usize>,
    by_category: BTreeMap<ScenarioCategory, Vec<usize>>,
    dim: Option<usize>,
}

impl ScenarioDb {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_records(records: impl IntoIterator<Item = ScenarioRecord>) -> Result<Self, StoreError> {
        let mut db = Self::new();
        for r in records {
            db.insert(r)?;
        }
        Ok(db)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        Self::from_records(load_records(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), StoreError> {
        Ok(save_records(&self.records, path)?)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    /// Records in insertion order.
    pub fn records(&self) -> &[ScenarioRecord] {
        &self.records
    }

    pub fn get(&self, log_id: &str, guest_id: &str) -> Option<&ScenarioRecord> {
        self.by_key.get(&(log_id.to_string(), guest_id.to_string())).map(|&i| &self.records[i])
    }

    pub fn insert(&mut self, record: ScenarioRecord) -> Result<(), StoreError> {
        record.validate()?;
        let got = record.embedding.len();
        if let Some(expected) = self.dim.filter(|&d| d != got) {
            return Err(StoreError::Dimension { expected, got });
        }
        let norm = record.embedding.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_NORM_TOLERANCE {
            return Err(StoreError::NotUnitNorm { log_id: record.log_id, guest_id: record.guest_id });
        }
        let key = (record.log_id.clone(), record.guest_id.clone());
        if self.by_key.contains_key(&key) {
            return Err(StoreError::Conflict { log_id: key.0, guest_id: key.1 });
        }
        let idx = self.records.len();
        self.dim = Some(got);
        self.by_key.insert(key, idx);
        self.by_category.entry(record.category).or_default().push(idx);
        self.records.push(record);
        Ok(())
    }

    /// Records labelled `category`, in insertion order.
    pub fn retrieve_by_category(&self, category: ScenarioCategory) -> Vec<&ScenarioRecord> {
        self.by_category.get(&category).map_or_else(Vec::new, |ix| ix.iter().map(|&i| &self.records[i]).collect())
    }

    /// Top `k` records by dot product with the unit vector `query`.
    pub fn rank(&self, query: &[f64], k: usize) -> Result<Vec<RankedResult<'_>>, StoreError> {
        if k == 0 {
            return Err(StoreError::InvalidK);
        }
        if let Some(expected) = self.dim.filter(|&d| d != query.len()) {
            return Err(StoreError::Dimension { expected, got: query.len() });
        }
        let mut scored: Vec<RankedResult<'_>> = self
            .records
            .iter()
            .map(|r| RankedResult {
                record: r,
                score: r.embedding.iter().zip(query).map(|(a, b)| a * b).sum::<f64>().clamp(-1.0, 1.0),
            })
            .collect();
        scored.sort_by(ranking_order);
        scored.truncate(k);
        Ok(scored)
    }

    pub fn retrieve_by_similarity(&self, query: &str, k: usize, gateway: &Gateway) -> Result<Vec<RankedResult<'_>>, StoreError> {
        if k == 0 {
            return Err(StoreError::InvalidK);
        }
        self.rank(&gateway.embed(query)?, k)
    }
}
