use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::tags::{ScenarioCategory, TagName as _};
use super::{write_atomically, ModelError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub llm_model: String,
    pub embed_model: String,
}

/// One classified ego–guest pair as stored in the scenario database.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRecord {
    pub log_id: String,
    pub guest_id: String,
    pub raw_description: String,
    pub rephrased_description: String,
    pub category: ScenarioCategory,
    pub explanation: String,
    pub embedding: Vec<f64>,
    pub provenance: Provenance,
}

impl ScenarioRecord {
    pub fn key(&self) -> (&str, &str) {
        (&self.log_id, &self.guest_id)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.log_id.is_empty() || self.guest_id.is_empty() {
            return Err(ModelError::validation("log_id/guest_id", "must be non-empty"));
        }
        if self.embedding.is_empty() || self.embedding.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::validation("embedding", "must be non-empty and finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Annotation {
    pub log_id: String,
    pub guest_id: String,
    pub scenario_category: ScenarioCategory,
}

pub fn write_records<'a>(
    records: impl IntoIterator<Item = &'a ScenarioRecord>,
    mut w: impl Write,
) -> Result<(), ModelError> {
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(std::io::Error::other)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_records(reader: impl BufRead) -> Result<Vec<ScenarioRecord>, ModelError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| ModelError::parse(i + 1, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: ScenarioRecord =
            serde_json::from_str(&line).map_err(|e| ModelError::parse(i + 1, e.to_string()))?;
        rec.validate()?;
        out.push(rec);
    }
    Ok(out)
}

pub fn load_records(path: impl AsRef<Path>) -> Result<Vec<ScenarioRecord>, ModelError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| ModelError::io(path, e))?;
    parse_records(BufReader::new(file))
}

pub fn save_records(records: &[ScenarioRecord], path: impl AsRef<Path>) -> Result<(), ModelError> {
    write_atomically(path.as_ref(), |w| write_records(records, BufWriter::new(w)))
}

/// Reads the `log_id,guest_id,scenario_category` CSV, rejecting duplicate keys.
pub fn parse_annotations(reader: impl Read) -> Result<Vec<Annotation>, ModelError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers().map_err(|e| ModelError::parse(1, e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["log_id", "guest_id", "scenario_category"] {
        return Err(ModelError::parse(1, "header must be log_id,guest_id,scenario_category"));
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<Annotation>().enumerate() {
        let line = i + 2;
        let a = row.map_err(|e| ModelError::parse(line, e.to_string()))?;
        if !seen.insert((a.log_id.clone(), a.guest_id.clone())) {
            return Err(ModelError::validation(
                "annotations",
                format!("duplicate key ({}, {}) at line {line}", a.log_id, a.guest_id),
            ));
        }
        out.push(a);
    }
    Ok(out)
}

pub fn load_annotations(path: impl AsRef<Path>) -> Result<Vec<Annotation>, ModelError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| ModelError::io(path, e))?;
    parse_annotations(file)
}

pub fn write_annotations<'a>(
    annotations: impl IntoIterator<Item = &'a Annotation>,
    w: impl Write,
) -> Result<(), ModelError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["log_id", "guest_id", "scenario_category"])
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    for a in annotations {
        wtr.write_record([a.log_id.as_str(), a.guest_id.as_str(), a.scenario_category.as_str()])
            .map_err(|e| std::io::Error::other(e.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn save_annotations(annotations: &[Annotation], path: impl AsRef<Path>) -> Result<(), ModelError> {
    write_atomically(path.as_ref(), |w| write_annotations(annotations, w))
}
