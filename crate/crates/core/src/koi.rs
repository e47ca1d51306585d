//! Key-object identification: guests present while the ego brakes or waits
//! that also carry a collision or trajectory-overlap risk in the same frame.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{write_atomically, LongitudeTag, ModelError, RiskLevel, TagMatrices};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyPair {
    pub log_id: String,
    pub guest_id: String,
    /// Frames where the key-object condition held, strictly increasing.
    pub trigger_frames: Vec<usize>,
}

impl KeyPair {
    pub fn key(&self) -> (&str, &str) {
        (&self.log_id, &self.guest_id)
    }
}

fn ego_braking(tag: Option<LongitudeTag>) -> bool {
    matches!(tag, Some(LongitudeTag::Decelerating | LongitudeTag::StandingStill))
}

fn at_risk(tag: Option<RiskLevel>) -> bool {
    matches!(tag, Some(RiskLevel::Low | RiskLevel::High))
}

/// One [`KeyPair`] per qualifying guest, in track-id order.
pub fn identify_key_objects(tags: &TagMatrices) -> Vec<KeyPair> {
    let ego = &tags.longitude[0];
    tags.track_ids
        .iter()
        .enumerate()
        .filter_map(|(n, id)| {
            let trigger_frames: Vec<usize> = (0..tags.frames)
                .filter(|&t| ego_braking(ego[t]) && (at_risk(tags.collision[n][t]) || at_risk(tags.traj_overlap[n][t])))
                .collect();
            (!trigger_frames.is_empty()).then(|| KeyPair { log_id: tags.log_id.clone(), guest_id: id.clone(), trigger_frames })
        })
        .collect()
}

pub fn write_pairs<'a>(pairs: impl IntoIterator<Item = &'a KeyPair>, mut w: impl Write) -> Result<(), ModelError> {
    for p in pairs {
        serde_json::to_writer(&mut w, p).map_err(|e| ModelError::Write(e.into()))?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_pairs(reader: impl BufRead) -> Result<Vec<KeyPair>, ModelError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let p: KeyPair = serde_json::from_str(&line).map_err(|e| ModelError::parse(i + 1, e.to_string()))?;
        if p.trigger_frames.is_empty() || p.trigger_frames.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ModelError::validation("trigger_frames", "must be non-empty and strictly increasing"));
        }
        out.push(p);
    }
    Ok(out)
}

pub fn load_pairs(path: impl AsRef<Path>) -> Result<Vec<KeyPair>, ModelError> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| ModelError::io(path, e))?;
    parse_pairs(std::io::BufReader::new(f))
}

pub fn save_pairs(pairs: &[KeyPair], path: impl AsRef<Path>) -> Result<(), ModelError> {
    write_atomically(path.as_ref(), |f| write_pairs(pairs, f))
}
