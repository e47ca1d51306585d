//! Structured text descriptions of one ego–guest interaction.
//!
//! Frames with an identical tag tuple are merged into timed segments. The text
//! opens with an overview, lists every tag for the first segment, then emits
//! one line per tag that changes at each later segment.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{write_atomically, ModelError, ObjectCategory, PairTags, TagMatrices, TagName};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DescribeError {
    #[error("empty_pair: guest {0:?} is never observed")]
    EmptyPair(String),
    #[error("unknown guest {0:?}")]
    UnknownGuest(String),
}

/// A maximal run of frames sharing one tag tuple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    /// Seconds from the first frame of the pair.
    pub start_s: f64,
    pub duration_s: f64,
    pub tags: PairTags,
}

/// Subject and tag-type label of each tuple field, in rendering order.
pub const FIELD_LABELS: [(&str, &str); 9] = [
    ("ego", "LongitudeTag"),
    ("ego", "LatitudeTag"),
    ("guest", "LongitudeTag"),
    ("guest", "LatitudeTag"),
    ("guest", "HeadingTag"),
    ("guest", "PositionTag"),
    ("pair", "CollisionTag"),
    ("pair", "DistanceTag"),
    ("pair", "TrajOverlapTag"),
];

/// Tag values of `t` as strings, in [`FIELD_LABELS`] order.
pub fn field_values(t: &PairTags) -> [&'static str; 9] {
    [
        t.ego_longitude.as_str(),
        t.ego_latitude.as_str(),
        t.guest_longitude.as_str(),
        t.guest_latitude.as_str(),
        t.heading.as_str(),
        t.position.as_str(),
        t.collision.as_str(),
        t.distance.as_str(),
        t.traj_overlap.as_str(),
    ]
}

pub fn run_length_encode(tuples: &[PairTags], rate_hz: f64) -> Result<Vec<Segment>, DescribeError> {
    if tuples.is_empty() {
        return Err(DescribeError::EmptyPair(String::new()));
    }
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=tuples.len() {
        if i == tuples.len() || tuples[i] != tuples[start] {
            out.push(Segment {
                start_s: start as f64 / rate_hz,
                duration_s: (i - start) as f64 / rate_hz,
                tags: tuples[start],
            });
            start = i;
        }
    }
    Ok(out)
}

pub fn run_length_decode(segments: &[Segment], rate_hz: f64) -> Vec<PairTags> {
    segments
        .iter()
        .flat_map(|s| std::iter::repeat_n(s.tags, (s.duration_s * rate_hz).round() as usize))
        .collect()
}

/// Display name of a guest: category plus the first eight characters of its id.
pub fn guest_label(category: &ObjectCategory, guest_id: &str) -> String {
    let short: String = guest_id.chars().take(8).collect();
    format!("{} {}", category.as_str(), short)
}

/// Renders the description. Durations and times carry one decimal.
pub fn compose_description(segments: &[Segment], guest_category: &ObjectCategory, guest_id: &str) -> String {
    let total: f64 = segments.iter().map(|s| s.duration_s).sum();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Overview: the ego vehicle and {} interact for {:.1} s.",
        guest_label(guest_category, guest_id),
        total
    );
    let Some(first) = segments.first() else {
        return out;
    };
    let _ = writeln!(out, "Initial state for {:.1} s:", first.duration_s);
    for ((subject, kind), value) in FIELD_LABELS.iter().zip(field_values(&first.tags)) {
        let _ = writeln!(out, "- {subject} {kind}: {value}");
    }
    for pair in segments.windows(2) {
        let (prev, cur) = (field_values(&pair[0].tags), field_values(&pair[1].tags));
        for (i, (subject, kind)) in FIELD_LABELS.iter().enumerate() {
            if prev[i] != cur[i] {
                let _ = writeln!(
                    out,
                    "At {:.1} s for {:.1} s: {subject} {kind} changes from {} to {}.",
                    pair[1].start_s, pair[1].duration_s, prev[i], cur[i]
                );
            }
        }
    }
    out
}

/// Output of the describe stage for one key pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescriptionRecord {
    pub log_id: String,
    pub guest_id: String,
    pub guest_category: String,
    pub description: String,
}

impl DescriptionRecord {
    pub fn key(&self) -> (&str, &str) {
        (&self.log_id, &self.guest_id)
    }
}

/// Describes guest `guest_id` over the frames where it is observed.
pub fn describe_pair(tags: &TagMatrices, guest_id: &str) -> Result<DescriptionRecord, DescribeError> {
    let n = tags.object_row(guest_id).ok_or_else(|| DescribeError::UnknownGuest(guest_id.to_string()))?;
    let observed: Vec<usize> = (0..tags.frames).filter(|&t| tags.is_observed(n, t)).collect();
    let first = *observed.first().ok_or_else(|| DescribeError::EmptyPair(guest_id.to_string()))?;
    let category = tags.object_category[n][first].clone().expect("observed frame has a category");
    let tuples: Vec<PairTags> =
        observed.iter().map(|&t| tags.pair_tags(n, t).expect("observed frame has every tag")).collect();
    let segments = run_length_encode(&tuples, tags.rate_hz)?;
    Ok(DescriptionRecord {
        log_id: tags.log_id.clone(),
        guest_id: guest_id.to_string(),
        guest_category: category.as_str().to_string(),
        description: compose_description(&segments, &category, guest_id),
    })
}

pub fn write_descriptions<'a>(
    records: impl IntoIterator<Item = &'a DescriptionRecord>,
    mut w: impl Write,
) -> Result<(), ModelError> {
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(|e| ModelError::Write(e.into()))?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_descriptions(reader: impl BufRead) -> Result<Vec<DescriptionRecord>, ModelError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line).map_err(|e| ModelError::parse(i + 1, e.to_string()))?);
        }
    }
    Ok(out)
}

pub fn load_descriptions(path: impl AsRef<Path>) -> Result<Vec<DescriptionRecord>, ModelError> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| ModelError::io(path, e))?;
    parse_descriptions(std::io::BufReader::new(f))
}

pub fn save_descriptions(records: &[DescriptionRecord], path: impl AsRef<Path>) -> Result<(), ModelError> {
    write_atomically(path.as_ref(), |f| write_descriptions(records, f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DistanceTag, HeadingTag, LatitudeTag, LongitudeTag, PositionTag, RiskLevel};

    fn base() -> PairTags {
        PairTags {
            ego_longitude: LongitudeTag::Cruising,
            ego_latitude: LatitudeTag::FacingForward,
            guest_longitude: LongitudeTag::Cruising,
            guest_latitude: LatitudeTag::FacingForward,
            heading: HeadingTag::Same,
            position: PositionTag::Front,
            collision: RiskLevel::No,
            distance: DistanceTag::Medium,
            traj_overlap: RiskLevel::No,
        }
    }

    fn close() -> PairTags {
        PairTags { distance: DistanceTag::Close, ..base() }
    }

    #[test]
    fn merges_runs() {
        let segs = run_length_encode(&[base(), base(), close()], 10.0).unwrap();
        assert_eq!(segs.len(), 2);
        assert!((segs[0].duration_s - 0.2).abs() < 1e-12 && (segs[1].duration_s - 0.1).abs() < 1e-12);
        assert_eq!(run_length_encode(&vec![base(); 100], 10.0).unwrap().len(), 1);
        assert_eq!(run_length_encode(&[base(), close(), base(), close()], 10.0).unwrap().len(), 4);
        assert!(matches!(run_length_encode(&[], 10.0), Err(DescribeError::EmptyPair(_))));
    }

    #[test]
    fn decode_inverts_encode() {
        let seq = vec![base(), base(), close(), base(), close(), close(), close()];
        assert_eq!(run_length_decode(&run_length_encode(&seq, 10.0).unwrap(), 10.0), seq);
    }

    #[test]
    fn single_segment_has_no_change_lines() {
        let segs = run_length_encode(&vec![base(); 30], 10.0).unwrap();
        let text = compose_description(&segs, &ObjectCategory::new("REGULAR_VEHICLE"), "0123456789abcdef");
        assert!(text.starts_with("Overview: the ego vehicle and REGULAR_VEHICLE 01234567 interact for 3.0 s.\n"));
        assert_eq!(text.lines().count(), 11);
        assert!(!text.contains("changes"));
    }

    #[test]
    fn only_changed_tags_are_listed() {
        let segs = run_length_encode(&[base(), base(), close()], 10.0).unwrap();
        let text = compose_description(&segs, &ObjectCategory::new("BUS"), "g");
        let changes: Vec<_> = text.lines().filter(|l| l.contains("changes")).collect();
        assert_eq!(changes, ["At 0.2 s for 0.1 s: pair DistanceTag changes from MEDIUM to CLOSE."]);
        assert_eq!(text, compose_description(&segs, &ObjectCategory::new("BUS"), "g"));
    }
}
