use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{write_atomically, ModelError};

pub const DEFAULT_RATE_HZ: f64 = 10.0;
pub const DEFAULT_EGO_LENGTH_M: f64 = 4.8;
pub const DEFAULT_EGO_WIDTH_M: f64 = 2.0;

/// Allowed deviation of each timestamp step from `1 / rate_hz`.
pub const TIMESTAMP_TOLERANCE_S: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    /// Radians, wrapped to `(-π, π]`.
    pub yaw: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, yaw: f64) -> Self {
        Self { x, y, yaw }
    }

    fn check(&self, field: impl Fn() -> String) -> Result<(), ModelError> {
        if !(self.x.is_finite() && self.y.is_finite()) {
            return Err(ModelError::validation(field(), "position must be finite"));
        }
        if !(self.yaw.is_finite() && self.yaw > -PI && self.yaw <= PI) {
            return Err(ModelError::validation(
                format!("{}.yaw", field()),
                format!("yaw {} outside (-pi, pi]", self.yaw),
            ));
        }
        Ok(())
    }
}

/// Perception category string as found in the source logs (e.g. `REGULAR_VEHICLE`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectCategory(pub String);

impl ObjectCategory {
    pub fn new(s: impl Into<String>) -> Self {
        Self(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_pedestrian(&self) -> bool {
        self.0.eq_ignore_ascii_case("PEDESTRIAN")
    }
}

impl std::fmt::Display for ObjectCategory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectState {
    pub pose: Pose2D,
    /// Longer planar box extent, meters.
    pub length: f64,
    /// Shorter planar box extent, meters.
    pub width: f64,
    pub category: ObjectCategory,
    pub track_id: String,
}

/// One observation of a tracked object at a frame index.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackSample {
    pub index: usize,
    pub state: ObjectState,
}

/// A single recording: ego pose series plus sparse per-object tracks.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub log_id: String,
    pub rate_hz: f64,
    pub ego_length: f64,
    pub ego_width: f64,
    pub timestamps: Vec<f64>,
    pub ego: Vec<Pose2D>,
    /// Keyed by track id; samples strictly increasing in `index`.
    pub objects: BTreeMap<String, Vec<TrackSample>>,
}

impl TrajectoryLog {
    pub fn frames(&self) -> usize {
        self.timestamps.len()
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.rate_hz
    }

    /// Observation mask of one track over all frames.
    pub fn observed_mask(&self, track_id: &str) -> Vec<bool> {
        let mut mask = vec![false; self.frames()];
        if let Some(samples) = self.objects.get(track_id) {
            for s in samples {
                mask[s.index] = true;
            }
        }
        mask
    }

    /// Dense per-frame view of one track, `None` where unobserved.
    pub fn dense_track(&self, track_id: &str) -> Vec<Option<&ObjectState>> {
        let mut out = vec![None; self.frames()];
        if let Some(samples) = self.objects.get(track_id) {
            for s in samples {
                out[s.index] = Some(&s.state);
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.log_id.is_empty() {
            return Err(ModelError::validation("log_id", "must be non-empty"));
        }
        if !(self.rate_hz.is_finite() && self.rate_hz > 0.0) {
            return Err(ModelError::validation("rate_hz", "must be positive"));
        }
        for (name, v) in [("ego_length_m", self.ego_length), ("ego_width_m", self.ego_width)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ModelError::validation(name, "must be positive"));
            }
        }
        if self.timestamps.is_empty() {
            return Err(ModelError::validation("timestamps", "log has no frames"));
        }
        if self.ego.len() != self.timestamps.len() {
            return Err(ModelError::validation("ego", "one ego pose per timestamp required"));
        }
        let step = 1.0 / self.rate_hz;
        for (i, w) in self.timestamps.windows(2).enumerate() {
            if !(w[0].is_finite() && w[1].is_finite()) || w[1] <= w[0] {
                return Err(ModelError::validation(
                    "timestamps",
                    format!("not strictly increasing at frame {}", i + 1),
                ));
            }
            if ((w[1] - w[0]) - step).abs() > TIMESTAMP_TOLERANCE_S {
                return Err(ModelError::validation(
                    "timestamps",
                    format!("spacing at frame {} deviates from 1/rate_hz", i + 1),
                ));
            }
        }
        for (i, p) in self.ego.iter().enumerate() {
            p.check(|| format!("ego[{i}]"))?;
        }
        let t = self.frames();
        for (id, samples) in &self.objects {
            if id.is_empty() {
                return Err(ModelError::validation("objects[].id", "track id must be non-empty"));
            }
            if samples.is_empty() {
                return Err(ModelError::validation(format!("objects[{id}]"), "track has no samples"));
            }
            let mut prev: Option<usize> = None;
            for s in samples {
                if s.index >= t {
                    return Err(ModelError::validation(
                        format!("objects[{id}].index"),
                        format!("index {} outside [0, {t})", s.index),
                    ));
                }
                if prev.is_some_and(|p| s.index <= p) {
                    return Err(ModelError::validation(
                        format!("objects[{id}].index"),
                        "indices must be strictly increasing",
                    ));
                }
                prev = Some(s.index);
                let st = &s.state;
                if st.track_id != *id {
                    return Err(ModelError::validation(
                        format!("objects[{id}].track_id"),
                        "state track id does not match its key",
                    ));
                }
                st.pose.check(|| format!("objects[{id}][{}]", s.index))?;
                if !(st.width.is_finite() && st.width > 0.0 && st.length >= st.width) {
                    return Err(ModelError::validation(
                        format!("objects[{id}][{}].length", s.index),
                        "requires length >= width > 0",
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct HeaderLine {
    log_id: String,
    rate_hz: f64,
    #[serde(default = "default_ego_length")]
    ego_length_m: f64,
    #[serde(default = "default_ego_width")]
    ego_width_m: f64,
}

fn default_ego_length() -> f64 {
    DEFAULT_EGO_LENGTH_M
}

fn default_ego_width() -> f64 {
    DEFAULT_EGO_WIDTH_M
}

#[derive(Debug, Serialize, Deserialize)]
struct FrameLine {
    t: f64,
    ego: Pose2D,
    #[serde(default)]
    objects: Vec<ObjectLine>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ObjectLine {
    id: String,
    x: f64,
    y: f64,
    yaw: f64,
    length: f64,
    width: f64,
    category: ObjectCategory,
}

/// Parses a log from JSON Lines text.
pub fn parse_log(reader: impl BufRead) -> Result<TrajectoryLog, ModelError> {
    let mut header: Option<HeaderLine> = None;
    let mut timestamps = Vec::new();
    let mut ego = Vec::new();
    let mut objects: BTreeMap<String, Vec<TrackSample>> = BTreeMap::new();

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| ModelError::parse(lineno, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        if header.is_none() {
            let h: HeaderLine =
                serde_json::from_str(&line).map_err(|e| ModelError::parse(lineno, e.to_string()))?;
            header = Some(h);
            continue;
        }
        let frame: FrameLine =
            serde_json::from_str(&line).map_err(|e| ModelError::parse(lineno, e.to_string()))?;
        let index = timestamps.len();
        timestamps.push(frame.t);
        ego.push(frame.ego);
        for o in frame.objects {
            let samples = objects.entry(o.id.clone()).or_default();
            if samples.last().is_some_and(|s| s.index == index) {
                return Err(ModelError::validation(
                    format!("objects[{}].index", o.id),
                    format!("duplicate observation at line {lineno}"),
                ));
            }
            samples.push(TrackSample {
                index,
                state: ObjectState {
                    pose: Pose2D::new(o.x, o.y, o.yaw),
                    length: o.length,
                    width: o.width,
                    category: o.category,
                    track_id: o.id,
                },
            });
        }
    }

    let header = header.ok_or_else(|| ModelError::parse(1, "missing header line"))?;
    let log = TrajectoryLog {
        log_id: header.log_id,
        rate_hz: header.rate_hz,
        ego_length: header.ego_length_m,
        ego_width: header.ego_width_m,
        timestamps,
        ego,
        objects,
    };
    log.validate()?;
    Ok(log)
}

pub fn load_log(path: impl AsRef<Path>) -> Result<TrajectoryLog, ModelError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| ModelError::io(path, e))?;
    parse_log(BufReader::new(file))
}

/// Writes the JSON Lines representation of a log.
pub fn write_log(log: &TrajectoryLog, mut w: impl Write) -> Result<(), ModelError> {
    let header = HeaderLine {
        log_id: log.log_id.clone(),
        rate_hz: log.rate_hz,
        ego_length_m: log.ego_length,
        ego_width_m: log.ego_width,
    };
    let to_io = |e: serde_json::Error| std::io::Error::other(e);
    serde_json::to_writer(&mut w, &header).map_err(to_io)?;
    w.write_all(b"\n")?;

    let mut per_frame: Vec<Vec<&ObjectState>> = vec![Vec::new(); log.frames()];
    for samples in log.objects.values() {
        for s in samples {
            per_frame[s.index].push(&s.state);
        }
    }
    for (i, states) in per_frame.into_iter().enumerate() {
        let frame = FrameLine {
            t: log.timestamps[i],
            ego: log.ego[i],
            objects: states
                .into_iter()
                .map(|s| ObjectLine {
                    id: s.track_id.clone(),
                    x: s.pose.x,
                    y: s.pose.y,
                    yaw: s.pose.yaw,
                    length: s.length,
                    width: s.width,
                    category: s.category.clone(),
                })
                .collect(),
        };
        serde_json::to_writer(&mut w, &frame).map_err(to_io)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_log(log: &TrajectoryLog, path: impl AsRef<Path>) -> Result<(), ModelError> {
    log.validate()?;
    write_atomically(path.as_ref(), |w| write_log(log, BufWriter::new(w)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(id: &str, x: f64) -> ObjectState {
        ObjectState {
            pose: Pose2D::new(x, 1.0, 0.25),
            length: 4.5,
            width: 1.9,
            category: ObjectCategory::new("REGULAR_VEHICLE"),
            track_id: id.into(),
        }
    }

    fn sample_log(frames: usize) -> TrajectoryLog {
        let mut objects = BTreeMap::new();
        objects.insert(
            "a".to_string(),
            vec![
                TrackSample { index: 1, state: state("a", 3.0) },
                TrackSample { index: 3, state: state("a", 4.1) },
            ],
        );
        TrajectoryLog {
            log_id: "log-1".into(),
            rate_hz: 10.0,
            ego_length: DEFAULT_EGO_LENGTH_M,
            ego_width: DEFAULT_EGO_WIDTH_M,
            timestamps: (0..frames).map(|i| 100.0 + i as f64 * 0.1).collect(),
            ego: (0..frames).map(|i| Pose2D::new(i as f64 * 0.7, 0.0, 0.0)).collect(),
            objects,
        }
    }

    fn roundtrip(log: &TrajectoryLog) -> TrajectoryLog {
        let mut buf = Vec::new();
        write_log(log, &mut buf).unwrap();
        parse_log(buf.as_slice()).unwrap()
    }

    #[test]
    fn roundtrip_sparse_object() {
        let log = sample_log(100);
        assert_eq!(roundtrip(&log), log);
    }

    #[test]
    fn roundtrip_without_objects() {
        let mut log = sample_log(5);
        log.objects.clear();
        assert_eq!(roundtrip(&log), log);
    }

    #[test]
    fn header_defaults_ego_extent() {
        let text = "{\"log_id\":\"x\",\"rate_hz\":10}\n{\"t\":0,\"ego\":{\"x\":0,\"y\":0,\"yaw\":0}}\n";
        let log = parse_log(text.as_bytes()).unwrap();
        assert_eq!(log.ego_length, 4.8);
        assert_eq!(log.ego_width, 2.0);
        assert_eq!(log.frames(), 1);
    }

    #[test]
    fn decreasing_timestamps_rejected() {
        let mut log = sample_log(5);
        log.timestamps.swap(2, 3);
        let err = log.validate().unwrap_err();
        assert_eq!(err.field(), Some("timestamps"));
    }

    #[test]
    fn uneven_spacing_rejected() {
        let mut log = sample_log(5);
        log.timestamps[4] += 1e-3;
        assert_eq!(log.validate().unwrap_err().field(), Some("timestamps"));
    }

    #[test]
    fn index_out_of_range_rejected() {
        let mut log = sample_log(3);
        log.objects.get_mut("a").unwrap()[1].index = 3;
        let err = log.validate().unwrap_err();
        assert_eq!(err.field(), Some("objects[a].index"));
    }

    #[test]
    fn malformed_line_reports_number() {
        let text = "{\"log_id\":\"x\",\"rate_hz\":10}\n{\"t\":0,\"ego\":{\"x\":0,\"y\":0,\"yaw\":0}}\nnot json\n";
        match parse_log(text.as_bytes()).unwrap_err() {
            ModelError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn yaw_outside_range_rejected() {
        let mut log = sample_log(3);
        log.ego[1].yaw = 3.5;
        assert_eq!(log.validate().unwrap_err().field(), Some("ego[1].yaw"));
    }
}
