use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::log::{ObjectCategory, TrajectoryLog};
use super::tags::{
    cell_from_str, cell_to_str, DistanceTag, HeadingTag, LatitudeTag, LongitudeTag, PositionTag,
    RiskLevel, TagName, ABSENT,
};
use super::{write_atomically, ModelError};

/// One matrix row; `None` marks a frame where the object is unobserved.
pub type TagRow<T> = Vec<Option<T>>;

/// Per-log output of rule-based tagging.
///
/// Object rows follow `track_ids`. `longitude` and `latitude` carry the ego
/// vehicle in row 0 and object `n` in row `n + 1`; every other matrix has
/// exactly one row per object.
#[derive(Debug, Clone, PartialEq)]
pub struct TagMatrices {
    pub log_id: String,
    pub rate_hz: f64,
    pub frames: usize,
    pub track_ids: Vec<String>,
    pub object_category: Vec<Vec<Option<ObjectCategory>>>,
    pub longitude: Vec<TagRow<LongitudeTag>>,
    pub latitude: Vec<TagRow<LatitudeTag>>,
    pub heading: Vec<TagRow<HeadingTag>>,
    pub position: Vec<TagRow<PositionTag>>,
    pub collision: Vec<TagRow<RiskLevel>>,
    pub distance: Vec<TagRow<DistanceTag>>,
    pub traj_overlap: Vec<TagRow<RiskLevel>>,
}

/// Tag values of one object at one frame, ego motion included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PairTags {
    pub ego_longitude: LongitudeTag,
    pub ego_latitude: LatitudeTag,
    pub guest_longitude: LongitudeTag,
    pub guest_latitude: LatitudeTag,
    pub heading: HeadingTag,
    pub position: PositionTag,
    pub collision: RiskLevel,
    pub distance: DistanceTag,
    pub traj_overlap: RiskLevel,
}

impl TagMatrices {
    pub fn objects(&self) -> usize {
        self.track_ids.len()
    }

    pub fn object_row(&self, track_id: &str) -> Option<usize> {
        self.track_ids.iter().position(|t| t == track_id)
    }

    pub fn is_observed(&self, n: usize, t: usize) -> bool {
        self.object_category[n][t].is_some()
    }

    /// Full tag tuple of object `n` at frame `t`, `None` when unobserved.
    pub fn pair_tags(&self, n: usize, t: usize) -> Option<PairTags> {
        Some(PairTags {
            ego_longitude: self.longitude[0][t]?,
            ego_latitude: self.latitude[0][t]?,
            guest_longitude: self.longitude[n + 1][t]?,
            guest_latitude: self.latitude[n + 1][t]?,
            heading: self.heading[n][t]?,
            position: self.position[n][t]?,
            collision: self.collision[n][t]?,
            distance: self.distance[n][t]?,
            traj_overlap: self.traj_overlap[n][t]?,
        })
    }

    /// Checks shapes, that ego rows are complete, and that every object's
    /// ABSENT cells line up across all matrices.
    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.objects();
        let t = self.frames;
        fn shape<R>(name: &str, rows: &[Vec<R>], want: usize, t: usize) -> Result<(), ModelError> {
            if rows.len() != want {
                return Err(ModelError::validation(name, format!("expected {want} rows, found {}", rows.len())));
            }
            if rows.iter().any(|r| r.len() != t) {
                return Err(ModelError::validation(name, format!("every row must have {t} cells")));
            }
            Ok(())
        }
        shape("object_category", &self.object_category, n, t)?;
        shape("longitude", &self.longitude, n + 1, t)?;
        shape("latitude", &self.latitude, n + 1, t)?;
        shape("heading", &self.heading, n, t)?;
        shape("position", &self.position, n, t)?;
        shape("collision", &self.collision, n, t)?;
        shape("distance", &self.distance, n, t)?;
        shape("traj_overlap", &self.traj_overlap, n, t)?;

        if self.longitude.first().is_some_and(|r| r.iter().any(Option::is_none))
            || self.latitude.first().is_some_and(|r| r.iter().any(Option::is_none))
        {
            return Err(ModelError::validation("longitude[0]", "ego rows must never be ABSENT"));
        }
        for row in 0..n {
            for col in 0..t {
                let seen = self.object_category[row][col].is_some();
                let all_match = self.longitude[row + 1][col].is_some() == seen
                    && self.latitude[row + 1][col].is_some() == seen
                    && self.heading[row][col].is_some() == seen
                    && self.position[row][col].is_some() == seen
                    && self.collision[row][col].is_some() == seen
                    && self.distance[row][col].is_some() == seen
                    && self.traj_overlap[row][col].is_some() == seen;
                if !all_match {
                    return Err(ModelError::validation(
                        format!("objects[{}]", self.track_ids[row]),
                        format!("inconsistent ABSENT mask at frame {col}"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// True when every object's ABSENT mask equals its observation mask in `log`.
    pub fn mask_matches(&self, log: &TrajectoryLog) -> bool {
        self.frames == log.frames()
            && self.track_ids.len() == log.objects.len()
            && self.track_ids.iter().enumerate().all(|(n, id)| {
                let mask = log.observed_mask(id);
                (0..self.frames).all(|t| self.is_observed(n, t) == mask[t])
            })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct TagsHeader {
    log_id: String,
    rate_hz: f64,
    frames: usize,
    track_ids: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TagsRow {
    matrix: String,
    row: usize,
    id: String,
    cells: Vec<String>,
}

const MATRIX_NAMES: [&str; 8] = [
    "object_category",
    "longitude",
    "latitude",
    "heading",
    "position",
    "collision",
    "distance",
    "traj_overlap",
];

fn rows_out<T: TagName>(name: &str, rows: &[TagRow<T>], ids: &[String], with_ego: bool) -> Vec<TagsRow> {
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            let id = match (with_ego, i) {
                (true, 0) => "ego".to_string(),
                (true, i) => ids[i - 1].clone(),
                (false, i) => ids[i].clone(),
            };
            TagsRow {
                matrix: name.to_string(),
                row: i,
                id,
                cells: r.iter().map(|c| cell_to_str(*c).to_string()).collect(),
            }
        })
        .collect()
}

/// Writes tag matrices as JSON Lines: a header, then one object per matrix row.
pub fn write_tags(m: &TagMatrices, mut w: impl Write) -> Result<(), ModelError> {
    let to_io = |e: serde_json::Error| std::io::Error::other(e);
    let header = TagsHeader {
        log_id: m.log_id.clone(),
        rate_hz: m.rate_hz,
        frames: m.frames,
        track_ids: m.track_ids.clone(),
    };
    serde_json::to_writer(&mut w, &header).map_err(to_io)?;
    w.write_all(b"\n")?;

    let mut rows: Vec<TagsRow> = m
        .object_category
        .iter()
        .enumerate()
        .map(|(i, r)| TagsRow {
            matrix: MATRIX_NAMES[0].to_string(),
            row: i,
            id: m.track_ids[i].clone(),
            cells: r
                .iter()
                .map(|c| c.as_ref().map_or(ABSENT, |c| c.as_str()).to_string())
                .collect(),
        })
        .collect();
    let ids = &m.track_ids;
    rows.extend(rows_out("longitude", &m.longitude, ids, true));
    rows.extend(rows_out("latitude", &m.latitude, ids, true));
    rows.extend(rows_out("heading", &m.heading, ids, false));
    rows.extend(rows_out("position", &m.position, ids, false));
    rows.extend(rows_out("collision", &m.collision, ids, false));
    rows.extend(rows_out("distance", &m.distance, ids, false));
    rows.extend(rows_out("traj_overlap", &m.traj_overlap, ids, false));
    for row in rows {
        serde_json::to_writer(&mut w, &row).map_err(to_io)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn parse_cells<T: TagName>(row: &TagsRow, lineno: usize) -> Result<TagRow<T>, ModelError> {
    row.cells
        .iter()
        .map(|c| cell_from_str::<T>(c).map_err(|e| ModelError::parse(lineno, e.to_string())))
        .collect()
}

fn place<T>(slot: &mut [Option<T>], row: usize, value: T, name: &str, lineno: usize) -> Result<(), ModelError> {
    let cell = slot
        .get_mut(row)
        .ok_or_else(|| ModelError::parse(lineno, format!("{name} row {row} out of range")))?;
    if cell.is_some() {
        return Err(ModelError::parse(lineno, format!("duplicate {name} row {row}")));
    }
    *cell = Some(value);
    Ok(())
}

pub fn parse_tags(reader: impl BufRead) -> Result<TagMatrices, ModelError> {
    let mut lines = reader.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(l) if l.trim().is_empty() => None,
        other => Some((i + 1, other)),
    });
    let (lineno, first) = lines.next().ok_or_else(|| ModelError::parse(1, "missing header line"))?;
    let first = first.map_err(|e| ModelError::parse(lineno, e.to_string()))?;
    let header: TagsHeader =
        serde_json::from_str(&first).map_err(|e| ModelError::parse(lineno, e.to_string()))?;
    let n = header.track_ids.len();

    let mut object_category = vec![None; n];
    let mut longitude = vec![None; n + 1];
    let mut latitude = vec![None; n + 1];
    let mut heading = vec![None; n];
    let mut position = vec![None; n];
    let mut collision = vec![None; n];
    let mut distance = vec![None; n];
    let mut traj_overlap = vec![None; n];

    for (lineno, line) in lines {
        let line = line.map_err(|e| ModelError::parse(lineno, e.to_string()))?;
        let row: TagsRow = serde_json::from_str(&line).map_err(|e| ModelError::parse(lineno, e.to_string()))?;
        let r = row.row;
        match row.matrix.as_str() {
            "object_category" => {
                let cells = row
                    .cells
                    .iter()
                    .map(|c| (c != ABSENT).then(|| ObjectCategory::new(c.clone())))
                    .collect();
                place(&mut object_category, r, cells, "object_category", lineno)?
            }
            "longitude" => place(&mut longitude, r, parse_cells(&row, lineno)?, "longitude", lineno)?,
            "latitude" => place(&mut latitude, r, parse_cells(&row, lineno)?, "latitude", lineno)?,
            "heading" => place(&mut heading, r, parse_cells(&row, lineno)?, "heading", lineno)?,
            "position" => place(&mut position, r, parse_cells(&row, lineno)?, "position", lineno)?,
            "collision" => place(&mut collision, r, parse_cells(&row, lineno)?, "collision", lineno)?,
            "distance" => place(&mut distance, r, parse_cells(&row, lineno)?, "distance", lineno)?,
            "traj_overlap" => place(&mut traj_overlap, r, parse_cells(&row, lineno)?, "traj_overlap", lineno)?,
            other => return Err(ModelError::parse(lineno, format!("unknown matrix {other:?}"))),
        }
    }

    fn complete<T>(rows: Vec<Option<T>>, name: &str) -> Result<Vec<T>, ModelError> {
        rows.into_iter()
            .enumerate()
            .map(|(i, r)| r.ok_or_else(|| ModelError::validation(name, format!("row {i} missing"))))
            .collect()
    }

    let m = TagMatrices {
        log_id: header.log_id,
        rate_hz: header.rate_hz,
        frames: header.frames,
        track_ids: header.track_ids,
        object_category: complete(object_category, "object_category")?,
        longitude: complete(longitude, "longitude")?,
        latitude: complete(latitude, "latitude")?,
        heading: complete(heading, "heading")?,
        position: complete(position, "position")?,
        collision: complete(collision, "collision")?,
        distance: complete(distance, "distance")?,
        traj_overlap: complete(traj_overlap, "traj_overlap")?,
    };
    m.validate()?;
    Ok(m)
}

pub fn load_tags(path: impl AsRef<Path>) -> Result<TagMatrices, ModelError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| ModelError::io(path, e))?;
    parse_tags(BufReader::new(file))
}

pub fn save_tags(m: &TagMatrices, path: impl AsRef<Path>) -> Result<(), ModelError> {
    m.validate()?;
    write_atomically(path.as_ref(), |w| write_tags(m, BufWriter::new(w)))
}
