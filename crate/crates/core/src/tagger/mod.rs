//! Rule-based activity and interaction tagging.
//!
//! [`tag_log`] turns a (preprocessed) log into the seven tag matrices. Ego and
//! object motion tags come from finite-difference kinematics; collision risk
//! from CTRV rollouts; trajectory overlap from the recorded future boxes.

mod ctrv;
mod geometry;
mod kinematics;
mod overlap;
mod rules;

use serde::{Deserialize, Serialize};

pub use ctrv::{ctrv_at, ctrv_predict, CtrvState, CTRV_STRAIGHT_CUTOFF};
pub use geometry::{box_distance, obb_intersects, sat_overlap, OrientedBox, CONTACT_EPS};
pub use kinematics::{derive_kinematics, KinematicsFrame};
pub use overlap::{envelopes_overlap, first_overlap_frame, tag_traj_overlap, window_frames};
pub use rules::{
    accumulated_turn, latitude_from_delta, risk_from_ttc, tag_collision, tag_distance, tag_heading,
    tag_latitude, tag_longitude, tag_position, time_to_collision, AgentState,
};

use crate::model::{ObjectState, TagMatrices, TrajectoryLog};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TaggerError {
    #[error("kinematics need at least 3 frames, got {0}")]
    TooFewFrames(usize),
    #[error("invalid tagger config: {0}")]
    InvalidConfig(String),
}

/// Thresholds for every tag rule. Durations in seconds, distances in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TaggerConfig {
    pub stand_speed: f64,
    pub accel_thresh: f64,
    pub decel_thresh: f64,
    pub turn_rad: f64,
    pub veer_rad: f64,
    pub turn_window: f64,
    pub ttc_low: f64,
    pub ttc_high: f64,
    pub dist_close: f64,
    pub dist_far: f64,
    pub dist_expand: f64,
    pub overlap_high_dt: f64,
    pub overlap_low_dt: f64,
    pub ctrv_horizon: f64,
    pub ctrv_step: f64,
}

impl Default for TaggerConfig {
    fn default() -> Self {
        Self {
            stand_speed: 0.5,
            accel_thresh: 0.5,
            decel_thresh: -0.5,
            turn_rad: 0.17,
            veer_rad: 0.05,
            turn_window: 1.0,
            ttc_low: 3.0,
            ttc_high: 1.5,
            dist_close: 10.0,
            dist_far: 50.0,
            dist_expand: 0.5,
            overlap_high_dt: 1.5,
            overlap_low_dt: 3.0,
            ctrv_horizon: 3.0,
            ctrv_step: 0.1,
        }
    }
}

impl TaggerConfig {
    pub fn validate(&self) -> Result<(), TaggerError> {
        let positive = [
            ("stand_speed", self.stand_speed),
            ("accel_thresh", self.accel_thresh),
            ("turn_rad", self.turn_rad),
            ("veer_rad", self.veer_rad),
            ("turn_window", self.turn_window),
            ("ttc_low", self.ttc_low),
            ("ttc_high", self.ttc_high),
            ("dist_close", self.dist_close),
            ("dist_far", self.dist_far),
            ("overlap_high_dt", self.overlap_high_dt),
            ("overlap_low_dt", self.overlap_low_dt),
            ("ctrv_horizon", self.ctrv_horizon),
            ("ctrv_step", self.ctrv_step),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(TaggerError::InvalidConfig(format!("{name} must be positive")));
            }
        }
        if !(self.decel_thresh < 0.0) || !(self.dist_expand >= 0.0) {
            return Err(TaggerError::InvalidConfig("decel_thresh < 0 and dist_expand >= 0 required".into()));
        }
        if self.veer_rad >= self.turn_rad {
            return Err(TaggerError::InvalidConfig("veer_rad must be below turn_rad".into()));
        }
        if self.ttc_high >= self.ttc_low {
            return Err(TaggerError::InvalidConfig("ttc_high must be below ttc_low".into()));
        }
        if self.overlap_high_dt >= self.overlap_low_dt {
            return Err(TaggerError::InvalidConfig("overlap_high_dt must be below overlap_low_dt".into()));
        }
        if self.dist_close > self.dist_far {
            return Err(TaggerError::InvalidConfig("dist_close must not exceed dist_far".into()));
        }
        Ok(())
    }
}

/// Per-frame view of one object: state and kinematics where observed.
struct TrackView<'a> {
    states: Vec<Option<&'a ObjectState>>,
    kin: Vec<Option<KinematicsFrame>>,
    /// Accumulated turn per frame, computed within the object's contiguous run.
    turn: Vec<Option<f64>>,
    boxes: Vec<Option<OrientedBox>>,
}

fn track_view<'a>(log: &'a TrajectoryLog, id: &str, cfg: &TaggerConfig) -> TrackView<'a> {
    let states = log.dense_track(id);
    let t = states.len();
    let mut kin = vec![None; t];
    let mut turn = vec![None; t];
    let mut i = 0;
    while i < t {
        if states[i].is_none() {
            i += 1;
            continue;
        }
        let start = i;
        while i < t && states[i].is_some() {
            i += 1;
        }
        let poses: Vec<_> = states[start..i].iter().map(|s| s.expect("observed run").pose).collect();
        let yaws: Vec<f64> = poses.iter().map(|p| p.yaw).collect();
        for (k, f) in kinematics::kinematics_any_len(&poses, log.rate_hz).into_iter().enumerate() {
            kin[start + k] = Some(f);
            turn[start + k] = Some(accumulated_turn(&yaws, k, log.rate_hz, cfg));
        }
    }
    let boxes = states
        .iter()
        .map(|s| s.map(|s| OrientedBox::from_pose(&s.pose, s.length, s.width)))
        .collect();
    TrackView { states, kin, turn, boxes }
}

/// Computes every tag matrix for `log`.
pub fn tag_log(log: &TrajectoryLog, cfg: &TaggerConfig) -> Result<TagMatrices, TaggerError> {
    cfg.validate()?;
    let frames = log.frames();
    let rate = log.rate_hz;
    let ego_kin = kinematics::kinematics_any_len(&log.ego, rate);
    let ego_yaws: Vec<f64> = log.ego.iter().map(|p| p.yaw).collect();
    let ego_boxes: Vec<OrientedBox> =
        log.ego.iter().map(|p| OrientedBox::from_pose(p, log.ego_length, log.ego_width)).collect();
    let lookahead = window_frames(cfg.overlap_high_dt, rate).max(window_frames(cfg.overlap_low_dt, rate));

    let track_ids: Vec<String> = log.objects.keys().cloned().collect();
    let n = track_ids.len();
    let mut m = TagMatrices {
        log_id: log.log_id.clone(),
        rate_hz: rate,
        frames,
        track_ids: track_ids.clone(),
        object_category: vec![vec![None; frames]; n],
        longitude: vec![vec![None; frames]; n + 1],
        latitude: vec![vec![None; frames]; n + 1],
        heading: vec![vec![None; frames]; n],
        position: vec![vec![None; frames]; n],
        collision: vec![vec![None; frames]; n],
        distance: vec![vec![None; frames]; n],
        traj_overlap: vec![vec![None; frames]; n],
    };

    for t in 0..frames {
        m.longitude[0][t] = Some(tag_longitude(&ego_kin[t], cfg));
        m.latitude[0][t] = Some(tag_latitude(&ego_yaws, t, rate, cfg));
    }

    for (row, id) in track_ids.iter().enumerate() {
        let view = track_view(log, id, cfg);
        for t in 0..frames {
            let (Some(state), Some(kin), Some(turn), Some(obj_box)) =
                (view.states[t], view.kin[t], view.turn[t], view.boxes[t])
            else {
                continue;
            };
            let ego_pose = &log.ego[t];
            let ego_state = AgentState::new(*ego_pose, ego_kin[t].speed, ego_kin[t].yaw_rate, log.ego_length, log.ego_width);
            let obj_state = AgentState::new(state.pose, kin.speed, kin.yaw_rate, state.length, state.width);
            let end = (t + lookahead + 1).min(frames);

            m.object_category[row][t] = Some(state.category.clone());
            m.longitude[row + 1][t] = Some(tag_longitude(&kin, cfg));
            m.latitude[row + 1][t] = Some(latitude_from_delta(turn, cfg));
            m.heading[row][t] = Some(tag_heading(ego_pose.yaw, state.pose.yaw));
            m.position[row][t] = Some(tag_position(ego_pose, (state.pose.x, state.pose.y)));
            m.distance[row][t] = Some(tag_distance(&ego_boxes[t], &obj_box, cfg));
            m.collision[row][t] = Some(tag_collision(&ego_state, &obj_state, cfg));
            m.traj_overlap[row][t] = Some(tag_traj_overlap(&ego_boxes[t..end], &view.boxes[t..end], rate, cfg));
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ObjectCategory, Pose2D, TrackSample};
    use std::collections::BTreeMap;

    fn base_log(frames: usize) -> TrajectoryLog {
        TrajectoryLog {
            log_id: "l".into(),
            rate_hz: 10.0,
            ego_length: 4.8,
            ego_width: 2.0,
            timestamps: (0..frames).map(|i| i as f64 * 0.1).collect(),
            ego: (0..frames).map(|i| Pose2D::new(i as f64, 0.0, 0.0)).collect(),
            objects: BTreeMap::new(),
        }
    }

    #[test]
    fn empty_objects_only_ego_rows() {
        let m = tag_log(&base_log(20), &TaggerConfig::default()).unwrap();
        assert_eq!(m.objects(), 0);
        assert_eq!(m.longitude.len(), 1);
        assert_eq!(m.latitude.len(), 1);
        assert!(m.heading.is_empty());
        m.validate().unwrap();
    }

    #[test]
    fn shapes_and_mask() {
        let mut log = base_log(30);
        let samples = [2usize, 3, 4, 10, 11]
            .iter()
            .map(|&i| TrackSample {
                index: i,
                state: ObjectState {
                    pose: Pose2D::new(20.0 + i as f64, 3.5, 0.0),
                    length: 4.5,
                    width: 1.9,
                    category: ObjectCategory::new("REGULAR_VEHICLE"),
                    track_id: "g".into(),
                },
            })
            .collect();
        log.objects.insert("g".into(), samples);
        let m = tag_log(&log, &TaggerConfig::default()).unwrap();
        m.validate().unwrap();
        assert!(m.mask_matches(&log));
        assert_eq!(m.longitude.len(), 2);
        assert!(m.longitude.iter().all(|r| r.len() == 30));
        assert_eq!(m.position[0][2], Some(crate::model::PositionTag::Front));
        assert_eq!(m.longitude[0][5], Some(crate::model::LongitudeTag::Cruising));
    }

    #[test]
    fn config_validation() {
        assert!(TaggerConfig::default().validate().is_ok());
        let bad = TaggerConfig { ttc_high: 3.0, ttc_low: 1.5, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = TaggerConfig { overlap_high_dt: 3.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
