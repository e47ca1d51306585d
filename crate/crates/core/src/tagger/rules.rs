//! Per-frame tag rules.

use std::f64::consts::FRAC_PI_4;

use super::ctrv::{ctrv_at, CtrvState};
use super::geometry::{box_distance, obb_intersects, OrientedBox};
use super::kinematics::KinematicsFrame;
use super::TaggerConfig;
use crate::model::angle::angle_diff;
use crate::model::{DistanceTag, HeadingTag, LatitudeTag, LongitudeTag, Pose2D, PositionTag, RiskLevel};

pub fn tag_longitude(k: &KinematicsFrame, cfg: &TaggerConfig) -> LongitudeTag {
    if k.speed.abs() < cfg.stand_speed {
        LongitudeTag::StandingStill
    } else if k.speed < -cfg.stand_speed {
        LongitudeTag::Reversing
    } else if k.accel > cfg.accel_thresh {
        LongitudeTag::Accelerating
    } else if k.accel < cfg.decel_thresh {
        LongitudeTag::Decelerating
    } else {
        LongitudeTag::Cruising
    }
}

/// Classifies an accumulated yaw change (left positive).
pub fn latitude_from_delta(delta: f64, cfg: &TaggerConfig) -> LatitudeTag {
    if delta > cfg.turn_rad {
        LatitudeTag::TurningLeft
    } else if delta > cfg.veer_rad {
        LatitudeTag::VeeringLeft
    } else if delta < -cfg.turn_rad {
        LatitudeTag::TurningRight
    } else if delta < -cfg.veer_rad {
        LatitudeTag::VeeringRight
    } else {
        LatitudeTag::FacingForward
    }
}

/// Yaw accumulated from frame `t` over `turn_window`, clamped at the series end.
pub fn accumulated_turn(yaws: &[f64], t: usize, rate_hz: f64, cfg: &TaggerConfig) -> f64 {
    let span = (cfg.turn_window * rate_hz).round() as usize;
    let end = (t + span).min(yaws.len().saturating_sub(1));
    (t..end).map(|k| angle_diff(yaws[k + 1], yaws[k])).sum()
}

pub fn tag_latitude(yaws: &[f64], t: usize, rate_hz: f64, cfg: &TaggerConfig) -> LatitudeTag {
    latitude_from_delta(accumulated_turn(yaws, t, rate_hz, cfg), cfg)
}

/// Four 90° sectors of the guest's heading relative to ego.
pub fn tag_heading(ego_yaw: f64, obj_yaw: f64) -> HeadingTag {
    let d = angle_diff(obj_yaw, ego_yaw);
    if d.abs() <= FRAC_PI_4 {
        HeadingTag::Same
    } else if d.abs() >= 3.0 * FRAC_PI_4 {
        HeadingTag::Opposite
    } else if d > 0.0 {
        HeadingTag::Left
    } else {
        HeadingTag::Right
    }
}

/// Eight 45° sectors centred on the compass directions of the ego body frame.
pub fn tag_position(ego: &Pose2D, obj_center: (f64, f64)) -> PositionTag {
    let (dx, dy) = (obj_center.0 - ego.x, obj_center.1 - ego.y);
    if dx == 0.0 && dy == 0.0 {
        return PositionTag::Front;
    }
    let (s, c) = ego.yaw.sin_cos();
    let (fwd, left) = (dx * c + dy * s, -dx * s + dy * c);
    let bearing = left.atan2(fwd);
    let sector = (bearing / FRAC_PI_4).round() as i64;
    match sector.rem_euclid(8) {
        0 => PositionTag::Front,
        1 => PositionTag::FrontLeft,
        2 => PositionTag::Left,
        3 => PositionTag::BackLeft,
        4 => PositionTag::Back,
        5 => PositionTag::BackRight,
        6 => PositionTag::Right,
        _ => PositionTag::FrontRight,
    }
}

pub fn tag_distance(ego: &OrientedBox, obj: &OrientedBox, cfg: &TaggerConfig) -> DistanceTag {
    if obb_intersects(&ego.expanded(cfg.dist_expand), &obj.expanded(cfg.dist_expand)) {
        return DistanceTag::VeryClose;
    }
    let d = box_distance(ego, obj);
    if d < cfg.dist_close {
        DistanceTag::Close
    } else if d <= cfg.dist_far {
        DistanceTag::Medium
    } else {
        DistanceTag::Far
    }
}

/// Motion state plus box extent, as needed for collision prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState {
    pub motion: CtrvState,
    pub length: f64,
    pub width: f64,
}

impl AgentState {
    pub fn new(pose: Pose2D, speed: f64, yaw_rate: f64, length: f64, width: f64) -> Self {
        Self { motion: CtrvState { pose, speed, yaw_rate }, length, width }
    }

    fn box_at(&self, t: f64) -> OrientedBox {
        OrientedBox::from_pose(&ctrv_at(&self.motion, t), self.length, self.width)
    }
}

/// Earliest rollout time at which the predicted boxes touch, if within the horizon.
pub fn time_to_collision(ego: &AgentState, obj: &AgentState, cfg: &TaggerConfig) -> Option<f64> {
    let steps = (cfg.ctrv_horizon / cfg.ctrv_step).round() as usize;
    (0..=steps)
        .map(|k| k as f64 * cfg.ctrv_step)
        .find(|&t| obb_intersects(&ego.box_at(t), &obj.box_at(t)))
}

pub fn risk_from_ttc(ttc: Option<f64>, cfg: &TaggerConfig) -> RiskLevel {
    match ttc {
        Some(t) if t < cfg.ttc_high => RiskLevel::High,
        Some(t) if t <= cfg.ttc_low => RiskLevel::Low,
        _ => RiskLevel::No,
    }
}

pub fn tag_collision(ego: &AgentState, obj: &AgentState, cfg: &TaggerConfig) -> RiskLevel {
    risk_from_ttc(time_to_collision(ego, obj, cfg), cfg)
}
