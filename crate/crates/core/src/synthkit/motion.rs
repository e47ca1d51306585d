//! Trajectory primitives: piecewise constant-acceleration speed, line/arc paths
//! and a cosine lateral shift.

use std::f64::consts::PI;

use crate::model::angle::wrap_angle;
use crate::model::Pose2D;

/// Accelerate at `accel` from `start` until the speed reaches `target`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase {
    pub start: f64,
    pub accel: f64,
    pub target: f64,
}

/// Speed over time: constant `v0` until the first phase, then phase by phase.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedProfile {
    pub v0: f64,
    pub phases: Vec<Phase>,
}

impl SpeedProfile {
    pub fn constant(v0: f64) -> Self {
        Self { v0, phases: Vec::new() }
    }

    pub fn then(mut self, start: f64, accel: f64, target: f64) -> Self {
        self.phases.push(Phase { start, accel, target });
        self
    }

    /// Distance, speed and acceleration at `t`. Phases must be sorted by start.
    pub fn at(&self, t: f64) -> (f64, f64, f64) {
        let (mut s, mut v, mut t0) = (0.0, self.v0, 0.0);
        let mut current = None;
        for p in self.phases.iter().take_while(|p| p.start < t) {
            let (ds, v1, _) = advance(v, current, p.start - t0);
            s += ds;
            v = v1;
            t0 = p.start;
            current = Some(*p);
        }
        let (ds, v1, a) = advance(v, current, t - t0);
        (s + ds, v1, a)
    }
}

fn reached(v: f64, p: &Phase) -> bool {
    (p.accel >= 0.0 && v >= p.target) || (p.accel < 0.0 && v <= p.target)
}

/// Distance, end speed and the acceleration in force at the end of `dt`.
fn advance(v: f64, phase: Option<Phase>, dt: f64) -> (f64, f64, f64) {
    let Some(p) = phase.filter(|p| p.accel != 0.0 && !reached(v, p)) else {
        return (v * dt, v, 0.0);
    };
    let tau = (p.target - v) / p.accel;
    if dt < tau {
        (v * dt + 0.5 * p.accel * dt * dt, v + p.accel * dt, p.accel)
    } else {
        (v * tau + 0.5 * p.accel * tau * tau + p.target * (dt - tau), p.target, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    Line { length: f64 },
    /// Positive curvature turns left.
    Arc { length: f64, curvature: f64 },
}

/// A planar path parameterised by arc length, extended straight past both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub start: Pose2D,
    pub segments: Vec<Segment>,
}

impl Path {
    pub fn line(start: Pose2D) -> Self {
        Self { start, segments: Vec::new() }
    }

    pub fn then(mut self, seg: Segment) -> Self {
        self.segments.push(seg);
        self
    }

    pub fn at(&self, s: f64) -> Pose2D {
        let (mut x, mut y, mut yaw) = (self.start.x, self.start.y, self.start.yaw);
        if s <= 0.0 {
            return Pose2D::new(x + s * yaw.cos(), y + s * yaw.sin(), wrap_angle(yaw));
        }
        let mut left = s;
        for seg in &self.segments {
            let (len, k) = match *seg {
                Segment::Line { length } => (length, 0.0),
                Segment::Arc { length, curvature } => (length, curvature),
            };
            let d = left.min(len);
            if k == 0.0 {
                x += d * yaw.cos();
                y += d * yaw.sin();
            } else {
                let r = 1.0 / k;
                x += r * ((yaw + k * d).sin() - yaw.sin());
                y -= r * ((yaw + k * d).cos() - yaw.cos());
                yaw += k * d;
            }
            left -= d;
            if left <= 0.0 {
                return Pose2D::new(x, y, wrap_angle(yaw));
            }
        }
        Pose2D::new(x + left * yaw.cos(), y + left * yaw.sin(), wrap_angle(yaw))
    }
}

/// Lateral offset `shift·(1 − cos(π·τ/duration))/2` over `τ = t − start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaneChange {
    pub start: f64,
    pub duration: f64,
    /// Positive shifts to the left of the path.
    pub shift: f64,
}

impl LaneChange {
    /// Offset and its time derivative at `t`.
    pub fn at(&self, t: f64) -> (f64, f64) {
        let tau = t - self.start;
        if tau <= 0.0 {
            (0.0, 0.0)
        } else if tau >= self.duration {
            (self.shift, 0.0)
        } else {
            let w = PI / self.duration;
            (self.shift * (1.0 - (w * tau).cos()) / 2.0, self.shift * w * (w * tau).sin() / 2.0)
        }
    }
}

/// One actor's motion: a speed profile driven along a path, optionally in
/// reverse and with a lateral shift.
#[derive(Debug, Clone, PartialEq)]
pub struct Motion {
    pub path: Path,
    pub speed: SpeedProfile,
    pub lane_change: Option<LaneChange>,
    pub reverse: bool,
}

impl Motion {
    pub fn new(path: Path, speed: SpeedProfile) -> Self {
        Self { path, speed, lane_change: None, reverse: false }
    }

    pub fn with_lane_change(mut self, lc: LaneChange) -> Self {
        self.lane_change = Some(lc);
        self
    }

    pub fn reversing(mut self) -> Self {
        self.reverse = true;
        self
    }

    pub fn pose(&self, t: f64) -> Pose2D {
        let (s, v, _) = self.speed.at(t);
        let base = self.path.at(if self.reverse { -s } else { s });
        let Some(lc) = self.lane_change else {
            return base;
        };
        let (off, doff) = lc.at(t);
        let (sin, cos) = base.yaw.sin_cos();
        let yaw = if v > 1e-9 { base.yaw + doff.atan2(v) } else { base.yaw };
        Pose2D::new(base.x - off * sin, base.y + off * cos, wrap_angle(yaw))
    }

    /// Speed and longitudinal acceleration at `t`.
    pub fn speed_accel(&self, t: f64) -> (f64, f64) {
        let (_, v, a) = self.speed.at(t);
        (v, a)
    }
}
