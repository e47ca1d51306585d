//! Constant turn rate and velocity (CTRV) rollout.

use serde::{Deserialize, Serialize};

use crate::model::angle::wrap_angle;
use crate::model::Pose2D;

/// Below this |yaw rate| (rad/s) the rollout uses the series expansion of the
/// closed form, which reduces to straight-line motion at zero turn rate.
pub const CTRV_STRAIGHT_CUTOFF: f64 = 1e-4;

/// Turn angles below this also use the series, which is exact to double
/// precision there and avoids `0/0` at the start of the rollout.
const SMALL_TURN_RAD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CtrvState {
    pub pose: Pose2D,
    pub speed: f64,
    pub yaw_rate: f64,
}

/// `sin(φ)/φ` and `(1 - cos φ)/φ`, with Taylor series for small `φ`.
fn arc_factors(phi: f64, small: bool) -> (f64, f64) {
    if small {
        let p2 = phi * phi;
        let s = 1.0 - p2 / 6.0 + p2 * p2 / 120.0;
        let c = phi / 2.0 - phi * p2 / 24.0 + phi * p2 * p2 / 720.0;
        (s, c)
    } else {
        (phi.sin() / phi, (1.0 - phi.cos()) / phi)
    }
}

/// Closed-form pose after `t` seconds.
pub fn ctrv_at(state: &CtrvState, t: f64) -> Pose2D {
    let p = state.pose;
    let phi = state.yaw_rate * t;
    let (s, c) = arc_factors(phi, state.yaw_rate.abs() < CTRV_STRAIGHT_CUTOFF || phi.abs() < SMALL_TURN_RAD);
    let (sin0, cos0) = p.yaw.sin_cos();
    let d = state.speed * t;
    Pose2D::new(
        p.x + d * (cos0 * s - sin0 * c),
        p.y + d * (sin0 * s + cos0 * c),
        wrap_angle(p.yaw + phi),
    )
}

/// Poses at `0, step, 2·step, …` up to `horizon` inclusive.
pub fn ctrv_predict(state: &CtrvState, horizon: f64, step: f64) -> Vec<Pose2D> {
    let n = (horizon / step).round() as usize;
    (0..=n).map(|k| ctrv_at(state, k as f64 * step)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn straight_line_limit() {
        let s = CtrvState { pose: Pose2D::new(1.0, 2.0, 0.0), speed: 10.0, yaw_rate: 0.0 };
        let path = ctrv_predict(&s, 3.0, 0.1);
        assert_eq!(path.len(), 31);
        let last = path.last().unwrap();
        assert!((last.x - 31.0).abs() < 1e-12 && (last.y - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_time_is_identity_while_turning() {
        let s = CtrvState { pose: Pose2D::new(3.0, -1.0, 0.4), speed: 9.0, yaw_rate: -0.04 };
        assert_eq!(ctrv_at(&s, 0.0), s.pose);
        let p = ctrv_at(&s, 1e-6);
        assert!(p.x.is_finite() && (p.x - 3.0).abs() < 1e-4);
    }

    #[test]
    fn quarter_circle() {
        let (v, w) = (5.0, 0.5);
        let s = CtrvState { pose: Pose2D::new(0.0, 0.0, 0.0), speed: v, yaw_rate: w };
        let p = ctrv_at(&s, FRAC_PI_2 / w);
        let r = v / w;
        assert!((p.x - r).abs() < 1e-9 && (p.y - r).abs() < 1e-9);
        assert!((p.yaw - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn stationary() {
        let s = CtrvState { pose: Pose2D::new(4.0, 4.0, 1.0), speed: 0.0, yaw_rate: 0.3 };
        let p = ctrv_at(&s, 3.0);
        assert_eq!((p.x, p.y), (4.0, 4.0));
    }

    #[test]
    fn continuous_across_cutoff() {
        let mk = |w| CtrvState { pose: Pose2D::new(0.0, 0.0, 0.7), speed: 20.0, yaw_rate: w };
        let below = ctrv_at(&mk(CTRV_STRAIGHT_CUTOFF * (1.0 - 1e-9)), 3.0);
        let above = ctrv_at(&mk(CTRV_STRAIGHT_CUTOFF), 3.0);
        assert!((below.x - above.x).abs() < 1e-9 && (below.y - above.y).abs() < 1e-9);
    }
}
