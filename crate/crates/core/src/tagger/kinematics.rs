use serde::{Deserialize, Serialize};

use super::TaggerError;
use crate::model::angle::unwrap_angles;
use crate::model::Pose2D;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinematicsFrame {
    /// m/s, positive when moving along the body heading.
    pub speed: f64,
    /// m/s², derivative of `speed`.
    pub accel: f64,
    /// rad/s.
    pub yaw_rate: f64,
}

/// Second-order finite differences: central inside, one-sided three-point at
/// both ends. Exact for quadratics. Needs at least three samples.
fn differentiate(v: &[f64], dt: f64) -> Vec<f64> {
    let n = v.len();
    debug_assert!(n >= 3);
    (0..n)
        .map(|i| {
            if i == 0 {
                (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dt)
            } else if i == n - 1 {
                (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * dt)
            } else {
                (v[i + 1] - v[i - 1]) / (2.0 * dt)
            }
        })
        .collect()
}

pub fn derive_kinematics(poses: &[Pose2D], rate_hz: f64) -> Result<Vec<KinematicsFrame>, TaggerError> {
    if poses.len() < 3 {
        return Err(TaggerError::TooFewFrames(poses.len()));
    }
    let dt = 1.0 / rate_hz;
    let xs: Vec<f64> = poses.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = poses.iter().map(|p| p.y).collect();
    let yaws = unwrap_angles(&poses.iter().map(|p| p.yaw).collect::<Vec<_>>());
    let vx = differentiate(&xs, dt);
    let vy = differentiate(&ys, dt);
    let speed: Vec<f64> = poses
        .iter()
        .enumerate()
        .map(|(i, p)| vx[i] * p.yaw.cos() + vy[i] * p.yaw.sin())
        .collect();
    let accel = differentiate(&speed, dt);
    let yaw_rate = differentiate(&yaws, dt);
    Ok((0..poses.len())
        .map(|i| KinematicsFrame { speed: speed[i], accel: accel[i], yaw_rate: yaw_rate[i] })
        .collect())
}

/// Like [`derive_kinematics`] but total: two samples get a constant
/// first-order estimate and a single sample is treated as at rest.
pub(crate) fn kinematics_any_len(poses: &[Pose2D], rate_hz: f64) -> Vec<KinematicsFrame> {
    match poses.len() {
        0 => Vec::new(),
        1 => vec![KinematicsFrame { speed: 0.0, accel: 0.0, yaw_rate: 0.0 }],
        2 => {
            let (a, b) = (poses[0], poses[1]);
            let (vx, vy) = ((b.x - a.x) * rate_hz, (b.y - a.y) * rate_hz);
            let speed = vx * a.yaw.cos() + vy * a.yaw.sin();
            let yaw_rate = crate::model::angle::angle_diff(b.yaw, a.yaw) * rate_hz;
            vec![KinematicsFrame { speed, accel: 0.0, yaw_rate }; 2]
        }
        _ => derive_kinematics(poses, rate_hz).expect("length checked"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(f: impl Fn(f64) -> (f64, f64, f64), n: usize, rate: f64) -> Vec<Pose2D> {
        (0..n)
            .map(|i| {
                let (x, y, yaw) = f(i as f64 / rate);
                Pose2D::new(x, y, yaw)
            })
            .collect()
    }

    #[test]
    fn uniform_motion() {
        let k = derive_kinematics(&series(|t| (10.0 * t, 0.0, 0.0), 30, 10.0), 10.0).unwrap();
        assert!(k.iter().all(|f| (f.speed - 10.0).abs() < 1e-6 && f.accel.abs() < 1e-6));
    }

    #[test]
    fn stationary() {
        let k = derive_kinematics(&series(|_| (3.0, -1.0, 0.4), 10, 10.0), 10.0).unwrap();
        assert!(k.iter().all(|f| f.speed.abs() < 1e-12 && f.accel.abs() < 1e-12 && f.yaw_rate.abs() < 1e-12));
    }

    #[test]
    fn quadratic_motion_has_constant_accel() {
        let k = derive_kinematics(&series(|t| (t * t, 0.0, 0.0), 40, 10.0), 10.0).unwrap();
        for f in &k[1..k.len() - 1] {
            assert!((f.accel - 2.0).abs() < 1e-3, "{}", f.accel);
        }
    }

    #[test]
    fn reversing_is_negative_speed() {
        let k = derive_kinematics(&series(|t| (-2.0 * t, 0.0, 0.0), 10, 10.0), 10.0).unwrap();
        assert!(k.iter().all(|f| (f.speed + 2.0).abs() < 1e-9));
    }

    #[test]
    fn yaw_rate_across_seam() {
        let k = derive_kinematics(&series(|t| (0.0, 0.0, crate::model::angle::wrap_angle(3.0 + 0.5 * t)), 20, 10.0), 10.0)
            .unwrap();
        assert!(k.iter().all(|f| (f.yaw_rate - 0.5).abs() < 1e-9));
    }

    #[test]
    fn too_few_frames() {
        assert!(derive_kinematics(&series(|t| (t, 0.0, 0.0), 2, 10.0), 10.0).is_err());
        assert_eq!(kinematics_any_len(&series(|t| (t, 0.0, 0.0), 2, 10.0), 10.0).len(), 2);
    }
}
