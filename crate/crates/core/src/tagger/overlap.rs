//! Trajectory-overlap tag over recorded future boxes.
//!
//! The aggregated envelope of an agent over a window is the union of its boxes
//! in that window. Two unions intersect iff some pair of member boxes does, so
//! the overlap indicator reduces to pairwise box tests.

use super::geometry::{obb_intersects, OrientedBox};
use super::TaggerConfig;
use crate::model::RiskLevel;

/// Number of future frames covered by a window of `dt` seconds.
pub fn window_frames(dt: f64, rate_hz: f64) -> usize {
    (dt * rate_hz + 1e-9).floor() as usize
}

/// Smallest `k` such that the envelopes over frames `0..=k` intersect, if any
/// exists with `k <= limit`. Index 0 is the current frame; `None` entries in
/// `obj` are unobserved frames and contribute no box.
pub fn first_overlap_frame(ego: &[OrientedBox], obj: &[Option<OrientedBox>], limit: usize) -> Option<usize> {
    let last = limit.min(ego.len().saturating_sub(1)).min(obj.len().saturating_sub(1));
    if ego.is_empty() || obj.is_empty() {
        return None;
    }
    for k in 0..=last {
        // pairs whose later member is frame k
        if let Some(ob) = &obj[k] {
            if ego[..=k].iter().any(|e| obb_intersects(e, ob)) {
                return Some(k);
            }
        }
        let ek = &ego[k];
        if obj[..k].iter().flatten().any(|ob| obb_intersects(ek, ob)) {
            return Some(k);
        }
    }
    None
}

/// 𝒪(Δt): whether the two envelopes over `window` frames intersect.
pub fn envelopes_overlap(ego: &[OrientedBox], obj: &[Option<OrientedBox>], window: usize) -> bool {
    first_overlap_frame(ego, obj, window).is_some()
}

/// Both series start at the current frame and run forward at `rate_hz`,
/// truncated wherever the log ends.
pub fn tag_traj_overlap(
    ego: &[OrientedBox],
    obj: &[Option<OrientedBox>],
    rate_hz: f64,
    cfg: &TaggerConfig,
) -> RiskLevel {
    let high = window_frames(cfg.overlap_high_dt, rate_hz);
    let low = window_frames(cfg.overlap_low_dt, rate_hz);
    match first_overlap_frame(ego, obj, high.max(low)) {
        Some(k) if k <= high => RiskLevel::High,
        Some(k) if k <= low => RiskLevel::Low,
        _ => RiskLevel::No,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn ego_series(n: usize) -> Vec<OrientedBox> {
        (0..n).map(|i| OrientedBox::new(i as f64, 0.0, 0.0, 4.8, 2.0)).collect()
    }

    /// Guest crossing the ego's path at x = `cross_x`, reaching the ego lane
    /// edge after `arrive_s` seconds.
    fn crossing(n: usize, cross_x: f64, arrive_s: f64) -> Vec<Option<OrientedBox>> {
        let speed = 5.0;
        let start_y = 1.0 + 2.25 + speed * arrive_s;
        (0..n)
            .map(|i| Some(OrientedBox::new(cross_x, start_y - speed * i as f64 / 10.0, -FRAC_PI_2, 4.5, 1.9)))
            .collect()
    }

    #[test]
    fn crossing_bands() {
        let cfg = TaggerConfig::default();
        let ego = ego_series(31);
        // ego reaches the crossing line by frame 2, so the guest's arrival decides
        assert_eq!(tag_traj_overlap(&ego, &crossing(31, 5.0, 1.2), 10.0, &cfg), RiskLevel::High);
        assert_eq!(tag_traj_overlap(&ego, &crossing(31, 5.0, 2.5), 10.0, &cfg), RiskLevel::Low);
        assert_eq!(tag_traj_overlap(&ego, &crossing(31, 5.0, 3.5), 10.0, &cfg), RiskLevel::No);
    }

    #[test]
    fn parallel_lanes() {
        let cfg = TaggerConfig::default();
        let ego = ego_series(31);
        let side: Vec<_> = (0..31).map(|i| Some(OrientedBox::new(i as f64, 10.0, 0.0, 4.8, 2.0))).collect();
        assert_eq!(tag_traj_overlap(&ego, &side, 10.0, &cfg), RiskLevel::No);
    }

    #[test]
    fn union_is_not_time_synchronised() {
        // guest passes through x=20 at frame 0, ego only gets there at frame 9
        let ego: Vec<_> = (0..31).map(|i| OrientedBox::new(2.0 * i as f64, 0.0, 0.0, 4.8, 2.0)).collect();
        let mut obj = vec![None; 31];
        obj[0] = Some(OrientedBox::new(20.0, 0.0, FRAC_PI_2, 4.5, 1.9));
        assert_eq!(first_overlap_frame(&ego, &obj, 30), Some(9));
    }

    #[test]
    fn absent_frames_contribute_nothing() {
        let cfg = TaggerConfig::default();
        let ego = ego_series(31);
        let obj = vec![None; 31];
        assert_eq!(tag_traj_overlap(&ego, &obj, 10.0, &cfg), RiskLevel::No);
    }

    #[test]
    fn truncated_series() {
        let cfg = TaggerConfig::default();
        let ego = ego_series(5);
        let obj = crossing(5, 2.0, 0.2);
        assert_eq!(tag_traj_overlap(&ego, &obj, 10.0, &cfg), RiskLevel::High);
        assert_eq!(window_frames(1.5, 10.0), 15);
        assert_eq!(window_frames(3.0, 10.0), 30);
    }
}
