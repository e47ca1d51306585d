//! Random scene generators used by the oracle comparisons.

use rand::Rng;

use super::raster::Rect;

pub const RATE_HZ: f64 = 10.0;
pub const FRAMES: usize = 31;

/// Boxes along a constant speed / turn-rate path sampled at `RATE_HZ`.
fn sweep(x: f64, y: f64, yaw: f64, v: f64, w: f64, len: f64, wid: f64) -> Vec<Rect> {
    (0..FRAMES)
        .map(|k| {
            let t = k as f64 / RATE_HZ;
            // exact arc integration, written out independently of the library
            let (px, py) = if w.abs() < 1e-9 {
                (x + v * t * yaw.cos(), y + v * t * yaw.sin())
            } else {
                let r = v / w;
                (x + r * ((yaw + w * t).sin() - yaw.sin()), y - r * ((yaw + w * t).cos() - yaw.cos()))
            };
            Rect { cx: px, cy: py, yaw: yaw + w * t, length: len, width: wid }
        })
        .collect()
}

/// An ego sweep from the origin and a guest sweep with some dropped frames.
pub fn overlap_pair(rng: &mut impl Rng) -> (Vec<Rect>, Vec<Option<Rect>>) {
    let ego = sweep(
        0.0,
        0.0,
        rng.random_range(-0.3..0.3),
        rng.random_range(0.0..12.0),
        rng.random_range(-0.4..0.4),
        4.8,
        2.0,
    );
    let (len, wid) = if rng.random_bool(0.2) { (0.6, 0.6) } else { (rng.random_range(3.5..5.5), rng.random_range(1.6..2.2)) };
    let obj = sweep(
        rng.random_range(-10.0..35.0),
        rng.random_range(-20.0..20.0),
        rng.random_range(-3.2..3.2),
        rng.random_range(0.0..12.0),
        rng.random_range(-0.4..0.4),
        len,
        wid,
    );
    let drop = rng.random_range(0.0..0.2);
    let obj = obj.into_iter().map(|r| (!rng.random_bool(drop)).then_some(r)).collect();
    (ego, obj)
}
