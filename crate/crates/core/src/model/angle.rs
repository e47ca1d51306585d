use std::f64::consts::{PI, TAU};

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(TAU);
    if r > PI {
        r -= TAU;
    }
    // rem_euclid can return TAU itself for tiny negative inputs
    if r <= -PI {
        r += TAU;
    }
    r
}

/// Signed shortest rotation taking `from` onto `to`, in `(-π, π]`.
pub fn angle_diff(to: f64, from: f64) -> f64 {
    wrap_angle(to - from)
}

/// Removes ±2π jumps so consecutive samples differ by at most π.
pub fn unwrap_angles(angles: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(angles.len());
    let mut prev: Option<f64> = None;
    for &a in angles {
        let next = match prev {
            None => a,
            Some(p) => p + angle_diff(a, p),
        };
        out.push(next);
        prev = Some(next);
    }
    out
}
