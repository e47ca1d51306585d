//! Oriented boxes and separating-axis tests in the plane.

use crate::model::Pose2D;

/// Projections closer than this count as touching. Boxes are closed sets.
pub const CONTACT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox {
    pub cx: f64,
    pub cy: f64,
    pub yaw: f64,
    /// Extent along the heading.
    pub length: f64,
    /// Extent across the heading.
    pub width: f64,
}

type V2 = [f64; 2];

fn dot(a: V2, b: V2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn sub(a: V2, b: V2) -> V2 {
    [a[0] - b[0], a[1] - b[1]]
}

impl OrientedBox {
    pub fn new(cx: f64, cy: f64, yaw: f64, length: f64, width: f64) -> Self {
        Self { cx, cy, yaw, length, width }
    }

    pub fn from_pose(pose: &Pose2D, length: f64, width: f64) -> Self {
        Self::new(pose.x, pose.y, pose.yaw, length, width)
    }

    /// Unit heading axis and unit lateral axis.
    pub fn axes(&self) -> [V2; 2] {
        let (s, c) = self.yaw.sin_cos();
        [[c, s], [-s, c]]
    }

    pub fn corners(&self) -> [V2; 4] {
        let [u, v] = self.axes();
        let (hl, hw) = (self.length / 2.0, self.width / 2.0);
        let c = [self.cx, self.cy];
        let at = |a: f64, b: f64| [c[0] + a * u[0] + b * v[0], c[1] + a * u[1] + b * v[1]];
        [at(hl, hw), at(-hl, hw), at(-hl, -hw), at(hl, -hw)]
    }

    /// Same box grown by `margin` on every side.
    pub fn expanded(&self, margin: f64) -> Self {
        Self { length: self.length + 2.0 * margin, width: self.width + 2.0 * margin, ..*self }
    }

    /// `[min_x, min_y, max_x, max_y]`.
    pub fn aabb(&self) -> [f64; 4] {
        let [u, v] = self.axes();
        let ex = (u[0] * self.length).abs() / 2.0 + (v[0] * self.width).abs() / 2.0;
        let ey = (u[1] * self.length).abs() / 2.0 + (v[1] * self.width).abs() / 2.0;
        [self.cx - ex, self.cy - ey, self.cx + ex, self.cy + ey]
    }

    fn project(&self, axis: V2) -> (f64, f64) {
        let [u, v] = self.axes();
        let center = dot([self.cx, self.cy], axis);
        let r = (self.length / 2.0) * dot(u, axis).abs() + (self.width / 2.0) * dot(v, axis).abs();
        (center - r, center + r)
    }
}

fn aabb_disjoint(a: &OrientedBox, b: &OrientedBox) -> bool {
    let (p, q) = (a.aabb(), b.aabb());
    p[2] < q[0] - CONTACT_EPS || q[2] < p[0] - CONTACT_EPS || p[3] < q[1] - CONTACT_EPS || q[3] < p[1] - CONTACT_EPS
}

/// Smallest overlap of the two boxes' projections over the four candidate
/// axes. Negative when a separating axis exists (its magnitude is then a
/// lower bound on the gap).
pub fn sat_overlap(a: &OrientedBox, b: &OrientedBox) -> f64 {
    let mut min_overlap = f64::INFINITY;
    for axis in a.axes().into_iter().chain(b.axes()) {
        let (amin, amax) = a.project(axis);
        let (bmin, bmax) = b.project(axis);
        min_overlap = min_overlap.min(amax.min(bmax) - amin.max(bmin));
    }
    min_overlap
}

/// True iff the two closed rectangles share at least one point.
pub fn obb_intersects(a: &OrientedBox, b: &OrientedBox) -> bool {
    if aabb_disjoint(a, b) {
        return false;
    }
    sat_overlap(a, b) >= -CONTACT_EPS
}

fn point_segment_distance(p: V2, a: V2, b: V2) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    let t = if len2 > 0.0 { (dot(sub(p, a), ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    let d = sub(p, [a[0] + t * ab[0], a[1] + t * ab[1]]);
    dot(d, d).sqrt()
}

/// Minimum Euclidean distance between the two box polygons, zero when they intersect.
pub fn box_distance(a: &OrientedBox, b: &OrientedBox) -> f64 {
    if obb_intersects(a, b) {
        return 0.0;
    }
    let (ca, cb) = (a.corners(), b.corners());
    let mut best = f64::INFINITY;
    for (pts, poly) in [(&ca, &cb), (&cb, &ca)] {
        for &p in pts.iter() {
            for i in 0..4 {
                best = best.min(point_segment_distance(p, poly[i], poly[(i + 1) % 4]));
            }
        }
    }
    best
}
