//! Grid rasterization of box envelopes.
//!
//! Each box is rendered as the set of grid cells whose centre lies inside it.
//! For every cell we keep the earliest frame at which each agent covers it; the
//! envelopes over frames `0..=k` meet iff some cell has both first-frames `<= k`.

#[derive(Debug, Clone, Copy)]
pub struct Rect {
    pub cx: f64,
    pub cy: f64,
    pub yaw: f64,
    pub length: f64,
    pub width: f64,
}

impl Rect {
    /// Grows (or shrinks, for negative `d`) every side by `d`.
    pub fn inflate(&self, d: f64) -> Rect {
        Rect { length: self.length + 2.0 * d, width: self.width + 2.0 * d, ..*self }
    }

    fn contains(&self, px: f64, py: f64) -> bool {
        let (s, c) = self.yaw.sin_cos();
        let (dx, dy) = (px - self.cx, py - self.cy);
        let u = dx * c + dy * s;
        let v = -dx * s + dy * c;
        u.abs() <= self.length / 2.0 && v.abs() <= self.width / 2.0
    }

    fn reach(&self) -> f64 {
        0.5 * self.length.hypot(self.width)
    }
}

struct Grid {
    x0: f64,
    y0: f64,
    nx: usize,
    ny: usize,
    cell: f64,
}

impl Grid {
    fn covering<'a>(rects: impl Iterator<Item = &'a Rect>, cell: f64) -> Option<Grid> {
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for r in rects {
            let e = r.reach();
            x0 = x0.min(r.cx - e);
            y0 = y0.min(r.cy - e);
            x1 = x1.max(r.cx + e);
            y1 = y1.max(r.cy + e);
        }
        (x0 <= x1).then(|| Grid {
            x0: (x0 / cell).floor() * cell,
            y0: (y0 / cell).floor() * cell,
            nx: ((x1 - x0) / cell) as usize + 3,
            ny: ((y1 - y0) / cell) as usize + 3,
            cell,
        })
    }

    fn paint(&self, r: &Rect, frame: u32, first: &mut [u32]) {
        let e = r.reach();
        let ix0 = (((r.cx - e - self.x0) / self.cell).floor().max(0.0)) as usize;
        let iy0 = (((r.cy - e - self.y0) / self.cell).floor().max(0.0)) as usize;
        let ix1 = (((r.cx + e - self.x0) / self.cell).ceil() as usize).min(self.nx - 1);
        let iy1 = (((r.cy + e - self.y0) / self.cell).ceil() as usize).min(self.ny - 1);
        for iy in iy0..=iy1 {
            let py = self.y0 + (iy as f64 + 0.5) * self.cell;
            for ix in ix0..=ix1 {
                let px = self.x0 + (ix as f64 + 0.5) * self.cell;
                let slot = &mut first[iy * self.nx + ix];
                if frame < *slot && r.contains(px, py) {
                    *slot = frame;
                }
            }
        }
    }
}

/// Smallest `k <= limit` at which the rasterized envelopes meet.
pub fn first_overlap(ego: &[Rect], obj: &[Option<Rect>], limit: usize, inflate: f64, cell: f64) -> Option<usize> {
    let n = ego.len().min(obj.len()).min(limit + 1);
    let ego: Vec<Rect> = ego[..n].iter().map(|r| r.inflate(inflate)).collect();
    let obj: Vec<(u32, Rect)> =
        obj[..n].iter().enumerate().filter_map(|(k, r)| r.map(|r| (k as u32, r.inflate(inflate)))).collect();
    let grid = Grid::covering(ego.iter().chain(obj.iter().map(|(_, r)| r)), cell)?;
    let mut ego_first = vec![u32::MAX; grid.nx * grid.ny];
    let mut obj_first = vec![u32::MAX; grid.nx * grid.ny];
    for (k, r) in ego.iter().enumerate() {
        grid.paint(r, k as u32, &mut ego_first);
    }
    for (k, r) in &obj {
        grid.paint(r, *k, &mut obj_first);
    }
    ego_first
        .iter()
        .zip(&obj_first)
        .map(|(a, b)| (*a).max(*b))
        .min()
        .filter(|&k| k != u32::MAX)
        .map(|k| k as usize)
}
