//! Track gap filling and Savitzky-Golay denoising.
//!
//! Gaps inside an object's lifespan are filled by linear interpolation (yaw
//! along the shortest arc); nothing is extrapolated past the first or last
//! observation. Pose series are then smoothed with a least-squares polynomial
//! filter. Near the ends of a series the polynomial is fitted on the one-sided
//! window and evaluated at the sample's own position, so no samples are lost.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::model::angle::{angle_diff, unwrap_angles, wrap_angle};
use crate::model::{ObjectState, Pose2D, TrackSample, TrajectoryLog};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PreprocessError {
    #[error("empty_series: track has no observations")]
    EmptySeries,
    #[error("series_too_short: {len} samples for window {window}")]
    SeriesTooShort { len: usize, window: usize },
    #[error("invalid smoothing config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoothingConfig {
    /// Odd window length in samples, at least 5.
    pub window: usize,
    /// Polynomial degree, at least 2 and below `window`.
    pub polyorder: usize,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        Self { window: 11, polyorder: 3 }
    }
}

impl SmoothingConfig {
    pub fn validate(&self) -> Result<(), PreprocessError> {
        if self.window < 5 || self.window % 2 == 0 {
            return Err(PreprocessError::InvalidConfig(format!(
                "window must be odd and >= 5, got {}",
                self.window
            )));
        }
        if self.polyorder < 2 || self.polyorder >= self.window {
            return Err(PreprocessError::InvalidConfig(format!(
                "polyorder must be in [2, window), got {}",
                self.polyorder
            )));
        }
        Ok(())
    }
}

/// Precomputed Savitzky-Golay weights.
///
/// Row `r` of `hat` maps the `window` samples of a fitting window onto the
/// fitted polynomial's value at window position `r`.
#[derive(Debug, Clone)]
pub struct SavgolFilter {
    window: usize,
    hat: DMatrix<f64>,
}

impl SavgolFilter {
    pub fn new(cfg: SmoothingConfig) -> Result<Self, PreprocessError> {
        cfg.validate()?;
        let w = cfg.window;
        let half = (w / 2) as f64;
        // abscissae scaled to [-1, 1] keep the Vandermonde matrix well conditioned
        let vander = DMatrix::from_fn(w, cfg.polyorder + 1, |i, j| ((i as f64 - half) / half).powi(j as i32));
        let q = vander.qr().q();
        let hat = &q * q.transpose();
        Ok(Self { window: w, hat })
    }

    pub fn apply(&self, series: &[f64]) -> Result<Vec<f64>, PreprocessError> {
        let n = series.len();
        let w = self.window;
        if n < w {
            return Err(PreprocessError::SeriesTooShort { len: n, window: w });
        }
        let half = w / 2;
        let out = (0..n)
            .map(|i| {
                let (start, row) = if i < half {
                    (0, i)
                } else if i + half >= n {
                    (n - w, i - (n - w))
                } else {
                    (i - half, half)
                };
                self.hat
                    .row(row)
                    .iter()
                    .zip(&series[start..start + w])
                    .map(|(h, v)| h * v)
                    .sum()
            })
            .collect();
        Ok(out)
    }
}

pub fn savgol_smooth(series: &[f64], cfg: SmoothingConfig) -> Result<Vec<f64>, PreprocessError> {
    SavgolFilter::new(cfg)?.apply(series)
}

/// Smooths an angle series on its unwrapped form and wraps the result.
pub fn savgol_smooth_angles(angles: &[f64], filter: &SavgolFilter) -> Result<Vec<f64>, PreprocessError> {
    let smoothed = filter.apply(&unwrap_angles(angles))?;
    Ok(smoothed.into_iter().map(wrap_angle).collect())
}

fn lerp(a: f64, b: f64, f: f64) -> f64 {
    a + (b - a) * f
}

/// Fills every missing index between the first and last observation.
pub fn interpolate_track(samples: &[TrackSample]) -> Result<Vec<TrackSample>, PreprocessError> {
    let first = samples.first().ok_or(PreprocessError::EmptySeries)?;
    let mut out = Vec::with_capacity(samples.last().map_or(0, |l| l.index - first.index + 1));
    out.push(first.clone());
    for pair in samples.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let span = (b.index - a.index) as f64;
        for idx in a.index + 1..b.index {
            let f = (idx - a.index) as f64 / span;
            let (sa, sb) = (&a.state, &b.state);
            let yaw = wrap_angle(sa.pose.yaw + f * angle_diff(sb.pose.yaw, sa.pose.yaw));
            // nearest observation wins the category; ties go to the earlier one
            let nearest = if idx - a.index <= b.index - idx { sa } else { sb };
            out.push(TrackSample {
                index: idx,
                state: ObjectState {
                    pose: Pose2D::new(lerp(sa.pose.x, sb.pose.x, f), lerp(sa.pose.y, sb.pose.y, f), yaw),
                    length: lerp(sa.length, sb.length, f),
                    width: lerp(sa.width, sb.width, f),
                    category: nearest.category.clone(),
                    track_id: sa.track_id.clone(),
                },
            });
        }
        out.push(b.clone());
    }
    Ok(out)
}

/// What `preprocess_log` did besides the default path.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessingReport {
    /// Frames added by interpolation, summed over tracks.
    pub interpolated_frames: usize,
    /// Tracks shorter than the smoothing window, passed through unsmoothed.
    pub unsmoothed_tracks: Vec<String>,
    pub ego_smoothed: bool,
}

fn smooth_poses(poses: &mut [Pose2D], filter: &SavgolFilter) -> Result<(), PreprocessError> {
    let xs: Vec<f64> = poses.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = poses.iter().map(|p| p.y).collect();
    let yaws: Vec<f64> = poses.iter().map(|p| p.yaw).collect();
    let xs = filter.apply(&xs)?;
    let ys = filter.apply(&ys)?;
    let yaws = savgol_smooth_angles(&yaws, filter)?;
    for (i, p) in poses.iter_mut().enumerate() {
        *p = Pose2D::new(xs[i], ys[i], yaws[i]);
    }
    Ok(())
}

/// Interpolates every track, then smooths ego and object poses.
pub fn preprocess_log(
    log: &TrajectoryLog,
    cfg: SmoothingConfig,
) -> Result<(TrajectoryLog, ProcessingReport), PreprocessError> {
    let filter = SavgolFilter::new(cfg)?;
    let mut out = log.clone();
    let mut report = ProcessingReport::default();

    if out.ego.len() >= cfg.window {
        smooth_poses(&mut out.ego, &filter)?;
        report.ego_smoothed = true;
    }

    for (id, samples) in out.objects.iter_mut() {
        let before = samples.len();
        let mut dense = interpolate_track(samples)?;
        report.interpolated_frames += dense.len() - before;
        if dense.len() >= cfg.window {
            let mut poses: Vec<Pose2D> = dense.iter().map(|s| s.state.pose).collect();
            smooth_poses(&mut poses, &filter)?;
            for (s, p) in dense.iter_mut().zip(poses) {
                s.state.pose = p;
            }
        } else {
            report.unsmoothed_tracks.push(id.clone());
        }
        *samples = dense;
    }
    Ok((out, report))
}
