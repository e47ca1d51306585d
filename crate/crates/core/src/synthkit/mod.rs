//! Labelled synthetic driving logs for every behaviour category.
//!
//! Each scenario places the ego vehicle at the origin heading +x and builds one
//! key guest whose motion realises the category, plus a distractor driving in a
//! distant parallel lane. The ego vehicle slows down around the trigger time.

pub mod motion;

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::path::{Path as FsPath, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::model::{
    save_annotations, save_log, Annotation, ModelError, ObjectCategory, ObjectState, Pose2D, ScenarioCategory,
    TagName, TrackSample, TrajectoryLog, DEFAULT_EGO_LENGTH_M, DEFAULT_EGO_WIDTH_M,
};
use motion::{LaneChange, Motion, Path, Segment, SpeedProfile};

/// Lateral offset of the distractor's lane from the ego lane.
const DISTRACTOR_OFFSET_M: f64 = 12.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("infeasible scenario: {0}")]
    Infeasible(String),
}

/// Parameters of one synthetic scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub category: ScenarioCategory,
    pub seed: u64,
    pub duration_s: f64,
    pub rate_hz: f64,
    pub noise_sigma_pos: f64,
    pub lane_width: f64,
    pub ego_speed: f64,
    /// Time around which the ego vehicle starts slowing down.
    pub trigger_s: f64,
    /// Adjacent-lane guest veering in just ahead of the ego vehicle, labelled
    /// `cut_in`. Only valid with that category.
    pub veer_behind: bool,
}

impl ScenarioSpec {
    pub fn new(category: ScenarioCategory, seed: u64) -> Self {
        Self {
            category,
            seed,
            duration_s: 10.0,
            rate_hz: 10.0,
            noise_sigma_pos: 0.0,
            lane_width: 3.5,
            ego_speed: 11.0,
            trigger_s: 4.0,
            veer_behind: false,
        }
    }

    pub fn veer_behind(seed: u64) -> Self {
        Self { veer_behind: true, ..Self::new(ScenarioCategory::CutIn, seed) }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::Infeasible(m.to_string()));
        if !(self.rate_hz > 0.0 && self.duration_s > 0.0) {
            return bad("rate and duration must be positive");
        }
        if !(self.trigger_s >= 2.0 && self.trigger_s + 3.0 <= self.duration_s) {
            return bad("trigger must leave 2 s before and 3 s after it within the duration");
        }
        if !(6.0..=18.0).contains(&self.ego_speed) {
            return bad("ego speed must lie in [6, 18] m/s");
        }
        if !(self.lane_width >= 2.5 && self.noise_sigma_pos >= 0.0) {
            return bad("lane width must be at least 2.5 m and noise non-negative");
        }
        if self.veer_behind && self.category != ScenarioCategory::CutIn {
            return bad("veer_behind requires the cut_in category");
        }
        Ok(())
    }
}

/// A generated log with one annotation per non-ego actor.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledLog {
    pub log: TrajectoryLog,
    pub annotations: Vec<Annotation>,
    /// Track id of the guest realising the scenario, if any.
    pub key_guest: Option<String>,
    /// For the veer-behind case: the last frame before the guest's heading
    /// starts to change in the smoothed log.
    pub designated_frame: Option<usize>,
}

struct Actor {
    category: &'static str,
    length: f64,
    width: f64,
    motion: Motion,
    label: ScenarioCategory,
    key: bool,
}

const VEHICLE: (&str, f64, f64) = ("REGULAR_VEHICLE", 4.5, 1.9);
const BICYCLE: (&str, f64, f64) = ("BICYCLE", 1.8, 0.6);
const PEDESTRIAN: (&str, f64, f64) = ("PEDESTRIAN", 0.6, 0.6);

fn actor(kind: (&'static str, f64, f64), motion: Motion, label: ScenarioCategory) -> Actor {
    Actor { category: kind.0, length: kind.1, width: kind.2, motion, label, key: label.is_relevant() }
}

fn straight(x: f64, y: f64, yaw: f64) -> Path {
    Path::line(Pose2D::new(x, y, yaw))
}

/// Ego and key-guest motion for `spec`, plus the designated frame offset.
fn plan(spec: &ScenarioSpec, rng: &mut ChaCha8Rng) -> (Motion, Vec<Actor>, Option<f64>, f64) {
    use ScenarioCategory::*;
    let (ve, trig, w) = (spec.ego_speed, spec.trigger_s, spec.lane_width);
    let origin = straight(0.0, 0.0, 0.0);
    let mut designated = None;
    // side of the distractor lane: away from any turn
    let mut distractor_side = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let (ego, guests) = match spec.category {
        CutIn if spec.veer_behind => {
            let dv = 1.5;
            let onset = trig - 0.5;
            let gap = 6.5 + rng.random_range(-0.3..0.3);
            let guest = Motion::new(straight(gap + dv * (onset + 0.5), w, 0.0), SpeedProfile::constant(ve - dv))
                .with_lane_change(LaneChange { start: onset, duration: 1.0, shift: -w });
            designated = Some(onset - 0.6);
            let ego = Motion::new(origin, SpeedProfile::constant(ve).then(trig, -5.0, ve - 6.0));
            (ego, vec![actor(VEHICLE, guest, CutIn)])
        }
        CutIn => {
            let dv = 3.0 + rng.random_range(-0.3..0.3);
            let guest = Motion::new(
                straight(-2.0, w, 0.0),
                SpeedProfile::constant((ve + dv).min(19.5)).then(trig - 0.5, -4.0, ve - 4.0),
            )
            .with_lane_change(LaneChange { start: trig - 2.0, duration: 1.5, shift: -w });
            let ego = Motion::new(origin, SpeedProfile::constant(ve).then(trig, -3.0, ve - 6.0));
            (ego, vec![actor(VEHICLE, guest, CutIn)])
        }
        LeftOppo => {
            let r = 15.0;
            let speed = SpeedProfile::constant(ve).then(trig - 1.0, -2.5, 4.0).then(trig + 4.5, 1.5, 8.0);
            let arc_start = speed.at(trig).0;
            let path = straight(0.0, 0.0, 0.0)
                .then(Segment::Line { length: arc_start })
                .then(Segment::Arc { length: r * FRAC_PI_2, curvature: 1.0 / r });
            let vg = 12.0 + rng.random_range(-1.0..1.0);
            let guest = Motion::new(straight(arc_start + vg * (trig - 0.5), w, PI), SpeedProfile::constant(vg));
            distractor_side = -1.0;
            (Motion::new(path, speed), vec![actor(VEHICLE, guest, LeftOppo)])
        }
        RightPed => {
            let r = 10.0;
            let speed = SpeedProfile::constant(ve)
                .then(trig - 1.5, -2.5, 3.0)
                .then(trig + 1.0, -1.5, 0.0)
                .then(trig + 4.5, 1.5, 6.0);
            let arc_start = speed.at(trig).0;
            let path = straight(0.0, 0.0, 0.0)
                .then(Segment::Line { length: arc_start })
                .then(Segment::Arc { length: r * FRAC_PI_2, curvature: -1.0 / r });
            // pedestrian walks towards the turn centre, crossing the ego arc at 45°
            let centre = (arc_start, -r);
            let (ux, uy) = (FRAC_PI_4.sin(), FRAC_PI_4.cos());
            let vp = 1.4;
            let cross_t = trig + 2.0 + rng.random_range(-0.3..0.3);
            let start_r = r + vp * cross_t;
            let ped = Motion::new(
                straight(centre.0 + start_r * ux, centre.1 + start_r * uy, (-uy).atan2(-ux)),
                SpeedProfile::constant(vp),
            );
            distractor_side = 1.0;
            (Motion::new(path, speed), vec![actor(PEDESTRIAN, ped, RightPed)])
        }
        ObjCross | PedCross => {
            let (kind, speed, ahead, brake) = if spec.category == ObjCross {
                (BICYCLE, 5.0 + rng.random_range(-0.5..0.5), 18.0, SpeedProfile::constant(ve).then(trig, -3.0, 2.0).then(trig + 4.0, 1.5, 8.0))
            } else {
                (PEDESTRIAN, 1.4, 22.0, SpeedProfile::constant(ve).then(trig, -4.0, 0.0).then(trig + 5.0, 1.5, 6.0))
            };
            let cross_x = brake.at(trig).0 + ahead;
            let cross_t = trig + if spec.category == ObjCross { 1.5 } else { 2.0 };
            let from_right = rng.random_bool(0.5);
            let (y0, yaw) = if from_right { (-speed * cross_t, FRAC_PI_2) } else { (speed * cross_t, -FRAC_PI_2) };
            let guest = Motion::new(straight(cross_x, y0, yaw), SpeedProfile::constant(speed));
            (Motion::new(origin, brake), vec![actor(kind, guest, spec.category)])
        }
        LeadBrake => {
            let gap = rng.random_range(15.0..17.0);
            let lead = Motion::new(straight(gap, 0.0, 0.0), SpeedProfile::constant(ve).then(trig - 0.5, -5.0, 0.0));
            let ego = Motion::new(origin, SpeedProfile::constant(ve).then(trig, -4.0, 0.0));
            (ego, vec![actor(VEHICLE, lead, LeadBrake)])
        }
        ApproachStop => {
            let ego_speed = SpeedProfile::constant(ve).then(trig, -3.0, 0.0);
            let stop_at = ego_speed.at(spec.duration_s).0;
            let parked = Motion::new(straight(stop_at + 10.0 + rng.random_range(0.0..2.0), 0.0, 0.0), SpeedProfile::constant(0.0));
            (Motion::new(origin, ego_speed), vec![actor(VEHICLE, parked, ApproachStop)])
        }
        UnknownButRelevant => {
            let ego_speed = SpeedProfile::constant(ve).then(trig, -3.0, 0.0);
            let stop_at = ego_speed.at(spec.duration_s).0;
            let reverser = Motion::new(straight(stop_at + 14.0, 0.0, 0.0), SpeedProfile::constant(0.0).then(trig - 1.0, 1.0, 2.0))
                .reversing();
            (Motion::new(origin, ego_speed), vec![actor(VEHICLE, reverser, UnknownButRelevant)])
        }
        NotRelevant => (Motion::new(origin, SpeedProfile::constant(ve).then(trig, -2.0, ve - 5.0)), Vec::new()),
    };
    (ego, guests, designated, distractor_side)
}

fn distractor(side: f64, rng: &mut ChaCha8Rng) -> Actor {
    let x0 = rng.random_range(-20.0..40.0);
    let v = rng.random_range(8.0..14.0);
    actor(VEHICLE, Motion::new(straight(x0, side * DISTRACTOR_OFFSET_M, 0.0), SpeedProfile::constant(v)), ScenarioCategory::NotRelevant)
}

fn uuid(rng: &mut ChaCha8Rng) -> String {
    let h = format!("{:032x}", rng.random::<u128>());
    format!("{}-{}-{}-{}-{}", &h[..8], &h[8..12], &h[12..16], &h[16..20], &h[20..])
}

/// Builds the labelled log for `spec`. Identical specs give identical logs.
pub fn generate(spec: &ScenarioSpec) -> Result<LabeledLog, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (ego, mut actors, designated_t, side) = plan(spec, &mut rng);
    actors.push(distractor(side, &mut rng));

    let suffix = if spec.veer_behind { "veer_behind".to_string() } else { spec.category.as_str().to_string() };
    let log_id = format!("synth-{suffix}-{:016x}", spec.seed);
    let frames = (spec.duration_s * spec.rate_hz).round() as usize;
    let times: Vec<f64> = (0..frames).map(|i| i as f64 / spec.rate_hz).collect();
    let noise = Normal::new(0.0, spec.noise_sigma_pos).map_err(|e| SynthError::Infeasible(e.to_string()))?;
    let jitter = |p: Pose2D, rng: &mut ChaCha8Rng| {
        if spec.noise_sigma_pos > 0.0 {
            Pose2D::new(p.x + noise.sample(rng), p.y + noise.sample(rng), p.yaw)
        } else {
            p
        }
    };

    let ids: Vec<String> = actors.iter().map(|_| uuid(&mut rng)).collect();
    let ego_poses: Vec<Pose2D> = times.iter().map(|&t| jitter(ego.pose(t), &mut rng)).collect();
    let mut objects = BTreeMap::new();
    let mut annotations = Vec::new();
    let mut key_guest = None;
    for (a, id) in actors.iter().zip(&ids) {
        let samples: Vec<TrackSample> = times
            .iter()
            .enumerate()
            .map(|(i, &t)| TrackSample {
                index: i,
                state: ObjectState {
                    pose: jitter(a.motion.pose(t), &mut rng),
                    length: a.length,
                    width: a.width,
                    category: ObjectCategory::new(a.category),
                    track_id: id.clone(),
                },
            })
            .collect();
        objects.insert(id.clone(), samples);
        annotations.push(Annotation { log_id: log_id.clone(), guest_id: id.clone(), scenario_category: a.label });
        if a.key {
            key_guest = Some(id.clone());
        }
    }
    annotations.sort_by(|a, b| a.guest_id.cmp(&b.guest_id));
    let log = TrajectoryLog {
        log_id,
        rate_hz: spec.rate_hz,
        ego_length: DEFAULT_EGO_LENGTH_M,
        ego_width: DEFAULT_EGO_WIDTH_M,
        timestamps: times,
        ego: ego_poses,
        objects,
    };
    Ok(LabeledLog {
        log,
        annotations,
        key_guest,
        designated_frame: designated_t.map(|t| (t * spec.rate_hz).round() as usize),
    })
}

/// Speed and acceleration of the ego and every actor at each frame, for sanity checks.
pub fn motion_envelope(spec: &ScenarioSpec) -> Result<(f64, f64, f64), SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (ego, mut actors, _, side) = plan(spec, &mut rng);
    actors.push(distractor(side, &mut rng));
    let frames = (spec.duration_s * spec.rate_hz).round() as usize;
    let (mut vmax, mut amin, mut amax) = (0.0f64, 0.0f64, 0.0f64);
    for m in std::iter::once(&ego).chain(actors.iter().map(|a| &a.motion)) {
        for i in 0..frames {
            let (v, a) = m.speed_accel(i as f64 / spec.rate_hz);
            vmax = vmax.max(v);
            amin = amin.min(a);
            amax = amax.max(a);
        }
    }
    Ok((vmax, amin, amax))
}

/// `n_per_category` scenarios of each behaviour category with jittered ego
/// speed and trigger time, all derived from `seed`.
pub fn generate_corpus(n_per_category: usize, seed: u64, noise_sigma_pos: f64) -> Result<Vec<LabeledLog>, SynthError> {
    corpus_specs(&ScenarioCategory::BEHAVIOURS, n_per_category, seed, noise_sigma_pos)
        .iter()
        .map(generate)
        .collect()
}

/// The specs [`generate_corpus`] would use for `categories`.
pub fn corpus_specs(categories: &[ScenarioCategory], n_per_category: usize, seed: u64, noise_sigma_pos: f64) -> Vec<ScenarioSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for &category in categories {
        for _ in 0..n_per_category {
            out.push(ScenarioSpec {
                ego_speed: rng.random_range(10.0..12.5),
                trigger_s: rng.random_range(3.8..4.2),
                noise_sigma_pos,
                ..ScenarioSpec::new(category, rng.random())
            });
        }
    }
    out
}

/// Writes `logs/<log_id>.jsonl` for every log plus `annotations.csv` under `dir`.
pub fn write_corpus(dir: &FsPath, corpus: &[LabeledLog]) -> Result<Vec<PathBuf>, ModelError> {
    let logs_dir = dir.join("logs");
    std::fs::create_dir_all(&logs_dir).map_err(|e| ModelError::io(&logs_dir, e))?;
    let mut paths = Vec::new();
    for item in corpus {
        let path = logs_dir.join(format!("{}.jsonl", item.log.log_id));
        save_log(&item.log, &path)?;
        paths.push(path);
    }
    let annotations: Vec<Annotation> = corpus.iter().flat_map(|c| c.annotations.iter().cloned()).collect();
    save_annotations(&annotations, dir.join("annotations.csv"))?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let spec = ScenarioSpec::new(ScenarioCategory::CutIn, 7);
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
    }

    #[test]
    fn every_actor_annotated() {
        for c in ScenarioCategory::ALL {
            let l = generate(&ScenarioSpec::new(*c, 3)).unwrap();
            l.log.validate().unwrap();
            assert_eq!(l.annotations.len(), l.log.objects.len());
            assert_eq!(l.key_guest.is_some(), c.is_relevant(), "{c}");
        }
    }

    #[test]
    fn infeasible_trigger() {
        let spec = ScenarioSpec { trigger_s: 9.5, ..ScenarioSpec::new(ScenarioCategory::LeadBrake, 1) };
        assert!(generate(&spec).is_err());
    }

    #[test]
    fn corpus_counts() {
        let corpus = generate_corpus(2, 11, 0.0).unwrap();
        assert_eq!(corpus.len(), 14);
        assert!(corpus.iter().all(|c| c.annotations.iter().any(|a| a.scenario_category == ScenarioCategory::NotRelevant)));
        assert_eq!(corpus, generate_corpus(2, 11, 0.0).unwrap());
    }

    #[test]
    fn physically_sane() {
        for spec in corpus_specs(&ScenarioCategory::ALL, 3, 5, 0.0) {
            let (vmax, amin, amax) = motion_envelope(&spec).unwrap();
            assert!(vmax <= 20.0 && amin >= -6.0 && amax <= 4.0, "{spec:?}");
        }
    }
}
