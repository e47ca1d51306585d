//! Random instances of the library's data types for roundtrip and oracle
//! comparisons.
#![allow(dead_code)]

use std::collections::BTreeMap;

use brakescope_core::eval::{EvalReport, KoiScores, Metrics, RetrievalScores};
use brakescope_core::model::{
    DistanceTag, HeadingTag, LatitudeTag, LongitudeTag, ObjectCategory, ObjectState, PairTags, Pose2D,
    PositionTag, Provenance, RiskLevel, ScenarioCategory, ScenarioRecord, TagMatrices, TagName, TrackSample,
    TrajectoryLog,
};
use rand::seq::IndexedRandom;
use rand::Rng;

pub const CATEGORIES: [&str; 5] = ["REGULAR_VEHICLE", "PEDESTRIAN", "BICYCLE", "BUS", "WHEELED_DEVICE"];

pub fn pick<T: TagName>(rng: &mut impl Rng) -> T {
    *T::ALL.choose(rng).expect("non-empty tag set")
}

pub fn uuid(rng: &mut impl Rng) -> String {
    let h = format!("{:032x}", rng.random::<u128>());
    format!("{}-{}-{}-{}-{}", &h[..8], &h[8..12], &h[12..16], &h[16..20], &h[20..])
}

/// Awkward but finite doubles: wide exponents, negative zero, subnormal-ish.
pub fn float(rng: &mut impl Rng) -> f64 {
    match rng.random_range(0..6) {
        0 => 0.0,
        1 => -0.0_f64 + rng.random_range(-1e-300..1e-300),
        2 => rng.random_range(-1e6..1e6),
        3 => rng.random_range(-1.0..1.0) * 10f64.powi(rng.random_range(-20..20)),
        _ => rng.random_range(-200.0..200.0),
    }
}

pub fn angle(rng: &mut impl Rng) -> f64 {
    rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)
}

pub fn random_log(rng: &mut impl Rng) -> TrajectoryLog {
    let frames = rng.random_range(1..40);
    let rate_hz = *[10.0, 20.0, 5.0, 12.5].choose(rng).unwrap();
    let t0 = rng.random_range(0.0..1e5);
    let mut objects = BTreeMap::new();
    for _ in 0..rng.random_range(0..6) {
        let id = uuid(rng);
        let keep = rng.random_range(0.3..1.0);
        let width = rng.random_range(0.3..3.0);
        let length = width + rng.random_range(0.0..10.0);
        let category = ObjectCategory::new(*CATEGORIES.choose(rng).unwrap());
        let observed: Vec<usize> = (0..frames).filter(|_| rng.random_bool(keep)).collect();
        let mut samples: Vec<TrackSample> = observed
            .into_iter()
            .map(|index| TrackSample {
                index,
                state: ObjectState {
                    pose: Pose2D::new(float(rng), float(rng), angle(rng)),
                    length,
                    width,
                    category: category.clone(),
                    track_id: id.clone(),
                },
            })
            .collect();
        if samples.is_empty() {
            samples.push(TrackSample {
                index: 0,
                state: ObjectState { pose: Pose2D::new(0.0, 0.0, 0.0), length, width, category, track_id: id.clone() },
            });
        }
        objects.insert(id, samples);
    }
    TrajectoryLog {
        log_id: format!("log-{}", uuid(rng)),
        rate_hz,
        ego_length: rng.random_range(3.0..6.0),
        ego_width: rng.random_range(1.5..2.5),
        timestamps: (0..frames).map(|i| t0 + i as f64 / rate_hz).collect(),
        ego: (0..frames).map(|_| Pose2D::new(float(rng), float(rng), angle(rng))).collect(),
        objects,
    }
}

/// Random matrices with a consistent absence mask per object.
pub fn random_tags(rng: &mut impl Rng, objects: usize, frames: usize) -> TagMatrices {
    let track_ids: Vec<String> = (0..objects).map(|_| uuid(rng)).collect();
    let seen: Vec<Vec<bool>> = (0..objects)
        .map(|_| {
            let p = rng.random_range(0.2..1.0);
            (0..frames).map(|_| rng.random_bool(p)).collect()
        })
        .collect();
    fn grid<T>(seen: &[Vec<bool>], mut f: impl FnMut() -> T) -> Vec<Vec<Option<T>>> {
        seen.iter().map(|row| row.iter().map(|&s| if s { Some(f()) } else { None }).collect()).collect()
    }
    let category = ObjectCategory::new(*CATEGORIES.choose(rng).unwrap());
    let mut longitude = vec![(0..frames).map(|_| Some(pick::<LongitudeTag>(rng))).collect::<Vec<_>>()];
    longitude.extend(grid(&seen, || pick::<LongitudeTag>(rng)));
    let mut latitude = vec![(0..frames).map(|_| Some(pick::<LatitudeTag>(rng))).collect::<Vec<_>>()];
    latitude.extend(grid(&seen, || pick::<LatitudeTag>(rng)));
    TagMatrices {
        log_id: format!("log-{}", uuid(rng)),
        rate_hz: 10.0,
        frames,
        object_category: grid(&seen, || category.clone()),
        longitude,
        latitude,
        heading: grid(&seen, || pick::<HeadingTag>(rng)),
        position: grid(&seen, || pick::<PositionTag>(rng)),
        collision: grid(&seen, || pick::<RiskLevel>(rng)),
        distance: grid(&seen, || pick::<DistanceTag>(rng)),
        traj_overlap: grid(&seen, || pick::<RiskLevel>(rng)),
        track_ids,
    }
}

/// A tuple sequence with runs of random length, so encoding has work to do.
pub fn random_tuples(rng: &mut impl Rng, max_len: usize) -> Vec<PairTags> {
    let len = rng.random_range(1..=max_len);
    let mut out = Vec::with_capacity(len);
    let mut cur = random_pair_tags(rng);
    while out.len() < len {
        if rng.random_bool(0.15) {
            // change one or several fields
            let next = random_pair_tags(rng);
            if rng.random_bool(0.5) { cur.collision = next.collision } else { cur = next }
        }
        out.push(cur);
    }
    out
}

pub fn random_pair_tags(rng: &mut impl Rng) -> PairTags {
    PairTags {
        ego_longitude: pick(rng),
        ego_latitude: pick(rng),
        guest_longitude: pick(rng),
        guest_latitude: pick(rng),
        heading: pick(rng),
        position: pick(rng),
        collision: pick(rng),
        distance: pick(rng),
        traj_overlap: pick(rng),
    }
}

pub fn unit_vector(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

pub fn random_text(rng: &mut impl Rng) -> String {
    const WORDS: [&str; 8] = ["ego", "guest", "brakes", "\"quoted\"", "ünïcödé", "line\nbreak", "tab\there", "→"];
    (0..rng.random_range(1..12)).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

pub fn random_record(rng: &mut impl Rng, dim: usize) -> ScenarioRecord {
    ScenarioRecord {
        log_id: format!("log-{}", uuid(rng)),
        guest_id: uuid(rng),
        raw_description: random_text(rng),
        rephrased_description: random_text(rng),
        category: *ScenarioCategory::ALL.choose(rng).unwrap(),
        explanation: random_text(rng),
        embedding: unit_vector(rng, dim),
        provenance: Provenance { llm_model: "mock-rules-v1".into(), embed_model: "mock-hash-256".into() },
    }
}

pub fn random_report(rng: &mut impl Rng) -> EvalReport {
    let mut metrics = || Metrics::from_counts(rng.random_range(0..50), rng.random_range(0..50), rng.random_range(0..50));
    let per_category = ScenarioCategory::ALL.iter().map(|c| (*c, metrics())).collect();
    let overall = metrics();
    let koi = rng.random_bool(0.5).then(|| KoiScores { precision: rng.random(), recall: rng.random() });
    let retrieval = (0..rng.random_range(0..4))
        .map(|i| (format!("query-{i}"), RetrievalScores { p_at_10: rng.random(), r_at_50: rng.random() }))
        .collect();
    EvalReport { per_category, overall, koi, retrieval }
}
