use std::path::PathBuf;

use brakescope_core::describer::{describe_pair, run_length_decode, run_length_encode};
use brakescope_core::model::{ScenarioCategory, TagName};
use brakescope_core::preprocess::{preprocess_log, SmoothingConfig};
use brakescope_core::synthkit::{generate, ScenarioSpec};
use brakescope_core::tagger::{tag_log, TaggerConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

mod fixtures;

#[test]
fn run_length_roundtrip_on_random_sequences() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x41e);
    for case in 0..10_000 {
        let tuples = fixtures::random_tuples(&mut rng, 120);
        let segments = run_length_encode(&tuples, 10.0).unwrap();
        assert_eq!(run_length_decode(&segments, 10.0), tuples, "case {case}");
        let changes = tuples.windows(2).filter(|w| w[0] != w[1]).count();
        assert_eq!(segments.len(), changes + 1, "case {case}");
        assert!(segments.windows(2).all(|w| w[0].tags != w[1].tags));
    }
}

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Noise-free description of the key guest (or the distractor when there is none).
fn description_for(category: ScenarioCategory) -> String {
    let item = generate(&ScenarioSpec::new(category, 17)).unwrap();
    let (log, _) = preprocess_log(&item.log, SmoothingConfig::default()).unwrap();
    let tags = tag_log(&log, &TaggerConfig::default()).unwrap();
    let guest = item.key_guest.unwrap_or_else(|| item.annotations[0].guest_id.clone());
    describe_pair(&tags, &guest).unwrap().description
}

/// Set `BRAKESCOPE_BLESS=1` to rewrite the golden files after an intended change.
#[test]
fn golden_description_per_category() {
    let bless = std::env::var_os("BRAKESCOPE_BLESS").is_some();
    for category in ScenarioCategory::ALL {
        let got = description_for(*category);
        let path = golden_dir().join(format!("{category}.txt"));
        if bless {
            std::fs::create_dir_all(golden_dir()).unwrap();
            std::fs::write(&path, &got).unwrap();
            continue;
        }
        let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(got, want, "golden mismatch for {category}");
    }
}
