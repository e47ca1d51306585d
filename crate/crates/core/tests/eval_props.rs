use std::collections::HashSet;

use brakescope_core::eval::{score_predictions, score_retrieval};
use brakescope_core::model::{Annotation, ScenarioCategory, TagName};
use proptest::prelude::*;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn annotations(rng: &mut ChaCha8Rng, n: usize) -> Vec<Annotation> {
    (0..n)
        .map(|i| Annotation {
            log_id: format!("log{}", i % 5),
            guest_id: format!("g{i}"),
            scenario_category: *ScenarioCategory::ALL.choose(rng).unwrap(),
        })
        .collect()
}

proptest! {
    #[test]
    fn classification_scores_ignore_order(seed in any::<u64>(), n in 1usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let truth = annotations(&mut rng, n);
        let mut predictions = Vec::new();
        for a in &truth {
            if rng.random_bool(0.8) {
                let c = *ScenarioCategory::ALL.choose(&mut rng).unwrap();
                predictions.push(Annotation { scenario_category: c, ..a.clone() });
            }
        }
        let a = score_predictions(&predictions, &truth).unwrap();
        predictions.shuffle(&mut rng);
        let mut shuffled_truth = truth.clone();
        shuffled_truth.shuffle(&mut rng);
        let b = score_predictions(&predictions, &shuffled_truth).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn recall_grows_with_k(seed in any::<u64>(), n in 1usize..120) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let keys: Vec<(String, String)> = (0..n).map(|i| ("l".to_string(), format!("g{i}"))).collect();
        let mut relevant: HashSet<(String, String)> = keys.iter().filter(|_| rng.random_bool(0.3)).cloned().collect();
        relevant.insert(keys[0].clone());
        let ranked: Vec<(&str, &str)> = keys.iter().map(|(l, g)| (l.as_str(), g.as_str())).collect();
        let mut last = 0.0;
        for k in 1..=n + 3 {
            let r = score_retrieval("q", &ranked, &relevant, k, k).unwrap().r_at_50;
            prop_assert!(r >= last && r <= 1.0);
            last = r;
        }
        prop_assert!((last - 1.0).abs() < 1e-12);
    }
}
