//! Offline, deterministic stand-ins for the chat and embedding providers.
//!
//! [`MockChat`] reads the description block of a prompt back into a sequence of
//! tag states and applies the first matching rule:
//!
//! 1. ego turns right and the guest is a pedestrian: `right_ped`
//! 2. ego turns left and the guest is ever oncoming (heading OPPOSITE): `left_oppo`
//! 3. ego never turns; the guest is FRONT_LEFT or FRONT_RIGHT and later FRONT
//!    with heading SAME: `cut_in`
//! 4. ego never turns; the guest heads LEFT or RIGHT while in a front sector:
//!    `obj_cross`, or `unknown_but_relevant` for a pedestrian
//! 5. the guest ever reverses: `unknown_but_relevant`
//! 6. the guest is FRONT, heading SAME and standing still: `unknown_but_relevant`
//! 7. the guest is FRONT, heading SAME and decelerating: `unknown_but_relevant`
//! 8. otherwise `not_relevant`
//!
//! [`MockEmbedder`] hashes lower-cased word tokens into a fixed number of
//! signed buckets.

use sha2::{Digest, Sha256};

use super::{render_verdict, ChatProvider, EmbeddingProvider, LlmVerdict, ProviderError, SamplingParams, DESCRIPTION_MARKER};
use crate::describer::FIELD_LABELS;
use crate::model::ScenarioCategory;

pub const MOCK_EMBED_DIM: usize = 256;

const EGO_LAT: usize = 1;
const GUEST_LON: usize = 2;
const HEADING: usize = 4;
const POSITION: usize = 5;

/// Tag states recovered from a rendered description.
struct Timeline {
    guest_category: String,
    guest_label: String,
    duration: String,
    states: Vec<[String; 9]>,
}

fn field_index(subject: &str, kind: &str) -> Option<usize> {
    FIELD_LABELS.iter().position(|&(s, k)| s == subject && k == kind)
}

fn parse_timeline(description: &str) -> Option<Timeline> {
    let mut lines = description.lines();
    let overview = lines.next()?.strip_prefix("Overview: the ego vehicle and ")?;
    let (label, rest) = overview.split_once(" interact for ")?;
    let duration = rest.strip_suffix('.')?.to_string();
    let guest_category = label.split_whitespace().next()?.to_string();

    let mut current: [String; 9] = Default::default();
    let mut states = Vec::new();
    let mut last_start = None;
    for line in lines {
        if let Some(item) = line.strip_prefix("- ") {
            let (lhs, value) = item.split_once(": ")?;
            let (subject, kind) = lhs.split_once(' ')?;
            current[field_index(subject, kind)?] = value.to_string();
        } else if let Some(change) = line.strip_prefix("At ") {
            let (when, what) = change.split_once(": ")?;
            let (subject, rest) = what.split_once(' ')?;
            let (kind, rest) = rest.split_once(" changes from ")?;
            let (_, to) = rest.split_once(" to ")?;
            if last_start.as_deref() != Some(when) {
                states.push(current.clone());
                last_start = Some(when.to_string());
            }
            current[field_index(subject, kind)?] = to.strip_suffix('.')?.to_string();
        }
    }
    states.push(current);
    Some(Timeline { guest_category, guest_label: label.to_string(), duration, states })
}

fn is_front(pos: &str) -> bool {
    matches!(pos, "FRONT" | "FRONT_LEFT" | "FRONT_RIGHT")
}

fn classify_timeline(tl: &Timeline) -> (ScenarioCategory, &'static str, &'static str) {
    use ScenarioCategory::*;
    let any = |f: &dyn Fn(&[String; 9]) -> bool| tl.states.iter().any(f);
    let pedestrian = tl.guest_category.eq_ignore_ascii_case("PEDESTRIAN");
    let turning_right = any(&|s| s[EGO_LAT] == "TURNING_RIGHT");
    let turning_left = any(&|s| s[EGO_LAT] == "TURNING_LEFT");
    let turning = turning_left || turning_right;

    if turning_right && pedestrian {
        return (RightPed, "turns right and yields to a pedestrian", "ego turns right while a pedestrian is involved");
    }
    if turning_left && any(&|s| s[HEADING] == "OPPOSITE") {
        return (LeftOppo, "turns left and waits for oncoming traffic", "ego turns left while the guest approaches head-on");
    }
    if !turning {
        let diagonal = tl.states.iter().position(|s| matches!(s[POSITION].as_str(), "FRONT_LEFT" | "FRONT_RIGHT"));
        if let Some(i) = diagonal {
            if tl.states[i..].iter().any(|s| s[POSITION] == "FRONT" && s[HEADING] == "SAME") {
                return (CutIn, "slows for a road user cutting into its lane", "the guest moves from a diagonal front sector to straight ahead in the same direction");
            }
        }
        if any(&|s| matches!(s[HEADING].as_str(), "LEFT" | "RIGHT") && is_front(&s[POSITION])) {
            return if pedestrian {
                (UnknownButRelevant, "slows for a pedestrian crossing ahead", "a pedestrian crosses ahead while ego drives straight")
            } else {
                (ObjCross, "slows for a road user crossing its path", "the guest moves across the ego path ahead")
            };
        }
    }
    if any(&|s| s[GUEST_LON] == "REVERSING") {
        return (UnknownButRelevant, "slows for a road user reversing towards it", "the guest reverses");
    }
    let lead = |s: &[String; 9]| s[POSITION] == "FRONT" && s[HEADING] == "SAME";
    if any(&|s| lead(s) && s[GUEST_LON] == "STANDING_STILL") {
        return (UnknownButRelevant, "approaches a stopped vehicle ahead", "the guest stands still straight ahead");
    }
    if any(&|s| lead(s) && s[GUEST_LON] == "DECELERATING") {
        return (UnknownButRelevant, "slows behind a braking lead vehicle", "the guest ahead decelerates");
    }
    (NotRelevant, "slows down without a clear link to this road user", "no rule matched")
}

/// Verdict the mock would return for `description`.
pub fn mock_verdict(description: &str) -> LlmVerdict {
    match parse_timeline(description) {
        Some(tl) => {
            let (category, phrase, reason) = classify_timeline(&tl);
            LlmVerdict {
                rephrased_description: format!("The ego vehicle {phrase} ({}, {}).", tl.guest_label, tl.duration),
                category,
                explanation: format!("Rule-based mock: {reason}."),
            }
        }
        None => LlmVerdict {
            rephrased_description: "Unstructured scenario description.".into(),
            category: ScenarioCategory::NotRelevant,
            explanation: "Rule-based mock: description not in the expected structure.".into(),
        },
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MockChat;

impl ChatProvider for MockChat {
    fn model(&self) -> &str {
        "mock-rules-v1"
    }

    fn complete(&self, prompt: &str, _params: &SamplingParams) -> Result<String, ProviderError> {
        let description = prompt
            .split_once(&format!("{DESCRIPTION_MARKER}\n"))
            .map(|(_, d)| d)
            .unwrap_or(prompt);
        Ok(render_verdict(&mock_verdict(description)))
    }
}

#[derive(Debug, Clone)]
pub struct MockEmbedder {
    pub dim: usize,
    pub seed: u64,
}

impl Default for MockEmbedder {
    fn default() -> Self {
        Self { dim: MOCK_EMBED_DIM, seed: 0 }
    }
}

impl EmbeddingProvider for MockEmbedder {
    fn model(&self) -> &str {
        "mock-hash-256"
    }

    fn embed_raw(&self, text: &str) -> Result<Vec<f64>, ProviderError> {
        let mut v = vec![0.0; self.dim];
        for token in text.split(|c: char| !(c.is_alphanumeric() || c == '_')).filter(|t| !t.is_empty()) {
            let mut h = Sha256::new();
            h.update(self.seed.to_le_bytes());
            h.update(token.to_lowercase().as_bytes());
            let d = h.finalize();
            let bucket = u64::from_le_bytes(d[..8].try_into().expect("8 bytes")) % self.dim as u64;
            v[bucket as usize] += if d[8] & 1 == 0 { 1.0 } else { -1.0 };
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "Overview: the ego vehicle and REGULAR_VEHICLE abcd1234 interact for 5.0 s.\nInitial state for 1.0 s:\n";

    fn initial(ego_lat: &str, guest_lon: &str, heading: &str, position: &str) -> String {
        let values = ["DECELERATING", ego_lat, guest_lon, "FACING_FORWARD", heading, position, "NO", "MEDIUM", "NO"];
        FIELD_LABELS
            .iter()
            .zip(values)
            .map(|((s, k), v)| format!("- {s} {k}: {v}\n"))
            .collect()
    }

    #[test]
    fn cut_in_rule() {
        let d = format!(
            "{HEADER}{}At 1.0 s for 4.0 s: guest PositionTag changes from FRONT_LEFT to FRONT.\n",
            initial("FACING_FORWARD", "CRUISING", "SAME", "FRONT_LEFT")
        );
        assert_eq!(mock_verdict(&d).category, ScenarioCategory::CutIn);
    }

    #[test]
    fn right_turn_with_pedestrian() {
        let d = format!(
            "Overview: the ego vehicle and PEDESTRIAN p1 interact for 5.0 s.\nInitial state for 5.0 s:\n{}",
            initial("TURNING_RIGHT", "CRUISING", "LEFT", "FRONT_RIGHT")
        );
        assert_eq!(mock_verdict(&d).category, ScenarioCategory::RightPed);
    }

    #[test]
    fn fallback_is_not_relevant() {
        let d = format!("{HEADER}{}", initial("FACING_FORWARD", "CRUISING", "SAME", "LEFT"));
        assert_eq!(mock_verdict(&d).category, ScenarioCategory::NotRelevant);
        assert_eq!(mock_verdict("free text").category, ScenarioCategory::NotRelevant);
    }

    #[test]
    fn changes_at_one_time_form_one_state() {
        let d = format!(
            "{HEADER}{}At 1.0 s for 4.0 s: guest HeadingTag changes from LEFT to SAME.\nAt 1.0 s for 4.0 s: guest PositionTag changes from FRONT_RIGHT to FRONT.\n",
            initial("FACING_FORWARD", "CRUISING", "LEFT", "FRONT_RIGHT")
        );
        let tl = parse_timeline(&d).unwrap();
        assert_eq!(tl.states.len(), 2);
        assert_eq!(tl.states[1][HEADING], "SAME");
        assert_eq!(tl.states[1][POSITION], "FRONT");
    }

    #[test]
    fn embedder_is_deterministic_and_similarity_aware() {
        let e = MockEmbedder::default();
        let a = super::super::normalize(e.embed_raw("lead vehicle brakes hard").unwrap()).unwrap();
        let b = super::super::normalize(e.embed_raw("lead vehicle brakes").unwrap()).unwrap();
        let c = super::super::normalize(e.embed_raw("pedestrian crossing at night").unwrap()).unwrap();
        let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
        assert!(dot(&a, &b) > dot(&a, &c));
        assert_eq!(e.embed_raw("Same").unwrap(), e.embed_raw("same").unwrap());
    }
}
