//! Prompt construction, provider calls with retry, and verdict parsing.
//!
//! Providers are reached through two small traits, [`ChatProvider`] and
//! [`EmbeddingProvider`]. [`Gateway`] wraps a pair of them, applies the retry
//! policy, pins the sampling parameters and normalizes embeddings.

mod mock;
mod remote;

use std::sync::Arc;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::model::{ScenarioCategory, TagName};

pub use mock::{mock_verdict, MockChat, MockEmbedder, MOCK_EMBED_DIM};
pub use remote::{RemoteChat, RemoteEmbedder};

/// The three keys every verdict must carry.
pub const VERDICT_KEYS: [&str; 3] = ["scenario_description", "scenario_category", "explanation"];

/// Marker line introducing the description block at the end of a prompt.
pub const DESCRIPTION_MARKER: &str = "Scenario description:";

const ROLE_INSTRUCTION: &str = "You analyse recorded drives of an automated vehicle (the ego vehicle). \
You receive a timed, tag-based account of how the ego vehicle and one other road user (the guest) \
moved relative to each other around a moment when the ego vehicle slowed down or stood still. \
Decide what kind of interaction this is.";

#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error("description must not be empty")]
    EmptyDescription,
    #[error("text to embed must not be empty")]
    EmptyText,
    #[error("prompt needs at least one category")]
    NoCategories,
    #[error("provider unreachable after {attempts} attempts: {message}")]
    Transport { attempts: u32, message: String },
    #[error("provider refused: {0}")]
    Refusal(String),
    #[error("provider error: {0}")]
    Provider(String),
    #[error("unparseable verdict ({message}): {raw}")]
    Parse { raw: String, message: String },
    #[error("verdict is missing or has a non-string {0}")]
    Schema(&'static str),
    #[error("provider returned a zero or non-finite embedding")]
    DegenerateEmbedding,
    #[error("embedding has dimension {got}, expected {expected}")]
    Dimension { expected: usize, got: usize },
}

/// Failure reported by a provider for one attempt.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProviderError {
    /// Network or server-side trouble; worth retrying.
    #[error("transport: {0}")]
    Transport(String),
    /// The model declined to answer.
    #[error("refusal: {0}")]
    Refusal(String),
    /// Anything a retry will not fix.
    #[error("{0}")]
    Fatal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    pub temperature: f64,
    pub top_p: f64,
    pub top_k: u32,
}

impl SamplingParams {
    /// Greedy decoding, the only setting used for classification.
    pub const GREEDY: SamplingParams = SamplingParams { temperature: 0.0, top_p: 1.0, top_k: 1 };
}

impl Default for SamplingParams {
    fn default() -> Self {
        Self::GREEDY
    }
}

pub trait ChatProvider: Send + Sync {
    fn model(&self) -> &str;
    fn complete(&self, prompt: &str, params: &SamplingParams) -> Result<String, ProviderError>;
}

pub trait EmbeddingProvider: Send + Sync {
    fn model(&self) -> &str;
    /// Raw, not necessarily normalized, embedding.
    fn embed_raw(&self, text: &str) -> Result<Vec<f64>, ProviderError>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { max_attempts: 3, base_delay: Duration::from_millis(250) }
    }
}

impl RetryPolicy {
    /// Runs `op` until it succeeds, fails non-transiently or attempts run out.
    /// The delay doubles after every transient failure.
    pub fn run<T>(&self, what: &str, mut op: impl FnMut() -> Result<T, ProviderError>) -> Result<T, GatewayError> {
        let mut delay = self.base_delay;
        let mut attempt = 0;
        loop {
            attempt += 1;
            match op() {
                Ok(v) => {
                    tracing::debug!(what, attempt, "provider call succeeded");
                    return Ok(v);
                }
                Err(ProviderError::Transport(message)) if attempt < self.max_attempts => {
                    tracing::warn!(what, attempt, %message, "provider call failed, retrying");
                    thread::sleep(delay);
                    delay *= 2;
                }
                Err(ProviderError::Transport(message)) => {
                    tracing::warn!(what, attempt, %message, "provider call failed, giving up");
                    return Err(GatewayError::Transport { attempts: attempt, message });
                }
                Err(ProviderError::Refusal(m)) => return Err(GatewayError::Refusal(m)),
                Err(ProviderError::Fatal(m)) => return Err(GatewayError::Provider(m)),
            }
        }
    }
}

/// One-line definition shown to the model for each category.
pub fn category_definition(c: ScenarioCategory) -> &'static str {
    match c {
        ScenarioCategory::CutIn => "another road user moves sideways into the ego lane just ahead of the ego vehicle",
        ScenarioCategory::LeftOppo => "the ego vehicle turns left and has to let oncoming traffic pass first",
        ScenarioCategory::RightPed => "the ego vehicle turns right and gives way to a person on foot",
        ScenarioCategory::ObjCross => "a vehicle or cyclist crosses the path of the ego vehicle",
        ScenarioCategory::PedCross => "a person on foot crosses in front of the ego vehicle while it drives straight",
        ScenarioCategory::LeadBrake => "the vehicle directly ahead slows down sharply",
        ScenarioCategory::ApproachStop => "the ego vehicle closes in on a vehicle that is stopped ahead",
        ScenarioCategory::NotRelevant => "the guest had nothing to do with the ego vehicle slowing down",
        ScenarioCategory::UnknownButRelevant => "the guest caused the slowdown but no listed category fits",
    }
}

/// The structured parts of a classification prompt.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptSpec {
    pub role_instruction: String,
    pub known_categories: Vec<(ScenarioCategory, String)>,
    pub output_schema: [&'static str; 3],
    pub scenario_description: String,
}

impl PromptSpec {
    pub fn new(description: &str, categories: &[ScenarioCategory]) -> Result<Self, GatewayError> {
        if description.trim().is_empty() {
            return Err(GatewayError::EmptyDescription);
        }
        if categories.is_empty() {
            return Err(GatewayError::NoCategories);
        }
        Ok(Self {
            role_instruction: ROLE_INSTRUCTION.to_string(),
            known_categories: categories.iter().map(|&c| (c, category_definition(c).to_string())).collect(),
            output_schema: VERDICT_KEYS,
            scenario_description: description.to_string(),
        })
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.role_instruction);
        out.push_str("\n\nKnown scenario categories:\n");
        for (c, def) in &self.known_categories {
            out.push_str(&format!("- {}: {}\n", c.as_str(), def));
        }
        let fallback = |c: ScenarioCategory| {
            if self.known_categories.iter().any(|(k, _)| *k == c) {
                String::new()
            } else {
                format!("Use {} when {}.\n", c.as_str(), category_definition(c))
            }
        };
        out.push_str(&fallback(ScenarioCategory::NotRelevant));
        out.push_str(&fallback(ScenarioCategory::UnknownButRelevant));
        out.push_str(&format!(
            "\nReply with a single JSON object and nothing else. Its keys are exactly \"{}\" (a short \
plain-language restatement of the scenario), \"{}\" (one category name from above) and \"{}\" \
(one or two sentences of reasoning).\n\n",
            self.output_schema[0], self.output_schema[1], self.output_schema[2]
        ));
        out.push_str(DESCRIPTION_MARKER);
        out.push('\n');
        out.push_str(&self.scenario_description);
        if !self.scenario_description.ends_with('\n') {
            out.push('\n');
        }
        out
    }
}

/// Renders the full prompt text for `description`.
pub fn build_prompt(description: &str, categories: &[ScenarioCategory]) -> Result<String, GatewayError> {
    Ok(PromptSpec::new(description, categories)?.render())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LlmVerdict {
    pub rephrased_description: String,
    pub category: ScenarioCategory,
    pub explanation: String,
}

/// A parsed verdict plus any validation warning raised while mapping it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedVerdict {
    pub verdict: LlmVerdict,
    pub warning: Option<String>,
}

fn strip_fences(raw: &str) -> &str {
    let t = raw.trim();
    let Some(rest) = t.strip_prefix("```") else {
        return t;
    };
    let body = match rest.find('\n') {
        Some(i) => &rest[i + 1..],
        None => rest,
    };
    body.trim_end().strip_suffix("```").unwrap_or(body).trim()
}

pub fn parse_verdict(raw: &str) -> Result<ParsedVerdict, GatewayError> {
    let body = strip_fences(raw);
    let value: Value = serde_json::from_str(body)
        .map_err(|e| GatewayError::Parse { raw: raw.to_string(), message: e.to_string() })?;
    let obj = value
        .as_object()
        .ok_or_else(|| GatewayError::Parse { raw: raw.to_string(), message: "not a JSON object".into() })?;
    let field = |key: &'static str| obj.get(key).and_then(Value::as_str).ok_or(GatewayError::Schema(key));
    let rephrased = field(VERDICT_KEYS[0])?;
    let category_raw = field(VERDICT_KEYS[1])?;
    let explanation = field(VERDICT_KEYS[2])?;
    if rephrased.trim().is_empty() {
        return Err(GatewayError::Schema(VERDICT_KEYS[0]));
    }
    let normalized = category_raw.trim().to_ascii_lowercase();
    let (category, warning) = match ScenarioCategory::parse_name(&normalized) {
        Ok(c) => (c, None),
        Err(_) => (
            ScenarioCategory::UnknownButRelevant,
            Some(format!("unknown category {category_raw:?} mapped to unknown_but_relevant")),
        ),
    };
    Ok(ParsedVerdict {
        verdict: LlmVerdict {
            rephrased_description: rephrased.to_string(),
            category,
            explanation: explanation.to_string(),
        },
        warning,
    })
}

/// Canonical JSON text of a verdict, readable by [`parse_verdict`].
pub fn render_verdict(v: &LlmVerdict) -> String {
    let mut obj = serde_json::Map::new();
    obj.insert(VERDICT_KEYS[0].into(), Value::String(v.rephrased_description.clone()));
    obj.insert(VERDICT_KEYS[1].into(), Value::String(v.category.as_str().into()));
    obj.insert(VERDICT_KEYS[2].into(), Value::String(v.explanation.clone()));
    Value::Object(obj).to_string()
}

/// Scales `v` to unit length.
pub fn normalize(v: Vec<f64>) -> Result<Vec<f64>, GatewayError> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(GatewayError::DegenerateEmbedding);
    }
    Ok(v.into_iter().map(|x| x / norm).collect())
}

#[derive(Clone)]
pub struct Gateway {
    chat: Arc<dyn ChatProvider>,
    embedder: Arc<dyn EmbeddingProvider>,
    retry: RetryPolicy,
    categories: Vec<ScenarioCategory>,
}

impl Gateway {
    pub fn new(chat: Arc<dyn ChatProvider>, embedder: Arc<dyn EmbeddingProvider>) -> Self {
        Self { chat, embedder, retry: RetryPolicy::default(), categories: ScenarioCategory::PROMPT_CATEGORIES.to_vec() }
    }

    /// Deterministic offline providers.
    pub fn mock() -> Self {
        Self::new(Arc::new(MockChat), Arc::new(MockEmbedder::default()))
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_categories(mut self, categories: Vec<ScenarioCategory>) -> Self {
        self.categories = categories;
        self
    }

    pub fn llm_model(&self) -> &str {
        self.chat.model()
    }

    pub fn embed_model(&self) -> &str {
        self.embedder.model()
    }

    /// Sends `prompt` with greedy sampling and returns the raw reply.
    pub fn classify(&self, prompt: &str) -> Result<String, GatewayError> {
        self.retry.run("chat", || self.chat.complete(prompt, &SamplingParams::GREEDY))
    }

    pub fn classify_description(&self, description: &str) -> Result<ParsedVerdict, GatewayError> {
        let prompt = build_prompt(description, &self.categories)?;
        parse_verdict(&self.classify(&prompt)?)
    }

    /// Unit-norm embedding of `text`.
    pub fn embed(&self, text: &str) -> Result<Vec<f64>, GatewayError> {
        if text.trim().is_empty() {
            return Err(GatewayError::EmptyText);
        }
        normalize(self.retry.run("embed", || self.embedder.embed_raw(text))?)
    }
}
