//! HTTP providers speaking the common chat-completions / embeddings JSON shape.

use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde_json::{json, Value};

use super::{ChatProvider, EmbeddingProvider, ProviderError, SamplingParams};

const TIMEOUT: Duration = Duration::from_secs(60);

fn client() -> Result<Client, ProviderError> {
    Client::builder().timeout(TIMEOUT).build().map_err(|e| ProviderError::Fatal(e.to_string()))
}

fn env_var(name: &str) -> Result<String, ProviderError> {
    std::env::var(name).map_err(|_| ProviderError::Fatal(format!("environment variable {name} is not set")))
}

fn post(client: &Client, endpoint: &str, key: Option<&str>, body: &Value) -> Result<Value, ProviderError> {
    let mut req = client.post(endpoint).json(body);
    if let Some(k) = key {
        req = req.bearer_auth(k);
    }
    let resp = req.send().map_err(|e| ProviderError::Transport(e.to_string()))?;
    let status = resp.status();
    if status.is_server_error() || status == StatusCode::TOO_MANY_REQUESTS {
        return Err(ProviderError::Transport(format!("HTTP {status}")));
    }
    if !status.is_success() {
        let text = resp.text().unwrap_or_default();
        return Err(ProviderError::Fatal(format!("HTTP {status}: {text}")));
    }
    resp.json().map_err(|e| ProviderError::Transport(format!("bad response body: {e}")))
}

pub struct RemoteChat {
    endpoint: String,
    api_key: Option<String>,
    model: String,
    client: Client,
}

impl RemoteChat {
    pub fn new(endpoint: impl Into<String>, api_key: Option<String>, model: impl Into<String>) -> Result<Self, ProviderError> {
        Ok(Self { endpoint: endpoint.into(), api_key, model: model.into(), client: client()? })
    }

    /// Reads `LLM_ENDPOINT` and the optional `LLM_API_KEY`.
    pub fn from_env(model: impl Into<String>) -> Result<Self, ProviderError> {
        Self::new(env_var("LLM_ENDPOINT")?, std::env::var("LLM_API_KEY").ok(), model)
    }
}

impl ChatProvider for RemoteChat {
    fn model(&self) -> &str {
        &self.model
    }

    fn complete(&self, prompt: &str, params: &SamplingParams) -> Result<String, ProviderError> {
        let body = json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": params.temperature,
            "top_p": params.top_p,
            "top_k": params.top_k,
        });
        let reply = post(&self.client, &self.endpoint, self.api_key.as_deref(), &body)?;
        let message = &reply["choices"][0]["message"];
        if let Some(r) = message["refusal"].as_str() {
            return Err(ProviderError::Refusal(r.to_string()));
        }
        message["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| ProviderError::Fatal("response has no choices[0].message.content".into()))
    }
}

pub struct RemoteEmbedder {
    endpoint: String,
    api_key: Option<String>,
    model: String,
    client: Client,
}

impl RemoteEmbedder {
    pub fn new(endpoint: impl Into<String>, api_key: Option<String>, model: impl Into<String>) -> Result<Self, ProviderError> {
        Ok(Self { endpoint: endpoint.into(), api_key, model: model.into(), client: client()? })
    }

    /// Reads `EMBED_ENDPOINT` and the optional `EMBED_API_KEY`.
    pub fn from_env(model: impl Into<String>) -> Result<Self, ProviderError> {
        Self::new(env_var("EMBED_ENDPOINT")?, std::env::var("EMBED_API_KEY").ok(), model)
    }
}

impl EmbeddingProvider for RemoteEmbedder {
    fn model(&self) -> &str {
        &self.model
    }

    fn embed_raw(&self, text: &str) -> Result<Vec<f64>, ProviderError> {
        let body = json!({"model": self.model, "input": text});
        let reply = post(&self.client, &self.endpoint, self.api_key.as_deref(), &body)?;
        reply["data"][0]["embedding"]
            .as_array()
            .and_then(|a| a.iter().map(Value::as_f64).collect::<Option<Vec<_>>>())
            .ok_or_else(|| ProviderError::Fatal("response has no numeric data[0].embedding".into()))
    }
}
