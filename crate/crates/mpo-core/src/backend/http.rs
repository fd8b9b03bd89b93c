//! HTTP adapters speaking a chat-completions-style wire protocol, with
//! image parts encoded as data URLs. The bearer token comes from the
//! `MPO_API_KEY` environment variable.

use base64::Engine as _;
use serde::Deserialize;
use serde_json::json;
use std::sync::Arc;
use std::time::Duration;

use super::{ChatClient, ChatRequest, ChatTransport, TransportError};
use crate::error::{Error, Result};
use crate::prompt::{AssetContent, AssetRef, Modality};
use crate::store::AssetStore;

pub const API_KEY_ENV: &str = "MPO_API_KEY";

pub struct HttpTransport {
    url: String,
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    /// `endpoint` is the service base; requests go to
    /// `<endpoint>/chat/completions`.
    pub fn new(endpoint: &str, timeout_secs: u64) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(timeout_secs))
            .build()
            .map_err(Error::backend)?;
        Ok(HttpTransport {
            url: format!("{}/chat/completions", endpoint.trim_end_matches('/')),
            client,
        })
    }
}

#[derive(Deserialize)]
struct ChatCompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    content: serde_json::Value,
}

fn content_to_text(content: &serde_json::Value) -> String {
    match content {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Array(parts) => parts
            .iter()
            .filter_map(|p| p.get("text").and_then(|t| t.as_str()))
            .collect::<Vec<_>>()
            .join(""),
        _ => String::new(),
    }
}

impl ChatTransport for HttpTransport {
    fn send(&self, request: &ChatRequest) -> std::result::Result<String, TransportError> {
        let body = json!({
            "model": request.model,
            "temperature": request.temperature,
            "messages": request.messages,
        });
        let mut req = self.client.post(&self.url).json(&body);
        if let Ok(key) = std::env::var(API_KEY_ENV) {
            req = req.bearer_auth(key);
        }
        let response = req
            .send()
            .map_err(|e| TransportError::Transient(e.to_string()))?;
        let status = response.status();
        let text = response
            .text()
            .map_err(|e| TransportError::Transient(e.to_string()))?;
        if status.is_client_error() {
            return Err(TransportError::Fatal(format!("HTTP {status}: {text}")));
        }
        if !status.is_success() {
            return Err(TransportError::Transient(format!("HTTP {status}: {text}")));
        }
        let parsed: ChatCompletionResponse = serde_json::from_str(&text)
            .map_err(|e| TransportError::Transient(format!("malformed response body: {e}")))?;
        let choice = parsed
            .choices
            .first()
            .ok_or_else(|| TransportError::Transient("response has no choices".into()))?;
        Ok(content_to_text(&choice.message.content))
    }
}

/// Generation endpoint adapter: posts the condition and reference assets,
/// stores the returned bytes, and hands back a blob reference.
///
/// Wire shape: POST `<endpoint>/generations` with
/// `{model, condition, references: [data urls], options}`; the response is
/// `{"data": [{"b64_json": "..."}]}`. Generator-specific knobs (size,
/// quality tiers) pass through `options` untouched.
pub struct HttpGenerator {
    url: String,
    model: String,
    client: reqwest::blocking::Client,
    store: AssetStore,
    options: serde_json::Value,
    media_hint: String,
}

impl HttpGenerator {
    pub fn new(
        endpoint: &str,
        model: impl Into<String>,
        timeout_secs: u64,
        store: AssetStore,
        options: serde_json::Value,
        media_hint: impl Into<String>,
    ) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(timeout_secs))
            .build()
            .map_err(Error::backend)?;
        Ok(HttpGenerator {
            url: format!("{}/generations", endpoint.trim_end_matches('/')),
            model: model.into(),
            client,
            store,
            options,
            media_hint: media_hint.into(),
        })
    }

    fn reference_urls(&self, refs: &[AssetRef]) -> Result<Vec<String>> {
        refs.iter()
            .map(|asset| match &asset.content {
                AssetContent::Inline(text) => Ok(text.clone()),
                AssetContent::Blob(_) => {
                    let bytes = self.store.resolve(asset)?;
                    let mime = super::mime_for_hint(asset.media_hint.as_deref());
                    Ok(format!(
                        "data:{mime};base64,{}",
                        base64::engine::general_purpose::STANDARD.encode(&bytes)
                    ))
                }
            })
            .collect()
    }
}

#[derive(Deserialize)]
struct GenerationResponse {
    data: Vec<GenerationItem>,
}

#[derive(Deserialize)]
struct GenerationItem {
    b64_json: String,
}

impl super::AssetGenerator for HttpGenerator {
    fn generate(
        &self,
        condition: &str,
        refs: &[AssetRef],
        modality: Modality,
    ) -> Result<AssetRef> {
        if modality == Modality::None {
            return Err(Error::Config(
                "the HTTP generator needs a concrete modality".into(),
            ));
        }
        let body = json!({
            "model": self.model,
            "condition": condition,
            "references": self.reference_urls(refs)?,
            "options": self.options,
        });
        let mut req = self.client.post(&self.url).json(&body);
        if let Ok(key) = std::env::var(API_KEY_ENV) {
            req = req.bearer_auth(key);
        }
        let response = req.send().map_err(Error::backend)?;
        let status = response.status();
        let text = response.text().map_err(Error::backend)?;
        if status.is_client_error() {
            return Err(Error::Config(format!("HTTP {status}: {text}")));
        }
        if !status.is_success() {
            return Err(Error::Backend(format!("HTTP {status}: {text}")));
        }
        let parsed: GenerationResponse =
            serde_json::from_str(&text).map_err(Error::backend)?;
        let item = parsed
            .data
            .first()
            .ok_or_else(|| Error::Backend("generation response has no data".into()))?;
        let bytes = base64::engine::general_purpose::STANDARD
            .decode(&item.b64_json)
            .map_err(Error::backend)?;
        self.store
            .store(&bytes, modality, Some(self.media_hint.clone()))
    }
}

/// Shorthand for an HTTP-backed chat client.
pub fn http_chat_client(
    cfg: super::BackendConfig,
    store: Option<AssetStore>,
) -> Result<ChatClient> {
    let transport = Arc::new(HttpTransport::new(&cfg.endpoint, cfg.timeout_secs)?);
    ChatClient::new(cfg, transport, store)
}
