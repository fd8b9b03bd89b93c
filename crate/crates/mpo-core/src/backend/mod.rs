//! Pluggable model backends: the answer model, the prompt optimizer, and
//! the modality-specific generator, each with an HTTP adapter, deterministic
//! mocks, and a record/replay transport for locking real-backend behavior.

mod cache;
mod fixture;
mod http;
mod mock;
mod simulated;
mod transport;

pub use cache::ResponseCache;
pub use fixture::FixtureTransport;
pub use http::{HttpGenerator, HttpTransport};
pub use mock::{
    wrong_answer, EchoChatModel, FaultInjectionTransport, MockChatModel, MockGenerator,
    OptimizerMoleculeGenerator, RuleAnswerModel,
};
pub use simulated::{SimAnswerConfig, SimAnswerModel};
pub use transport::{ChatTransport, RateLimiter, TransportError};

use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::prompt::{AssetContent, AssetRef, Modality, MultimodalPrompt, PromptNode};
use crate::store::AssetStore;
use crate::task::TaskExample;

/// Transport-level settings for one backend role.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    /// Requests-per-minute ceiling; absent means unlimited.
    #[serde(default)]
    pub requests_per_minute: Option<u32>,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    #[serde(default = "default_backoff_base_ms")]
    pub backoff_base_ms: u64,
}

fn default_max_retries() -> u32 {
    2
}
fn default_timeout_secs() -> u64 {
    120
}
fn default_backoff_base_ms() -> u64 {
    1000
}

impl BackendConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>, temperature: f64) -> Self {
        BackendConfig {
            endpoint: endpoint.into(),
            model: model.into(),
            temperature,
            max_retries: default_max_retries(),
            timeout_secs: default_timeout_secs(),
            requests_per_minute: None,
            cache_dir: None,
            backoff_base_ms: default_backoff_base_ms(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(Error::InvalidConfig(format!(
                "temperature must lie in [0, 2], got {}",
                self.temperature
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

/// One content part of a chat message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MessagePart {
    Text(String),
    /// Reference into the asset store; resolved to a data URL on the wire.
    Blob(AssetRef),
    /// Inline payload (e.g. a SMILES string) with a media hint.
    Inline { data: String, media_hint: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub parts: Vec<MessagePart>,
}

impl ChatMessage {
    pub fn user_text(text: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::User,
            parts: vec![MessagePart::Text(text.into())],
        }
    }

    pub fn user_parts(parts: Vec<MessagePart>) -> Self {
        ChatMessage {
            role: Role::User,
            parts,
        }
    }

    /// Concatenated text parts (what text-only mocks see).
    pub fn text(&self) -> String {
        let mut out = String::new();
        for part in &self.parts {
            match part {
                MessagePart::Text(t) => out.push_str(t),
                MessagePart::Inline { data, .. } => out.push_str(data),
                MessagePart::Blob(_) => {}
            }
        }
        out
    }
}

/// Fully materialized request as sent on the wire; also the unit that gets
/// hashed for caches and fixtures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub temperature: f64,
    pub messages: Vec<WireMessage>,
}

impl ChatRequest {
    pub fn digest(&self) -> String {
        let body = serde_json::to_vec(self).expect("chat requests serialize");
        crate::util::digest_hex(&[&body])
    }

    /// Concatenated text across all messages.
    pub fn text(&self) -> String {
        let mut out = String::new();
        for msg in &self.messages {
            for part in &msg.content {
                if let WirePart::Text { text } = part {
                    out.push_str(text);
                    out.push('\n');
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireMessage {
    pub role: String,
    pub content: Vec<WirePart>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WirePart {
    Text { text: String },
    ImageUrl { image_url: ImageUrlBody },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageUrlBody {
    pub url: String,
}

fn mime_for_hint(hint: Option<&str>) -> &'static str {
    match hint.unwrap_or("") {
        "png" => "image/png",
        "jpg" | "jpeg" => "image/jpeg",
        "gif" => "image/gif",
        "webp" => "image/webp",
        "mp4" => "video/mp4",
        "webm" => "video/webm",
        _ => "application/octet-stream",
    }
}

/// Resolves message parts against the asset store, encoding blobs as data
/// URLs.
pub fn materialize(
    messages: &[ChatMessage],
    store: Option<&AssetStore>,
) -> Result<Vec<WireMessage>> {
    use base64::Engine as _;
    let mut wire = Vec::with_capacity(messages.len());
    for msg in messages {
        let role = match msg.role {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        };
        let mut content = Vec::with_capacity(msg.parts.len());
        for part in &msg.parts {
            match part {
                MessagePart::Text(text) => content.push(WirePart::Text { text: text.clone() }),
                MessagePart::Inline { data, .. } => {
                    content.push(WirePart::Text { text: data.clone() })
                }
                MessagePart::Blob(asset) => match &asset.content {
                    AssetContent::Inline(data) => {
                        content.push(WirePart::Text { text: data.clone() })
                    }
                    AssetContent::Blob(_) => {
                        let store = store.ok_or_else(|| {
                            Error::Config("blob message parts require an asset store".into())
                        })?;
                        let bytes = store.resolve(asset)?;
                        let mime = mime_for_hint(asset.media_hint.as_deref());
                        let encoded = base64::engine::general_purpose::STANDARD.encode(&bytes);
                        content.push(WirePart::ImageUrl {
                            image_url: ImageUrlBody {
                                url: format!("data:{mime};base64,{encoded}"),
                            },
                        });
                    }
                },
            }
        }
        wire.push(WireMessage {
            role: role.to_string(),
            content,
        });
    }
    Ok(wire)
}

/// Answers one task query given a candidate prompt.
pub trait AnswerModel: Send + Sync {
    fn answer(&self, node: &PromptNode, query: &TaskExample) -> Result<String>;
}

/// The prompt-optimizer chat endpoint (feedback and operator calls).
pub trait OptimizerModel: Send + Sync {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String>;
}

/// Produces a new non-textual prompt from a textual condition and zero, one,
/// or two reference assets.
pub trait AssetGenerator: Send + Sync {
    fn generate(&self, condition: &str, refs: &[AssetRef], modality: Modality)
        -> Result<AssetRef>;
}

/// The three model roles a run needs.
#[derive(Clone)]
pub struct BackendBundle {
    pub answer: Arc<dyn AnswerModel>,
    pub optimizer: Arc<dyn OptimizerModel>,
    pub generator: Arc<dyn AssetGenerator>,
}

/// Retrying, rate-limited chat client over an arbitrary transport.
pub struct ChatClient {
    cfg: BackendConfig,
    transport: Arc<dyn ChatTransport>,
    limiter: RateLimiter,
    store: Option<AssetStore>,
}

impl ChatClient {
    pub fn new(
        cfg: BackendConfig,
        transport: Arc<dyn ChatTransport>,
        store: Option<AssetStore>,
    ) -> Result<Self> {
        cfg.validate()?;
        let limiter = RateLimiter::per_minute(cfg.requests_per_minute);
        Ok(ChatClient {
            cfg,
            transport,
            limiter,
            store,
        })
    }

    pub fn config(&self) -> &BackendConfig {
        &self.cfg
    }

    pub fn build_request(&self, messages: &[ChatMessage]) -> Result<ChatRequest> {
        Ok(ChatRequest {
            model: self.cfg.model.clone(),
            temperature: self.cfg.temperature,
            messages: materialize(messages, self.store.as_ref())?,
        })
    }

    /// Sends with bounded retries: 1 + max_retries attempts, exponential
    /// backoff (factor 2, jitter <= 10%). HTTP 4xx-style errors are not
    /// retried.
    pub fn send(&self, request: &ChatRequest) -> Result<String> {
        let attempts = 1 + self.cfg.max_retries;
        let mut last_error = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                let base = self.cfg.backoff_base_ms as f64 * 2f64.powi(attempt as i32 - 1);
                let jitter = 1.0 + 0.1 * rand::random::<f64>();
                std::thread::sleep(std::time::Duration::from_millis((base * jitter) as u64));
            }
            self.limiter.acquire();
            match self.transport.send(request) {
                Ok(response) => return Ok(response),
                Err(TransportError::Fatal(msg)) => return Err(Error::Config(msg)),
                Err(TransportError::Transient(msg)) => last_error = msg,
            }
        }
        Err(Error::Backend(format!(
            "transport failed after {attempts} attempts: {last_error}"
        )))
    }

    pub fn send_messages(&self, messages: &[ChatMessage]) -> Result<String> {
        let request = self.build_request(messages)?;
        self.send(&request)
    }
}

/// Answer model over a chat transport, with the temperature-0 response
/// cache keyed by (model id, prompt content hash, example id).
pub struct ChatAnswerModel {
    client: ChatClient,
    cache: Option<ResponseCache>,
}

impl ChatAnswerModel {
    pub fn new(client: ChatClient) -> Self {
        let cache = client
            .cfg
            .cache_dir
            .as_ref()
            .map(|dir| ResponseCache::new(dir.join(sanitize(&client.cfg.model))));
        ChatAnswerModel { client, cache }
    }

    pub fn assemble(prompt: &MultimodalPrompt, query: &TaskExample) -> Vec<ChatMessage> {
        let mut prompt_parts = vec![MessagePart::Text(prompt.text.clone())];
        prompt_parts.extend(prompt.assets.iter().cloned().map(MessagePart::Blob));
        let mut query_parts = vec![MessagePart::Text(query.query_text.clone())];
        query_parts.extend(query.query_assets.iter().cloned().map(MessagePart::Blob));
        vec![
            ChatMessage::user_parts(prompt_parts),
            ChatMessage::user_parts(query_parts),
        ]
    }
}

fn sanitize(model: &str) -> String {
    model
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

impl AnswerModel for ChatAnswerModel {
    fn answer(&self, node: &PromptNode, query: &TaskExample) -> Result<String> {
        let messages = Self::assemble(&node.prompt, query);
        // Sampling is disabled at temperature 0, so identical calls are
        // served from the cache.
        let cache_key = if self.client.cfg.temperature == 0.0 {
            self.cache.as_ref().map(|cache| {
                let key = crate::util::digest_hex(&[
                    self.client.cfg.model.as_bytes(),
                    node.prompt.content_hash().as_bytes(),
                    query.id.as_bytes(),
                ]);
                (cache, key)
            })
        } else {
            None
        };
        if let Some((cache, key)) = &cache_key {
            if let Some(hit) = cache.get(key)? {
                return Ok(hit);
            }
        }
        let response = self.client.send_messages(&messages)?;
        if let Some((cache, key)) = &cache_key {
            cache.put(key, &response)?;
        }
        Ok(response)
    }
}

/// Optimizer model over a chat transport. Never cached: optimizer calls run
/// at a sampling temperature on purpose.
pub struct ChatOptimizerModel {
    client: ChatClient,
}

impl ChatOptimizerModel {
    pub fn new(client: ChatClient) -> Self {
        ChatOptimizerModel { client }
    }
}

impl OptimizerModel for ChatOptimizerModel {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String> {
        self.client.send_messages(messages)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompt::new_root;

    #[test]
    fn request_digest_is_stable() {
        let messages = [ChatMessage::user_text("hello")];
        let cfg = BackendConfig::new("http://localhost", "m", 0.0);
        let client = ChatClient::new(cfg, Arc::new(EchoTransport), None).unwrap();
        let a = client.build_request(&messages).unwrap();
        let b = client.build_request(&messages).unwrap();
        assert_eq!(a.digest(), b.digest());
    }

    struct EchoTransport;
    impl ChatTransport for EchoTransport {
        fn send(&self, request: &ChatRequest) -> std::result::Result<String, TransportError> {
            Ok(request.text())
        }
    }

    #[test]
    fn temperature_out_of_range_is_rejected() {
        let cfg = BackendConfig::new("http://localhost", "m", 3.0);
        assert!(ChatClient::new(cfg, Arc::new(EchoTransport), None).is_err());
    }

    #[test]
    fn answer_messages_follow_prompt_then_query_shape() {
        let node = new_root("Classify the leaf.").unwrap();
        let query = TaskExample {
            id: "q1".into(),
            query_text: "What is shown?".into(),
            query_assets: vec![],
            answer: "healthy".into(),
            choices: None,
        };
        let messages = ChatAnswerModel::assemble(&node.prompt, &query);
        assert_eq!(messages.len(), 2);
        assert_eq!(messages[0].text(), "Classify the leaf.");
        assert_eq!(messages[1].text(), "What is shown?");
    }
}
