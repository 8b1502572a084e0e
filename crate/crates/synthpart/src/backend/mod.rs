//! Uniform abstraction over text-generation and embedding providers.
//!
//! Three modes ship: a live HTTP backend speaking the de-facto chat-completions
//! protocol, a deterministic mock for offline experimentation, and a
//! record/replay cassette store for bit-exact reruns of recorded sessions.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::embedding::{bag_of_words_embed, Embedding, EmbeddingError};

pub mod cassette;
pub mod http;
pub mod mock;

pub use cassette::{Cassette, CassetteEntry, RecordingBackend, ReplayBackend};
pub use http::HttpBackend;
pub use mock::{MockBackend, MockPreset, ScriptRule};

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("no cassette entry matches request digest {digest}")]
    NoCassetteMatch { digest: String },
    #[error("duplicate digest {digest}: same request recorded with a different response")]
    DuplicateDigest { digest: String },
    #[error("provider error (status {status}): {body}")]
    ProviderError { status: u16, body: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("cannot embed empty text")]
    EmptyText,
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error("cassette io: {0}")]
    Io(#[from] std::io::Error),
    #[error("cassette is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cassette entry {index} carries digest {stored} but the request hashes to {computed}")]
    CorruptCassette {
        index: usize,
        stored: String,
        computed: String,
    },
    #[error("mock backend has no script for step '{0}'")]
    NoScript(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn as_str(&self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn system(content: impl Into<String>) -> Self {
        Message {
            role: Role::System,
            content: content.into(),
        }
    }
    pub fn user(content: impl Into<String>) -> Self {
        Message {
            role: Role::User,
            content: content.into(),
        }
    }
    pub fn assistant(content: impl Into<String>) -> Self {
        Message {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub messages: Vec<Message>,
    #[serde(rename = "model")]
    pub model_id: String,
    pub temperature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<i64>,
}

impl GenerationRequest {
    pub fn new(messages: Vec<Message>, model_id: impl Into<String>) -> Self {
        GenerationRequest {
            messages,
            model_id: model_id.into(),
            temperature: 1.0,
            seed: None,
        }
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.temperature = temperature;
        self
    }

    pub fn with_seed(mut self, seed: i64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// Messages begin with exactly one system message, contents are non-empty,
    /// temperature lies in [0, 2].
    pub fn validate(&self) -> Result<(), BackendError> {
        if self.messages.is_empty() {
            return Err(BackendError::InvalidRequest("messages are empty".into()));
        }
        if self.messages[0].role != Role::System {
            return Err(BackendError::InvalidRequest(
                "first message must have role system".into(),
            ));
        }
        if self.messages[1..].iter().any(|m| m.role == Role::System) {
            return Err(BackendError::InvalidRequest(
                "only the first message may have role system".into(),
            ));
        }
        if let Some(m) = self.messages.iter().find(|m| m.content.is_empty()) {
            return Err(BackendError::InvalidRequest(format!(
                "{} message has empty content",
                m.role.as_str()
            )));
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(BackendError::InvalidRequest(format!(
                "temperature {} outside [0, 2]",
                self.temperature
            )));
        }
        Ok(())
    }

    /// Canonical serialization: UTF-8 JSON with fields in fixed order and no
    /// insignificant whitespace. The seed is deliberately excluded so that a
    /// recorded session replays under any seed.
    pub fn canonical_form(&self) -> String {
        #[derive(Serialize)]
        struct CanonicalMessage<'a> {
            role: &'static str,
            content: &'a str,
        }
        #[derive(Serialize)]
        struct Canonical<'a> {
            messages: Vec<CanonicalMessage<'a>>,
            model: &'a str,
            temperature: f64,
        }
        let canonical = Canonical {
            messages: self
                .messages
                .iter()
                .map(|m| CanonicalMessage {
                    role: m.role.as_str(),
                    content: &m.content,
                })
                .collect(),
            model: &self.model_id,
            temperature: self.temperature,
        };
        serde_json::to_string(&canonical).expect("canonical form serializes")
    }

    /// Hex SHA-256 of the canonical serialization.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.canonical_form().as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FinishReason {
    Stop,
    Length,
    Refusal,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationResponse {
    pub content: String,
    pub finish_reason: FinishReason,
    pub usage_tokens: u64,
}

impl GenerationResponse {
    pub fn stop(content: impl Into<String>) -> Self {
        let content = content.into();
        let usage_tokens = content.split_whitespace().count() as u64;
        GenerationResponse {
            content,
            finish_reason: FinishReason::Stop,
            usage_tokens,
        }
    }

    /// finish_reason = stop implies non-empty content.
    pub fn validate(&self) -> Result<(), BackendError> {
        if self.finish_reason == FinishReason::Stop && self.content.is_empty() {
            return Err(BackendError::InvalidRequest(
                "finish_reason stop with empty content".into(),
            ));
        }
        Ok(())
    }
}

/// A text-generation and embedding provider. Instances are shared across
/// concurrently executing runs; each `complete` call is independent.
pub trait Backend: Send + Sync {
    fn complete(&self, request: &GenerationRequest) -> Result<GenerationResponse, BackendError>;

    /// Embed a text. The default is the deterministic bag-of-words fallback;
    /// live backends override this with the provider's embedding endpoint.
    fn embed(&self, text: &str) -> Result<Embedding, BackendError> {
        if text.is_empty() {
            return Err(BackendError::EmptyText);
        }
        Ok(bag_of_words_embed(text)?)
    }

    fn name(&self) -> &str;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request_one(content: &str) -> GenerationRequest {
        GenerationRequest::new(vec![Message::system(content)], "test-model")
    }

    #[test]
    fn empty_messages_rejected_before_dispatch() {
        let req = GenerationRequest::new(vec![], "m");
        assert!(matches!(
            req.validate(),
            Err(BackendError::InvalidRequest(_))
        ));
    }

    #[test]
    fn request_must_start_with_system() {
        let req = GenerationRequest::new(vec![Message::user("hi")], "m");
        assert!(req.validate().is_err());
        let req = GenerationRequest::new(vec![Message::system("s"), Message::system("again")], "m");
        assert!(req.validate().is_err());
    }

    #[test]
    fn temperature_range_enforced() {
        let req = request_one("s").with_temperature(2.5);
        assert!(req.validate().is_err());
        let req = request_one("s").with_temperature(0.0);
        assert!(req.validate().is_ok());
    }

    #[test]
    fn digest_is_stable_and_seed_free() {
        let a = request_one("hello").with_seed(1);
        let b = request_one("hello").with_seed(2);
        assert_eq!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 64);
        let c = request_one("hello!");
        assert_ne!(a.digest(), c.digest());
    }

    #[test]
    fn canonical_form_field_order() {
        let req = request_one("hi").with_temperature(1.0);
        assert_eq!(
            req.canonical_form(),
            r#"{"messages":[{"role":"system","content":"hi"}],"model":"test-model","temperature":1.0}"#
        );
    }

    #[test]
    fn default_embed_is_bag_of_words_and_rejects_empty() {
        let mock = crate::backend::MockBackend::standard();
        let e = mock.embed("abc abc").unwrap();
        match e {
            crate::embedding::Embedding::Sparse(m) => assert_eq!(m.get("abc"), Some(&2.0)),
            _ => panic!("fallback embedding should be sparse"),
        }
        assert!(matches!(mock.embed(""), Err(BackendError::EmptyText)));
        assert_eq!(
            mock.embed("bike lane").unwrap(),
            mock.embed("lane bike").unwrap()
        );
    }

    #[test]
    fn stop_with_empty_content_invalid() {
        let r = GenerationResponse {
            content: String::new(),
            finish_reason: FinishReason::Stop,
            usage_tokens: 0,
        };
        assert!(r.validate().is_err());
    }
}
